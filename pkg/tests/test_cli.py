import json

import numpy as np
import pytest

from leafscope.bundles import DecomposableSum, from_dict, same_bundle
from leafscope.cli import (
    EXIT_BAD_INPUT,
    EXIT_OK,
    main,
    parse_point,
)
from leafscope.curve import CurveSpec, random_point
from leafscope.linear_systems import embed


@pytest.fixture
def spec_path(tmp_path):
    path = tmp_path / "spec.json"
    assert main(["curve", "new", "--n", "5", "--tau-re", "0.1", "--tau-im", "1.2", "--out", str(path)]) == EXIT_OK
    return path


def _point_arg(p):
    return ";".join(f"{float(c.real):.17g},{float(c.imag):.17g}" for c in p)


def test_curve_new_and_show(spec_path, capsys):
    spec = CurveSpec.load(spec_path)
    assert spec.n == 5
    assert spec.tau == pytest.approx(0.1 + 1.2j)
    capsys.readouterr()
    assert main(["curve", "show", "--spec", str(spec_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Omega coset" in out
    assert "chords" in out
    assert "top" in out


def test_bad_tau_is_bad_input(tmp_path, capsys):
    code = main(["curve", "new", "--n", "4", "--tau-im", "-1", "--out", str(tmp_path / "s.json")])
    assert code == EXIT_BAD_INPUT
    assert "bad input" in capsys.readouterr().err


def test_missing_spec_is_bad_input(tmp_path):
    assert main(["curve", "show", "--spec", str(tmp_path / "none.json")]) == EXIT_BAD_INPUT


def test_classify_a_curve_point(spec_path, capsys):
    spec = CurveSpec.load(spec_path)
    x = random_point(spec.tau, np.random.default_rng(5))
    capsys.readouterr()
    code = main(["classify", "--spec", str(spec_path), "--point", _point_arg(embed(x, spec)), "--json"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["variant"] == "decomposable_sum"
    assert out["d"] == 1
    assert len(out["witness_divisor"]) == 1


def test_classify_a_sampled_leaf(spec_path, capsys):
    spec = CurveSpec.load(spec_path)
    capsys.readouterr()
    args = ["classify", "--spec", str(spec_path), "--sample-leaf", "sum:2:0.3,0.4", "--seed", "1"]
    assert main(args) == EXIT_OK
    assert "witness divisor" in capsys.readouterr().out

    assert main([*args, "--json"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["variant"] == "decomposable_sum"
    assert same_bundle(from_dict(out, spec), DecomposableSum(2, spec.point(0.3 + 0.4j)), spec, tol=1e-6)
    assert len(out["witness_divisor"]) == 2


def test_coordinates_survive_the_point_argument(spec_path):
    spec = CurveSpec.load(spec_path)
    p = embed(random_point(spec.tau, np.random.default_rng(2)), spec)
    assert np.allclose(parse_point(_point_arg(p), spec.n), p / np.linalg.norm(p))


def test_wrong_point_length_is_bad_input(spec_path):
    assert main(["classify", "--spec", str(spec_path), "--point", "1,0;0,1"]) == EXIT_BAD_INPUT


def test_corrupted_cache_is_bad_input(spec_path, tmp_path):
    cache = tmp_path / "cache.json"
    cache.write_text('{"convention_tag": "nope"}')
    args = ["classify", "--spec", str(spec_path), "--cache", str(cache), "--point", "1,0;0,0;0,0;0,0;0,1"]
    assert main(args) == EXIT_BAD_INPUT


def test_parse_point():
    p = parse_point("3,0;0,4", 2)
    assert abs(p[0]) == pytest.approx(0.6)
    assert p[1] == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        parse_point("1,2,3", 1)


@pytest.mark.slow
def test_poisson_build_then_verify(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    cache = tmp_path / "cache.json"
    report = tmp_path / "report.json"
    assert main(["curve", "new", "--n", "4", "--out", str(spec)]) == EXIT_OK
    assert main(["poisson", "build", "--spec", str(spec), "--out", str(cache)]) == EXIT_OK
    assert "null gap" in capsys.readouterr().out
    assert main(["verify", "--spec", str(spec), "--cache", str(cache), "--report", str(report)]) == EXIT_OK
    assert json.loads(report.read_text())["passed"] is True

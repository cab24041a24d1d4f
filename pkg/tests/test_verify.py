import numpy as np
import pytest

from leafscope.poisson import PoissonCache, PoissonMatrix
from leafscope.verify import (
    FAIL,
    PASS,
    SKIPPED,
    CheckResult,
    VerificationReport,
    flow_checkpoints,
    run_verification,
)


def _report(statuses, ambiguous=0, classified=100):
    checks = [CheckResult(f"c{k}", s, residual=1e-12, tolerance=1e-9, samples=3) for k, s in enumerate(statuses)]
    return VerificationReport(4, "quick", checks, ambiguous, classified)


def test_report_round_trip(tmp_path):
    report = _report([PASS, SKIPPED])
    path = tmp_path / "report.json"
    report.save(path)
    again = VerificationReport.load(path)
    assert again.to_dict() == report.to_dict()
    assert again.checks[1].status == SKIPPED


def test_pass_logic():
    assert _report([PASS, SKIPPED]).passed
    assert not _report([PASS, FAIL]).passed
    # Two percent of 100 classifications may stay ambiguous.
    assert _report([PASS], ambiguous=2).passed
    assert not _report([PASS], ambiguous=3).passed
    assert _report([PASS], ambiguous=1, classified=5).ambiguous_limit == 1


def test_unknown_status_is_rejected():
    with pytest.raises(ValueError):
        CheckResult.from_dict({"name": "x", "status": "maybe"})


def test_unknown_level_is_rejected(curve4):
    with pytest.raises(ValueError):
        run_verification(curve4, level="thorough")


@pytest.mark.slow
def test_quick_battery_passes_for_n4(curve4, cache4):
    report = run_verification(curve4, cache4, "quick")
    failed = [(c.name, c.detail) for c in report.checks if c.status == FAIL]
    assert failed == []
    assert report.passed
    names = {c.name: c.status for c in report.checks}
    assert names["top_secant_hypersurface"] == SKIPPED
    assert names["quadric_geometry"] == PASS


def test_cache_must_match_the_curve(curve4, skew4):
    cache = PoissonCache(curve4, [], PoissonMatrix(4, np.zeros((6, 10), dtype=complex)))
    with pytest.raises(ValueError, match="not this curve"):
        run_verification(skew4, cache)


@pytest.mark.parametrize("steps,expected", [(10, [2, 4, 6, 8, 10]), (3, [1, 2, 3]), (12, [2, 4, 6, 8, 10, 12]), (0, [0])])
def test_flows_are_classified_along_the_way(steps, expected):
    assert flow_checkpoints(steps) == expected


@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 5, 6])
def test_quick_battery_passes(n, request):
    spec = request.getfixturevalue(f"curve{n}")
    cache = request.getfixturevalue(f"cache{n}")
    report = run_verification(spec, cache, "quick")
    failed = [(c.name, c.detail) for c in report.checks if c.status == FAIL]
    assert failed == []
    assert report.passed
    names = {c.name: c.status for c in report.checks}
    assert names["quadric_geometry"] == SKIPPED
    assert names["round_trip"] == PASS
    assert names["flow_invariance"] == PASS

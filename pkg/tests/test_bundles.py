import pytest

from leafscope.bundles import (
    DecomposableSum,
    IndecomposableOdd,
    IndecomposableOmega,
    LeafLabel,
    closure_contains,
    end_dim,
    enumerate_leaf_families,
    from_dict,
    h0_e_minus_x,
    h0_e_minus_xy,
    leaf_dim,
    leaf_nonempty,
    parse_descriptor,
    pz_degree,
    same_bundle,
    to_dict,
)
from leafscope.curve import Divisor, random_point
from leafscope.secants import SecantCount, secant_variety_dim


def test_end_and_leaf_dimensions_n5(curve5, rng):
    x = random_point(curve5.tau, rng)
    assert end_dim(DecomposableSum(1, x), curve5) == 5
    assert end_dim(DecomposableSum(2, x), curve5) == 3
    assert end_dim(IndecomposableOdd(), curve5) == 1
    assert [leaf_dim(DecomposableSum(d, x), curve5) for d in (1, 2)] == [0, 2]
    assert leaf_dim(IndecomposableOdd(), curve5) == 4


def test_end_and_leaf_dimensions_n4(skew4, rng):
    x = random_point(skew4.tau, rng)
    w = skew4.omega_coset()[0]
    assert leaf_dim(DecomposableSum(1, x), skew4) == 0
    assert leaf_dim(DecomposableSum(2, x), skew4) == 2
    assert end_dim(IndecomposableOmega(w), skew4) == 2
    assert leaf_dim(IndecomposableOmega(w), skew4) == 2
    assert end_dim(DecomposableSum(2, w), skew4) == 4
    assert leaf_dim(DecomposableSum(2, w), skew4) == 0


def test_leaves_fill_their_secant_varieties(any_curve, rng):
    x = random_point(any_curve.tau, rng)
    for d in range(1, any_curve.r + 1):
        if 2 * d == any_curve.n:
            continue
        # The leaves of E_{d,x} sweep a family of dimension leaf_dim + 1 as x varies.
        assert leaf_dim(DecomposableSum(d, x), any_curve) + 1 == secant_variety_dim(d, any_curve.n)


def test_which_leaves_exist(curve4, curve5, rng):
    x = random_point(curve5.tau, rng)
    assert not leaf_nonempty(DecomposableSum(3, x), curve5)
    assert not leaf_nonempty(IndecomposableOdd(), curve4)
    assert not leaf_nonempty(IndecomposableOmega(x), curve5)
    assert not leaf_nonempty(IndecomposableOmega(curve4.point(0.123 + 0.31j)), curve4)
    assert leaf_nonempty(IndecomposableOmega(curve4.omega_coset()[2]), curve4)
    with pytest.raises(ValueError):
        end_dim(IndecomposableOdd(), curve4)


def test_same_bundle_identifies_mirror_classes_in_the_middle(skew4, curve5, rng):
    x = random_point(skew4.tau, rng)
    assert same_bundle(DecomposableSum(2, x), DecomposableSum(2, skew4.mirror(x)), skew4)
    assert not same_bundle(DecomposableSum(1, x), DecomposableSum(1, skew4.mirror(x)), skew4)
    y = random_point(curve5.tau, rng)
    assert not same_bundle(DecomposableSum(2, y), DecomposableSum(2, curve5.mirror(y)), curve5)
    assert not same_bundle(DecomposableSum(2, y), IndecomposableOdd(), curve5)


def test_closure_order(skew4, curve5, rng):
    x = random_point(curve5.tau, rng)
    top = IndecomposableOdd()
    assert closure_contains(top, DecomposableSum(2, x), curve5)
    assert closure_contains(DecomposableSum(2, x), DecomposableSum(1, x), curve5)
    assert not closure_contains(DecomposableSum(1, x), DecomposableSum(2, x), curve5)
    assert not closure_contains(DecomposableSum(2, x), top, curve5)

    w, v = skew4.omega_coset()[:2]
    assert closure_contains(IndecomposableOmega(w), DecomposableSum(2, w), skew4)
    assert not closure_contains(IndecomposableOmega(w), DecomposableSum(2, v), skew4)
    assert closure_contains(IndecomposableOmega(w), DecomposableSum(1, x), skew4)
    assert not closure_contains(DecomposableSum(2, w), DecomposableSum(1, x), skew4)


def test_pz_degree(skew4, curve5, rng):
    x = random_point(curve5.tau, rng)
    assert pz_degree(DecomposableSum(1, x), curve5) == 2
    assert pz_degree(DecomposableSum(2, x), curve5) == 5
    assert pz_degree(IndecomposableOdd(), curve5) == 5
    w = skew4.omega_coset()[3]
    assert pz_degree(DecomposableSum(2, w), skew4) == 2
    assert pz_degree(IndecomposableOmega(w), skew4) == 4


def test_sections_of_twists(skew4, curve5, rng):
    x, y = random_point(curve5.tau, rng), random_point(curve5.tau, rng)
    assert h0_e_minus_x(DecomposableSum(2, x), y, curve5) == 3
    # O(x) has a section vanishing at x and nowhere else.
    assert h0_e_minus_x(DecomposableSum(1, x), x, curve5) == 4
    assert h0_e_minus_x(DecomposableSum(1, x), y, curve5) == 3
    assert h0_e_minus_xy(IndecomposableOdd(), x, y, curve5) == 1

    w = skew4.omega_coset()[0]
    u = random_point(skew4.tau, rng)
    assert h0_e_minus_xy(IndecomposableOmega(w), u, w - u, skew4) == 1
    assert h0_e_minus_xy(IndecomposableOmega(w), u, u, skew4) == 0
    assert h0_e_minus_x(IndecomposableOmega(w), u, skew4) == 2


def test_parse_descriptor(skew4, curve5):
    b = parse_descriptor("sum:2:0.1,0.2", curve5)
    assert isinstance(b, DecomposableSum)
    assert b.d == 2
    assert b.x.is_close(curve5.point(0.1 + 0.2j))
    assert parse_descriptor("odd", curve5) == IndecomposableOdd()
    omega = parse_descriptor("omega:1", skew4)
    assert omega.omega.is_close(skew4.omega_coset()[1])
    double = parse_descriptor("double:0", skew4)
    assert double.d == 2


@pytest.mark.parametrize("text", ["odd", "omega:7", "sum:3:0,0", "bogus", "sum:2:abc"])
def test_parse_descriptor_rejects(skew4, text):
    with pytest.raises(ValueError):
        parse_descriptor(text, skew4)


def test_descriptor_dict_round_trip(skew4, rng):
    x = random_point(skew4.tau, rng)
    for b in (DecomposableSum(1, x), IndecomposableOmega(skew4.omega_coset()[2]), IndecomposableOdd()):
        again = from_dict(to_dict(b), skew4)
        assert type(again) is type(b)
        if not isinstance(b, IndecomposableOdd):
            assert same_bundle(again, b, skew4)
    with pytest.raises(ValueError):
        from_dict({"variant": "nope"}, skew4)


def test_leaf_label_dict(curve5, rng):
    x = random_point(curve5.tau, rng)
    label = LeafLabel(DecomposableSum(1, x), Divisor.single(x), SecantCount.UNIQUE, rank=0)
    out = label.to_dict()
    assert out["variant"] == "decomposable_sum"
    assert out["secant_count"] == "unique"
    assert out["rank"] == 0
    assert len(out["witness_divisor"]) == 1
    assert "rank" not in LeafLabel(IndecomposableOdd()).to_dict()


def test_leaf_families(curve4, curve5, rng):
    fams = enumerate_leaf_families(curve4)
    assert len(fams) == 10
    assert sorted(f.kind for f in fams).count("omega") == 4
    odd = enumerate_leaf_families(curve5)
    assert [f.kind for f in odd] == ["sum", "sum", "odd"]
    assert [f.leaf_dim for f in odd] == [0, 2, 4]
    for fam in fams:
        b = fam.representative(rng, curve4)
        assert leaf_dim(b, curve4) == fam.leaf_dim

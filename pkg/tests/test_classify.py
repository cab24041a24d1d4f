import importlib

import numpy as np
import pytest

from leafscope.bundles import (
    DecomposableSum,
    IndecomposableOdd,
    IndecomposableOmega,
    LeafLabel,
    same_bundle,
)
from leafscope.classify import (
    AmbiguousClassification,
    classify,
    classify_batch,
    perturb_in_span,
    sample_leaf,
    tangent_perturbation,
)
from leafscope.curve import random_point, sum_divisor
from leafscope.errors import NumericFailure
from leafscope.linear_systems import embed, span
from leafscope.secants import SecantCount, count_r_secants, singular_quadrics

# The package root re-exports the `classify` function, which shadows the
# submodule attribute; fetch the module itself from sys.modules.
classify_module = importlib.import_module("leafscope.classify")


def test_points_of_the_curve(curve5, rng):
    x = random_point(curve5.tau, rng)
    label = classify(embed(x, curve5), curve5)
    assert isinstance(label, LeafLabel)
    assert label.bundle.d == 1
    assert label.bundle.x.is_close(x, 1e-5)
    assert label.witness.degree == 1


def test_chord_points(curve5, rng):
    x = random_point(curve5.tau, rng)
    p = sample_leaf(DecomposableSum(2, x), rng, curve5)
    label = classify(p, curve5)
    assert isinstance(label, LeafLabel)
    assert same_bundle(label.bundle, DecomposableSum(2, x), curve5, tol=1e-6)
    assert label.witness.degree == 2
    assert sum_divisor(label.witness).is_close(x, 1e-6)
    assert span(label.witness, curve5).residual(p) < 1e-6


def test_generic_points_for_odd_n(curve5, random_vector):
    label = classify(random_vector(5), curve5)
    assert label == LeafLabel(IndecomposableOdd())


def test_unique_secant_points_are_indecomposable(skew4, rng):
    w = skew4.omega_coset()[2]
    p = sample_leaf(IndecomposableOmega(w), rng, skew4)
    label = classify(p, skew4)
    assert isinstance(label.bundle, IndecomposableOmega)
    assert label.bundle.omega.is_close(w, 1e-6)
    assert label.secant_count is SecantCount.UNIQUE


def test_pencil_points_split(skew4, rng):
    w = skew4.omega_coset()[0]
    p = sample_leaf(DecomposableSum(2, w), rng, skew4)
    label = classify(p, skew4)
    assert isinstance(label.bundle, DecomposableSum)
    assert label.bundle.x.is_close(w, 1e-6)
    assert label.secant_count is SecantCount.PENCIL


def test_sample_leaf_refuses_empty_leaves(curve4, curve5, rng):
    with pytest.raises(ValueError):
        sample_leaf(IndecomposableOdd(), rng, curve4)
    with pytest.raises(ValueError):
        sample_leaf(DecomposableSum(3, random_point(curve5.tau, rng)), rng, curve5)


def test_ambiguous_result_serializes(curve5, rng):
    x = random_point(curve5.tau, rng)
    result = AmbiguousClassification((DecomposableSum(2, x), IndecomposableOdd()), (1e-9, 3e-9), "close call")
    out = result.to_dict()
    assert out["variant"] == "ambiguous"
    assert [c["variant"] for c in out["candidates"]] == ["decomposable_sum", "indecomposable_odd"]
    assert out["residuals"] == [1e-9, 3e-9]


def test_classify_batch_keeps_order(curve5, rng, random_vector):
    x = random_point(curve5.tau, rng)
    points = np.array([embed(x, curve5), random_vector(5)])
    labels = classify_batch(points, curve5)
    assert len(labels) == 2
    assert labels[0].bundle.d == 1
    assert isinstance(labels[1].bundle, IndecomposableOdd)


def test_perturbation_stays_in_the_witness_span(curve5, rng):
    x = random_point(curve5.tau, rng)
    p = sample_leaf(DecomposableSum(2, x), rng, curve5)
    label = classify(p, curve5)
    q = perturb_in_span(p, label.witness, 1e-3, rng, curve5)
    assert span(label.witness, curve5).residual(q) < 1e-8
    assert np.linalg.norm(q - p) > 1e-5

    moved = tangent_perturbation(p, 1e-3, rng, curve5)
    assert span(label.witness, curve5).residual(moved) < 1e-6


def test_tangent_perturbation_needs_a_witness(curve5, random_vector, rng):
    with pytest.raises(ValueError):
        tangent_perturbation(random_vector(5), 1e-3, rng, curve5)


@pytest.mark.slow
def test_rank_is_attached_with_a_cache(curve5, cache5, rng):
    x = random_point(curve5.tau, rng)
    label = classify(sample_leaf(DecomposableSum(2, x), rng, curve5), curve5, cache5)
    assert label.rank == 2


def test_cone_vertices_are_double_omega_points(curve4):
    omegas = curve4.omega_coset()
    for m in singular_quadrics(curve4):
        label = classify(m.vertex, curve4)
        assert isinstance(label, LeafLabel)
        assert isinstance(label.bundle, DecomposableSum)
        assert label.bundle.d == 2
        assert any(label.bundle.x.is_close(w, 1e-6) for w in omegas)
        assert label.secant_count is SecantCount.PENCIL


def test_double_omega_points_beyond_p3(curve6, rng):
    w = curve6.omega_coset()[1]
    p = sample_leaf(DecomposableSum(3, w), rng, curve6)
    assert count_r_secants(p, w, curve6) is SecantCount.PENCIL
    label = classify(p, curve6)
    assert isinstance(label, LeafLabel)
    assert same_bundle(label.bundle, DecomposableSum(3, w), curve6, tol=1e-6)
    assert label.secant_count is SecantCount.PENCIL
    assert span(label.witness, curve6).residual(p) < 1e-6


def test_failed_level_search_is_ambiguous(curve4, random_vector, monkeypatch):
    def fail(p, spec):
        raise NumericFailure("point not on Sec_r slice", residual=1e-3)

    monkeypatch.setattr(classify_module, "minimal_secant_level", fail)
    result = classify(random_vector(4), curve4)
    assert isinstance(result, AmbiguousClassification)
    assert result.candidates == ()
    assert result.residuals == (1e-3,)
    assert "Sec_r" in result.reason

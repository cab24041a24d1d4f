import numpy as np
import pytest

from leafscope.curve import random_divisor_with_sum, random_point, sum_divisor
from leafscope.errors import PreconditionError
from leafscope.linear_systems import embed, span
from leafscope.secants import (
    SecantCount,
    SecantLevel,
    TopStratum,
    count_r_secants,
    find_secant_divisor,
    in_partial_secant,
    intersect_spans,
    minimal_secant_level,
    partial_secant_dim,
    partial_secant_indicator,
    pencil_parameter_for_point,
    same_secant_hypersurface,
    sample_partial_secant,
    secant_determinant,
    secant_dimension_probe,
    secant_pencil,
    secant_variety_dim,
    singular_quadrics,
)


def _spread_x(spec, rng):
    """A secant parameter away from the Omega coset."""
    while True:
        x = random_point(spec.tau, rng)
        if all(x.distance(w) > 0.1 for w in spec.omega_coset()):
            return x


def test_dimension_formulas():
    assert partial_secant_dim(1, 5) == 0
    assert partial_secant_dim(2, 4) == 2
    assert secant_variety_dim(2, 5) == 3
    assert secant_variety_dim(3, 5) == 4
    with pytest.raises(PreconditionError):
        partial_secant_dim(3, 5)


def test_curve_lies_in_every_partial_secant(curve5, rng):
    p = embed(random_point(curve5.tau, rng), curve5)
    for _ in range(3):
        assert in_partial_secant(p, 2, random_point(curve5.tau, rng), curve5)


def test_level_precondition(curve5, random_vector):
    with pytest.raises(PreconditionError):
        partial_secant_indicator(random_vector(5), 3, random_point(curve5.tau, np.random.default_rng(0)), curve5)


def test_chord_points_lie_on_their_own_partial_secant(curve5, rng):
    x = random_point(curve5.tau, rng)
    p = span(random_divisor_with_sum(2, x, rng, min_separation=0.05), curve5).random_point(rng)
    assert in_partial_secant(p, 2, x, curve5)
    assert partial_secant_indicator(p, 2, curve5.point(x.z + 0.3 + 0.2j), curve5) > 1e-4


def test_minimal_level_on_the_curve(curve5, rng):
    x = random_point(curve5.tau, rng)
    level = minimal_secant_level(embed(x, curve5), curve5)
    assert isinstance(level, SecantLevel)
    assert level.d == 1
    assert level.x.is_close(x, 1e-5)


def test_minimal_level_of_a_chord_point(curve5, rng):
    x = random_point(curve5.tau, rng)
    p = sample_partial_secant(2, x, False, rng, curve5)
    level = minimal_secant_level(p, curve5)
    assert isinstance(level, SecantLevel)
    assert (level.d, level.ambiguous) == (2, False)
    assert level.x.is_close(x, 1e-6)
    assert level.mirror is None


def test_random_point_is_in_the_top_stratum_for_odd_n(curve5, random_vector):
    assert minimal_secant_level(random_vector(5), curve5) == TopStratum(5)


def test_find_secant_divisor(curve5, rng):
    x = random_point(curve5.tau, rng)
    D = random_divisor_with_sum(2, x, rng, min_separation=0.05)
    p = span(D, curve5).random_point(rng)
    found = find_secant_divisor(p, 2, x, curve5)
    assert found.degree == 2
    assert sum_divisor(found).is_close(x, 1e-6)
    for q in found.support:
        assert any(q.is_close(a, 1e-5) for a in D.support)
    assert span(found, curve5).residual(p) < 1e-6


def test_find_secant_divisor_refuses_points_off_the_secant(curve5, rng, random_vector):
    with pytest.raises(PreconditionError):
        find_secant_divisor(random_vector(5), 2, random_point(curve5.tau, rng), curve5)


def test_every_point_of_p3_lies_on_a_secant_quadric(curve4, random_vector):
    p = random_vector(4)
    param = pencil_parameter_for_point(p, curve4)
    assert not param.degenerate
    assert in_partial_secant(p, 2, param.x, curve4)
    assert in_partial_secant(p, 2, param.mirror, curve4)


def test_pencil_parameter_needs_even_n(curve5, random_vector):
    with pytest.raises(PreconditionError):
        pencil_parameter_for_point(random_vector(5), curve5)


def test_mirror_parameters_name_the_same_hypersurface(skew4, rng):
    x = _spread_x(skew4, rng)
    assert same_secant_hypersurface(x, skew4.mirror(x), skew4)
    assert not same_secant_hypersurface(x, skew4.point(x.z + 0.25), skew4)
    F = secant_determinant(x, skew4).coefficient_vector()
    G = secant_determinant(skew4.mirror(x), skew4).coefficient_vector()
    c = np.vdot(G, F) / np.vdot(G, G)
    assert np.linalg.norm(F - c * G) < 1e-8 * np.linalg.norm(F)


def test_secant_determinant_vanishes_on_the_curve(curve6, rng):
    F = secant_determinant(_spread_x(curve6, rng), curve6)
    assert F.degree == 3
    for _ in range(5):
        assert abs(F(embed(random_point(curve6.tau, rng), curve6))) < 1e-9


def test_secant_pencil_members_are_independent(curve4):
    F1, F2 = secant_pencil(curve4)
    A = np.array([F1.coefficient_vector(), F2.coefficient_vector()])
    s = np.linalg.svd(A, compute_uv=False)
    assert s[-1] / s[0] > 1e-3


def test_four_singular_quadrics(curve4):
    members = singular_quadrics(curve4)
    assert len(members) == 4
    assert all(m.rank == 3 for m in members)
    for m in members:
        counts = [
            count_r_secants(m.vertex, w, curve4)
            for w in curve4.omega_coset()
            if in_partial_secant(m.vertex, 2, w, curve4)
        ]
        assert counts == [SecantCount.PENCIL]


def test_unique_and_pencil_points(skew4, rng):
    w = skew4.omega_coset()[1]
    p = sample_partial_secant(2, w, True, rng, skew4)
    assert count_r_secants(p, w, skew4) is SecantCount.UNIQUE

    D1 = random_divisor_with_sum(2, w, rng, min_separation=0.05)
    D2 = random_divisor_with_sum(2, w, rng, min_separation=0.05)
    meet = intersect_spans(D1, D2, skew4)
    assert meet.dim == 1
    assert count_r_secants(meet.basis[:, 0], w, skew4) is SecantCount.PENCIL


def test_counting_needs_an_omega_point(curve4, rng, random_vector):
    with pytest.raises(PreconditionError):
        count_r_secants(random_vector(4), _spread_x(curve4, rng), curve4)
    with pytest.raises(PreconditionError):
        count_r_secants(random_vector(4), curve4.omega_coset()[0], curve4)


@pytest.mark.parametrize("n,d", [(4, 1), (4, 2), (5, 1), (5, 2), (6, 2), (6, 3)])
def test_dimension_probe(n, d, rng, request):
    spec = request.getfixturevalue(f"curve{n}")
    x = random_point(spec.tau, rng)
    assert secant_dimension_probe(d, x, rng, spec) == partial_secant_dim(d, n)
    if 2 * d < n:
        assert secant_dimension_probe(d, None, rng, spec) == secant_variety_dim(d, n)


def test_cone_vertices_lie_on_exactly_one_omega_secant(curve4):
    for m in singular_quadrics(curve4):
        values = [partial_secant_indicator(m.vertex, 2, w, curve4) for w in curve4.omega_coset()]
        hits = [v < curve4.tolerances.rank_tol for v in values]
        assert sum(hits) == 1
        assert min(values) < 1e-10
        # Off its own cone the vertex is a full-rank point.
        assert sorted(values)[1] > 1e-6


def test_partial_secants_past_the_middle_fill_space(curve4, curve5, rng, random_vector):
    assert in_partial_secant(random_vector(5), 3, random_point(curve5.tau, rng), curve5)
    assert in_partial_secant(random_vector(4), 3, random_point(curve4.tau, rng), curve4)
    with pytest.raises(PreconditionError):
        partial_secant_indicator(random_vector(5), 3, random_point(curve5.tau, rng), curve5)


def test_room_rank_is_measured_against_the_room_scale(skew4, rng):
    # Two rulings of the omega-cone meet at its vertex, where the room matrix vanishes.
    w = skew4.omega_coset()[3]
    D1 = random_divisor_with_sum(2, w, rng, min_separation=0.05)
    D2 = random_divisor_with_sum(2, w, rng, min_separation=0.05)
    vertex = intersect_spans(D1, D2, skew4).basis[:, 0]
    assert partial_secant_indicator(vertex, 2, w, skew4) < 1e-10
    assert count_r_secants(vertex, w, skew4) is SecantCount.PENCIL
    D = find_secant_divisor(vertex, 2, w, skew4)
    assert sum_divisor(D).is_close(w, 1e-6)
    assert span(D, skew4).residual(vertex) < 1e-6

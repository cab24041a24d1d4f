"""Secant varieties of the elliptic normal curve.

A point p lies on the partial secant Sec_{d,x} exactly when the room matrix
Phi_p(x) = [e_i f_j](p), built from V_{d,x} x V_{n-d, l_sum-x}, drops rank.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import linalg as sla

from .config import SETTINGS
from .curve import CurveSpec, Divisor, EPoint, random_divisor_with_sum, random_point
from .errors import NumericFailure, PreconditionError, RejectionBudgetExceeded
from .linalg import RankDecision, matrix_rank, normalize
from .linear_systems import (
    Subspace,
    basis_of_sections,
    curve_distance,
    embed,
    embedding_basis,
    room_tensor,
    section_zeros,
    span,
)
from .polynomials import PolynomialForm, determinant

logger = logging.getLogger(__name__)


class SecantCount(str, Enum):
    UNIQUE = "unique"
    PENCIL = "pencil"


@dataclass(frozen=True)
class SecantLevel:
    """Smallest d with p in Sec_{d,x}.

    `mirror` is l_sum - x when d = n/2, where x and its mirror name the same
    secant hypersurface. `ambiguous` levels carry their competing candidates.
    """

    d: int
    x: EPoint
    indicator: float
    mirror: EPoint | None = None
    ambiguous: bool = False
    alternatives: tuple["SecantLevel", ...] = field(default=())


@dataclass(frozen=True)
class TopStratum:
    """Odd n: p lies on no Sec_{d,x} with d <= n/2."""

    n: int


@dataclass(frozen=True)
class PencilParameter:
    x: EPoint
    mirror: EPoint
    indicator: float
    # Every x works: p already lies on Sec_{r-1}.
    degenerate: bool = False


@dataclass(frozen=True)
class SingularMember:
    member: tuple[complex, complex]
    vertex: np.ndarray
    rank: int


def _check_level(d: int, spec: CurveSpec) -> None:
    if not 1 <= d <= spec.n / 2:
        raise PreconditionError(f"partial secants need 1 <= d <= n/2, got d={d}, n={spec.n}")


def _room_scale(tensors: np.ndarray, p: np.ndarray) -> np.ndarray:
    """|T_k|_F |p| per room tensor: an upper bound for every singular value of T_k p."""
    norms = np.linalg.norm(tensors.reshape(tensors.shape[0], -1), axis=1)
    return norms * np.linalg.norm(p)


def _indicators(phi: np.ndarray, tensors: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Smallest singular value of each room matrix over its room scale;
    phi is (K, d, n-d). Vanishes wherever T_k p loses rank, including T_k p = 0."""
    if phi.shape[1] == 1:
        smallest = np.linalg.norm(phi[:, 0, :], axis=1)
    else:
        smallest = np.linalg.svd(phi, compute_uv=False)[:, -1]
    return smallest / _room_scale(tensors, p)


def partial_secant_indicator(p: np.ndarray, d: int, x: EPoint, spec: CurveSpec) -> float:
    _check_level(d, spec)
    p = normalize(p)
    tensors = room_tensor(d, [x.z], spec)
    return float(_indicators(tensors @ p, tensors, p)[0])


def in_partial_secant(p: np.ndarray, d: int, x: EPoint, spec: CurveSpec) -> bool:
    # Past the middle, Sec_{d,x} is all of P^{n-1}.
    if d > spec.n / 2:
        return True
    return partial_secant_indicator(p, d, x, spec) < spec.tolerances.rank_tol


def partial_secant_dim(d: int, n: int) -> int:
    if not 1 <= d <= n / 2:
        raise PreconditionError("partial secants need 1 <= d <= n/2")
    return 2 * d - 2


def secant_variety_dim(d: int, n: int) -> int:
    return min(2 * d - 1, n - 1)


@dataclass(frozen=True, eq=False)
class _LevelGrid:
    shifts: np.ndarray
    tensors: np.ndarray


@lru_cache(maxsize=32)
def _level_grid(spec: CurveSpec, d: int) -> _LevelGrid:
    g = SETTINGS.x_grid
    s, t = np.meshgrid(np.arange(g) / g, np.arange(g) / g, indexing="ij")
    shifts = (s + t * spec.tau).ravel()
    logger.debug("building level-%d room grid (%d shifts) for n=%d", d, shifts.size, spec.n)
    return _LevelGrid(shifts, room_tensor(d, shifts, spec))


def _grid_minima(values: np.ndarray) -> np.ndarray:
    """Flat indices of local minima on the periodic x-grid, best first."""
    g = SETTINGS.x_grid
    grid = values.reshape(g, g)
    is_min = np.ones_like(grid, dtype=bool)
    for ds in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if ds or dt:
                is_min &= grid <= np.roll(np.roll(grid, ds, axis=0), dt, axis=1)
    idx = np.flatnonzero(is_min.ravel())
    if idx.size == 0:
        idx = np.array([int(np.argmin(values))])
    return idx[np.argsort(values[idx])]


def _refine(p: np.ndarray, d: int, shift: complex, spec: CurveSpec, max_iter: int = 40) -> tuple[complex, float]:
    """Complex Newton on h(x) = det(Phi_p(x) R), R the top right singular
    vectors of the current Phi_p(x)."""
    step_h = 1e-6
    x = complex(shift)
    value = math.inf
    for _ in range(max_iter):
        tensors = room_tensor(d, [x, x + step_h, x - step_h], spec)
        phi = tensors @ p
        value = float(_indicators(phi[:1], tensors[:1], p)[0])
        if value < 1e-15:
            break
        _, _, vh = np.linalg.svd(phi[0], full_matrices=False)
        R = vh.conj().T
        h0, hp, hm = (np.linalg.det(m @ R) for m in phi)
        dh = (hp - hm) / (2 * step_h)
        if dh == 0:
            break
        step = h0 / dh
        if abs(step) > 0.1:
            step *= 0.1 / abs(step)
        x -= step
        if abs(step) < 1e-13:
            break
    tensors = room_tensor(d, [x], spec)
    value = float(_indicators(tensors @ p, tensors, p)[0])
    return x, value


def _same_class(a: EPoint, b: EPoint, d: int, spec: CurveSpec, tol: float = 1e-6) -> bool:
    if a.is_close(b, tol):
        return True
    return 2 * d == spec.n and a.is_close(spec.mirror(b), tol)


def _level(d: int, x: EPoint, value: float, spec: CurveSpec, **kwargs) -> SecantLevel:
    mirror = spec.mirror(x) if 2 * d == spec.n else None
    return SecantLevel(d, x, value, mirror, **kwargs)


def _scan_level(p: np.ndarray, d: int, spec: CurveSpec) -> SecantLevel | None:
    tol = spec.tolerances.rank_tol
    grid = _level_grid(spec, d)
    values = _indicators(grid.tensors @ p, grid.tensors, p)
    near: list[SecantLevel] = []
    for idx in _grid_minima(values)[: SETTINGS.refine_candidates]:
        shift, value = _refine(p, d, grid.shifts[idx], spec)
        x = spec.point(shift)
        if value < tol:
            return _level(d, x, value, spec)
        if value < tol * SETTINGS.rank_gap and not any(_same_class(x, lv.x, d, spec) for lv in near):
            near.append(_level(d, x, value, spec))
    if near:
        best = min(near, key=lambda lv: lv.indicator)
        logger.info("level %d is ambiguous: best indicator %.3e", d, best.indicator)
        return _level(d, best.x, best.indicator, spec, ambiguous=True, alternatives=tuple(near))
    return None


def pencil_parameter_for_point(p: np.ndarray, spec: CurveSpec) -> PencilParameter:
    """Member x (up to x <-> l_sum - x) of the secant pencil through p; n even."""
    if not spec.is_even:
        raise PreconditionError("the secant pencil exists for even n only")
    p = normalize(p)
    r = spec.r
    tol = spec.tolerances.rank_tol
    grid = _level_grid(spec, r)
    values = _indicators(grid.tensors @ p, grid.tensors, p)
    if float(values.max()) < tol * SETTINGS.rank_gap:
        x = spec.point(grid.shifts[0])
        return PencilParameter(x, spec.mirror(x), float(values.max()), degenerate=True)

    best: tuple[complex, float] | None = None
    for idx in _grid_minima(values)[: SETTINGS.refine_candidates]:
        shift, value = _refine(p, r, grid.shifts[idx], spec)
        if best is None or value < best[1]:
            best = (shift, value)
        if value < tol:
            break
    assert best is not None
    if best[1] > tol:
        raise NumericFailure("point not on Sec_r slice", residual=best[1])
    x = spec.point(best[0])
    return PencilParameter(x, spec.mirror(x), best[1])


def _middle_level(p: np.ndarray, spec: CurveSpec) -> SecantLevel:
    r = spec.r
    tol = spec.tolerances.rank_tol
    for w in spec.omega_coset():
        value = partial_secant_indicator(p, r, w, spec)
        if value < tol:
            return SecantLevel(r, w, value, w)
    param = pencil_parameter_for_point(p, spec)
    return SecantLevel(r, param.x, param.indicator, param.mirror)


def minimal_secant_level(p: np.ndarray, spec: CurveSpec) -> SecantLevel | TopStratum:
    p = normalize(p)
    x, dist = curve_distance(p, spec)
    if dist < SETTINGS.curve_distance_tol:
        return SecantLevel(1, x, dist)
    for d in range(2, spec.r + 1):
        if spec.is_even and d == spec.r:
            return _middle_level(p, spec)
        level = _scan_level(p, d, spec)
        if level is not None:
            return level
    return TopStratum(spec.n)


def find_secant_divisor(p: np.ndarray, d: int, x: EPoint, spec: CurveSpec) -> Divisor:
    """Some D in E^[d]_x with p in span(D)."""
    _check_level(d, spec)
    p = normalize(p)
    tol = spec.tolerances.rank_tol
    if d == 1:
        if partial_secant_indicator(p, 1, x, spec) > tol * SETTINGS.rank_gap:
            raise PreconditionError("p is not the image of x")
        return Divisor.single(x)

    tensors = room_tensor(d, [x.z], spec)
    phi = tensors[0] @ p
    decision = matrix_rank(phi, tol, scale=float(_room_scale(tensors, p)[0]))
    if decision.kernel_dim == 0:
        raise PreconditionError(f"p is not on Sec_{{{d},x}}")
    u, _, _ = np.linalg.svd(phi)
    v = u[:, -1].conj()
    D = section_zeros(basis_of_sections(d, x, spec), v, spec)
    residual = span(D, spec).residual(p)
    if residual > tol * SETTINGS.rank_gap:
        raise NumericFailure("p does not lie on the span of the recovered divisor", residual=residual)
    return D


def secant_count_decision(p: np.ndarray, omega: EPoint, spec: CurveSpec) -> tuple[SecantCount, RankDecision]:
    if not spec.is_even:
        raise PreconditionError("counting r-secants needs even n")
    if not spec.in_omega(omega, 1e-8):
        raise PreconditionError("omega must satisfy 2*omega = l_sum")
    p = normalize(p)
    tensors = room_tensor(spec.r, [omega.z], spec)
    phi = tensors[0] @ p
    decision = matrix_rank(phi, spec.tolerances.rank_tol, scale=float(_room_scale(tensors, p)[0]))
    kernel = decision.kernel_dim
    if kernel == 0:
        raise PreconditionError("p is not on Sec_{r,omega}")
    if kernel == 1:
        return SecantCount.UNIQUE, decision
    if kernel == 2:
        return SecantCount.PENCIL, decision
    raise NumericFailure(f"kernel of dimension {kernel} on Sec_r", spectrum=decision.singular_values)


def count_r_secants(p: np.ndarray, omega: EPoint, spec: CurveSpec) -> SecantCount:
    return secant_count_decision(p, omega, spec)[0]


def intersect_spans(D1: Divisor, D2: Divisor, spec: CurveSpec) -> Subspace:
    return span(D1, spec).meet(span(D2, spec), spec.tolerances.rank_tol)


def same_secant_hypersurface(x: EPoint, x2: EPoint, spec: CurveSpec) -> bool:
    """Sec_{r,x} = Sec_{r,x'} iff x' = x or x' = l_sum - x."""
    return _same_class(x, x2, spec.r, spec, 1e3 * spec.tolerances.lattice_tol)


def secant_determinant(x: EPoint, spec: CurveSpec) -> PolynomialForm:
    """det Phi(x) as a form of degree r; n even."""
    if not spec.is_even:
        raise PreconditionError("secant determinants are square for even n only")
    tensor = room_tensor(spec.r, [x.z], spec)[0]
    entries = [[PolynomialForm.linear(tensor[i, j]) for j in range(spec.r)] for i in range(spec.r)]
    return determinant(entries).normalized()


def _pencil_parameters(spec: CurveSpec) -> tuple[EPoint, EPoint]:
    rng = np.random.default_rng([spec.tolerances.seed, spec.n, 29])
    omegas = spec.omega_coset()
    while True:
        x1, x2 = random_point(spec.tau, rng), random_point(spec.tau, rng)
        special = omegas + [x1, spec.mirror(x1)]
        if all(x1.distance(w) > 0.05 for w in omegas) and all(x2.distance(w) > 0.05 for w in special):
            return x1, x2


def secant_pencil(spec: CurveSpec) -> tuple[PolynomialForm, PolynomialForm]:
    """Two independent members spanning the pencil of degree-r secant hypersurfaces."""
    x1, x2 = _pencil_parameters(spec)
    logger.info("secant pencil generated by x=%s and x'=%s", x1.z, x2.z)
    return secant_determinant(x1, spec), secant_determinant(x2, spec)


def singular_quadrics(spec: CurveSpec) -> list[SingularMember]:
    """The rank-3 members of the pencil of quadrics through E in P^3."""
    if spec.n != 4:
        raise PreconditionError("singular quadrics are listed for n = 4 only")
    F1, F2 = secant_pencil(spec)
    A1, A2 = F1.quadric_matrix(), F2.quadric_matrix()
    members = []
    for lam in sla.eigvals(A1, A2):
        if np.isfinite(lam):
            coeffs = (1.0 + 0j, complex(-lam))
            M = A1 - lam * A2
        else:
            coeffs = (0j, 1.0 + 0j)
            M = A2
        _, _, vh = np.linalg.svd(M)
        decision = matrix_rank(M, spec.tolerances.rank_tol)
        members.append(SingularMember(coeffs, normalize(vh[-1].conj()), decision.rank))
    return members


def random_point_in_span(D: Divisor, rng: np.random.Generator, spec: CurveSpec) -> np.ndarray:
    return span(D, spec).random_point(rng)


def sample_partial_secant(
    d: int,
    x: EPoint,
    reject_lower: bool,
    rng: np.random.Generator,
    spec: CurveSpec,
) -> np.ndarray:
    """Random point of Sec_{d,x}; with `reject_lower`, one not on Sec_{d-1}."""
    _check_level(d, spec)
    if d == 1:
        return embed(x, spec)
    for _ in range(SETTINGS.rejection_budget):
        D = random_divisor_with_sum(d, x, rng)
        p = random_point_in_span(D, rng, spec)
        if not reject_lower:
            return p
        level = minimal_secant_level(p, spec)
        if isinstance(level, SecantLevel) and level.d == d and not level.ambiguous:
            return p
    raise RejectionBudgetExceeded(f"no point of Sec_{{{d},x}} off Sec_{d - 1} after {SETTINGS.rejection_budget} draws")


def secant_dimension_probe(
    d: int,
    x: EPoint | None,
    rng: np.random.Generator,
    spec: CurveSpec,
    step: float = 1e-5,
) -> int:
    """Projective dimension of Sec_{d,x} (or Sec_d when x is None) from the
    rank of a finite-difference Jacobian of (a_i, t_i) -> sum t_i g(a_i)."""
    basis = embedding_basis(spec)
    if x is not None:
        points = random_divisor_with_sum(d, x, rng).points()
    else:
        points = [random_point(spec.tau, rng) for _ in range(d)]
    zs = np.array([q.z for q in points])
    vals = basis.values(zs)
    t = (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.linalg.norm(vals, axis=1)
    slopes = (basis.values(zs + step) - basis.values(zs - step)) / (2 * step)

    columns = [vals[i] for i in range(d)]
    free = d - 1 if x is not None else d
    for i in range(free):
        col = t[i] * slopes[i]
        if x is not None:
            col = col - t[-1] * slopes[-1]
        columns.append(col)
    J = np.array(columns).T
    J = J / np.linalg.norm(J, axis=0, keepdims=True)
    decision = matrix_rank(J, 1e-6)
    return decision.rank - 1


__all__ = [
    "SecantCount",
    "SecantLevel",
    "TopStratum",
    "PencilParameter",
    "SingularMember",
    "partial_secant_indicator",
    "in_partial_secant",
    "partial_secant_dim",
    "secant_variety_dim",
    "minimal_secant_level",
    "pencil_parameter_for_point",
    "find_secant_divisor",
    "count_r_secants",
    "secant_count_decision",
    "intersect_spans",
    "same_secant_hypersurface",
    "secant_determinant",
    "secant_pencil",
    "singular_quadrics",
    "random_point_in_span",
    "sample_partial_secant",
    "secant_dimension_probe",
]

"""Sections of line bundles on E, the embedding by |L| and the
multiplication ("room") matrices between complementary linear systems.

Every section of V_{d,x} is written in the basis

    g_k(z) = theta[1/2 + k/d, 0](d z + d/2 - x, d tau),   k = 0..d-1,

whose zeros sum to x modulo the lattice; the embedding E -> P^{n-1} is the
basis of V_{n, l_sum}.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .config import SETTINGS
from .curve import CONVENTION_TAG, CurveSpec, Divisor, EPoint, sum_divisor
from .curve.theta import theta_char
from .errors import NotADivisorPairError, NumericFailure, PreconditionError, SectionZerosError
from .linalg import column_span, normalize, null_space

logger = logging.getLogger(__name__)


def section_values(d: int, shift, z, tau: complex, terms: int = 40, deriv: int = 0) -> np.ndarray:
    """Values of g_0..g_{d-1}; `shift` and `z` broadcast, basis on the last axis."""
    shift = np.asarray(shift, dtype=complex)
    z = np.asarray(z, dtype=complex)
    w = d * z + d / 2 - shift
    a = 0.5 + np.arange(d) / d
    vals = theta_char(a, 0.0, w[..., None], d * complex(tau), terms, deriv)
    if deriv:
        vals = vals * float(d) ** deriv
    return vals


@dataclass(frozen=True, eq=False)
class SectionBasis:
    degree: int
    sum: EPoint
    shift: complex
    tau: complex
    theta_terms: int = 40
    # Row i expresses basis element i in terms of the theta basis g_k.
    transform: np.ndarray | None = None
    convention_tag: str = CONVENTION_TAG

    def values(self, z, deriv: int = 0) -> np.ndarray:
        vals = section_values(self.degree, self.shift, z, self.tau, self.theta_terms, deriv)
        if self.transform is not None:
            vals = vals @ self.transform.T
        return vals

    def evaluate(self, coeffs: np.ndarray, z, deriv: int = 0) -> np.ndarray:
        return self.values(z, deriv) @ np.asarray(coeffs, dtype=complex)

    @property
    def evaluators(self) -> list:
        return [lambda z, deriv=0, i=i: self.values(z, deriv)[..., i] for i in range(self.degree)]

    def with_transform(self, matrix: np.ndarray) -> "SectionBasis":
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (self.degree, self.degree):
            raise ValueError(f"basis change must be {self.degree}x{self.degree}")
        if abs(np.linalg.det(matrix)) < 1e-12:
            raise ValueError("basis change must be invertible")
        current = self.transform if self.transform is not None else np.eye(self.degree)
        return SectionBasis(
            self.degree, self.sum, self.shift, self.tau, self.theta_terms, matrix @ current
        )

    def envelope(self, z) -> np.ndarray:
        """Weight making |s(z)| * envelope(z) a function on E."""
        y = np.asarray(z, dtype=complex).imag
        return np.exp((-math.pi * self.degree * y * y + 2 * math.pi * self.shift.imag * y) / self.tau.imag)


def basis_of_sections(d: int, x: EPoint, spec: CurveSpec) -> SectionBasis:
    if d < 1:
        raise ValueError("d must be >= 1")
    return SectionBasis(d, x, x.z, spec.tau, spec.tolerances.theta_terms)


def embedding_basis(spec: CurveSpec) -> SectionBasis:
    return basis_of_sections(spec.n, spec.l_sum, spec)


def embed(x: EPoint | complex, spec: CurveSpec) -> np.ndarray:
    """Unit-norm image of a point of E in C^n."""
    z = x.z if isinstance(x, EPoint) else complex(x)
    return normalize(embedding_basis(spec).values(z))


def embed_many(zs, spec: CurveSpec) -> np.ndarray:
    return normalize(embedding_basis(spec).values(np.asarray(zs, dtype=complex)))


@dataclass(frozen=True, eq=False)
class _SampleFrame:
    z: np.ndarray
    scale: np.ndarray
    gram: np.ndarray
    pinv: np.ndarray


@lru_cache(maxsize=32)
def _sample_frame(spec: CurveSpec) -> _SampleFrame:
    """Random sample points where sections of V_{n, l_sum} are fitted."""
    rng = np.random.default_rng([spec.tolerances.seed, spec.n, 17])
    m = SETTINGS.room_oversample * spec.n
    st = rng.random((m, 2))
    z = st[:, 0] + st[:, 1] * spec.tau
    raw = embedding_basis(spec).values(z)
    scale = 1.0 / np.linalg.norm(raw, axis=1)
    gram = raw * scale[:, None]
    return _SampleFrame(z, scale, gram, np.linalg.pinv(gram))


@dataclass(frozen=True, eq=False)
class LinearForm:
    coeffs: np.ndarray

    def __call__(self, p: np.ndarray) -> complex:
        return complex(self.coeffs @ np.asarray(p, dtype=complex))


@dataclass(frozen=True, eq=False)
class RoomMatrix:
    """d1 x d2 matrix of linear forms: entry (i, j) is the product of the
    i-th and j-th basis sections, read as a section of L."""

    coeffs: np.ndarray
    rows: SectionBasis
    cols: SectionBasis
    residual: float = 0.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[0], self.coeffs.shape[1]

    def entry(self, i: int, j: int) -> LinearForm:
        return LinearForm(self.coeffs[i, j])

    @property
    def entries(self) -> list[list[LinearForm]]:
        return [[self.entry(i, j) for j in range(self.shape[1])] for i in range(self.shape[0])]

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return self.coeffs @ np.asarray(p, dtype=complex)


def _lattice_offset(delta: complex, tau: complex, tol: float) -> tuple[int, int] | None:
    k = round(delta.imag / tau.imag)
    m = round((delta - k * tau).real)
    if abs(delta - m - k * tau) > tol:
        return None
    return int(m), int(k)


def multiplication_matrix(B1: SectionBasis, B2: SectionBasis, spec: CurveSpec) -> RoomMatrix:
    if B1.degree + B2.degree != spec.n:
        raise NotADivisorPairError(f"degrees {B1.degree} + {B2.degree} != n = {spec.n}")
    offset = _lattice_offset(B1.shift + B2.shift - spec.l_sum.z, spec.tau, spec.tolerances.lattice_tol)
    if offset is None:
        raise NotADivisorPairError("x1 + x2 != sigma(L); the product is not a section of L")
    _, k = offset

    frame = _sample_frame(spec)
    weight = frame.scale
    if k:
        # Reconcile the automorphy factor when x1 + x2 differs from l_sum by k*tau.
        weight = weight * np.exp(-2j * math.pi * k * frame.z)
    e = B1.values(frame.z)
    f = B2.values(frame.z)
    prod = e[:, :, None] * f[:, None, :] * weight[:, None, None]
    coeffs = np.einsum("nm,mij->ijn", frame.pinv, prod)

    recon = np.einsum("mn,ijn->mij", frame.gram, coeffs)
    residual = float(np.linalg.norm(recon - prod) / np.linalg.norm(prod))
    if residual > spec.tolerances.rank_tol:
        raise NumericFailure("products do not fit the sections of L", residual=residual)
    return RoomMatrix(coeffs, B1, B2, residual)


def room_tensor(d: int, shifts, spec: CurveSpec) -> np.ndarray:
    """Coefficient tensors (K, d, n-d, n) of the multiplication maps
    V_{d,x} x V_{n-d, l_sum - x} -> V_{n, l_sum} for each complex shift x."""
    shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))
    frame = _sample_frame(spec)
    terms = spec.tolerances.theta_terms
    e = section_values(d, shifts[:, None], frame.z[None, :], spec.tau, terms)
    f = section_values(spec.n - d, spec.l_sum.z - shifts[:, None], frame.z[None, :], spec.tau, terms)
    prod = e[:, :, :, None] * f[:, :, None, :] * frame.scale[None, :, None, None]
    return np.einsum("nm,kmij->kijn", frame.pinv, prod)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of C^n with orthonormal basis columns."""

    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projective_dim(self) -> int:
        return self.dim - 1

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, p: np.ndarray) -> float:
        p = np.asarray(p, dtype=complex)
        rest = p - self.basis @ (self.basis.conj().T @ p)
        return float(np.linalg.norm(rest) / np.linalg.norm(p))

    def contains(self, p: np.ndarray, tol: float = 1e-8) -> bool:
        return self.residual(p) < tol

    def meet(self, other: "Subspace", rank_tol: float = 1e-8) -> "Subspace":
        if self.dim == 0 or other.dim == 0:
            return Subspace(np.zeros((self.ambient_dim, 0), dtype=complex))
        kernel = null_space(np.hstack([self.basis, -other.basis]), rank_tol)
        if kernel.shape[1] == 0:
            return Subspace(np.zeros((self.ambient_dim, 0), dtype=complex))
        return Subspace(column_span(self.basis @ kernel[: self.dim], rank_tol))

    def join(self, other: "Subspace", rank_tol: float = 1e-8) -> "Subspace":
        return Subspace(column_span(np.hstack([self.basis, other.basis]), rank_tol))

    def distance(self, other: "Subspace") -> float:
        return float(np.linalg.norm(self.projector() - other.projector(), 2))

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        w = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return normalize(self.basis @ w)


def _divisor_rows(D: Divisor, spec: CurveSpec) -> np.ndarray:
    basis = embedding_basis(spec)
    rows = []
    for p, mult in D.parts:
        for j in range(mult):
            v = basis.values(p.z, deriv=j)
            rows.append(v / np.linalg.norm(v))
    return np.array(rows)


def span(D: Divisor, spec: CurveSpec) -> Subspace:
    """Linear span of D in P^{n-1}; repeated points contribute osculating directions."""
    if D.degree == 0:
        return Subspace(np.zeros((spec.n, 0), dtype=complex))
    return Subspace(column_span(_divisor_rows(D, spec).T, spec.tolerances.rank_tol))


def linear_forms_vanishing_on(D: Divisor, spec: CurveSpec) -> Subspace:
    """Coefficient vectors c with c . g^(j)(a) = 0 for every point of D."""
    if D.degree == 0:
        return Subspace(np.eye(spec.n, dtype=complex))
    return Subspace(null_space(_divisor_rows(D, spec), spec.tolerances.rank_tol))


def xi_perp(p: np.ndarray, rank_tol: float = 1e-8) -> Subspace:
    """Hyperplane of linear forms vanishing at p (bilinear pairing)."""
    p = np.asarray(p, dtype=complex)
    return Subspace(null_space(p[None, :], rank_tol))


def span_contains_by_forms(p: np.ndarray, D: Divisor, spec: CurveSpec, tol: float = 1e-8) -> bool:
    """Same test as span(D).contains(p), read through the forms vanishing on D."""
    forms = linear_forms_vanishing_on(D, spec).basis
    p = normalize(p)
    return float(np.linalg.norm(forms.T @ p)) < tol


@lru_cache(maxsize=16)
def _curve_grid(spec: CurveSpec) -> tuple[np.ndarray, np.ndarray]:
    g = SETTINGS.curve_grid
    s, t = np.meshgrid(np.arange(g) / g, np.arange(g) / g, indexing="ij")
    zs = (s + t * spec.tau).ravel()
    return zs, embed_many(zs, spec)


def curve_distance(p: np.ndarray, spec: CurveSpec) -> tuple[EPoint, float]:
    """Nearest point of the embedded curve and the chordal distance to it."""
    p = normalize(p)
    zs, images = _curve_grid(spec)
    best = int(np.argmax(np.abs(images.conj() @ p)))
    z0 = zs[best]
    t0 = z0.imag / spec.tau.imag
    x0 = np.array([z0.real - t0 * spec.tau.real, t0])

    def gap(st: np.ndarray) -> float:
        v = embed(st[0] + st[1] * spec.tau, spec)
        overlap = abs(np.vdot(v, p))
        return 1.0 - overlap * overlap

    h = 1.0 / SETTINGS.curve_grid
    res = optimize.minimize(
        gap,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": np.array([x0, x0 + [h, 0.0], x0 + [0.0, h]]),
            "xatol": 1e-13,
            "fatol": 1e-18,
            "maxiter": 800,
        },
    )
    dist = math.sqrt(max(0.0, float(res.fun)))
    return spec.point(res.x[0] + res.x[1] * spec.tau), dist


def _schroeder(f, z0: complex, tol: float, max_iter: int = 60) -> complex | None:
    """Multiplicity-robust Newton: z <- z - f f' / (f'^2 - f f'')."""
    z = complex(z0)
    for _ in range(max_iter):
        f0, f1, f2 = f(z, 0), f(z, 1), f(z, 2)
        if f0 == 0:
            return z
        denom = f1 * f1 - f0 * f2
        if denom == 0:
            return None
        step = f0 * f1 / denom
        z -= step
        if abs(z - z0) > 0.5:
            return None
        if abs(step) < tol * 1e-5:
            return z
    return z


def section_zeros(basis: SectionBasis, coeffs: np.ndarray, spec: CurveSpec) -> Divisor:
    """Zero divisor of the section sum_i coeffs[i] * basis[i]."""
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (basis.degree,) or not np.any(c):
        raise PreconditionError("need a nonzero coefficient vector of the right length")
    if basis.degree == 1:
        return Divisor.single(basis.sum)

    tol = spec.tolerances
    accept = math.sqrt(tol.root_tol)
    g = SETTINGS.zero_grid
    s, t = np.meshgrid(np.arange(g) / g, np.arange(g) / g, indexing="ij")
    grid = s + t * basis.tau
    env_grid = basis.envelope(grid)
    weighted = np.abs(basis.evaluate(c, grid)) * env_grid
    peak = float(weighted.max())

    is_min = np.ones_like(weighted, dtype=bool)
    for ds in (-1, 0, 1):
        for dt in (-1, 0, 1):
            if ds or dt:
                is_min &= weighted <= np.roll(np.roll(weighted, ds, axis=0), dt, axis=1)
    order = np.argsort(weighted[is_min])
    candidates = grid[is_min][order]

    def f(z: complex, j: int) -> complex:
        return complex(basis.evaluate(c, z, j))

    def small(z: complex) -> bool:
        return abs(f(z, 0)) * float(basis.envelope(z)) / peak < accept

    deriv_scale: dict[int, float] = {}

    def multiplicity(z: complex) -> int:
        mult = 1
        for j in range(1, basis.degree):
            if j not in deriv_scale:
                deriv_scale[j] = float((np.abs(basis.evaluate(c, grid, j)) * env_grid).max())
            if abs(f(z, j)) * float(basis.envelope(z)) / deriv_scale[j] > 1e-6:
                break
            mult += 1
        return mult

    found: list[list] = []
    for z0 in candidates:
        if sum(m for _, m in found) >= basis.degree:
            break
        z = _schroeder(f, z0, tol.root_tol)
        if z is None or not small(z):
            continue
        point = spec.point(z)
        if any(point.is_close(q, 1e-7) for q, _ in found):
            continue
        found.append([point, multiplicity(z)])

    total = sum(m for _, m in found)
    if total == basis.degree - 1:
        partial = sum(m * q.z for q, m in found)
        last = spec.point(basis.shift - partial)
        if not small(last.z):
            raise SectionZerosError("Abel completion point is not a zero", residual=total)
        for entry in found:
            if entry[0].is_close(last, 1e-7):
                entry[1] += 1
                break
        else:
            found.append([last, 1])
        total += 1
    if total != basis.degree:
        raise SectionZerosError(
            f"found {total} zeros for a section of degree {basis.degree}", residual=float(total)
        )

    D = Divisor(tuple((q, m) for q, m in found), spec.tau)
    drift = sum_divisor(D).distance(basis.sum)
    if drift > 1e-6:
        raise SectionZerosError("zeros do not add up to the bundle class", residual=drift)
    logger.debug("section zeros: %s", D)
    return D


__all__ = [
    "SectionBasis",
    "RoomMatrix",
    "LinearForm",
    "Subspace",
    "section_values",
    "basis_of_sections",
    "embedding_basis",
    "embed",
    "embed_many",
    "multiplication_matrix",
    "room_tensor",
    "span",
    "linear_forms_vanishing_on",
    "xi_perp",
    "span_contains_by_forms",
    "curve_distance",
    "section_zeros",
]

"""The elliptic Poisson bracket {x_i, x_j} = Omega_ij as the unique skew
matrix of quadrics with sum_i dF/dx_i Omega_ij = 0 for the secant
equations F (n odd) or F1, F2 (n even)."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .config import SETTINGS
from .curve import CONVENTION_TAG, CurveSpec, random_point
from .errors import CacheError, NumericFailure, PreconditionError
from .linalg import RankDecision, normalize, null_space, null_vector, numeric_rank
from .linear_systems import embed
from .polynomials import PolynomialForm, homogeneous_exponents, monomial_values
from .secants import sample_partial_secant, secant_pencil

logger = logging.getLogger(__name__)

PROBE_COUNT = 20
PROBE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class PoissonMatrix:
    """Upper triangle of Omega: coeffs[k] holds the quadric Omega_{ij},
    (i, j) = pairs[k], in the `homogeneous_exponents(n, 2)` order."""

    n: int
    coeffs: np.ndarray

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.n), 2))

    @property
    def quadrics(self) -> np.ndarray:
        return homogeneous_exponents(self.n, 2)

    def entry(self, i: int, j: int) -> PolynomialForm:
        if i == j:
            return PolynomialForm.zero(self.n, 2)
        lo, hi = min(i, j), max(i, j)
        k = self.pairs.index((lo, hi))
        form = PolynomialForm.from_vector(self.n, 2, self.coeffs[k])
        return form if i < j else -form

    def evaluate(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=complex)
        upper = self.coeffs @ monomial_values(self.quadrics, p)[0]
        M = np.zeros((self.n, self.n), dtype=complex)
        iu = np.triu_indices(self.n, 1)
        M[iu] = upper
        return M - M.T

    def derivative_tensor(self, p: np.ndarray) -> np.ndarray:
        """D[l, i, j] = d Omega_ij / d x_l at p."""
        p = np.asarray(p, dtype=complex)
        quads = self.quadrics
        grad = np.zeros((self.n, quads.shape[0]), dtype=complex)
        for q, row in enumerate(quads):
            idx = np.flatnonzero(row)
            if len(idx) == 1:
                grad[idx[0], q] = 2 * p[idx[0]]
            else:
                grad[idx[0], q] = p[idx[1]]
                grad[idx[1], q] = p[idx[0]]
        D = np.zeros((self.n, self.n, self.n), dtype=complex)
        iu = np.triu_indices(self.n, 1)
        for l in range(self.n):
            D[l][iu] = self.coeffs @ grad[l]
            D[l] = D[l] - D[l].T
        return D

    @property
    def max_abs_coeff(self) -> float:
        return float(np.abs(self.coeffs).max())

    def scaled(self, c: complex) -> "PoissonMatrix":
        return PoissonMatrix(self.n, self.coeffs * c)

    def normalized(self) -> "PoissonMatrix":
        flat = self.coeffs.ravel()
        idx = int(np.argmax(np.abs(flat)))
        coeffs = self.coeffs / flat[idx]
        coeffs.ravel()[idx] = 1.0
        return PoissonMatrix(self.n, coeffs)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                {"i": i, "j": j, "form": PolynomialForm.from_vector(self.n, 2, c).to_dict()}
                for (i, j), c in zip(self.pairs, self.coeffs)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PoissonMatrix":
        n = int(data["n"])
        pairs = list(combinations(range(n), 2))
        coeffs = np.zeros((len(pairs), homogeneous_exponents(n, 2).shape[0]), dtype=complex)
        for item in data["entries"]:
            k = pairs.index((int(item["i"]), int(item["j"])))
            coeffs[k] = PolynomialForm.from_dict(item["form"]).coefficient_vector()
        return cls(n, coeffs)


def scale_mismatch(a: PoissonMatrix, b: PoissonMatrix) -> float:
    """Relative distance between a and b after the best complex rescaling of a."""
    u, v = a.coeffs.ravel(), b.coeffs.ravel()
    c = np.vdot(u, v) / np.vdot(u, u)
    return float(np.linalg.norm(c * u - v) / np.linalg.norm(v))


def _secant_sample(seed: np.random.SeedSequence, spec: CurveSpec) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = random_point(spec.tau, rng)
    if spec.r == 1:
        return embed(x, spec)
    return sample_partial_secant(spec.r, x, False, rng, spec)


def interpolate_top_secant(
    spec: CurveSpec,
    samples: int | None = None,
) -> tuple[PolynomialForm, np.ndarray]:
    """Degree-n form through Sec_r (n = 2r + 1) and the singular values of
    the interpolation system."""
    if spec.is_even:
        raise PreconditionError("the top secant variety is a hypersurface of degree n only for odd n")
    n = spec.n
    exps = homogeneous_exponents(n, n)
    count = samples or SETTINGS.interpolation_oversample * exps.shape[0]
    if count < exps.shape[0]:
        raise ValueError(f"need at least {exps.shape[0]} samples, got {count}")

    seeds = np.random.SeedSequence([spec.tolerances.seed, n, 41]).spawn(count)
    t0 = time.perf_counter()
    points = Parallel(n_jobs=SETTINGS.threads, prefer="threads")(
        delayed(_secant_sample)(s, spec) for s in seeds
    )
    V = monomial_values(exps, np.array(points))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    v, spectrum = null_vector(V)
    logger.info(
        "interpolated degree-%d secant equation from %d samples in %.1fs",
        n, count, time.perf_counter() - t0,
    )

    tol = spec.tolerances.rank_tol
    null_dim = int(np.count_nonzero(spectrum < tol * spectrum[0]))
    gap = spectrum[-2] / max(spectrum[-1], np.finfo(float).tiny)
    if null_dim != 1 or gap < SETTINGS.rank_gap:
        raise NumericFailure(
            f"interpolation null space has dimension {null_dim} (gap {gap:.2e})",
            spectrum=spectrum[-5:],
        )
    F = PolynomialForm.from_vector(n, n, v).pruned(1e-14).normalized()
    return F, spectrum


def top_secant_equation(spec: CurveSpec) -> PolynomialForm:
    return interpolate_top_secant(spec)[0]


def secant_forms(spec: CurveSpec) -> list[PolynomialForm]:
    """[F] for odd n, [F1, F2] for even n."""
    if spec.is_even:
        return list(secant_pencil(spec))
    return [top_secant_equation(spec)]


def _exponent_keys(exps: np.ndarray, radix: int) -> np.ndarray:
    weights = radix ** np.arange(exps.shape[1], dtype=np.int64)
    return exps @ weights


def _syzygy_block(F: PolynomialForm, j: int, n: int) -> np.ndarray:
    """Rows of the coefficient identities sum_i dF/dx_i Omega_ij = 0 for one j."""
    quads = homogeneous_exponents(n, 2)
    pairs = list(combinations(range(n), 2))
    out = homogeneous_exponents(n, F.degree + 1)
    radix = F.degree + 2
    out_keys = _exponent_keys(out, radix)
    order = np.argsort(out_keys)
    sorted_keys = out_keys[order]

    block = np.zeros((out.shape[0], len(pairs) * quads.shape[0]), dtype=complex)
    for i in range(n):
        if i == j:
            continue
        g = F.derivative(i)
        if not g.coeffs.size:
            continue
        k = pairs.index((min(i, j), max(i, j)))
        sign = 1.0 if i < j else -1.0
        prod = g.exponents[:, None, :] + quads[None, :, :]
        rows = order[np.searchsorted(sorted_keys, _exponent_keys(prod.reshape(-1, n), radix))]
        cols = np.tile(k * quads.shape[0] + np.arange(quads.shape[0]), g.coeffs.size)
        vals = sign * np.repeat(g.coeffs, quads.shape[0])
        np.add.at(block, (rows, cols), vals)
    return block


def solve_syzygy(spec: CurveSpec, forms: list[PolynomialForm]) -> tuple[PoissonMatrix, np.ndarray]:
    n = spec.n
    expected = 2 if spec.is_even else 1
    if len(forms) != expected:
        raise PreconditionError(f"n={n} needs {expected} secant form(s), got {len(forms)}")
    t0 = time.perf_counter()
    blocks = Parallel(n_jobs=SETTINGS.threads, prefer="threads")(
        delayed(_syzygy_block)(F, j, n) for F in forms for j in range(n)
    )
    A = np.vstack(blocks)
    v, spectrum = null_vector(A)
    logger.info(
        "syzygy system %dx%d solved in %.1fs; smallest singular values %s",
        A.shape[0], A.shape[1], time.perf_counter() - t0, np.array2string(spectrum[-3:], precision=3),
    )

    null_dim = int(np.count_nonzero(spectrum < spec.tolerances.rank_tol * spectrum[0]))
    gap = spectrum[-2] / max(spectrum[-1], np.finfo(float).tiny)
    if null_dim != 1 or gap < SETTINGS.syzygy_gap:
        raise NumericFailure(
            f"syzygy null space has dimension {null_dim} (gap {gap:.2e})",
            spectrum=spectrum[-5:],
        )
    quads = homogeneous_exponents(n, 2).shape[0]
    omega = PoissonMatrix(n, v.reshape(-1, quads)).normalized()
    return omega, spectrum


def syzygy_poisson_matrix(spec: CurveSpec, forms: list[PolynomialForm]) -> PoissonMatrix:
    return solve_syzygy(spec, forms)[0]


def bracket_eval(omega: PoissonMatrix, p: np.ndarray) -> np.ndarray:
    return omega.evaluate(p)


def poisson_rank_decision(omega: PoissonMatrix, p: np.ndarray, spec: CurveSpec) -> RankDecision:
    """Rank of Ann(p) -> C^n / C p, alpha -> Omega(p) alpha.

    The threshold scales with |coeffs| |p|^2, a bound for |Omega(p)| that stays
    put where Omega(p) itself vanishes.
    """
    p = normalize(p)
    M = omega.evaluate(p)
    ann = null_space(p[None, :], 1e-12)
    quotient = np.eye(spec.n) - np.outer(p, p.conj())
    sv = np.linalg.svd(quotient @ M @ ann, compute_uv=False)
    scale = float(np.linalg.norm(omega.coeffs)) * float(np.linalg.norm(p)) ** 2
    return numeric_rank(sv, spec.tolerances.rank_tol, scale=scale)


def poisson_rank(omega: PoissonMatrix, p: np.ndarray, spec: CurveSpec) -> int:
    decision = poisson_rank_decision(omega, p, spec)
    if decision.ambiguous:
        logger.warning("rank decision at p is ambiguous: %s", decision.singular_values)
    return decision.rank


def jacobi_residual(omega: PoissonMatrix, p: np.ndarray) -> float:
    p = np.asarray(p, dtype=complex)
    M = omega.evaluate(p)
    D = omega.derivative_tensor(p)
    T = np.einsum("il,ljk->ijk", M, D)
    J = T + np.einsum("jki->ijk", T) + np.einsum("kij->ijk", T)
    scale = omega.max_abs_coeff ** 2 * np.linalg.norm(p) ** 3
    return float(np.abs(J).max() / scale)


def casimir_residual(omega: PoissonMatrix, forms: list[PolynomialForm], p: np.ndarray) -> float:
    p = np.asarray(p, dtype=complex)
    M = omega.evaluate(p)
    norm_m = np.linalg.norm(M)
    worst = 0.0
    for F in forms:
        g = F.gradient_at(p)
        denom = np.linalg.norm(g) * norm_m
        if denom == 0:
            continue
        worst = max(worst, float(np.linalg.norm(g @ M) / denom))
    return worst


def pencil_member_value(forms: list[PolynomialForm], p0: np.ndarray, p: np.ndarray) -> float:
    """|F2(p0) F1(p) - F1(p0) F2(p)| at unit p: the pencil member through p0."""
    F1, F2 = forms
    p0, p = normalize(p0), normalize(p)
    lam, mu = F2(p0), -F1(p0)
    return float(abs(lam * F1(p) + mu * F2(p)) / (abs(lam) + abs(mu)))


def leaf_flow(
    omega: PoissonMatrix,
    p0: np.ndarray,
    steps: int,
    dt: float,
    rng: np.random.Generator,
    spec: CurveSpec,
) -> np.ndarray:
    """RK4 trajectory of v(p) = Omega(p) alpha(p), alpha(p) the fixed random
    covector projected onto Ann(p); rows are unit-norm points."""
    if steps < 0 or dt <= 0:
        raise ValueError("steps must be >= 0 and dt > 0")
    n = spec.n
    alpha0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    def velocity(p: np.ndarray) -> np.ndarray:
        alpha = alpha0 - (alpha0 @ p) / (p.conj() @ p) * p.conj()
        return omega.evaluate(p) @ alpha

    p = normalize(p0)
    speed0 = float(np.linalg.norm(velocity(p)))
    trajectory = [p]
    if speed0 == 0.0:
        return np.array(trajectory * (steps + 1))
    h = dt / speed0
    for _ in range(steps):
        k1 = velocity(p)
        k2 = velocity(p + 0.5 * h * k1)
        k3 = velocity(p + 0.5 * h * k2)
        k4 = velocity(p + h * k3)
        if np.linalg.norm(k4) > 1e6 * speed0:
            raise NumericFailure("flow step rejected: velocity blew up", residual=float(np.linalg.norm(k4)))
        p = normalize(p + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
        trajectory.append(p)
    return np.array(trajectory)


@dataclass(frozen=True, eq=False)
class PoissonCache:
    spec: CurveSpec
    forms: list[PolynomialForm]
    omega: PoissonMatrix
    diagnostics: dict = field(default_factory=dict)
    probes: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    probe_values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    convention_tag: str = CONVENTION_TAG

    def to_dict(self) -> dict:
        iu = np.triu_indices(self.spec.n, 1)
        return {
            "convention_tag": self.convention_tag,
            "spec": self.spec.to_dict(),
            "forms": [F.to_dict() for F in self.forms],
            "omega_matrix": self.omega.to_dict(),
            "diagnostics": self.diagnostics,
            "probes": [
                {
                    "point": [[c.real, c.imag] for c in p.tolist()],
                    "values": [[c.real, c.imag] for c in vals[iu].tolist()],
                }
                for p, vals in zip(self.probes, self.probe_values)
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "PoissonCache":
        try:
            if data.get("convention_tag") != CONVENTION_TAG:
                raise CacheError(f"cache written under convention {data.get('convention_tag')!r}")
            spec = CurveSpec.from_dict(data["spec"])
            forms = [PolynomialForm.from_dict(f) for f in data["forms"]]
            omega = PoissonMatrix.from_dict(data["omega_matrix"])
            n = spec.n
            iu = np.triu_indices(n, 1)
            probes, values = [], []
            for item in data.get("probes", []):
                probes.append([complex(re, im) for re, im in item["point"]])
                M = np.zeros((n, n), dtype=complex)
                M[iu] = [complex(re, im) for re, im in item["values"]]
                values.append(M - M.T)
        except CacheError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CacheError(f"malformed Poisson cache: {exc}") from exc
        cache = cls(
            spec,
            forms,
            omega,
            data.get("diagnostics", {}),
            np.array(probes, dtype=complex).reshape(-1, n),
            np.array(values, dtype=complex).reshape(-1, n, n),
        )
        cache.check_probes()
        return cache

    @classmethod
    def load(cls, path: str | Path) -> "PoissonCache":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CacheError(f"cannot read Poisson cache {path}: {exc}") from exc
        return cls.from_dict(data)

    def check_probes(self) -> float:
        worst = 0.0
        for p, stored in zip(self.probes, self.probe_values):
            fresh = self.omega.evaluate(p)
            denom = max(float(np.linalg.norm(stored)), np.finfo(float).tiny)
            worst = max(worst, float(np.linalg.norm(fresh - stored) / denom))
        if worst > PROBE_RTOL:
            raise CacheError(f"probe values drifted by {worst:.2e} relative")
        return worst


def build_cache(spec: CurveSpec, samples: int | None = None, seed: int | None = None) -> PoissonCache:
    """Secant forms, the syzygy solution and probe values for one curve."""
    if seed is not None:
        spec = replace(spec, tolerances=replace(spec.tolerances, seed=seed))
    t0 = time.perf_counter()
    diagnostics: dict = {}
    if spec.is_even:
        forms = list(secant_pencil(spec))
    else:
        F, interp = interpolate_top_secant(spec, samples)
        forms = [F]
        diagnostics["interpolation_spectrum_tail"] = interp[-5:].tolist()
    omega, spectrum = solve_syzygy(spec, forms)
    diagnostics["null_spectrum"] = spectrum.tolist()
    diagnostics["null_gap"] = float(spectrum[-2] / max(spectrum[-1], np.finfo(float).tiny))

    rng = np.random.default_rng([spec.tolerances.seed, spec.n, 53])
    probes = normalize(rng.standard_normal((PROBE_COUNT, spec.n)) + 1j * rng.standard_normal((PROBE_COUNT, spec.n)))
    values = np.array([omega.evaluate(p) for p in probes])
    diagnostics["seconds"] = round(time.perf_counter() - t0, 3)
    logger.info("Poisson cache for n=%d built in %.1fs", spec.n, diagnostics["seconds"])
    return PoissonCache(spec, forms, omega, diagnostics, probes, values)


__all__ = [
    "PoissonMatrix",
    "PoissonCache",
    "scale_mismatch",
    "interpolate_top_secant",
    "top_secant_equation",
    "secant_forms",
    "solve_syzygy",
    "syzygy_poisson_matrix",
    "bracket_eval",
    "poisson_rank_decision",
    "poisson_rank",
    "jacobi_residual",
    "casimir_residual",
    "pencil_member_value",
    "leaf_flow",
    "build_cache",
]

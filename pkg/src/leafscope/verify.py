"""Acceptance battery: structural properties of the bracket and of its
leaves, checked numerically on one curve.

Each check returns a CheckResult. Checks that do not apply to the parity of
n are recorded as skipped. Ambiguous classifications near strata are counted
separately and only fail the report past a small threshold.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from .bundles import (
    DecomposableSum,
    IndecomposableOdd,
    IndecomposableOmega,
    LeafLabel,
    describe,
    enumerate_leaf_families,
    is_double_omega,
    same_bundle,
)
from .classify import AmbiguousClassification, classify, consistency_check, perturb_in_span, sample_leaf
from .config import SETTINGS
from .curve import CurveSpec, Divisor, gcd, lcm, lin_equiv, random_divisor_with_sum, random_point, sum_divisor
from .errors import LeafscopeError
from .linalg import normalize
from .linear_systems import span
from .poisson import (
    PoissonCache,
    PoissonMatrix,
    build_cache,
    jacobi_residual,
    leaf_flow,
    pencil_member_value,
)
from .secants import (
    SecantCount,
    partial_secant_dim,
    sample_partial_secant,
    secant_count_decision,
    secant_dimension_probe,
    secant_variety_dim,
    singular_quadrics,
)

logger = logging.getLogger(__name__)

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"
LEVELS = ("quick", "full")

# Share of classified samples allowed to come back ambiguous.
AMBIGUOUS_FRACTION = 0.02
# Points classified along each flow path, the endpoint included.
FLOW_CHECKPOINTS = 5


@dataclass(frozen=True)
class Budget:
    jacobi_points: int
    rank_samples: int
    dimension_samples: int
    secant_samples: int
    odd_points: int
    split_trials: int
    lattice_pairs: int
    flows: int
    flow_steps: int
    round_trips: int
    flow_dt: float = 1e-3


BUDGETS = {
    "quick": Budget(20, 24, 5, 40, 3, 8, 20, 3, 10, 3),
    "full": Budget(100, 200, 20, 200, 20, 50, 100, 20, 50, 30),
}


@dataclass
class CheckResult:
    name: str
    status: str
    residual: float | None = None
    tolerance: float | None = None
    samples: int = 0
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "seconds": self.seconds,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CheckResult":
        status = data["status"]
        if status not in (PASS, FAIL, SKIPPED):
            raise ValueError(f"unknown check status {status!r}")
        return cls(
            name=str(data["name"]),
            status=status,
            residual=None if data.get("residual") is None else float(data["residual"]),
            tolerance=None if data.get("tolerance") is None else float(data["tolerance"]),
            samples=int(data.get("samples", 0)),
            seconds=float(data.get("seconds", 0.0)),
            detail=str(data.get("detail", "")),
        )


@dataclass
class VerificationReport:
    n: int
    level: str
    checks: list[CheckResult] = field(default_factory=list)
    ambiguous_count: int = 0
    classified_count: int = 0

    @property
    def ambiguous_limit(self) -> int:
        return max(1, math.ceil(AMBIGUOUS_FRACTION * self.classified_count))

    @property
    def passed(self) -> bool:
        if any(c.status == FAIL for c in self.checks):
            return False
        return self.ambiguous_count <= self.ambiguous_limit

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "level": self.level,
            "passed": self.passed,
            "ambiguous_count": self.ambiguous_count,
            "classified_count": self.classified_count,
            "checks": [c.to_dict() for c in self.checks],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        return cls(
            n=int(data["n"]),
            level=str(data["level"]),
            checks=[CheckResult.from_dict(c) for c in data["checks"]],
            ambiguous_count=int(data.get("ambiguous_count", 0)),
            classified_count=int(data.get("classified_count", 0)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "VerificationReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class _Context:
    spec: CurveSpec
    cache: PoissonCache
    budget: Budget
    seeds: np.random.SeedSequence
    ambiguous: int = 0
    classified: int = 0

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seeds.spawn(1)[0])

    def spawn(self, count: int) -> list[np.random.SeedSequence]:
        return self.seeds.spawn(count)


def _parallel(fn: Callable, items) -> list:
    return Parallel(n_jobs=SETTINGS.threads, prefer="threads")(delayed(fn)(*args) for args in items)


def _skipped(name: str, reason: str) -> CheckResult:
    return CheckResult(name, SKIPPED, detail=reason)


def check_syzygy_uniqueness(ctx: _Context) -> CheckResult:
    name = "syzygy_uniqueness"
    diag = ctx.cache.diagnostics
    if "null_spectrum" not in diag:
        return _skipped(name, "cache carries no null spectrum")
    spectrum = np.asarray(diag["null_spectrum"], dtype=float)
    null_dim = int(np.count_nonzero(spectrum < ctx.spec.tolerances.rank_tol * spectrum[0]))
    gap = float(spectrum[-2] / max(spectrum[-1], np.finfo(float).tiny))
    seconds = float(diag.get("seconds", 0.0))
    ok = null_dim == 1 and gap >= SETTINGS.syzygy_gap and seconds <= 60.0
    return CheckResult(
        name,
        PASS if ok else FAIL,
        residual=1.0 / gap if gap > 0 else math.inf,
        tolerance=1.0 / SETTINGS.syzygy_gap,
        samples=1,
        detail=f"null dimension {null_dim}, gap {gap:.3e}, build {seconds:.1f}s",
    )


def check_jacobi(ctx: _Context) -> CheckResult:
    rng = ctx.rng()
    n = ctx.spec.n
    points = normalize(rng.standard_normal((ctx.budget.jacobi_points, n)) + 1j * rng.standard_normal((ctx.budget.jacobi_points, n)))
    omega = ctx.cache.omega
    worst = max(jacobi_residual(omega, p) for p in points)

    noise = rng.standard_normal(omega.coeffs.shape) + 1j * rng.standard_normal(omega.coeffs.shape)
    perturbed = PoissonMatrix(n, omega.coeffs + 1e-2 * omega.max_abs_coeff * noise)
    control = min(jacobi_residual(perturbed, p) for p in points)

    ok = worst < 1e-6 and control > 1e-4
    return CheckResult(
        "jacobi",
        PASS if ok else FAIL,
        residual=worst,
        tolerance=1e-6,
        samples=len(points),
        detail=f"perturbed bracket residual {control:.3e} (needs > 1e-4)",
    )


def _family_points(ctx: _Context, per_family: int, positive_only: bool = False) -> list[tuple]:
    """(family, seed) jobs, `per_family` of each enumerated leaf family."""
    families = [f for f in enumerate_leaf_families(ctx.spec) if not positive_only or f.leaf_dim > 0]
    repeated = [f for f in families for _ in range(per_family)]
    return list(zip(repeated, ctx.spawn(len(repeated))))


def _leaf_point(fam, rng: np.random.Generator, spec: CurveSpec):
    b = fam.representative(rng, spec)
    return b, sample_leaf(b, rng, spec)


def check_rank_identity(ctx: _Context) -> CheckResult:
    spec = ctx.spec
    families = enumerate_leaf_families(spec)
    per_family = max(1, math.ceil(ctx.budget.rank_samples / len(families)))

    def one(fam, seed):
        _, p = _leaf_point(fam, np.random.default_rng(seed), spec)
        return consistency_check(p, spec, ctx.cache)

    records = _parallel(one, _family_points(ctx, per_family))
    hard = [r for r in records if not r.ok and not r.ambiguous]
    ambiguous = sum(1 for r in records if r.ambiguous)
    ctx.ambiguous += ambiguous
    ctx.classified += len(records)
    agreement = sum(1 for r in records if r.ok) / len(records)
    ok = not hard and agreement >= 1.0 - AMBIGUOUS_FRACTION
    detail = f"agreement {agreement:.3f}, ambiguous {ambiguous}"
    if hard:
        r = hard[0]
        detail += f"; e.g. rank {r.rank} vs expected {r.expected}"
    return CheckResult(
        "rank_identity",
        PASS if ok else FAIL,
        residual=1.0 - agreement,
        tolerance=AMBIGUOUS_FRACTION,
        samples=len(records),
        detail=detail,
    )


def check_dimension_table(ctx: _Context) -> CheckResult:
    spec = ctx.spec
    n = spec.n
    rng = ctx.rng()
    mismatches: list[str] = []
    samples = 0
    for d in range(1, spec.r + 1):
        for _ in range(ctx.budget.dimension_samples):
            x = random_point(spec.tau, rng)
            got = secant_dimension_probe(d, x, rng, spec)
            samples += 1
            if got != partial_secant_dim(d, n):
                mismatches.append(f"Sec_{{{d},x}}: {got}")
            if 2 * d < n:
                got = secant_dimension_probe(d, None, rng, spec)
                samples += 1
                if got != secant_variety_dim(d, n):
                    mismatches.append(f"Sec_{d}: {got}")
    return CheckResult(
        "dimension_table",
        FAIL if mismatches else PASS,
        residual=float(len(mismatches)),
        tolerance=0.0,
        samples=samples,
        detail="; ".join(mismatches[:5]),
    )


def check_quadric_geometry(ctx: _Context) -> CheckResult:
    name = "quadric_geometry"
    spec = ctx.spec
    if spec.n != 4:
        return _skipped(name, "pencil of quadrics is checked for n = 4")
    rng = ctx.rng()
    members = [m for m in singular_quadrics(spec) if m.rank == 3]
    problems: list[str] = []
    if len(members) != 4:
        problems.append(f"{len(members)} singular members")

    for m in members:
        label = classify(m.vertex, spec, ctx.cache)
        ctx.classified += 1
        if isinstance(label, AmbiguousClassification):
            ctx.ambiguous += 1
            continue
        if not is_double_omega(label.bundle, spec) or label.rank != 0:
            problems.append(f"vertex classified {describe(label.bundle, spec)} rank {label.rank}")
            continue
        D = random_divisor_with_sum(spec.r, label.bundle.x, rng)
        moved = perturb_in_span(m.vertex, D, 1e-2, rng, spec)
        after = classify(moved, spec)
        ctx.classified += 1
        if isinstance(after, AmbiguousClassification):
            ctx.ambiguous += 1
        elif not isinstance(after.bundle, IndecomposableOmega):
            problems.append(f"perturbed vertex classified {describe(after.bundle, spec)}")

    return CheckResult(
        name,
        FAIL if problems else PASS,
        residual=float(len(problems)),
        tolerance=0.0,
        samples=len(members),
        detail="; ".join(problems),
    )


def check_top_secant_hypersurface(ctx: _Context) -> CheckResult:
    name = "top_secant_hypersurface"
    spec = ctx.spec
    if spec.is_even:
        return _skipped(name, "the degree-n secant hypersurface exists for odd n")
    F = ctx.cache.forms[0]
    scale = float(np.abs(F.coeffs).sum())

    def fresh(seed):
        rng = np.random.default_rng(seed)
        x = random_point(spec.tau, rng)
        return sample_partial_secant(spec.r, x, False, rng, spec)

    points = _parallel(fresh, [(s,) for s in ctx.spawn(ctx.budget.secant_samples)])
    worst = max(abs(F(p)) / scale for p in points)

    problems: list[str] = []
    if F.degree != spec.n:
        problems.append(f"form has degree {F.degree}")
    if worst > 1e-8:
        problems.append(f"relative value {worst:.3e} on Sec_r")
    rng = ctx.rng()
    for _ in range(ctx.budget.odd_points):
        p = rng.standard_normal(spec.n) + 1j * rng.standard_normal(spec.n)
        label = classify(p, spec, ctx.cache)
        ctx.classified += 1
        if isinstance(label, AmbiguousClassification):
            ctx.ambiguous += 1
        elif not isinstance(label.bundle, IndecomposableOdd) or label.rank != spec.n - 1:
            problems.append(f"random point classified {describe(label.bundle, spec)} rank {label.rank}")

    return CheckResult(
        name,
        FAIL if problems else PASS,
        residual=worst,
        tolerance=1e-8,
        samples=len(points) + ctx.budget.odd_points,
        detail="; ".join(problems[:5]),
    )


def check_unique_pencil_split(ctx: _Context) -> CheckResult:
    name = "unique_pencil_split"
    spec = ctx.spec
    if not spec.is_even:
        return _skipped(name, "r-secant counts are defined for even n")
    omegas = spec.omega_coset()
    trials = ctx.budget.split_trials

    def one(k, seed, want):
        rng = np.random.default_rng(seed)
        w = omegas[k % len(omegas)]
        if want is SecantCount.UNIQUE:
            p = sample_partial_secant(spec.r, w, True, rng, spec)
        else:
            p = sample_leaf(DecomposableSum(spec.r, w), rng, spec)
        return want, secant_count_decision(p, w, spec)

    jobs = [(k, s, SecantCount.UNIQUE) for k, s in enumerate(ctx.spawn(trials))]
    jobs += [(k, s, SecantCount.PENCIL) for k, s in enumerate(ctx.spawn(trials))]
    results = _parallel(one, jobs)

    wrong = 0
    ambiguous = 0
    for want, (count, decision) in results:
        if decision.ambiguous:
            ambiguous += 1
        elif count is not want:
            wrong += 1
    ctx.ambiguous += ambiguous
    ctx.classified += len(results)
    return CheckResult(
        name,
        FAIL if wrong else PASS,
        residual=float(wrong),
        tolerance=0.0,
        samples=len(results),
        detail=f"{wrong} miscounted, {ambiguous} ambiguous",
    )


def _spread_points(count: int, rng: np.random.Generator, spec: CurveSpec, sep: float = 0.05):
    while True:
        pts = [random_point(spec.tau, rng) for _ in range(count)]
        if all(pts[i].distance(pts[j]) > sep for i in range(count) for j in range(i + 1, count)):
            return pts


def _lattice_pair(rng: np.random.Generator, spec: CurveSpec) -> tuple[Divisor, Divisor]:
    n = spec.n
    while True:
        total = int(rng.integers(2, n + 1))
        shared = int(rng.integers(0, total - 1))
        own1 = int(rng.integers(1, total - shared))
        pts = _spread_points(total, rng, spec)
        common = pts[:shared]
        D1 = Divisor.from_points(common + pts[shared : shared + own1], spec.tau)
        D2 = Divisor.from_points(common + pts[shared + own1 :], spec.tau)
        L = lcm(D1, D2)
        if L.degree < n or not sum_divisor(L).is_close(spec.l_sum, 1e-6):
            return D1, D2


def check_span_lattice(ctx: _Context) -> CheckResult:
    spec = ctx.spec
    n = spec.n
    tol = 1e-7
    rng = ctx.rng()
    worst = 0.0
    problems: list[str] = []

    for _ in range(ctx.budget.lattice_pairs):
        D1, D2 = _lattice_pair(rng, spec)
        S1, S2 = span(D1, spec), span(D2, spec)
        for D, S in ((D1, S1), (D2, S2)):
            if D.degree and S.projective_dim != min(D.degree, n) - 1:
                problems.append(f"span of degree-{D.degree} divisor has dimension {S.projective_dim}")
        joined = S1.join(S2, spec.tolerances.rank_tol)
        worst = max(worst, joined.distance(span(lcm(D1, D2), spec)))
        G = gcd(D1, D2)
        met = S1.meet(S2, spec.tolerances.rank_tol)
        if met.dim != G.degree:
            problems.append(f"meet has dimension {met.dim}, gcd degree {G.degree}")
        elif G.degree:
            worst = max(worst, met.distance(span(G, spec)))

    # Complete hyperplane sections against generic degree-n divisors.
    for _ in range(max(1, ctx.budget.lattice_pairs // 10)):
        H = random_divisor_with_sum(n, spec.l_sum, rng, min_separation=0.05)
        if span(H, spec).projective_dim != n - 2:
            problems.append("hyperplane section does not span a hyperplane")
        G = Divisor.from_points(_spread_points(n, rng, spec), spec.tau)
        if not lin_equiv(G, H, 1e-6) and span(G, spec).projective_dim != n - 1:
            problems.append("generic degree-n divisor does not span P^{n-1}")

    if worst > tol:
        problems.append(f"subspace distance {worst:.3e}")
    return CheckResult(
        "span_lattice",
        FAIL if problems else PASS,
        residual=worst,
        tolerance=tol,
        samples=ctx.budget.lattice_pairs,
        detail="; ".join(problems[:5]),
    )


def flow_checkpoints(steps: int) -> list[int]:
    """Path indices classified along a flow of `steps` steps; always ends at `steps`."""
    stride = max(1, steps // FLOW_CHECKPOINTS)
    return sorted({*range(stride, steps + 1, stride), steps})


def check_flow_invariance(ctx: _Context) -> CheckResult:
    spec = ctx.spec
    budget = ctx.budget
    families = [f for f in enumerate_leaf_families(spec) if f.leaf_dim > 0]
    per_family = max(1, math.ceil(budget.flows / len(families)))

    def one(fam, seed):
        rng = np.random.default_rng(seed)
        b, p0 = _leaf_point(fam, rng, spec)
        path = leaf_flow(ctx.cache.omega, p0, budget.flow_steps, budget.flow_dt, rng, spec)
        drift = max(pencil_member_value(ctx.cache.forms, p0, q) for q in path) if spec.is_even else 0.0
        return b, [(k, classify(path[k], spec)) for k in flow_checkpoints(budget.flow_steps)], drift

    results = _parallel(one, _family_points(ctx, per_family, positive_only=True))
    problems: list[str] = []
    ambiguous = 0
    worst = 0.0
    classified = 0
    for b, labels, drift in results:
        worst = max(worst, drift)
        classified += len(labels)
        for step, label in labels:
            if isinstance(label, AmbiguousClassification):
                ambiguous += 1
            elif not same_bundle(label.bundle, b, spec, 1e-6):
                problems.append(f"{describe(b, spec)} flowed to {describe(label.bundle, spec)} by step {step}")
                break
    ctx.ambiguous += ambiguous
    ctx.classified += classified
    if worst > 1e-6:
        problems.append(f"pencil member drifted by {worst:.3e}")
    return CheckResult(
        "flow_invariance",
        FAIL if problems else PASS,
        residual=worst,
        tolerance=1e-6,
        samples=len(results),
        detail="; ".join(problems[:5]),
    )


def check_round_trip(ctx: _Context) -> CheckResult:
    spec = ctx.spec

    def one(fam, seed):
        rng = np.random.default_rng(seed)
        b = fam.representative(rng, spec)
        label = None
        # One resample when the first draw lands too close to a boundary.
        for _ in range(2):
            label = classify(sample_leaf(b, rng, spec), spec)
            if isinstance(label, LeafLabel):
                break
        return fam.name, b, label

    results = _parallel(one, _family_points(ctx, ctx.budget.round_trips))
    wrong: list[str] = []
    ambiguous = 0
    for name, b, label in results:
        if isinstance(label, AmbiguousClassification):
            ambiguous += 1
        elif not same_bundle(label.bundle, b, spec, 1e-6):
            wrong.append(f"{name}: {describe(label.bundle, spec)}")
    ctx.ambiguous += ambiguous
    ctx.classified += len(results)
    return CheckResult(
        "round_trip",
        FAIL if wrong else PASS,
        residual=float(len(wrong)),
        tolerance=0.0,
        samples=len(results),
        detail="; ".join(wrong[:5]),
    )


CHECKS: list[Callable[[_Context], CheckResult]] = [
    check_syzygy_uniqueness,
    check_jacobi,
    check_rank_identity,
    check_dimension_table,
    check_quadric_geometry,
    check_top_secant_hypersurface,
    check_unique_pencil_split,
    check_span_lattice,
    check_flow_invariance,
    check_round_trip,
]


def run_verification(
    spec: CurveSpec,
    cache: PoissonCache | None = None,
    level: str = "quick",
) -> VerificationReport:
    if level not in BUDGETS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    if cache is None:
        cache = build_cache(spec)
    elif cache.spec.n != spec.n or abs(cache.spec.tau - spec.tau) > 1e-12:
        raise ValueError(f"cache was built for n={cache.spec.n}, tau={cache.spec.tau}, not this curve")

    ctx = _Context(spec, cache, BUDGETS[level], np.random.SeedSequence([spec.tolerances.seed, spec.n, 71]))
    report = VerificationReport(spec.n, level)
    for check in CHECKS:
        t0 = time.perf_counter()
        try:
            result = check(ctx)
        except LeafscopeError as exc:
            result = CheckResult(check.__name__.removeprefix("check_"), FAIL, detail=f"{type(exc).__name__}: {exc}")
        result.seconds = round(time.perf_counter() - t0, 3)
        logger.info("%-24s %-7s %.1fs %s", result.name, result.status, result.seconds, result.detail)
        report.checks.append(result)

    report.ambiguous_count = ctx.ambiguous
    report.classified_count = ctx.classified
    return report


__all__ = [
    "Budget",
    "BUDGETS",
    "CheckResult",
    "VerificationReport",
    "run_verification",
]

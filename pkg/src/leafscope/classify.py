"""Leaf labels for points of P^{n-1}.

Decision order: distance to E, then the smallest partial secant through the
point, then (n even, x in Omega) the number of r-secants of that class.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from joblib import Parallel, delayed

from .bundles import (
    BundleDescriptor,
    DecomposableSum,
    IndecomposableOdd,
    IndecomposableOmega,
    LeafLabel,
    describe,
    is_double_omega,
    leaf_dim,
    leaf_nonempty,
    to_dict,
)
from .config import SETTINGS
from .curve import CurveSpec, Divisor
from .errors import NumericFailure, RejectionBudgetExceeded
from .linalg import normalize, null_space
from .linear_systems import room_tensor, span
from .secants import (
    SecantCount,
    SecantLevel,
    TopStratum,
    secant_count_decision,
    find_secant_divisor,
    minimal_secant_level,
    sample_partial_secant,
)

if TYPE_CHECKING:
    from .poisson import PoissonCache

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AmbiguousClassification:
    candidates: tuple[BundleDescriptor, ...]
    residuals: tuple[float, ...]
    reason: str

    def to_dict(self) -> dict:
        return {
            "variant": "ambiguous",
            "reason": self.reason,
            "candidates": [to_dict(b) for b in self.candidates],
            "residuals": list(self.residuals),
        }


Classification = LeafLabel | AmbiguousClassification


def _next_stratum(level: SecantLevel, spec: CurveSpec) -> BundleDescriptor:
    if level.d < spec.r:
        return DecomposableSum(level.d + 1, level.x)
    return IndecomposableOdd() if not spec.is_even else IndecomposableOmega(level.x)


def _with_rank(label: LeafLabel, p: np.ndarray, spec: CurveSpec, cache: "PoissonCache | None") -> LeafLabel:
    if cache is None:
        return label
    from .poisson import poisson_rank

    return LeafLabel(label.bundle, label.witness, label.secant_count, poisson_rank(cache.omega, p, spec))


def _label(p: np.ndarray, spec: CurveSpec) -> Classification:
    try:
        level = minimal_secant_level(p, spec)
    except NumericFailure as exc:
        logger.info("no secant level for point: %s", exc)
        residuals = () if exc.residual is None else (exc.residual,)
        return AmbiguousClassification((), residuals, str(exc))
    if isinstance(level, TopStratum):
        return LeafLabel(IndecomposableOdd())
    if level.ambiguous:
        candidates = (DecomposableSum(level.d, level.x), _next_stratum(level, spec))
        return AmbiguousClassification(
            candidates,
            (level.indicator,) + tuple(a.indicator for a in level.alternatives),
            f"rank gap fails at level {level.d}",
        )

    d, x = level.d, level.x
    if d == 1:
        return LeafLabel(DecomposableSum(1, x), Divisor.single(x))

    if 2 * d < spec.n or not spec.in_omega(x):
        try:
            witness = find_secant_divisor(p, d, x, spec)
        except NumericFailure as exc:
            return AmbiguousClassification((DecomposableSum(d, x),), (level.indicator,), str(exc))
        return LeafLabel(DecomposableSum(d, x), witness)

    try:
        count, decision = secant_count_decision(p, x, spec)
    except NumericFailure as exc:
        return AmbiguousClassification(
            (IndecomposableOmega(x), DecomposableSum(d, x)), tuple(exc.spectrum or ()), str(exc)
        )
    if decision.ambiguous:
        return AmbiguousClassification(
            (IndecomposableOmega(x), DecomposableSum(d, x)),
            decision.singular_values,
            "unique/pencil split is ambiguous",
        )
    bundle = IndecomposableOmega(x) if count is SecantCount.UNIQUE else DecomposableSum(d, x)
    try:
        witness = find_secant_divisor(p, d, x, spec)
    except NumericFailure as exc:
        return AmbiguousClassification((bundle,), decision.singular_values, str(exc))
    return LeafLabel(bundle, witness, count)


def classify(p: np.ndarray, spec: CurveSpec, cache: "PoissonCache | None" = None) -> Classification:
    p = normalize(p)
    result = _label(p, spec)
    if isinstance(result, LeafLabel):
        result = _with_rank(result, p, spec, cache)
        logger.debug("classified as %s", describe(result.bundle, spec))
    return result


def classify_batch(
    points: np.ndarray,
    spec: CurveSpec,
    cache: "PoissonCache | None" = None,
) -> list[Classification]:
    return Parallel(n_jobs=SETTINGS.threads, prefer="threads")(
        delayed(classify)(p, spec, cache) for p in np.atleast_2d(points)
    )


def perturb_in_span(
    p: np.ndarray,
    witness: Divisor,
    eps: float,
    rng: np.random.Generator,
    spec: CurveSpec,
) -> np.ndarray:
    """Move p by eps along a random direction of span(witness)."""
    p = normalize(p)
    q = span(witness, spec).random_point(rng)
    q = q - np.vdot(p, q) * p
    return normalize(p + eps * q / np.linalg.norm(q))


def tangent_perturbation(p: np.ndarray, eps: float, rng: np.random.Generator, spec: CurveSpec) -> np.ndarray:
    label = classify(p, spec)
    if not isinstance(label, LeafLabel) or label.witness is None:
        raise ValueError("point has no witness divisor to perturb along")
    return perturb_in_span(p, label.witness, eps, rng, spec)


def _sample_double_omega(b: DecomposableSum, rng: np.random.Generator, spec: CurveSpec) -> np.ndarray:
    """The point whose room matrix at omega has a random pencil of sections
    as its left kernel. For sections s, s' of class omega, s V' + s' V' is a
    hyperplane of V_n, so the point is unique."""
    tensor = room_tensor(b.d, [b.x.z], spec)[0].reshape(b.d, -1)
    for attempt in range(SETTINGS.rejection_budget):
        pencil = rng.standard_normal((2, b.d)) + 1j * rng.standard_normal((2, b.d))
        rows = (pencil @ tensor).reshape(-1, spec.n)
        kernel = null_space(rows, spec.tolerances.rank_tol)
        if kernel.shape[1] == 1:
            p = normalize(kernel[:, 0])
            count, decision = secant_count_decision(p, b.x, spec)
            if count is SecantCount.PENCIL and not decision.ambiguous:
                return p
        logger.debug("double-omega draw %d rejected", attempt)
    raise RejectionBudgetExceeded("no point with a pencil of r-secants of class omega")


def sample_leaf(b: BundleDescriptor, rng: np.random.Generator, spec: CurveSpec) -> np.ndarray:
    if not leaf_nonempty(b, spec):
        raise ValueError(f"{describe(b, spec)} has no leaf for n={spec.n}")

    if isinstance(b, DecomposableSum):
        if is_double_omega(b, spec):
            return _sample_double_omega(b, rng, spec)
        return sample_partial_secant(b.d, b.x, True, rng, spec)

    for attempt in range(SETTINGS.rejection_budget):
        if isinstance(b, IndecomposableOdd):
            p = normalize(rng.standard_normal(spec.n) + 1j * rng.standard_normal(spec.n))
            if isinstance(minimal_secant_level(p, spec), TopStratum):
                return p
        else:
            p = sample_partial_secant(spec.r, b.omega, True, rng, spec)
            count, decision = secant_count_decision(p, b.omega, spec)
            if count is SecantCount.UNIQUE and not decision.ambiguous:
                return p
        logger.debug("sample_leaf rejected draw %d for %s", attempt, describe(b, spec))
    raise RejectionBudgetExceeded(f"no point of the {describe(b, spec)} leaf found")


@dataclass(frozen=True)
class ConsistencyRecord:
    label: Classification
    rank: int | None
    expected: int | None
    ok: bool
    ambiguous: bool
    singular_values: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "label": self.label.to_dict(),
            "rank": self.rank,
            "expected": self.expected,
            "ok": self.ok,
            "ambiguous": self.ambiguous,
        }


def consistency_check(p: np.ndarray, spec: CurveSpec, cache: "PoissonCache") -> ConsistencyRecord:
    """rank of the bracket at p against n - dim End of the classified bundle."""
    from .poisson import poisson_rank_decision

    p = normalize(p)
    label = classify(p, spec)
    decision = poisson_rank_decision(cache.omega, p, spec)
    if isinstance(label, AmbiguousClassification):
        return ConsistencyRecord(label, decision.rank, None, False, True, decision.singular_values)
    expected = leaf_dim(label.bundle, spec)
    ok = decision.rank == expected
    if not ok:
        logger.warning(
            "rank %d but leaf %s has dimension %d", decision.rank, describe(label.bundle, spec), expected
        )
    return ConsistencyRecord(label, decision.rank, expected, ok, decision.ambiguous, decision.singular_values)


__all__ = [
    "AmbiguousClassification",
    "Classification",
    "ConsistencyRecord",
    "classify",
    "classify_batch",
    "perturb_in_span",
    "tangent_perturbation",
    "sample_leaf",
    "consistency_check",
]

"""Catalogue of the rank-2 middle terms E with nonempty leaves, and the
closed-form invariants attached to them.

DecomposableSum(d, x) is O(D) + L(-D) for any D of degree d with sum x; at
d = n/2 and x in Omega it is L_w + L_w.  Its two summands have degrees d and
n - d and sums x and l_sum - x, so (r, x) and (r, l_sum - x) name the same
bundle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .curve import CurveSpec, Divisor, EPoint, random_point
from .secants import SecantCount


@dataclass(frozen=True)
class DecomposableSum:
    d: int
    x: EPoint
    variant: ClassVar[str] = "decomposable_sum"


@dataclass(frozen=True)
class IndecomposableOdd:
    variant: ClassVar[str] = "indecomposable_odd"


@dataclass(frozen=True)
class IndecomposableOmega:
    omega: EPoint
    variant: ClassVar[str] = "indecomposable_omega"


BundleDescriptor = Union[DecomposableSum, IndecomposableOdd, IndecomposableOmega]


def is_double_omega(b: BundleDescriptor, spec: CurveSpec) -> bool:
    """True for L_w + L_w, stored as DecomposableSum(n/2, w)."""
    return isinstance(b, DecomposableSum) and 2 * b.d == spec.n and spec.in_omega(b.x)


def leaf_nonempty(b: BundleDescriptor, spec: CurveSpec) -> bool:
    if isinstance(b, DecomposableSum):
        return 1 <= b.d <= spec.n / 2
    if isinstance(b, IndecomposableOdd):
        return not spec.is_even
    if isinstance(b, IndecomposableOmega):
        return spec.is_even and spec.in_omega(b.omega)
    return False


def _require(b: BundleDescriptor, spec: CurveSpec) -> None:
    if not leaf_nonempty(b, spec):
        raise ValueError(f"{describe(b, spec)} has no leaf for n={spec.n}")


def end_dim(b: BundleDescriptor, spec: CurveSpec) -> int:
    _require(b, spec)
    if isinstance(b, IndecomposableOdd):
        return 1
    if isinstance(b, IndecomposableOmega):
        return 2
    if is_double_omega(b, spec):
        return 4
    return 2 + (spec.n - 2 * b.d)


def aut_dim(b: BundleDescriptor, spec: CurveSpec) -> int:
    # Aut(E) is open in End(E) for every bundle in the catalogue.
    return end_dim(b, spec)


def leaf_dim(b: BundleDescriptor, spec: CurveSpec) -> int:
    return spec.n - aut_dim(b, spec)


def pz_degree(b: BundleDescriptor, spec: CurveSpec) -> int:
    _require(b, spec)
    if isinstance(b, DecomposableSum) and b.d == 1:
        return 2
    if spec.n == 4 and is_double_omega(b, spec):
        return 2
    return spec.n


def _line_h0(degree: int, class_sum: EPoint, spec: CurveSpec) -> int:
    if degree > 0:
        return degree
    if degree == 0:
        return 1 if class_sum.is_close(EPoint.zero(spec.tau), spec.tolerances.lattice_tol) else 0
    return 0


def _summands(b: DecomposableSum, spec: CurveSpec) -> list[tuple[int, EPoint]]:
    return [(b.d, b.x), (spec.n - b.d, spec.mirror(b.x))]


def h0_e_minus_x(b: BundleDescriptor, x: EPoint, spec: CurveSpec) -> int:
    """h^0(E(-x))."""
    _require(b, spec)
    if isinstance(b, DecomposableSum):
        return sum(_line_h0(deg - 1, s - x, spec) for deg, s in _summands(b, spec))
    return spec.n - 2


def h0_e_minus_xy(b: BundleDescriptor, x: EPoint, y: EPoint, spec: CurveSpec) -> int:
    """h^0(E(-x-y))."""
    _require(b, spec)
    if isinstance(b, DecomposableSum):
        return sum(_line_h0(deg - 2, s - x - y, spec) for deg, s in _summands(b, spec))
    if spec.n == 3:
        return 0
    if spec.n == 4 and isinstance(b, IndecomposableOmega):
        return 1 if (x + y).is_close(b.omega, spec.tolerances.lattice_tol) else 0
    return spec.n - 4


def same_bundle(b1: BundleDescriptor, b2: BundleDescriptor, spec: CurveSpec, tol: float | None = None) -> bool:
    tol = spec.tolerances.lattice_tol if tol is None else tol
    if type(b1) is not type(b2):
        return False
    if isinstance(b1, DecomposableSum):
        if b1.d != b2.d:
            return False
        if b1.x.is_close(b2.x, tol):
            return True
        return 2 * b1.d == spec.n and b1.x.is_close(spec.mirror(b2.x), tol)
    if isinstance(b1, IndecomposableOmega):
        return b1.omega.is_close(b2.omega, tol)
    return True


def closure_contains(outer: BundleDescriptor, inner: BundleDescriptor, spec: CurveSpec) -> bool:
    """Whether the leaf of `inner` lies in the closure of the leaf of `outer`."""
    _require(outer, spec)
    _require(inner, spec)
    if same_bundle(outer, inner, spec):
        return True
    if isinstance(outer, IndecomposableOdd):
        return True
    if isinstance(inner, (IndecomposableOdd, IndecomposableOmega)):
        return False
    if isinstance(outer, IndecomposableOmega):
        return inner.d < spec.r or (is_double_omega(inner, spec) and inner.x.is_close(outer.omega))
    if is_double_omega(outer, spec):
        return False
    return inner.d < outer.d


def describe(b: BundleDescriptor, spec: CurveSpec | None = None) -> str:
    if isinstance(b, IndecomposableOdd):
        return "E_o"
    if isinstance(b, IndecomposableOmega):
        return f"E_omega[{b.omega.z:.6f}]"
    if spec is not None and is_double_omega(b, spec):
        return f"L_omega+L_omega[{b.x.z:.6f}]"
    return f"E_{{{b.d},x}}[{b.x.z:.6f}]"


def to_dict(b: BundleDescriptor) -> dict:
    out: dict = {"variant": b.variant}
    if isinstance(b, DecomposableSum):
        out["d"] = b.d
        out["x"] = b.x.to_list()
    elif isinstance(b, IndecomposableOmega):
        out["omega"] = b.omega.to_list()
    return out


def from_dict(data: dict, spec: CurveSpec) -> BundleDescriptor:
    variant = data.get("variant")
    if variant == DecomposableSum.variant:
        return DecomposableSum(int(data["d"]), spec.point(complex(*data["x"])))
    if variant == IndecomposableOdd.variant:
        return IndecomposableOdd()
    if variant == IndecomposableOmega.variant:
        return IndecomposableOmega(spec.point(complex(*data["omega"])))
    raise ValueError(f"unknown bundle variant {variant!r}")


def parse_descriptor(text: str, spec: CurveSpec) -> BundleDescriptor:
    """Parse the CLI form: `sum:D:RE,IM`, `odd`, `omega:K` or `double:K`
    (K indexes the Omega coset as listed by `curve show`)."""
    head, _, rest = text.strip().partition(":")
    if head == "odd":
        b: BundleDescriptor = IndecomposableOdd()
    elif head in ("omega", "double"):
        omegas = spec.omega_coset()
        k = int(rest)
        if not 0 <= k < len(omegas):
            raise ValueError("omega index must be 0..3")
        b = IndecomposableOmega(omegas[k]) if head == "omega" else DecomposableSum(spec.r, omegas[k])
    elif head == "sum":
        d, _, point = rest.partition(":")
        re, im = (float(v) for v in point.split(","))
        b = DecomposableSum(int(d), spec.point(complex(re, im)))
    else:
        raise ValueError(f"cannot parse bundle descriptor {text!r}")
    if not leaf_nonempty(b, spec):
        raise ValueError(f"{text!r} has no leaf for n={spec.n}")
    return b


@dataclass(frozen=True)
class LeafLabel:
    bundle: BundleDescriptor
    witness: Divisor | None = None
    secant_count: SecantCount | None = None
    # Filled in when a Poisson cache is at hand.
    rank: int | None = None

    def to_dict(self) -> dict:
        out = to_dict(self.bundle)
        out["witness_divisor"] = self.witness.to_list() if self.witness is not None else None
        out["secant_count"] = self.secant_count.value if self.secant_count is not None else None
        if self.rank is not None:
            out["rank"] = self.rank
        return out


@dataclass(frozen=True)
class LeafFamily:
    name: str
    kind: str
    d: int | None
    leaf_dim: int
    # Dimension of the parameter space of the family (x ranges over E).
    parameters: int
    anchor: EPoint | None = None

    def representative(self, rng: np.random.Generator, spec: CurveSpec) -> BundleDescriptor:
        if self.kind == "odd":
            return IndecomposableOdd()
        if self.kind == "omega":
            return IndecomposableOmega(self.anchor)
        if self.kind == "double":
            return DecomposableSum(self.d, self.anchor)
        while True:
            x = random_point(spec.tau, rng)
            if 2 * self.d < spec.n or all(x.distance(w) > 0.05 for w in spec.omega_coset()):
                return DecomposableSum(self.d, x)


def enumerate_leaf_families(spec: CurveSpec) -> list[LeafFamily]:
    n = spec.n
    families = []
    for d in range(1, spec.r + 1):
        name = "points" if d == 1 else ("chords" if d == 2 else f"{d}-secants")
        families.append(LeafFamily(name, "sum", d, 2 * d - 2, 1))
    if spec.is_even:
        for k, w in enumerate(spec.omega_coset()):
            families.append(LeafFamily(f"E_omega[{k}]", "omega", None, n - 2, 0, w))
        for k, w in enumerate(spec.omega_coset()):
            families.append(LeafFamily(f"L_omega+L_omega[{k}]", "double", spec.r, n - 4, 0, w))
    else:
        families.append(LeafFamily("top", "odd", None, n - 1, 0))
    return families


__all__ = [
    "DecomposableSum",
    "IndecomposableOdd",
    "IndecomposableOmega",
    "BundleDescriptor",
    "LeafLabel",
    "LeafFamily",
    "is_double_omega",
    "leaf_nonempty",
    "end_dim",
    "aut_dim",
    "leaf_dim",
    "pz_degree",
    "h0_e_minus_x",
    "h0_e_minus_xy",
    "same_bundle",
    "closure_contains",
    "describe",
    "to_dict",
    "from_dict",
    "parse_descriptor",
    "enumerate_leaf_families",
]

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..config import ToleranceConfig
from .points import EPoint, two_torsion

# Bumped whenever the theta normalization or the section basis changes;
# curve files and caches written under another tag are refused.
CONVENTION_TAG = "theta-ab/level-d/v1"


@dataclass(frozen=True)
class CurveSpec:
    """The curve E_tau, the projective dimension n - 1 and the degree-n
    line bundle L, recorded through l_sum = sigma(L)."""

    tau: complex
    n: int
    l_sum: EPoint
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self) -> None:
        if complex(self.tau).imag <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.l_sum.tau != self.tau:
            raise ValueError("l_sum lives on a different curve")

    @classmethod
    def new(
        cls,
        tau: complex,
        n: int,
        l_sum: complex = 0j,
        tolerances: ToleranceConfig | None = None,
    ) -> "CurveSpec":
        tol = tolerances or ToleranceConfig()
        tau = complex(tau)
        return cls(tau, int(n), EPoint.at(l_sum, tau, tol.lattice_tol), tol)

    @property
    def r(self) -> int:
        return self.n // 2

    @property
    def is_even(self) -> bool:
        return self.n % 2 == 0

    def point(self, z: complex) -> EPoint:
        return EPoint.at(z, self.tau, self.tolerances.lattice_tol)

    def omega_coset(self) -> list[EPoint]:
        """The four points w with 2w = l_sum."""
        half = self.l_sum.z / 2
        return [self.point(half + eta.z) for eta in two_torsion(self.tau)]

    def in_omega(self, x: EPoint, tol: float | None = None) -> bool:
        tol = self.tolerances.lattice_tol if tol is None else tol
        return any(x.is_close(w, tol) for w in self.omega_coset())

    def mirror(self, x: EPoint) -> EPoint:
        return self.point(self.l_sum.z - x.z)

    def to_dict(self) -> dict:
        return {
            "theta_convention": CONVENTION_TAG,
            "tau": [self.tau.real, self.tau.imag],
            "n": self.n,
            "l_sum": self.l_sum.to_list(),
            "tolerances": self.tolerances.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurveSpec":
        tag = data.get("theta_convention")
        if tag != CONVENTION_TAG:
            raise ValueError(f"curve written under theta convention {tag!r}, expected {CONVENTION_TAG!r}")
        tau = complex(*data["tau"])
        return cls.new(
            tau,
            int(data["n"]),
            complex(*data.get("l_sum", [0.0, 0.0])),
            ToleranceConfig.from_dict(data.get("tolerances", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "CurveSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

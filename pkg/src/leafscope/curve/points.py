from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .spec import CurveSpec

# Representatives closer than this to the far edges of the parallelogram wrap to 0.
_WRAP_EPS = 1e-12

# The 9 lattice translates m + k*tau, m, k in {-1, 0, 1}.
_NEIGHBOURS = [(m, k) for m in (-1, 0, 1) for k in (-1, 0, 1)]


def _lattice_coords(z: complex, tau: complex) -> tuple[float, float]:
    t = z.imag / tau.imag
    s = z.real - t * tau.real
    return s, t


def _reduce_complex(z: complex, tau: complex, eps: float = _WRAP_EPS) -> complex:
    s, t = _lattice_coords(complex(z), tau)
    s -= math.floor(s)
    t -= math.floor(t)
    if s > 1.0 - eps:
        s = 0.0
    if t > 1.0 - eps:
        t = 0.0
    return complex(s + t * tau)


@dataclass(frozen=True)
class EPoint:
    """A point of E = C / (Z + Z*tau), kept as its representative in the
    fundamental parallelogram {s + t*tau : s, t in [0, 1)}.

    Dataclass equality is exact; use `is_close` for geometry.
    """

    z: complex
    tau: complex

    @classmethod
    def at(cls, z: complex, tau: complex, eps: float = _WRAP_EPS) -> "EPoint":
        tau = complex(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        return cls(_reduce_complex(complex(z), tau, eps), tau)

    @classmethod
    def zero(cls, tau: complex) -> "EPoint":
        return cls(0j, complex(tau))

    @property
    def lattice_coords(self) -> tuple[float, float]:
        return _lattice_coords(self.z, self.tau)

    def is_close(self, other: "EPoint", tol: float = 1e-10) -> bool:
        diff = self.z - other.z
        for m, k in _NEIGHBOURS:
            w = diff + m + k * self.tau
            if abs(w.real) < tol and abs(w.imag) < tol:
                return True
        return False

    def distance(self, other: "EPoint") -> float:
        diff = self.z - other.z
        return min(abs(diff + m + k * self.tau) for m, k in _NEIGHBOURS)

    def __add__(self, other: "EPoint") -> "EPoint":
        return add_points(self, other)

    def __neg__(self) -> "EPoint":
        return negate(self)

    def __sub__(self, other: "EPoint") -> "EPoint":
        return add_points(self, negate(other))

    def scaled(self, k: int) -> "EPoint":
        return EPoint.at(k * self.z, self.tau)

    def to_list(self) -> list[float]:
        return [self.z.real, self.z.imag]


def reduce(z: complex, spec: "CurveSpec") -> EPoint:
    return EPoint.at(z, spec.tau, spec.tolerances.lattice_tol)


def add_points(p: EPoint, q: EPoint) -> EPoint:
    return EPoint.at(p.z + q.z, p.tau)


def negate(p: EPoint) -> EPoint:
    return EPoint.at(-p.z, p.tau)


def two_torsion(tau: complex) -> list[EPoint]:
    tau = complex(tau)
    return [EPoint.at(w, tau) for w in (0.0, 0.5, tau / 2, (1 + tau) / 2)]


def random_point(tau: complex, rng: np.random.Generator) -> EPoint:
    s, t = rng.random(2)
    return EPoint.at(s + t * complex(tau), tau)

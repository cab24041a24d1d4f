from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .points import EPoint, random_point


@dataclass(frozen=True)
class Divisor:
    """Effective divisor: points with positive multiplicities."""

    parts: tuple[tuple[EPoint, int], ...]
    tau: complex

    def __post_init__(self) -> None:
        for _, mult in self.parts:
            if mult <= 0:
                raise ValueError("multiplicities must be positive")

    @classmethod
    def from_points(cls, points: Iterable[EPoint], tau: complex, tol: float = 1e-10) -> "Divisor":
        merged: list[list] = []
        for p in points:
            for entry in merged:
                if entry[0].is_close(p, tol):
                    entry[1] += 1
                    break
            else:
                merged.append([p, 1])
        return cls(tuple((p, m) for p, m in merged), complex(tau))

    @classmethod
    def single(cls, p: EPoint) -> "Divisor":
        return cls(((p, 1),), p.tau)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.parts)

    @property
    def support(self) -> list[EPoint]:
        return [p for p, _ in self.parts]

    def points(self) -> list[EPoint]:
        """Points listed with repetition."""
        return [p for p, m in self.parts for _ in range(m)]

    def multiplicity(self, p: EPoint, tol: float = 1e-10) -> int:
        return sum(m for q, m in self.parts if q.is_close(p, tol))

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor.from_points(self.points() + other.points(), self.tau)

    def is_disjoint(self, other: "Divisor", tol: float = 1e-10) -> bool:
        return all(not p.is_close(q, tol) for p in self.support for q in other.support)

    def to_list(self) -> list[dict]:
        return [{"z": p.to_list(), "mult": m} for p, m in self.parts]

    def __str__(self) -> str:
        return " + ".join(
            (f"{m}*" if m > 1 else "") + f"[{p.z.real:.6f}{p.z.imag:+.6f}j]" for p, m in self.parts
        ) or "0"


def sum_divisor(D: Divisor) -> EPoint:
    """Abel-Jacobi sum of the points of D."""
    return EPoint.at(sum(m * p.z for p, m in D.parts), D.tau)


def lin_equiv(D1: Divisor, D2: Divisor, tol: float = 1e-10) -> bool:
    return D1.degree == D2.degree and sum_divisor(D1).is_close(sum_divisor(D2), tol)


def gcd(D1: Divisor, D2: Divisor, tol: float = 1e-10) -> Divisor:
    parts = []
    for p, m in D1.parts:
        shared = min(m, D2.multiplicity(p, tol))
        if shared:
            parts.append((p, shared))
    return Divisor(tuple(parts), D1.tau)


def lcm(D1: Divisor, D2: Divisor, tol: float = 1e-10) -> Divisor:
    parts = [(p, max(m, D2.multiplicity(p, tol))) for p, m in D1.parts]
    parts += [(q, m) for q, m in D2.parts if not D1.multiplicity(q, tol)]
    return Divisor(tuple(parts), D1.tau)


def random_divisor_with_sum(
    d: int,
    x: EPoint,
    rng: np.random.Generator,
    min_separation: float = 1e-3,
) -> Divisor:
    """Reduced divisor of degree d whose points add up to x."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        return Divisor.single(x)
    while True:
        pts = [random_point(x.tau, rng) for _ in range(d - 1)]
        last = EPoint.at(x.z - sum(p.z for p in pts), x.tau)
        pts.append(last)
        if all(
            pts[i].distance(pts[j]) > min_separation
            for i in range(d)
            for j in range(i + 1, d)
        ):
            return Divisor.from_points(pts, x.tau)

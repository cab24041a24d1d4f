"""Homogeneous polynomials in n variables with complex coefficients.

A form keeps an (T, n) exponent array and a (T,) coefficient array; terms
are merged on construction so every exponent row appears once.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.preprocessing import PolynomialFeatures


@lru_cache(maxsize=64)
def homogeneous_exponents(num_vars: int, degree: int) -> np.ndarray:
    """All exponent vectors of total degree `degree`, in a fixed order."""
    if degree == 0:
        return np.zeros((1, num_vars), dtype=np.int64)
    powers = PolynomialFeatures(degree=degree).fit(np.zeros((1, num_vars))).powers_
    out = powers[powers.sum(axis=1) == degree].astype(np.int64)
    out.setflags(write=False)
    return out


def monomial_values(exponents: np.ndarray, points: np.ndarray) -> np.ndarray:
    """(N, T) matrix of monomials evaluated at the rows of `points`."""
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    out = np.ones((pts.shape[0], exponents.shape[0]), dtype=complex)
    for i in range(exponents.shape[1]):
        used = exponents[:, i] > 0
        if np.any(used):
            out[:, used] *= pts[:, i : i + 1] ** exponents[used, i]
    return out


def _merge(exponents: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if exponents.shape[0] == 0:
        return exponents, coeffs
    uniq, inverse = np.unique(exponents, axis=0, return_inverse=True)
    merged = np.zeros(uniq.shape[0], dtype=complex)
    np.add.at(merged, inverse.ravel(), coeffs)
    return uniq, merged


@dataclass(frozen=True, eq=False)
class PolynomialForm:
    num_vars: int
    degree: int
    exponents: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        exps = np.asarray(self.exponents, dtype=np.int64).reshape(-1, self.num_vars)
        if exps.size and np.any(exps.sum(axis=1) != self.degree):
            raise ValueError("form is not homogeneous of the stated degree")
        exps, coeffs = _merge(exps, np.asarray(self.coeffs, dtype=complex).ravel())
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, num_vars: int, degree: int) -> "PolynomialForm":
        return cls(num_vars, degree, np.zeros((0, num_vars), dtype=np.int64), np.zeros(0, dtype=complex))

    @classmethod
    def from_terms(cls, num_vars: int, terms: dict[tuple[int, ...], complex]) -> "PolynomialForm":
        if not terms:
            raise ValueError("use PolynomialForm.zero for the zero form")
        exps = np.array(list(terms.keys()), dtype=np.int64)
        degree = int(exps[0].sum())
        return cls(num_vars, degree, exps, np.array(list(terms.values()), dtype=complex))

    @classmethod
    def linear(cls, coeffs: np.ndarray) -> "PolynomialForm":
        c = np.asarray(coeffs, dtype=complex)
        return cls(c.size, 1, np.eye(c.size, dtype=np.int64), c)

    @classmethod
    def from_vector(cls, num_vars: int, degree: int, vector: np.ndarray) -> "PolynomialForm":
        """Inverse of `coefficient_vector` in the `homogeneous_exponents` order."""
        return cls(num_vars, degree, homogeneous_exponents(num_vars, degree), vector)

    def terms(self) -> dict[tuple[int, ...], complex]:
        return {tuple(int(e) for e in row): complex(c) for row, c in zip(self.exponents, self.coeffs)}

    def coefficient_vector(self) -> np.ndarray:
        basis = homogeneous_exponents(self.num_vars, self.degree)
        index = {tuple(row): i for i, row in enumerate(basis.tolist())}
        out = np.zeros(len(basis), dtype=complex)
        for row, c in zip(self.exponents.tolist(), self.coeffs):
            out[index[tuple(row)]] += c
        return out

    def _check_compatible(self, other: "PolynomialForm") -> None:
        if other.num_vars != self.num_vars:
            raise ValueError("forms live in different polynomial rings")

    def __add__(self, other: "PolynomialForm") -> "PolynomialForm":
        self._check_compatible(other)
        if not other.coeffs.size:
            return self
        if not self.coeffs.size:
            return other
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        return PolynomialForm(
            self.num_vars,
            self.degree,
            np.vstack([self.exponents, other.exponents]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def __neg__(self) -> "PolynomialForm":
        return PolynomialForm(self.num_vars, self.degree, self.exponents, -self.coeffs)

    def __sub__(self, other: "PolynomialForm") -> "PolynomialForm":
        return self + (-other)

    def __mul__(self, other) -> "PolynomialForm":
        if isinstance(other, PolynomialForm):
            self._check_compatible(other)
            exps = (self.exponents[:, None, :] + other.exponents[None, :, :]).reshape(-1, self.num_vars)
            coeffs = np.outer(self.coeffs, other.coeffs).ravel()
            return PolynomialForm(self.num_vars, self.degree + other.degree, exps, coeffs)
        return PolynomialForm(self.num_vars, self.degree, self.exponents, self.coeffs * complex(other))

    __rmul__ = __mul__

    def derivative(self, i: int) -> "PolynomialForm":
        if self.degree == 0:
            return PolynomialForm.zero(self.num_vars, 0)
        powers = self.exponents[:, i]
        keep = powers > 0
        exps = self.exponents[keep].copy()
        exps[:, i] -= 1
        return PolynomialForm(self.num_vars, self.degree - 1, exps, self.coeffs[keep] * powers[keep])

    def gradient(self) -> list["PolynomialForm"]:
        return [self.derivative(i) for i in range(self.num_vars)]

    def __call__(self, p: np.ndarray) -> np.ndarray | complex:
        p = np.asarray(p, dtype=complex)
        if not self.coeffs.size:
            return np.zeros(p.shape[:-1], dtype=complex) if p.ndim > 1 else 0j
        vals = monomial_values(self.exponents, p) @ self.coeffs
        return vals if p.ndim > 1 else complex(vals[0])

    def gradient_at(self, p: np.ndarray) -> np.ndarray:
        return np.array([g(p) for g in self.gradient()])

    @property
    def max_abs_coeff(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def normalized(self) -> "PolynomialForm":
        """Scale so the largest-modulus coefficient equals 1 (real, zero phase)."""
        if not self.coeffs.size:
            raise ValueError("cannot normalize the zero form")
        idx = int(np.argmax(np.abs(self.coeffs)))
        coeffs = self.coeffs / self.coeffs[idx]
        coeffs[idx] = 1.0
        return PolynomialForm(self.num_vars, self.degree, self.exponents, coeffs)

    def pruned(self, threshold: float) -> "PolynomialForm":
        keep = np.abs(self.coeffs) > threshold * max(self.max_abs_coeff, 1e-300)
        return PolynomialForm(self.num_vars, self.degree, self.exponents[keep], self.coeffs[keep])

    def quadric_matrix(self) -> np.ndarray:
        """Symmetric A with F(p) = p^T A p."""
        if self.degree != 2:
            raise ValueError("only quadrics have a symmetric matrix")
        A = np.zeros((self.num_vars, self.num_vars), dtype=complex)
        for row, c in zip(self.exponents, self.coeffs):
            idx = np.flatnonzero(row)
            if len(idx) == 1:
                A[idx[0], idx[0]] += c
            else:
                A[idx[0], idx[1]] += c / 2
                A[idx[1], idx[0]] += c / 2
        return A

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "degree": self.degree,
            "coeffs": [[row, [c.real, c.imag]] for row, c in zip(self.exponents.tolist(), self.coeffs.tolist())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolynomialForm":
        n = int(data["num_vars"])
        terms = data["coeffs"]
        exps = np.array([row for row, _ in terms], dtype=np.int64).reshape(-1, n)
        coeffs = np.array([complex(re, im) for _, (re, im) in terms], dtype=complex)
        return cls(n, int(data["degree"]), exps, coeffs)

    def __repr__(self) -> str:
        return f"PolynomialForm(num_vars={self.num_vars}, degree={self.degree}, terms={self.coeffs.size})"


def _parity(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def determinant(entries: list[list[PolynomialForm]]) -> PolynomialForm:
    """Leibniz expansion of a square matrix of forms."""
    size = len(entries)
    num_vars = entries[0][0].num_vars
    total = PolynomialForm.zero(num_vars, sum(entries[i][0].degree for i in range(size)))
    for perm in itertools.permutations(range(size)):
        term = entries[0][perm[0]]
        for i in range(1, size):
            term = term * entries[i][perm[i]]
        total = total + (term if _parity(perm) > 0 else -term)
    return total

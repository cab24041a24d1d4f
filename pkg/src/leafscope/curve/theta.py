"""Theta functions with rational characteristics.

    theta[a, b](z, tau) = sum_k exp(pi i (k+a)^2 tau + 2 pi i (k+a)(z+b))

with k running over [-terms, terms].  Quasi-periodicity:

    theta[a, b](z + 1)   = exp(2 pi i a) theta[a, b](z)
    theta[a, b](z + tau) = exp(-pi i tau - 2 pi i (z + b)) theta[a, b](z)
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import ThetaTruncationError

# Terms whose modulus falls this far below the largest term do not change the sum.
_NEGLIGIBLE_LOG = math.log(1e-18)


def theta_char(
    a,
    b,
    z,
    tau: complex,
    terms: int = 40,
    deriv: int = 0,
    strict: bool = True,
) -> np.ndarray:
    """Evaluate the theta function (or its `deriv`-th z-derivative).

    `a`, `b` and `z` broadcast against each other.  Only the terms that can
    contribute at double precision are summed; with `strict` a window that
    needs more than `terms` on either side raises ThetaTruncationError,
    otherwise the sum is silently truncated to [-terms, terms].
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau {tau} not in upper half-plane")
    if deriv < 0:
        raise ValueError("deriv must be >= 0")

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    z = np.asarray(z, dtype=complex)
    shape = np.broadcast_shapes(a.shape, b.shape, z.shape)
    if math.prod(shape) == 0:
        return np.zeros(shape, dtype=complex)
    w = z + b

    # Term moduli are a Gaussian in m = k + a centred at -Im(w) / Im(tau).
    centre = -w.imag / tau.imag - a
    radius = math.sqrt(-_NEGLIGIBLE_LOG / (math.pi * tau.imag)) + 1.0 + deriv
    k_lo = math.floor(float(np.min(centre)) - radius)
    k_hi = math.ceil(float(np.max(centre)) + radius)
    if k_lo < -terms or k_hi > terms:
        if strict:
            raise ThetaTruncationError(
                f"series needs k in [{k_lo}, {k_hi}] but terms={terms}; "
                "raise theta_terms or reduce z first"
            )
        k_lo, k_hi = max(k_lo, -terms), min(k_hi, terms)

    out = np.zeros(shape, dtype=complex)
    for k in range(k_lo, k_hi + 1):
        m = k + a
        term = np.exp(1j * math.pi * m * m * tau + 2j * math.pi * m * w)
        if deriv:
            term = term * (2j * math.pi * m) ** deriv
        out += term
    return out


def theta1(z, tau: complex, terms: int = 40, deriv: int = 0) -> np.ndarray:
    """Odd theta function theta[1/2, 1/2]; its only zero on E is at 0."""
    return theta_char(0.5, 0.5, z, tau, terms, deriv)

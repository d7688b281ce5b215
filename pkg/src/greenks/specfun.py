"""Modified Bessel functions of the second kind for the Green-function profiles.

Only the orders arising from the screened-Poisson Green functions in one,
two and three dimensions are needed: half-integers (closed forms) and the
integers 0 and 1 (delegated to scipy's Cephes-based evaluators, which hold
relative error near machine precision over the whole working range).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import special as _sp


class UnsupportedOrderError(ValueError):
    """Order is not representable as p/2 with integer p."""


def _normalize_order(nu) -> Fraction:
    frac = Fraction(nu).limit_denominator(1_000_000)
    if frac != Fraction(nu) or (2 * frac).denominator != 1:
        raise UnsupportedOrderError(f"order {nu!r} is not a half-integer")
    # K_{-nu} = K_nu: the defining integrand cosh(nu s) is even in nu.
    return abs(frac)


def bessel_k(nu, r):
    """K_nu(r) for half-integer or integer nu, r > 0.

    Accepts a scalar or array argument; returns the same shape.
    Raises ValueError for r <= 0 (K_nu diverges at the origin for nu >= 0)
    and UnsupportedOrderError for orders outside the half-integer lattice.
    """
    frac = _normalize_order(nu)
    r_arr = np.asarray(r, dtype=float)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    if np.any(r_arr <= 0.0) or not np.all(np.isfinite(r_arr)):
        raise ValueError("bessel_k requires r > 0")

    if frac.denominator == 2:
        out = _half_integer(int(frac * 2), r_arr)
    else:
        out = _integer(int(frac), r_arr)
    return float(out[0]) if scalar else out


def _half_integer(p: int, r: np.ndarray) -> np.ndarray:
    """K_{p/2} for odd p >= 1 by upward recurrence from K_{1/2} = K_{-1/2}."""
    base = np.sqrt(math.pi / (2.0 * r)) * np.exp(-r)
    k_minus = base  # K_{-1/2}
    k = base        # K_{1/2}
    order = 0.5
    while order < p / 2.0:
        k_minus, k = k, k_minus + (2.0 * order / r) * k
        order += 1.0
    return k


def _integer(m: int, r: np.ndarray) -> np.ndarray:
    if m == 0:
        return _sp.k0(r)
    if m == 1:
        return _sp.k1(r)
    k_minus, k = _sp.k0(r), _sp.k1(r)
    for order in range(1, m):
        k_minus, k = k, k_minus + (2.0 * order / r) * k
    return k


def bessel_k_asymptotic(r):
    """Leading large-argument behaviour sqrt(pi/(2r)) e^{-r}, any order."""
    r_arr = np.asarray(r, dtype=float)
    return np.sqrt(math.pi / (2.0 * r_arr)) * np.exp(-r_arr)

"""Independent oracles used across the test suite.

These deliberately avoid the library's own evaluation paths: the Bessel
oracle integrates the defining integral with adaptive quadrature, and the
convolution oracle sums the circular convolution directly.
"""

import math

import numpy as np
from scipy import integrate


def bessel_k_quadrature(nu: float, r: float) -> float:
    """Adaptive quadrature of M_nu(r) = int_0^inf e^{-r cosh s} cosh(nu s) ds.

    The integrand is truncated where e^{-r cosh s} drops below 1e-30 relative
    to the peak, which bounds the discarded tail far beyond the 1e-10 target.
    """
    nu = abs(float(nu))
    # e^{-r cosh s} < 1e-30 once cosh s > (69 + 30)/r; the cosh(nu s) growth
    # (nu <= 1 here) is swallowed by the extra margin
    s_max = math.acosh(max(99.0 / r, 2.0))
    val, err = integrate.quad(
        lambda s: math.exp(-r * math.cosh(s)) * math.cosh(nu * s),
        0.0, s_max, epsabs=1e-300, epsrel=1e-13, limit=400)
    return val


def direct_convolution(a: np.ndarray, b: np.ndarray, cell_volume: float) -> np.ndarray:
    """Direct circular convolution: out[m] = h^N sum_y a[y] b[m - y].

    One python-level loop per lattice offset; each term is a whole-array
    shift, so the arithmetic is the plain O(n^{2N}) summation in a fixed
    order.
    """
    out = np.zeros_like(a, dtype=float)
    axes = tuple(range(a.ndim))
    for idx in np.ndindex(a.shape):
        # roll(b, idx)[m] = b[m - idx]
        out += a[idx] * np.roll(b, idx, axis=axes)
    return out * cell_volume

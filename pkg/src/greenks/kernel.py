"""Radial free-space kernels and their periodization onto the torus.

A kernel is described by a radial profile K(r) and its derivative; the
screened-Poisson Green functions and the adhesion potential built from a
force profile omega are provided as constructors.  ``periodize`` sums the
lattice translates K(x - 2L*l) on the offset lattice of a grid (index 0
holds the zero offset), so that circular convolution with a density field
is the midpoint-rule nonlocal term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .domain import Field, Grid
from .specfun import bessel_k

_DECAY_CHECK_RADII = (0.5, 1.0, 2.0, 5.0, 10.0)


@dataclass
class RadialKernel:
    """Free-space radial kernel with decay metadata.

    ``decay = (C, alpha)`` asserts |K(r)| + |K'(r)| <= C (1+r)^(-alpha) away
    from the origin; ``tail_bound`` may sharpen that for the lattice-sum
    truncation (the Green kernels decay exponentially).  ``support_radius``
    marks compact support instead.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    derivative_profile: Callable[[np.ndarray], np.ndarray]
    decay: Optional[tuple] = None          # (C, alpha), alpha > N
    support_radius: Optional[float] = None
    singular_at_origin: bool = False
    tail_bound: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.decay is not None:
            C, alpha = self.decay
            r = np.array(_DECAY_CHECK_RADII)
            total = np.abs(self.profile(r)) + np.abs(self.derivative_profile(r))
            bound = C * (1.0 + r) ** (-alpha)
            if np.any(total > bound * (1.0 + 1e-12)):
                raise ValueError("decay metadata violated at the check radii")

    def value_at_origin(self) -> float:
        if self.singular_at_origin:
            raise ValueError("kernel is singular at the origin")
        return float(self.profile(np.array([0.0]))[0])


@dataclass
class PeriodizedKernel:
    """Lattice sum of a radial kernel sampled on a grid's offset lattice."""

    field: Field
    gradient: list            # periodized analytic derivative, one field per axis
    truncation_radius_cells: int


def greens_free_space(d: float, dim: int) -> RadialKernel:
    """Free-space Green function of -d*Laplace + 1 in `dim` dimensions."""
    if d <= 0:
        raise ValueError("diffusivity d must be positive")
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    mu = 1.0 / math.sqrt(d)

    if dim == 1:
        def profile(r):
            return np.exp(-mu * np.asarray(r, dtype=float)) / (2.0 * math.sqrt(d))

        def dprofile(r):
            return -np.exp(-mu * np.asarray(r, dtype=float)) / (2.0 * d)

        singular = False
    elif dim == 2:
        def profile(r):
            return bessel_k(0, np.asarray(r, dtype=float) * mu) / (2.0 * math.pi * d)

        def dprofile(r):
            return -mu * bessel_k(1, np.asarray(r, dtype=float) * mu) / (2.0 * math.pi * d)

        singular = True
    else:
        def profile(r):
            r = np.asarray(r, dtype=float)
            return np.exp(-mu * r) / (4.0 * math.pi * d * r)

        def dprofile(r):
            r = np.asarray(r, dtype=float)
            return -np.exp(-mu * r) * (1.0 + mu * r) / (4.0 * math.pi * d * r * r)

        singular = True

    # Algebraic decay certificate: exponential decay dominates any power.
    alpha = dim + 1.0
    rr = np.linspace(0.5, 80.0, 400)
    C = float(((np.abs(profile(rr)) + np.abs(dprofile(rr))) * (1.0 + rr) ** alpha).max())

    def tail(r, _mu=mu, _d=d, _dim=dim):
        # crude but safe for r >= 0.5: |K|+|K'| <= pref * e^{-mu r}
        r = max(r, 0.5)
        if _dim == 1:
            pref = 1.0 / (2.0 * math.sqrt(_d)) + 1.0 / (2.0 * _d)
            return pref * math.exp(-_mu * r)
        if _dim == 2:
            # K_0, K_1 <= sqrt(pi/(2 mu r)) e^{-mu r} * (1 + 1/(mu r)) margin
            pref = (1.0 + _mu) / (2.0 * math.pi * _d) * math.sqrt(math.pi / (2.0 * _mu * r)) * 2.0
            return pref * math.exp(-_mu * r)
        pref = (1.0 / r + (1.0 + _mu * r) / (r * r)) / (4.0 * math.pi * _d)
        return pref * math.exp(-_mu * r)

    return RadialKernel(profile, dprofile, decay=(C * 1.01, alpha),
                        singular_at_origin=singular, tail_bound=tail)


def gaussian_kernel(sigma: float, dim: int) -> RadialKernel:
    """Normalized Gaussian kernel, a smooth non-Green fitting target."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    A = (2.0 * math.pi * sigma * sigma) ** (-0.5 * dim)

    def profile(r):
        r = np.asarray(r, dtype=float)
        return A * np.exp(-r * r / (2.0 * sigma * sigma))

    def dprofile(r):
        r = np.asarray(r, dtype=float)
        return -(r / (sigma * sigma)) * A * np.exp(-r * r / (2.0 * sigma * sigma))

    alpha = dim + 1.0
    rr = np.linspace(0.5, 40.0, 400)
    C = float(((np.abs(profile(rr)) + np.abs(dprofile(rr))) * (1.0 + rr) ** alpha).max())

    def tail(r, _s=sigma, _A=A):
        r = max(r, 0.5)
        return _A * (1.0 + r / (_s * _s)) * math.exp(-r * r / (2.0 * _s * _s))

    return RadialKernel(profile, dprofile, decay=(C * 1.01, alpha), tail_bound=tail)


def adhesion_potential(omega: Callable[[np.ndarray], np.ndarray], dim: int,
                       resolution: int = 8192) -> RadialKernel:
    """Compactly supported potential with radial derivative omega on [0, 1].

    The profile is the continuous representative vanishing at the support
    boundary: K(r) = -int_r^1 omega(s) ds for r <= 1, zero beyond.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    s = np.linspace(0.0, 1.0, resolution + 1)
    w = np.asarray(omega(s), dtype=float) * np.ones_like(s)
    # cumulative integral from r to 1 via Simpson on the dense grid
    total = integrate.simpson(w, x=s)
    cum = integrate.cumulative_simpson(w, x=s, initial=0.0)
    tail_int = total - cum   # int_r^1 omega

    def profile(r):
        r = np.asarray(r, dtype=float)
        inside = np.interp(np.clip(r, 0.0, 1.0), s, -tail_int)
        return np.where(r <= 1.0, inside, 0.0)

    def dprofile(r):
        r = np.asarray(r, dtype=float)
        inside = np.asarray(omega(np.clip(r, 0.0, 1.0)), dtype=float)
        return np.where(r <= 1.0, inside, 0.0)

    return RadialKernel(profile, dprofile, support_radius=1.0)


def _cell_average_origin(k: RadialKernel, grid: Grid) -> float:
    """Cell average of K over the origin cell [-h/2, h/2)^N.

    Reduces to smooth boundary integrals: with F(R) = int_0^R K(r) r^{N-1} dr
    the cube integral is a sum of face/edge terms, so the integrable origin
    singularity never meets the quadrature.
    """
    a = grid.h / 2.0
    dim = grid.dim

    if dim == 1:
        val, _ = integrate.quad(lambda r: float(k.profile(np.array([r]))[0]),
                                0.0, a, epsabs=1e-14, epsrel=1e-12)
        return 2.0 * val / grid.h

    def F(R):
        val, _ = integrate.quad(
            lambda r: float(k.profile(np.array([r]))[0]) * r ** (dim - 1),
            0.0, R, epsabs=1e-14, epsrel=1e-12)
        return val

    if dim == 2:
        def edge(y):
            R = math.hypot(a, y)
            return F(R) * a / (a * a + y * y)
        val, _ = integrate.quad(edge, 0.0, a, epsabs=1e-14, epsrel=1e-12)
        return 8.0 * val / grid.h ** 2

    # dim == 3: one face, 8-fold symmetric quarter, tensor Gauss-Legendre
    nodes, weights = np.polynomial.legendre.leggauss(40)
    x = 0.5 * a * (nodes + 1.0)
    wq = 0.5 * a * weights
    total = 0.0
    for xi, wx in zip(x, wq):
        for yi, wy in zip(x, wq):
            R = math.sqrt(xi * xi + yi * yi + a * a)
            total += wx * wy * F(R) * a / R ** 3
    return 6.0 * 4.0 * total / grid.h ** 3


def _smooth_cell_average(values_fn, grid: Grid, center: np.ndarray, order: int = 6) -> float:
    """Tensor Gauss-Legendre cell average of a smooth radial term."""
    a = grid.h / 2.0
    nodes, weights = np.polynomial.legendre.leggauss(order)
    pts = [center[i] + a * nodes for i in range(grid.dim)]
    mesh = np.meshgrid(*pts, indexing="ij")
    r = np.sqrt(sum(c * c for c in mesh))
    wmesh = np.meshgrid(*([weights] * grid.dim), indexing="ij")
    wtot = np.ones_like(r)
    for w in wmesh:
        wtot = wtot * w
    return float((values_fn(r) * wtot).sum()) / 2.0 ** grid.dim


def periodize(k: RadialKernel, grid: Grid, tolerance: float = 1e-10,
              max_shells: int = 256) -> PeriodizedKernel:
    """Sum the lattice translates of a radial kernel on the offset lattice.

    Shells |l|_inf = s are accumulated until the decay certificate bounds the
    remaining tail below `tolerance` (a compactly supported kernel stops as
    soon as no translate can reach the domain).  For kernels singular at the
    origin the zero-offset cell stores the cell average of the full sum.
    """
    if k.decay is None and k.support_radius is None:
        raise ValueError("kernel needs decay metadata or a declared support radius")
    L = grid.half_length
    dim = grid.dim
    mesh = grid.meshgrid(offsets=True)

    w = np.zeros(grid.shape)
    g = [np.zeros(grid.shape) for _ in range(dim)]
    origin_idx = (0,) * dim
    origin_value = _cell_average_origin(k, grid) if k.singular_at_origin else None

    shells = 0
    s = 0
    while True:
        if s > 0:
            if k.support_radius is not None:
                if L * (2 * s - 1) > k.support_radius:
                    break
            elif _tail_estimate(k, grid, s) < tolerance:
                break
        if s > max_shells:
            raise ValueError("lattice sum did not converge within max_shells")
        _add_shell(k, grid, mesh, w, g, s)
        if k.singular_at_origin:
            origin_value += _origin_shell_average(k, grid, s)
        shells = s
        s += 1

    if k.singular_at_origin:
        w[origin_idx] = origin_value
    # gradient at the zero offset vanishes by radial symmetry
    for comp in g:
        comp[origin_idx] = 0.0

    field = Field(grid, w)
    grad = [Field(grid, c) for c in g]
    return PeriodizedKernel(field=field, gradient=grad, truncation_radius_cells=shells)


def _shell_offsets(s: int, dim: int):
    rng = range(-s, s + 1)
    if dim == 1:
        cands = [(l,) for l in rng]
    elif dim == 2:
        cands = [(a, b) for a in rng for b in rng]
    else:
        cands = [(a, b, c) for a in rng for b in rng for c in rng]
    return [l for l in cands if max(abs(c) for c in l) == s]


def _add_shell(k: RadialKernel, grid: Grid, mesh, w, g, s: int):
    """Accumulate point samples of all translates with |l|_inf == s.

    The r = 0 sample (zero offset of the central translate) is taken as the
    finite profile value for regular kernels and skipped for singular ones;
    the caller overwrites that cell with the proper cell average.
    """
    L = grid.half_length
    dim = grid.dim
    for l in _shell_offsets(s, dim):
        shifted = [mesh[i] - 2.0 * L * l[i] for i in range(dim)]
        r = np.sqrt(sum(c * c for c in shifted))
        if k.support_radius is not None and float(r.min()) > k.support_radius:
            continue
        at_origin = r == 0.0
        r_safe = np.where(at_origin, 1.0, r)
        vals = np.asarray(k.profile(r_safe), dtype=float)
        dvals = np.asarray(k.derivative_profile(r_safe), dtype=float)
        if k.support_radius is not None:
            outside = r_safe > k.support_radius
            vals = np.where(outside, 0.0, vals)
            dvals = np.where(outside, 0.0, dvals)
        if np.any(at_origin):
            origin_val = 0.0 if k.singular_at_origin else k.value_at_origin()
            vals = np.where(at_origin, origin_val, vals)
            dvals = np.where(at_origin, 0.0, dvals)
        w += vals
        for i in range(dim):
            g[i] += dvals * shifted[i] / r_safe


def _origin_shell_average(k: RadialKernel, grid: Grid, s: int) -> float:
    """Cell averages over the origin cell of the smooth translates in shell s."""
    L = grid.half_length
    total = 0.0
    for l in _shell_offsets(s, grid.dim):
        if all(c == 0 for c in l):
            continue
        center = np.array([-2.0 * L * c for c in l], dtype=float)
        if k.support_radius is not None:
            dist = np.linalg.norm(center) - math.sqrt(grid.dim) * grid.h
            if dist > k.support_radius:
                continue
        total += _smooth_cell_average(lambda r: np.asarray(k.profile(r), dtype=float),
                                      grid, center)
    return total


def _tail_estimate(k: RadialKernel, grid: Grid, s: int) -> float:
    """Upper bound on everything beyond shells < s."""
    L = grid.half_length
    dim = grid.dim
    total = 0.0
    t = s
    while True:
        count = (2 * t + 1) ** dim - (2 * t - 1) ** dim
        # worst case over x in Omega: the max-axis distance is at least L(2t-1)
        rmin = max(L * (2 * t - 1), 0.5)
        if k.tail_bound is not None:
            term = count * k.tail_bound(rmin)
        else:
            C, alpha = k.decay
            term = count * C * (1.0 + rmin) ** (-alpha)
        total += term
        if term < 1e-18 * max(total, 1.0) or t > s + 400:
            break
        t += 1
    return total

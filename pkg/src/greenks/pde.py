"""Finite-volume solvers for the nonlocal and Keller-Segel-type systems.

One explicit conservative update advances the density: upwinded advective
fluxes with the saturation factor evaluated at the upwind cell, and a
centered two-point flux for the nonlinear diffusion.  Chemical fields are
either in instantaneous equilibrium (spectral elliptic solve each step) or
relaxed with a backward-Euler spectral step, unconditionally stable in the
relaxation parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .domain import (Field, Grid, GridMismatchError, SpaceTimeSeries, gradient,
                     inner_l2, norm_l1, norm_l2, periodic_convolve)
from .greens import _multiplier, elliptic_solve
from .kernel import PeriodizedKernel

_BOUND_SLACK = 1e-6        # allowed excursion outside [0, 1]
_MASS_TOL = 1e-10          # relative mass drift treated as a solver failure
_MAX_DT_HALVINGS = 20


class InputValidationError(ValueError):
    """Initial data or configuration violates the model assumptions."""


class NumericalAbortError(RuntimeError):
    """The time loop could not continue (repeated step rejections)."""


@dataclass
class ModelFunctions:
    """Nonlinearities of the density equation.

    ``beta`` must be strictly increasing with beta(0) = 0 (degenerate slope
    at 0 is fine); ``g`` vanishes outside [0, 1] and is bounded by L_g * s
    there.  ``eta`` adds the linear regularization eta*s to beta.
    """

    beta: Callable[[np.ndarray], np.ndarray]
    beta_prime: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray]   # antiderivative of beta
    g: Callable[[np.ndarray], np.ndarray]
    L_g: float = 1.0
    eta: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        s = np.linspace(0.0, 1.0, 1001)
        b = np.asarray(self.beta(s), dtype=float)
        if abs(b[0]) > 1e-14:
            raise ValueError("beta(0) must be 0")
        if np.any(np.diff(b) <= 0):
            raise ValueError("beta must be strictly increasing on [0, 1]")
        bp = np.asarray(self.beta_prime(s[1:]), dtype=float)
        if np.any(bp <= 0):
            raise ValueError("beta' must be positive on (0, 1]")
        gs = np.asarray(self.g(s), dtype=float) * np.ones_like(s)
        if abs(gs[-1]) > 1e-14 or np.any(np.abs(gs[1:]) > self.L_g * s[1:] * (1 + 1e-12)):
            raise ValueError("g must vanish at 1 and satisfy |g(s)| <= L_g s")
        for probe in (-0.5, 1.5):
            if abs(float(np.asarray(self.g(np.array([probe])), dtype=float)[0])) > 1e-14:
                raise ValueError("g must vanish outside [0, 1]")

    def beta_eff(self, u: np.ndarray) -> np.ndarray:
        b = np.asarray(self.beta(u), dtype=float)
        return b + self.eta * u if self.eta else b

    def beta_prime_eff(self, u: np.ndarray) -> np.ndarray:
        bp = np.asarray(self.beta_prime(u), dtype=float)
        return bp + self.eta if self.eta else bp

    def phi_eff(self, u: np.ndarray) -> np.ndarray:
        p = np.asarray(self.phi(u), dtype=float)
        return p + 0.5 * self.eta * u * u if self.eta else p


def porous_medium_model(gamma: float, eta: float = 0.0) -> ModelFunctions:
    """beta(u) = u^gamma with the volume-filling g(u) = u(1-u)."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    if gamma == 1:
        return linear_model(eta=eta)
    return ModelFunctions(
        beta=lambda u: np.abs(u) ** gamma * np.sign(u),
        beta_prime=lambda u: gamma * np.abs(u) ** (gamma - 1.0),
        phi=lambda u: np.abs(u) ** (gamma + 1.0) / (gamma + 1.0),
        g=volume_filling_g,
        L_g=1.0,
        eta=eta,
        name=f"power(gamma={gamma})",
    )


def linear_model(eta: float = 0.0) -> ModelFunctions:
    return ModelFunctions(
        beta=lambda u: np.asarray(u, dtype=float),
        beta_prime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        phi=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
        g=volume_filling_g,
        L_g=1.0,
        eta=eta,
        name="linear",
    )


def volume_filling_g(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.where((s > 0.0) & (s < 1.0), s * (1.0 - s), 0.0)


def linear_saturating_g(s: np.ndarray) -> np.ndarray:
    """g(s) = s on [0, 1), 0 outside; keeps |g| <= s but not u <= 1 structurally."""
    s = np.asarray(s, dtype=float)
    return np.where((s > 0.0) & (s < 1.0), s, 0.0)


@dataclass
class ChemicalSpec:
    """Chemical layer: diffusivities, sensitivities and relaxation time.

    xi = 0 selects the parabolic-elliptic system, xi in (0, 1] the relaxed
    parabolic-parabolic one.
    """

    diffusivities: list
    sensitivities: list
    xi: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.diffusivities, dtype=float)
        a = np.asarray(self.sensitivities, dtype=float)
        if d.shape != a.shape:
            raise ValueError("diffusivities and sensitivities length mismatch")
        if np.any(d <= 0):
            raise ValueError("diffusivities must be positive")
        if not (self.xi == 0.0 or 0.0 < self.xi <= 1.0):
            raise ValueError("xi must be 0 or in (0, 1]")


@dataclass
class RunConfig:
    grid: Grid
    t_end: float
    dt: Optional[float] = None        # None = automatic CFL step
    snapshot_every: float = 0.05
    cfl_safety: float = 0.4

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not (0 < self.dt <= self.t_end):
            raise ValueError("dt must lie in (0, t_end]")
        if not (0 < self.snapshot_every <= self.t_end):
            raise ValueError("snapshot_every must lie in (0, t_end]")
        if not (0 < self.cfl_safety < 1):
            raise ValueError("cfl_safety must lie in (0, 1)")


@dataclass
class Diagnostics:
    times: list = dc_field(default_factory=list)
    mass: list = dc_field(default_factory=list)
    min_u: list = dc_field(default_factory=list)
    max_u: list = dc_field(default_factory=list)
    phi: list = dc_field(default_factory=list)
    grad_beta_accum: list = dc_field(default_factory=list)
    drift_accum: list = dc_field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["time,mass,min_u,max_u,phi,grad_beta_accum,drift_accum"]
        for row in zip(self.times, self.mass, self.min_u, self.max_u,
                       self.phi, self.grad_beta_accum, self.drift_accum):
            lines.append(",".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"


@dataclass
class SolverState:
    time: float
    u: Field
    v: list
    diagnostics: Diagnostics


# --- drift velocities ----------------------------------------------------

def drift_velocity_nonlocal(u: Field, W: PeriodizedKernel) -> list:
    """grad(W*u) on the grid.

    Differentiating the convolution and convolving the differentiated kernel
    are the same discrete linear operation; both are computed and compared
    to guard against kernel/grid mixups.
    """
    conv = periodic_convolve(W.field, u)
    vel = gradient(conv)
    for i, gw in enumerate(gradient(W.field)):
        alt = periodic_convolve(gw, u)
        scale = max(float(np.abs(vel[i].values).max()), 1.0)
        if float(np.abs(alt.values - vel[i].values).max()) > 1e-10 * scale:
            raise AssertionError("convolution/differentiation routes disagree")
    return vel


def drift_velocity_chemo(v: list, a: list) -> list:
    if not v:
        raise ValueError("need at least one chemical field")
    if len(v) != len(a):
        raise ValueError("chemical fields and sensitivities length mismatch")
    total = np.zeros(v[0].grid.shape)
    for vj, aj in zip(v, a):
        if vj.grid != v[0].grid:
            raise GridMismatchError("chemical fields on different grids")
        total += float(aj) * vj.values
    return gradient(Field(v[0].grid, total))


# --- single updates ------------------------------------------------------

def step_u(u: Field, velocity: list, model: ModelFunctions, dt: float) -> Field:
    """One conservative explicit update of the density field."""
    grid = u.grid
    h = grid.h
    vals = u.values
    beta_vals = model.beta_eff(vals)
    flux_div = np.zeros(grid.shape)
    for ax in range(grid.dim):
        v_face = 0.5 * (velocity[ax].values + np.roll(velocity[ax].values, -1, axis=ax))
        u_right = np.roll(vals, -1, axis=ax)
        u_up = np.where(v_face > 0.0, vals, u_right)
        flux = model.g(u_up) * v_face
        flux -= (np.roll(beta_vals, -1, axis=ax) - beta_vals) / h
        flux_div += (flux - np.roll(flux, 1, axis=ax)) / h
    return Field(grid, vals - dt * flux_div)


def step_v_parabolic(v_old: Field, u: Field, d: float, xi: float, dt: float) -> Field:
    """Backward-Euler spectral update of one chemical field."""
    if xi <= 0:
        raise ValueError("xi must be positive for the relaxed chemical step")
    lam = dt / xi
    sym = _multiplier(d, u.grid)          # 1/(1 + d|xi_k|^2)
    # (I + lam(-d Lap + I)) v_new = v_old + lam u  ->  divide by 1 + lam/sym
    rhs = np.fft.fftn(v_old.values) + lam * np.fft.fftn(u.values)
    v_new = np.fft.ifftn(rhs / (1.0 + lam / sym)).real
    return Field(u.grid, v_new)


def stable_dt(u: Field, velocity: list, model: ModelFunctions, cfl_safety: float) -> float:
    grid = u.grid
    h = grid.h
    N = grid.dim
    tiny = 1e-300
    span = np.clip(u.values, 0.0, 1.0)
    max_bp = float(model.beta_prime_eff(np.linspace(0.0, float(span.max()) or 1.0, 64)).max())
    max_vel = max(float(np.abs(v.values).max()) for v in velocity)
    dt_diff = h * h / (2.0 * N * max_bp + tiny)
    dt_adv = h / (2.0 * N * max_vel + tiny)
    return cfl_safety * min(dt_diff, dt_adv)


# --- the time loop -------------------------------------------------------

def _validate_u0(u0: Field):
    if float(u0.values.min()) < 0.0 or float(u0.values.max()) > 1.0:
        raise InputValidationError("initial density must satisfy 0 <= u_0 <= 1")


def _snapshot_times(config: RunConfig) -> np.ndarray:
    k = int(math.floor(config.t_end / config.snapshot_every + 1e-12))
    times = [i * config.snapshot_every for i in range(k + 1)]
    if times[-1] < config.t_end - 1e-12 * config.t_end:
        times.append(config.t_end)
    else:
        times[-1] = config.t_end
    return np.array(times)


def run(model: ModelFunctions, chem, u0: Field, config: RunConfig,
        v0: Optional[list] = None):
    """Advance one of the three systems and collect snapshots + diagnostics.

    ``chem`` is either a PeriodizedKernel (nonlocal drift) or a ChemicalSpec
    (parabolic-elliptic for xi = 0, parabolic-parabolic otherwise).
    Returns (SpaceTimeSeries, SolverState).
    """
    _validate_u0(u0)
    grid = u0.grid
    nonlocal_mode = isinstance(chem, PeriodizedKernel)
    if nonlocal_mode:
        if chem.field.grid != grid:
            raise GridMismatchError("kernel and initial datum on different grids")
        v = []
    else:
        if chem.xi > 0:
            if v0 is not None:
                v = [f.copy() for f in v0]
            else:
                # default chemical datum: equilibrium w_j * u_0
                v = [elliptic_solve(d, u0) for d in chem.diffusivities]
        else:
            v = [elliptic_solve(d, u0) for d in chem.diffusivities]

    u = u0.copy()
    t = 0.0
    mass0 = u.integral()
    diag = Diagnostics()
    grad_beta_accum = 0.0
    drift_accum = 0.0

    snap_times = _snapshot_times(config)
    snapshots: list = []
    next_snap = 0

    def record_diag(time, u_field):
        diag.times.append(time)
        diag.mass.append(u_field.integral())
        diag.min_u.append(float(u_field.values.min()))
        diag.max_u.append(float(u_field.values.max()))
        diag.phi.append(float(model.phi_eff(u_field.values).sum()) * grid.cell_volume)
        diag.grad_beta_accum.append(grad_beta_accum)
        diag.drift_accum.append(drift_accum)

    def velocity_of(u_field, v_fields):
        if nonlocal_mode:
            conv = periodic_convolve(chem.field, u_field)
            return gradient(conv)
        return drift_velocity_chemo(v_fields, chem.sensitivities)

    velocity = velocity_of(u, v)
    record_diag(0.0, u)

    # t = 0 snapshot
    snapshots.append(u.copy())
    next_snap = 1

    prev_t, prev_u = t, u
    max_steps = 50_000_000
    steps = 0
    while t < config.t_end - 1e-14 * config.t_end:
        steps += 1
        if steps > max_steps:
            raise NumericalAbortError("step budget exhausted")

        relaxed = not nonlocal_mode and chem.xi > 0
        if not relaxed:
            # chemical layer (if any) is slaved to the current density
            if not nonlocal_mode:
                v = [elliptic_solve(d, u) for d in chem.diffusivities]
            velocity = velocity_of(u, v)

        if config.dt is not None:
            dt = config.dt
        else:
            dt = stable_dt(u, velocity, model, config.cfl_safety)
        dt = min(dt, config.t_end - t)

        accepted = False
        for _ in range(_MAX_DT_HALVINGS):
            if relaxed:
                v_new = [step_v_parabolic(vj, u, d, chem.xi, dt)
                         for vj, d in zip(v, chem.diffusivities)]
                vel_new = drift_velocity_chemo(v_new, chem.sensitivities)
            else:
                v_new = v
                vel_new = velocity
            u_new = step_u(u, vel_new, model, dt)
            if (float(u_new.values.min()) >= -_BOUND_SLACK
                    and float(u_new.values.max()) <= 1.0 + _BOUND_SLACK):
                accepted = True
                break
            dt *= 0.5
        if not accepted:
            raise NumericalAbortError(
                f"step at t={t:.6g} rejected after {_MAX_DT_HALVINGS} dt halvings")

        # energy bookkeeping on the pre-step state
        gb = gradient(Field(grid, model.beta_eff(u.values)))
        grad_beta_accum += sum(inner_l2(c, c) for c in gb) * dt
        gvals = model.g(u.values)
        drift_accum += sum(
            float(((gvals * c.values) ** 2).sum()) * grid.cell_volume for c in vel_new) * dt

        prev_t, prev_u = t, u
        t += dt
        u, v, velocity = u_new, v_new, vel_new

        mass = u.integral()
        if abs(mass - mass0) > _MASS_TOL * max(abs(mass0), 1.0):
            raise NumericalAbortError("mass conservation lost")
        record_diag(t, u)

        # emit snapshots crossed by this step (linear interpolation in time)
        while next_snap < len(snap_times) and snap_times[next_snap] <= t + 1e-14:
            ts = snap_times[next_snap]
            if t - prev_t > 0 and ts < t:
                theta = (ts - prev_t) / (t - prev_t)
                interp = Field(grid, (1 - theta) * prev_u.values + theta * u.values)
            else:
                interp = u.copy()
            snapshots.append(interp)
            next_snap += 1

    while next_snap < len(snap_times):
        snapshots.append(u.copy())
        next_snap += 1

    series = SpaceTimeSeries(grid=grid, times=snap_times.tolist(), snapshots=snapshots)
    state = SolverState(time=t, u=u, v=v, diagnostics=diag)
    return series, state


def young_drift_bound_holds(u: Field, W: PeriodizedKernel, slack: float = 1e-8) -> bool:
    """Discrete Young inequality ||grad(W)*u||_L2 <= ||grad W||_L1 ||u||_L2."""
    lhs = max(norm_l2(periodic_convolve(gw, u)) for gw in gradient(W.field))
    total_l1 = sum(norm_l1(gw) for gw in gradient(W.field))
    return lhs <= total_l1 * norm_l2(u) * (1.0 + slack)

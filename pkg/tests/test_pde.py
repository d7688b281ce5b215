import math

import numpy as np
import pytest

from greenks.domain import Field, Grid, norm_l2
from greenks.greens import GreensBasis, elliptic_solve
from greenks.harness import compare_runs
from greenks.kernel import PeriodizedKernel, adhesion_potential, periodize
from greenks.pde import (ChemicalSpec, InputValidationError, ModelFunctions,
                         RunConfig, drift_velocity_chemo, drift_velocity_nonlocal,
                         linear_model, porous_medium_model, run, step_u,
                         step_v_parabolic, volume_filling_g,
                         young_drift_bound_holds)

ONES = lambda r: np.ones_like(np.asarray(r, dtype=float))


def bump(grid, amp=0.8, width=0.4):
    x = grid.axis_centers()
    prof = np.where(np.abs(x) < width,
                    np.cos(0.5 * math.pi * x / width) ** 2, 0.0)
    return Field(grid, amp * prof)


# --- model functions ------------------------------------------------------

def test_porous_medium_presets():
    m = porous_medium_model(2.0)
    u = np.array([0.0, 0.5, 1.0])
    assert np.allclose(m.beta(u), u ** 2)
    assert np.allclose(m.beta_prime(u), 2 * u)
    assert np.allclose(m.phi(u), u ** 3 / 3.0)
    assert m.L_g == 1.0


def test_gamma_one_is_linear():
    m = porous_medium_model(1.0)
    u = np.linspace(0, 1, 11)
    assert np.allclose(m.beta(u), u)


def test_eta_regularization():
    m = porous_medium_model(2.0, eta=0.1)
    u = np.array([0.5])
    assert m.beta_eff(u)[0] == pytest.approx(0.25 + 0.05)
    assert m.beta_prime_eff(u)[0] == pytest.approx(1.0 + 0.1)


def test_model_validation_rejects_nonmonotone_beta():
    with pytest.raises(ValueError):
        ModelFunctions(beta=lambda u: -np.asarray(u, dtype=float),
                       beta_prime=lambda u: -np.ones_like(np.asarray(u, dtype=float)),
                       phi=lambda u: np.asarray(u, dtype=float),
                       g=volume_filling_g)


def test_model_validation_rejects_unsupported_g():
    with pytest.raises(ValueError):
        ModelFunctions(beta=lambda u: np.asarray(u, dtype=float),
                       beta_prime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
                       phi=lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
                       g=lambda s: np.ones_like(np.asarray(s, dtype=float)))


def test_chemical_spec_validation():
    with pytest.raises(ValueError):
        ChemicalSpec([1.0], [1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        ChemicalSpec([-1.0], [1.0], 0.0)
    with pytest.raises(ValueError):
        ChemicalSpec([1.0], [1.0], 2.0)


# --- drift velocities -----------------------------------------------------

def test_nonlocal_drift_vanishes_for_constant_density():
    g = Grid(1, 1.0, 64)
    W = periodize(adhesion_potential(ONES, 1), g)
    for comp in drift_velocity_nonlocal(Field.constant(g, 0.4), W):
        assert np.abs(comp.values).max() < 1e-12


def test_nonlocal_drift_vanishes_for_zero_kernel():
    g = Grid(1, 1.0, 64)
    zero = Field.constant(g, 0.0)
    W = PeriodizedKernel(field=zero, gradient=[zero.copy()], truncation_radius_cells=0)
    vel = drift_velocity_nonlocal(bump(g), W)
    assert np.abs(vel[0].values).max() == 0.0


def test_nonlocal_drift_single_mode():
    g = Grid(1, 1.0, 128)
    d = 1.0
    basis = GreensBasis.build(g, [d])
    W = basis.as_kernel([1.0])
    x = g.axis_centers()
    w = math.pi / g.half_length
    u = Field(g, np.cos(w * x))
    vel = drift_velocity_nonlocal(u, W)[0]
    factor = 1.0 / (1.0 + d * w * w)
    # exact discrete value uses the centered-difference symbol
    discrete = -np.sin(w * x) * math.sin(w * g.h) / g.h * factor
    assert np.abs(vel.values - discrete).max() < 1e-13
    # continuum formula -(pi/L) sin(pi x/L) / (1 + d pi^2/L^2) up to O(h^2)
    continuum = -w * np.sin(w * x) * factor
    assert np.abs(vel.values - continuum).max() < 1e-3


def test_chemo_drift_trivial_cases():
    g = Grid(1, 1.0, 32)
    v1 = Field.constant(g, 2.0)
    assert np.abs(drift_velocity_chemo([v1], [1.0])[0].values).max() == 0.0
    rng = np.random.default_rng(0)
    v2 = Field(g, rng.random(g.shape))
    assert np.abs(drift_velocity_chemo([v2], [0.0])[0].values).max() == 0.0
    cancel = drift_velocity_chemo([v2, -2.0 * v2], [1.0, 0.5])[0]
    assert np.abs(cancel.values).max() < 1e-13


def test_chemo_drift_validation():
    g = Grid(1, 1.0, 32)
    with pytest.raises(ValueError):
        drift_velocity_chemo([], [])
    with pytest.raises(ValueError):
        drift_velocity_chemo([Field.constant(g, 1.0)], [1.0, 2.0])


# --- single updates -------------------------------------------------------

def test_step_u_heat_mode_decay():
    # beta = id, no drift: u_new = u + dt Lap_h u with the 3-point stencil
    g = Grid(1, 1.0, 8)
    model = linear_model()
    x = g.axis_centers()
    w = math.pi / g.half_length
    u = Field(g, 0.3 + 0.1 * np.cos(w * x))
    zero_vel = [Field.constant(g, 0.0)]
    dt = 1e-3
    out = step_u(u, zero_vel, model, dt)
    lam = 4.0 * math.sin(w * g.h / 2.0) ** 2 / g.h ** 2
    expected = 0.3 + 0.1 * (1.0 - dt * lam) * np.cos(w * x)
    assert np.abs(out.values - expected).max() < 1e-13


def test_step_u_is_conservative():
    g = Grid(2, 1.0, 16)
    rng = np.random.default_rng(3)
    u = Field(g, rng.random(g.shape))
    vel = [Field(g, rng.standard_normal(g.shape)) for _ in range(2)]
    out = step_u(u, vel, porous_medium_model(2.0), 1e-4)
    assert abs(out.integral() - u.integral()) < 1e-13 * abs(u.integral())


def test_step_u_pure_phase_has_no_advection():
    # u in {0, 1}: g(u_upwind) = 0 on every face, so any velocity acts like none
    g = Grid(1, 1.0, 16)
    vals = np.zeros(g.shape)
    vals[4:9] = 1.0
    u = Field(g, vals)
    rng = np.random.default_rng(1)
    vel = [Field(g, rng.standard_normal(g.shape))]
    zero = [Field.constant(g, 0.0)]
    model = porous_medium_model(2.0)
    with_vel = step_u(u, vel, model, 1e-4)
    without = step_u(u, zero, model, 1e-4)
    assert np.array_equal(with_vel.values, without.values)


def test_step_v_equilibrium_constant():
    g = Grid(1, 1.0, 32)
    c = Field.constant(g, 0.7)
    out = step_v_parabolic(c, c, d=1.0, xi=0.5, dt=1e-2)
    assert np.abs(out.values - 0.7).max() < 1e-13


def test_step_v_resolvent_limit():
    g = Grid(1, 1.0, 64)
    rng = np.random.default_rng(2)
    u = Field(g, rng.random(g.shape))
    v0 = Field.constant(g, 0.0)
    out = step_v_parabolic(v0, u, d=0.8, xi=1e-8, dt=1.0)   # dt/xi = 1e8
    ref = elliptic_solve(0.8, u)
    assert np.abs(out.values - ref.values).max() < 1e-6


def test_step_v_single_mode_amplification():
    g = Grid(1, 1.0, 8)
    d, xi, dt = 0.5, 0.1, 1e-3
    lam = dt / xi
    x = g.axis_centers()
    w = math.pi / g.half_length
    v0 = Field(g, np.cos(w * x))
    out = step_v_parabolic(v0, Field.constant(g, 0.0), d, xi, dt)
    factor = 1.0 / (1.0 + lam * (1.0 + d * w * w))
    assert np.abs(out.values - factor * v0.values).max() < 1e-14
    with pytest.raises(ValueError):
        step_v_parabolic(v0, v0, d, 0.0, dt)


# --- the time loop --------------------------------------------------------

def test_run_validates_initial_datum():
    g = Grid(1, 1.0, 32)
    cfg = RunConfig(g, t_end=0.01, snapshot_every=0.01)
    with pytest.raises(InputValidationError):
        run(linear_model(), ChemicalSpec([1.0], [1.0], 0.0),
            Field.constant(g, 1.5), cfg)


@pytest.mark.parametrize("chem", [
    ChemicalSpec([1.0], [1.0], 0.0),
    ChemicalSpec([1.0], [1.0], 1e-2),
    "kernel",
])
def test_constant_state_is_stationary(chem):
    g = Grid(1, 1.0, 32)
    if chem == "kernel":
        chem = periodize(adhesion_potential(ONES, 1), g)
    cfg = RunConfig(g, t_end=0.02, snapshot_every=0.01)
    series, state = run(porous_medium_model(2.0), chem, Field.constant(g, 0.4), cfg)
    for snap in series.snapshots:
        assert np.abs(snap.values - 0.4).max() < 1e-12
    d = state.diagnostics
    assert max(d.max_u) - min(d.min_u) < 1e-12


def test_snapshot_times_cover_interval():
    g = Grid(1, 1.0, 32)
    cfg = RunConfig(g, t_end=0.23, snapshot_every=0.05)
    series, _ = run(linear_model(), ChemicalSpec([1.0], [1.0], 0.0), bump(g), cfg)
    assert series.times[0] == 0.0
    assert series.times[-1] == pytest.approx(0.23)
    assert len(series.times) == 6


def test_translation_equivariance():
    g = Grid(1, 1.0, 64)
    W = periodize(adhesion_potential(ONES, 1), g)
    cfg = RunConfig(g, t_end=0.05, snapshot_every=0.05)
    u0 = bump(g)
    shift = 7
    u0_shift = Field(g, np.roll(u0.values, shift))
    s_a, _ = run(porous_medium_model(2.0), W, u0, cfg)
    s_b, _ = run(porous_medium_model(2.0), W, u0_shift, cfg)
    for sa, sb in zip(s_a.snapshots, s_b.snapshots):
        assert np.abs(np.roll(sa.values, shift) - sb.values).max() < 1e-12


def test_single_green_coincidence_small():
    g = Grid(1, 1.0, 64)
    basis = GreensBasis.build(g, [1.0])
    W = basis.as_kernel([2.0])
    cfg = RunConfig(g, t_end=0.1, snapshot_every=0.02)
    model = porous_medium_model(2.0)
    s_nl, _ = run(model, W, bump(g), cfg)
    s_pe, _ = run(model, ChemicalSpec([1.0], [2.0], 0.0), bump(g), cfg)
    assert compare_runs(s_nl, s_pe) < 1e-8


def test_attraction_case_aggregates():
    # negatively scaled omega = 1 potential: the attractive orientation under
    # the drift -div(g(u) grad(W*u)); max_u rises over [0, 0.5]
    g = Grid(1, 1.0, 64)
    base = periodize(adhesion_potential(ONES, 1), g)
    W = PeriodizedKernel(field=-50.0 * base.field,
                         gradient=[-50.0 * c for c in base.gradient],
                         truncation_radius_cells=base.truncation_radius_cells)
    cfg = RunConfig(g, t_end=0.5, snapshot_every=0.1)
    series, state = run(porous_medium_model(2.0), W, bump(g, amp=0.5), cfg)
    d = state.diagnostics
    mass0 = d.mass[0]
    assert max(abs(m - mass0) for m in d.mass) <= 1e-10 * abs(mass0)
    assert min(d.min_u) >= -1e-6 and max(d.max_u) <= 1.0 + 1e-6
    assert d.max_u[-1] > d.max_u[0]


def test_energy_diagnostic_inequality():
    g = Grid(1, 1.0, 64)
    cfg = RunConfig(g, t_end=0.25, snapshot_every=0.05)
    _, state = run(porous_medium_model(2.0), ChemicalSpec([1.0], [1.0], 0.0),
                   bump(g), cfg)
    d = state.diagnostics
    phi0 = d.phi[0]
    assert d.grad_beta_accum[-1] <= 2.0 * phi0 + d.drift_accum[-1] + 0.05


def test_young_drift_bound():
    g = Grid(1, 1.0, 64)
    W = periodize(adhesion_potential(ONES, 1), g)
    rng = np.random.default_rng(8)
    u = Field(g, rng.random(g.shape))
    assert young_drift_bound_holds(u, W)


def test_parabolic_run_with_explicit_v0():
    g = Grid(1, 1.0, 32)
    cfg = RunConfig(g, t_end=0.02, snapshot_every=0.01)
    v0 = [Field.constant(g, 0.1)]
    series, state = run(linear_model(), ChemicalSpec([1.0], [1.0], 1e-2),
                        bump(g), cfg, v0=v0)
    assert len(state.v) == 1
    assert series.times[-1] == pytest.approx(0.02)

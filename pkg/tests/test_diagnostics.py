"""Tests for diagnostics: weighted norms, balance residuals, bounds, admissibility."""

import math

import numpy as np
import pytest

from dnls_core import (
    AlgebraicDriver,
    FieldState,
    GaussianDriver,
    GaussianMMS,
    GaussianWeight,
    IntegratorConfig,
    LinearAbs,
    ManufacturedIC,
    ModelParams,
    NoDriver,
    QuadraticAbs,
    TimeWeight,
    UnitWeight,
    agmon_check,
    bound_constants,
    build_grid,
    certify_run,
    driver_admissibility,
    eval_ic,
    functional_J,
    gronwall_check,
    mass,
    mass_balance_residual,
    simulate,
    weighted_h1,
    weighted_l2,
    weighted_space_balance_residual,
    weighted_time_balance_residual,
)
from dnls_core.diagnostics import spatial_weight_validity, time_weight_validity
from dnls_core.errors import InvalidArgumentError
from dnls_core.integrator import BLOWUP, Trajectory

SQRT_PI = math.sqrt(math.pi)
GAUSSIAN_IC = ManufacturedIC(GaussianMMS())
WEIGHT = LinearAbs(x0=5.0)
FORCED = ModelParams(0.01, GaussianDriver(Gamma=0.5, sigma_x=3.0, sigma_t=0.5))


def _gaussian_state(g):
    return FieldState(0.0, eval_ic(GAUSSIAN_IC, g.interior))


def _run(params, weight=WEIGHT, t_end=1.0):
    g = build_grid(128, 20.0)
    cfg = IntegratorConfig(snapshot_times=tuple(np.linspace(0.0, t_end, 11)), backend="lawson",
                           rel_tol=1e-10, abs_tol=1e-10, dt_max=0.01)
    return g, simulate(params, GAUSSIAN_IC, g, cfg, weight=weight)


@pytest.fixture(scope="module")
def forced_run():
    return _run(FORCED)


@pytest.fixture(scope="module")
def unforced_run():
    return _run(ModelParams(0.01))


# ---------------------------------------------------------------------------
# Weighted norms
# ---------------------------------------------------------------------------

def test_mass_of_gaussian():
    g = build_grid(128, 10.0)
    assert mass(g, _gaussian_state(g)) == pytest.approx(SQRT_PI, rel=1e-10)

def test_unit_weight_l2_is_mass():
    g = build_grid(128, 10.0)
    s = _gaussian_state(g)
    assert weighted_l2(g, s, UnitWeight()) == pytest.approx(mass(g, s), rel=1e-12)

def test_linear_weight_l2_across_kink():
    g = build_grid(128, 10.0)
    expected = 1.5 * SQRT_PI + 2.0
    assert weighted_l2(g, _gaussian_state(g), LinearAbs(x0=1.0)) == pytest.approx(expected, rel=1e-9)

def test_weighted_h1_unit_weight():
    g = build_grid(128, 10.0)
    assert weighted_h1(g, _gaussian_state(g), UnitWeight()) == pytest.approx(1.5 * SQRT_PI, rel=1e-9)

def test_functional_J_unforced():
    g = build_grid(128, 10.0)
    expected = SQRT_PI / 8 - math.sqrt(math.pi / 2) / 4
    assert functional_J(g, _gaussian_state(g), UnitWeight(), NoDriver(), 0.0) == pytest.approx(expected, rel=1e-9)

def test_functional_J_rejects_fit_only_families():
    g = build_grid(16, 10.0)
    with pytest.raises(InvalidArgumentError):
        functional_J(g, _gaussian_state(g), GaussianWeight(sigma=10.0), NoDriver(), 0.0)

def test_norms_check_state_size():
    g = build_grid(16, 10.0)
    with pytest.raises(InvalidArgumentError):
        mass(g, FieldState(0.0, np.zeros(4)))


# ---------------------------------------------------------------------------
# Balance laws
# ---------------------------------------------------------------------------

def test_mass_balance_unforced(unforced_run):
    g, traj = unforced_run
    r = mass_balance_residual(traj, ModelParams(0.01), g)
    assert r.shape[1] == 2
    assert np.max(np.abs(r[:, 1])) < 1e-6

def test_mass_balance_forced(forced_run):
    g, traj = forced_run
    r = mass_balance_residual(traj, FORCED, g)
    assert np.max(np.abs(r[:, 1])) < 1e-4

def test_mass_balance_detects_wrong_damping(forced_run):
    g, traj = forced_run
    r = mass_balance_residual(traj, ModelParams(0.5, FORCED.driver), g)
    assert np.max(np.abs(r[:, 1])) > 0.1

def test_time_balance_with_constant_weight_is_half_mass_balance(forced_run):
    g, traj = forced_run
    plain = mass_balance_residual(traj, FORCED, g)
    timed = weighted_time_balance_residual(traj, TimeWeight.constant(), FORCED, g)
    assert np.allclose(timed[:, 1], 0.5 * plain[:, 1], atol=1e-12)

def test_time_balance_growing_weight(forced_run):
    g, traj = forced_run
    r = weighted_time_balance_residual(traj, TimeWeight(t0=2.0, kappa=2.0, gamma=0.01), FORCED, g)
    assert np.max(np.abs(r[:, 1])) < 1e-4

def test_space_balance(forced_run):
    g, traj = forced_run
    r = weighted_space_balance_residual(traj, WEIGHT, FORCED, g)
    assert np.max(np.abs(r[:, 1])) < 1e-4

def test_space_balance_rejects_other_weight(forced_run):
    g, traj = forced_run
    with pytest.raises(InvalidArgumentError):
        weighted_space_balance_residual(traj, LinearAbs(x0=100.0), FORCED, g)

def test_balance_needs_recorded_columns():
    traj = Trajectory(series={"t": np.arange(5.0), "mass": np.ones(5)})
    with pytest.raises(InvalidArgumentError):
        mass_balance_residual(traj, ModelParams(0.0), build_grid(8, 1.0))

def test_balance_needs_three_samples():
    traj = Trajectory(series={"t": np.arange(2.0), "mass": np.ones(2), "forcing_work": np.zeros(2)})
    with pytest.raises(InvalidArgumentError):
        mass_balance_residual(traj, ModelParams(0.0), build_grid(8, 1.0))


# ---------------------------------------------------------------------------
# Agmon inequality
# ---------------------------------------------------------------------------

def test_agmon_ratio_at_most_one():
    g = build_grid(128, 20.0)
    report = agmon_check(g, _gaussian_state(g), LinearAbs(x0=100.0))
    assert 0.0 < report.ratio <= 1.0
    assert not report.inconsistent

def test_agmon_zero_state():
    g = build_grid(16, 5.0)
    report = agmon_check(g, FieldState(0.0, np.zeros(g.size)), WEIGHT)
    assert report.ratio == 0.0
    assert not report.inconsistent


# ---------------------------------------------------------------------------
# Weight validity
# ---------------------------------------------------------------------------

def test_linear_weight_is_valid():
    v = spatial_weight_validity(LinearAbs(x0=100.0), np.linspace(-500, 500, 101))
    assert v.beta1 == pytest.approx(0.01)
    assert v.beta2 == pytest.approx(0.01)
    assert v.valid

def test_unit_and_fit_only_weights_are_not_valid():
    xs = np.linspace(-10, 10, 21)
    assert not spatial_weight_validity(UnitWeight(), xs).valid
    assert not spatial_weight_validity(QuadraticAbs(x0=100.0), xs).valid

@pytest.mark.parametrize("w,regime,valid", [
    (TimeWeight(t0=2.0, kappa=1.0, gamma=0.01), "unconditional", True),
    (TimeWeight(t0=2.0, kappa=2.0, gamma=0.01), "conditional", True),
    (TimeWeight(t0=1.5, kappa=2.0, gamma=0.01), "conditional", False),
    (TimeWeight(t0=2.0, kappa=2.0, gamma=0.0), "constant", False),
    (TimeWeight.constant(), "constant", False),
    (TimeWeight(t0=0.5, kappa=3.0, fitted=True), "fitted", True),
])
def test_time_weight_regimes(w, regime, valid):
    v = time_weight_validity(w)
    assert v.regime == regime
    assert v.valid is valid
    assert v.exempt is w.fitted


# ---------------------------------------------------------------------------
# Bound constants, Gronwall, certification
# ---------------------------------------------------------------------------

def test_bound_constants_finite_and_certifying(unforced_run):
    g, traj = unforced_run
    report = bound_constants(traj, WEIGHT, TimeWeight(t0=2.0, kappa=1.0, gamma=0.01), g)
    values = [report.K1_emp, report.K2_emp, report.R_emp, report.R0_emp, report.R1_emp]
    assert all(math.isfinite(v) and v > 0 for v in values)
    assert report.certifying, report.notes
    assert report.R1_emp >= report.R0_emp
    assert set(report.times_of_sup) >= {"K1_emp", "K2_emp"}

def test_bound_constants_not_certifying_after_blowup(unforced_run):
    g, traj = unforced_run
    broken = Trajectory(snapshots=traj.snapshots, series=traj.series, status=BLOWUP, status_time=1.0)
    report = bound_constants(broken, WEIGHT, TimeWeight(t0=2.0, kappa=1.0, gamma=0.01), g)
    assert not report.certifying
    assert any("blowup" in n for n in report.notes)

def test_bound_constants_need_snapshots():
    with pytest.raises(InvalidArgumentError):
        bound_constants(Trajectory(), WEIGHT, TimeWeight.constant(), build_grid(8, 1.0))

def test_gronwall_envelope_holds(forced_run):
    g, traj = forced_run
    report = gronwall_check(traj, WEIGHT, FORCED, g)
    assert report.applicable
    assert report.passed
    assert report.C > 0

def test_gronwall_not_applicable_without_damping(unforced_run):
    g, traj = unforced_run
    assert not gronwall_check(traj, WEIGHT, ModelParams(0.0), g).applicable

def test_certify_run(unforced_run):
    g, traj = unforced_run
    cert = certify_run(traj, WEIGHT, TimeWeight(t0=2.0, kappa=1.0, gamma=0.01), ModelParams(0.01), g)
    assert cert.passed
    assert cert.agmon_max_ratio <= 1.0 + 1e-6
    assert cert.as_dict()["time_weight"]["regime"] == "unconditional"


# ---------------------------------------------------------------------------
# Driver admissibility
# ---------------------------------------------------------------------------

ADMISSIBILITY_GRID = build_grid(64, 400.0)


@pytest.mark.parametrize("kappa", [1.0, 2.0, 4.0])
def test_gaussian_driver_admissible(kappa):
    spec = GaussianDriver(Gamma=1.0, sigma_x=100.0, sigma_t=0.5)
    r = driver_admissibility(spec, LinearAbs(x0=100.0), TimeWeight(t0=2.0, kappa=kappa, gamma=0.01),
                             1e6, ADMISSIBILITY_GRID)
    assert not r.divergence_flag
    assert r.tail_slope == -math.inf
    assert r.fd_integral > 0

@pytest.mark.parametrize("omega,kappa,divergent", [
    (0.0, 1.0, False),
    (0.0, 2.0, True),
    (0.1, 2.0, False),
])
def test_algebraic_driver_admissibility(omega, kappa, divergent):
    spec = AlgebraicDriver(Gamma=1.5, delta_x=100.0, delta_t=0.5, omega=omega)
    r = driver_admissibility(spec, LinearAbs(x0=100.0), TimeWeight(t0=2.0, kappa=kappa, gamma=0.01),
                             1e6, ADMISSIBILITY_GRID)
    assert r.divergence_flag is divergent

def test_algebraic_tail_slopes():
    spec = AlgebraicDriver(Gamma=1.0, delta_x=100.0, delta_t=0.5)
    r = driver_admissibility(spec, LinearAbs(x0=100.0), TimeWeight(t0=2.0, kappa=1.0, gamma=0.01),
                             1e6, ADMISSIBILITY_GRID)
    assert r.tail_slope == pytest.approx(-2.0, abs=0.05)

@pytest.mark.parametrize("horizon", [1e3, 1e4, 1e6])
def test_admissibility_flag_does_not_depend_on_horizon(horizon):
    spec = AlgebraicDriver(Gamma=1.5, delta_x=100.0, delta_t=0.5, omega=0.0)
    r = driver_admissibility(spec, LinearAbs(x0=100.0), TimeWeight(t0=2.0, kappa=2.0, gamma=0.01),
                             horizon, ADMISSIBILITY_GRID)
    assert r.divergence_flag
    assert r.tail_slope == pytest.approx(0.0, abs=0.05)
    assert r.tail_start > 1e5
    assert r.horizon == horizon

def test_admissibility_rejects_bad_horizon():
    with pytest.raises(InvalidArgumentError):
        driver_admissibility(NoDriver(), WEIGHT, TimeWeight.constant(), 0.0, ADMISSIBILITY_GRID)

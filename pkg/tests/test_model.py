"""Tests for closed forms: initial data, drivers, Peregrine profile, MMS forcing, rhs."""

import math

import numpy as np
import pytest

from dnls_core import (
    AlgebraicDriver,
    AlgebraicIC,
    FieldState,
    FileIC,
    GaussianDriver,
    GaussianMMS,
    LinearAbs,
    ManufacturedDriver,
    ModelParams,
    NoDriver,
    PRWParams,
    SechIC,
    SechMMS,
    TimeWeight,
    build_grid,
    eval_driver,
    eval_ic,
    eval_prw,
    eval_spatial_weight,
    eval_time_weight,
    mms_forcing,
    mms_solution,
    rhs,
)
from dnls_core.errors import InvalidArgumentError, NumericOverflowError, OutOfDomainError
from dnls_core.model import (
    driver_time_derivative,
    eval_spatial_weight_derivative,
    eval_time_weight_derivative,
    make_rhs,
    make_split,
    sech,
)


def _nls_residual(u, x, t, h=1e-4):
    """i u_t + u_xx / 2 + |u|^2 u by central differences."""
    u_t = (u(x, t + h) - u(x, t - h)) / (2 * h)
    u_xx = (u(x + h, t) - 2 * u(x, t) + u(x - h, t)) / h**2
    return 1j * u_t + 0.5 * u_xx + abs(u(x, t)) ** 2 * u(x, t)


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

def test_algebraic_ic():
    assert eval_ic(AlgebraicIC(), 0.0) == 1.0
    assert eval_ic(AlgebraicIC(), 1.0) == 0.5
    assert isinstance(eval_ic(AlgebraicIC(), 1.0), complex)

def test_sech_ic_no_overflow():
    out = eval_ic(SechIC(), np.array([0.0, 1000.0, -1000.0]))
    assert out[0] == 1.0
    assert np.all(np.isfinite(out))
    assert abs(out[1]) < 1e-300

def test_sech_matches_cosh():
    x = np.linspace(-5, 5, 11)
    assert np.allclose(sech(x), 1 / np.cosh(x))

def test_file_ic_interpolates_and_checks_range():
    xs = np.linspace(-10, 10, 401)
    ic = FileIC(xs, np.exp(-xs**2))
    assert eval_ic(ic, 0.3) == pytest.approx(math.exp(-0.09), abs=1e-6)
    with pytest.raises(OutOfDomainError):
        eval_ic(ic, 11.0)

def test_file_ic_must_vanish_at_ends():
    xs = np.linspace(-1, 1, 11)
    with pytest.raises(InvalidArgumentError):
        FileIC(xs, np.ones(11))

def test_file_ic_must_increase():
    with pytest.raises(InvalidArgumentError):
        FileIC(np.array([0.0, 0.0, 1.0]), np.zeros(3))


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

def test_gaussian_driver_peak_value():
    d = GaussianDriver(Gamma=1.0, sigma_x=100.0, sigma_t=0.5)
    expected = math.sqrt(2) * np.exp(1j * math.pi / 4)
    assert eval_driver(d, 0.0, 0.0) == pytest.approx(expected)
    assert abs(eval_driver(d, 100.0, 0.0)) == pytest.approx(math.sqrt(2) * math.exp(-0.5))

def test_algebraic_driver_values():
    d = AlgebraicDriver(Gamma=1.5, delta_x=100.0, delta_t=0.5)
    assert abs(eval_driver(d, 0.0, 0.0)) == pytest.approx(1.5 * math.sqrt(2))
    assert abs(eval_driver(d, 100.0, 0.5)) == pytest.approx(1.5 * math.sqrt(2) / 16)

def test_algebraic_driver_rejects_negative_time():
    d = AlgebraicDriver(Gamma=1.0, delta_x=1.0, delta_t=1.0)
    with pytest.raises(InvalidArgumentError):
        eval_driver(d, 0.0, -0.1)

def test_no_driver_is_zero():
    assert np.all(eval_driver(NoDriver(), np.linspace(-1, 1, 5), 3.0) == 0)

@pytest.mark.parametrize("spec", [
    GaussianDriver(Gamma=1.0, sigma_x=10.0, sigma_t=0.5, t_center=0.3),
    AlgebraicDriver(Gamma=1.0, delta_x=10.0, delta_t=0.5, omega=0.7),
    ManufacturedDriver(GaussianMMS(a=0.8), gamma=0.1),
])
def test_driver_time_derivative_matches_differences(spec):
    x = np.array([0.0, 0.7, -2.0])
    t, h = 1.1, 1e-6
    fd = (eval_driver(spec, x, t + h) - eval_driver(spec, x, t - h)) / (2 * h)
    assert np.allclose(driver_time_derivative(spec, x, t), fd, atol=1e-7)


# ---------------------------------------------------------------------------
# Peregrine profile
# ---------------------------------------------------------------------------

def test_prw_center_peak_is_nine_times_background():
    p = PRWParams(t0=1.74, P0=1.07)
    assert abs(eval_prw(0.0, 1.74, p)) ** 2 == pytest.approx(9 * 1.07)

def test_prw_far_field_is_background():
    p = PRWParams(t0=0.0, P0=0.5)
    assert abs(eval_prw(1e4, 0.0, p)) ** 2 == pytest.approx(0.5, rel=1e-6)

def test_prw_solves_cubic_nls():
    p = PRWParams(t0=0.2, P0=0.8)
    u = lambda x, t: eval_prw(x, t, p)
    assert abs(_nls_residual(u, 0.4, 0.5)) < 1e-5

def test_prw_rejects_nonpositive_background():
    with pytest.raises(InvalidArgumentError):
        PRWParams(t0=0.0, P0=0.0)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family,gamma", [(GaussianMMS(A=0.7, a=0.3, w=1.5), 0.05), (SechMMS(), 0.0)])
def test_mms_forcing_balances_equation(family, gamma):
    u = lambda x, t: mms_solution(family, x, t)
    x, t = 0.6, 0.9
    lhs = _nls_residual(u, x, t) + 1j * gamma * u(x, t)
    assert lhs == pytest.approx(mms_forcing(family, gamma, x, t), abs=1e-5)

def test_sech_soliton_needs_no_forcing():
    x = np.linspace(-5, 5, 21)
    assert np.allclose(mms_forcing(SechMMS(A=1.0, a=0.5, w=1.0), 0.0, x, 0.3), 0, atol=1e-14)

def test_manufactured_driver_gamma_must_match_model():
    with pytest.raises(InvalidArgumentError):
        ModelParams(gamma=0.01, driver=ManufacturedDriver(GaussianMMS(), gamma=0.0))


# ---------------------------------------------------------------------------
# Right-hand side
# ---------------------------------------------------------------------------

def test_rhs_of_zero_state_is_minus_i_forcing():
    g = build_grid(16, 5.0)
    d = GaussianDriver(Gamma=1.0, sigma_x=2.0, sigma_t=1.0)
    out = rhs(FieldState(0.2, np.zeros(g.size)), ModelParams(0.01, d), g)
    assert np.allclose(out, -1j * eval_driver(d, g.interior, 0.2))

def test_rhs_linear_damping():
    g = build_grid(16, 5.0)
    u = 1e-4 * (1 - (g.interior / 5) ** 2)
    out = rhs(FieldState(0.0, u), ModelParams(0.3), g)
    expected = 0.5j * (g.D2_interior @ u) + 1j * np.abs(u) ** 2 * u - 0.3 * u
    assert np.allclose(out, expected)

def test_rhs_checks_state():
    g = build_grid(8, 1.0)
    with pytest.raises(InvalidArgumentError):
        rhs(FieldState(0.0, np.zeros(3)), ModelParams(0.0), g)
    state = FieldState(0.0, np.zeros(g.size))
    state.values[0] = np.nan
    with pytest.raises(NumericOverflowError):
        rhs(state, ModelParams(0.0), g)

def test_make_rhs_matches_rhs():
    g = build_grid(16, 5.0)
    params = ModelParams(0.02, AlgebraicDriver(Gamma=1.0, delta_x=3.0, delta_t=0.5))
    u = 0.1 * (1 - (g.interior / 5) ** 2) * (1 + 0.5j)
    f = make_rhs(params, g)
    assert np.array_equal(f(0.7, u), rhs(FieldState(0.7, u), params, g))

def test_field_state_rejects_non_finite():
    with pytest.raises(NumericOverflowError):
        FieldState(0.0, np.array([np.inf]))

def test_split_reconstructs_linear_operator():
    g = build_grid(24, 6.0)
    split = make_split(ModelParams(0.05), g)
    A = split.modes @ np.diag(split.eigenvalues) @ split.inverse
    expected = 0.5j * g.D2_interior - 0.05 * np.eye(g.size)
    assert np.allclose(A, expected, atol=1e-7 * np.abs(expected).max())
    assert np.all(split.eigenvalues.real == pytest.approx(-0.05))


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

def test_linear_weight_derivative_one_sided_at_kink():
    w = LinearAbs(x0=100.0)
    assert w.drho(0.0) == pytest.approx(0.01)
    assert w.drho(-1.0) == pytest.approx(-0.01)

def test_time_weight_constant_when_kappa_zero():
    w = TimeWeight.constant()
    assert np.all(w.phi(np.array([0.0, 10.0])) == 1.0)
    assert np.all(w.dphi(np.array([0.0, 10.0])) == 0.0)

def test_time_weight_rejects_fractional_kappa():
    with pytest.raises(InvalidArgumentError):
        TimeWeight(t0=1.0, kappa=0.5)

def test_time_weight_derivative():
    w = TimeWeight(t0=2.0, kappa=2.0, gamma=0.01, s0=1.0)
    h = 1e-5
    fd = (w.phi(3.0 + h) - w.phi(3.0 - h)) / (2 * h)
    assert w.dphi(3.0) == pytest.approx(fd, rel=1e-6)

def test_fitted_time_weight_uses_unit_rate():
    w = TimeWeight(t0=24.0, kappa=2.0, s0=10.0, fitted=True)
    assert w.phi(14.0) == pytest.approx(4.0)

def test_weight_evaluators_match_closed_forms():
    x = np.array([-50.0, 0.0, 25.0])
    w = LinearAbs(x0=100.0)
    assert np.allclose(eval_spatial_weight(w, x), [1.5, 1.0, 1.25])
    assert np.allclose(eval_spatial_weight_derivative(w, x), [-0.01, 0.01, 0.01])
    tw = TimeWeight(t0=2.0, kappa=2.0, gamma=0.01)
    assert eval_time_weight(tw, 100.0) == pytest.approx(2.25)
    assert eval_time_weight_derivative(tw, 100.0) == pytest.approx(2 * 1.5 * 0.005)

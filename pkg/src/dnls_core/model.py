"""Closed forms of the damped, driven NLS  i u_t + u_xx/2 + |u|^2 u = f - i gamma u.

Right-hand side, drivers, initial data, the Peregrine reference profile,
weight evaluation and manufactured-solution forcing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError, NumericOverflowError, OutOfDomainError
from .grid import ChebGrid, apply_d2
from .specs import (
    AlgebraicDriver,
    AlgebraicIC,
    DriverSpec,
    FieldState,
    FileIC,
    GaussianDriver,
    GaussianMMS,
    ICSpec,
    ManufacturedDriver,
    ManufacturedIC,
    MMSFamily,
    ModelParams,
    NoDriver,
    PRWParams,
    SechIC,
    SechMMS,
    SpatialWeight,
    TimeWeight,
)


logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)

RhsFunction = Callable[[float, np.ndarray], np.ndarray]


def sech(x):
    """Overflow-free sech."""
    e = np.exp(-np.abs(np.asarray(x, dtype=float)))
    return 2.0 * e / (1.0 + e * e)


def _scalar_or_array(result, x):
    if np.ndim(x) == 0:
        return complex(np.asarray(result).reshape(-1)[0])
    return result


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

def eval_ic(spec: ICSpec, x):
    """u0(x) for the initial-data variant *spec*."""
    xa = np.asarray(x, dtype=float)
    if isinstance(spec, AlgebraicIC):
        out = 1.0 / (1.0 + xa**2) + 0j
    elif isinstance(spec, SechIC):
        out = sech(xa) + 0j
    elif isinstance(spec, FileIC):
        lo, hi = spec.xs[0], spec.xs[-1]
        if np.any(xa < lo) or np.any(xa > hi):
            raise OutOfDomainError(f"FileIC sampled on [{lo:g}, {hi:g}] queried outside its range")
        re = CubicSpline(spec.xs, spec.values.real)(xa)
        im = CubicSpline(spec.xs, spec.values.imag)(xa)
        out = re + 1j * im
    elif isinstance(spec, ManufacturedIC):
        out = mms_solution(spec.family, xa, 0.0)
    else:
        raise InvalidArgumentError(f"unknown initial condition {spec!r}")
    return _scalar_or_array(out, x)


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

def _algebraic_time_factor(spec: AlgebraicDriver, t: float) -> float:
    if t < 0:
        raise InvalidArgumentError(f"algebraic driver is defined for t >= 0 only, got t={t:g}")
    q = 1.0 + t / spec.delta_t + spec.omega * t**2 / spec.delta_t**2
    return 1.0 / q**2


def _algebraic_space_factor(spec: AlgebraicDriver, x):
    s = np.abs(np.asarray(x, dtype=float)) / spec.delta_x
    return 1.0 / (1.0 + s + spec.theta * s**2) ** 2


def driver_sampler(spec: DriverSpec, xs) -> Callable[[float], np.ndarray]:
    """Return ``f(t)`` giving the driver at the fixed points *xs*."""
    xs = np.asarray(xs, dtype=float)
    if isinstance(spec, NoDriver):
        zeros = np.zeros(xs.shape, dtype=complex)
        return lambda t: zeros
    if isinstance(spec, GaussianDriver):
        space = SQRT2 * spec.Gamma * np.exp(1j * spec.Theta) * np.exp(-xs**2 / (2.0 * spec.sigma_x**2))
        return lambda t: space * np.exp(-((t - spec.t_center) ** 2) / (2.0 * spec.sigma_t**2))
    if isinstance(spec, AlgebraicDriver):
        space = SQRT2 * spec.Gamma * np.exp(1j * spec.Theta) * _algebraic_space_factor(spec, xs)
        return lambda t: space * _algebraic_time_factor(spec, t)
    if isinstance(spec, ManufacturedDriver):
        return lambda t: mms_forcing(spec.family, spec.gamma, xs, t)
    raise InvalidArgumentError(f"unknown driver {spec!r}")


def eval_driver(spec: DriverSpec, x, t: float):
    """f(x, t) for the driver variant *spec*."""
    return _scalar_or_array(driver_sampler(spec, np.atleast_1d(x))(float(t)), x)


def driver_time_derivative(spec: DriverSpec, x, t: float):
    """Analytic f_t(x, t)."""
    t = float(t)
    f = driver_sampler(spec, np.atleast_1d(x))(t)
    if isinstance(spec, NoDriver):
        out = f
    elif isinstance(spec, GaussianDriver):
        out = f * (-(t - spec.t_center) / spec.sigma_t**2)
    elif isinstance(spec, AlgebraicDriver):
        q = 1.0 + t / spec.delta_t + spec.omega * t**2 / spec.delta_t**2
        dq = 1.0 / spec.delta_t + 2.0 * spec.omega * t / spec.delta_t**2
        out = -f * (2.0 * dq / q)
    elif isinstance(spec, ManufacturedDriver):
        # |u_m| and the bracket in f_m are time independent
        out = 1j * spec.family.a * f
    else:
        raise InvalidArgumentError(f"unknown driver {spec!r}")
    return _scalar_or_array(out, x)


# ---------------------------------------------------------------------------
# Right-hand side
# ---------------------------------------------------------------------------

def rhs(state: FieldState, params: ModelParams, grid: ChebGrid) -> np.ndarray:
    """du/dt = (i/2) D2 u + i |u|^2 u - gamma u - i f at the interior nodes."""
    u = np.asarray(state.values)
    if u.shape != (grid.size,):
        raise InvalidArgumentError(f"state has {u.size} values, grid interior has {grid.size}")
    if not np.all(np.isfinite(u)):
        raise NumericOverflowError(f"non-finite state at t={state.t:g}")
    return make_rhs(params, grid)(state.t, u)


def make_rhs(params: ModelParams, grid: ChebGrid) -> RhsFunction:
    """The right-hand side as ``f(t, u)`` with the driver samples precomputed."""
    forcing = driver_sampler(params.driver, grid.interior)
    gamma = params.gamma

    def f(t: float, u: np.ndarray) -> np.ndarray:
        return 0.5j * apply_d2(grid, u) + 1j * (np.abs(u) ** 2) * u - gamma * u - 1j * forcing(t)

    return f


@dataclass(frozen=True, eq=False)
class LinearSplit:
    """u_t = A u + n(t, u) with A = V diag(eigenvalues) V^-1 on the interior nodes."""

    modes: np.ndarray
    inverse: np.ndarray
    eigenvalues: np.ndarray
    nonlinear: RhsFunction


def make_split(params: ModelParams, grid: ChebGrid) -> LinearSplit:
    """Diagonalize the linear part (i/2) D2 - gamma for the integrating-factor backend."""
    mu, V = np.linalg.eig(grid.D2_interior)
    mu = np.real_if_close(mu, tol=1e6)
    if np.iscomplexobj(mu):
        logger.warning("D2 spectrum has imaginary parts up to %.3g; using real parts", np.abs(mu.imag).max())
        mu = mu.real
    V = np.real_if_close(V, tol=1e6)
    forcing = driver_sampler(params.driver, grid.interior)

    def nonlinear(t: float, u: np.ndarray) -> np.ndarray:
        return 1j * (np.abs(u) ** 2) * u - 1j * forcing(t)

    logger.debug("diagonalized D2 (n=%d), spectral radius %.6g", grid.size, np.abs(mu).max())
    return LinearSplit(
        modes=V,
        inverse=np.linalg.inv(V),
        eigenvalues=0.5j * mu - params.gamma,
        nonlinear=nonlinear,
    )


# ---------------------------------------------------------------------------
# Peregrine rogue wave
# ---------------------------------------------------------------------------

def eval_prw(x, t, p: PRWParams):
    """Peregrine solution of the undamped, unforced NLS on background density P0."""
    x = np.asarray(x, dtype=float)
    tau = np.asarray(t, dtype=float) - p.t0
    P0 = p.P0
    bracket = 1.0 - 4.0 * (1.0 + 2j * P0 * tau) / (1.0 + 4.0 * P0 * x**2 + 4.0 * P0**2 * tau**2)
    out = np.sqrt(P0) * bracket * np.exp(1j * P0 * tau)
    if out.ndim == 0:
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

def eval_spatial_weight(w: SpatialWeight, x):
    return w.rho(x)


def eval_spatial_weight_derivative(w: SpatialWeight, x):
    return w.drho(x)


def eval_time_weight(w: TimeWeight, t):
    return w.phi(t)


def eval_time_weight_derivative(w: TimeWeight, t):
    return w.dphi(t)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

def _mms_profile(family: MMSFamily, x):
    s = np.asarray(x, dtype=float) / family.w
    if isinstance(family, GaussianMMS):
        return np.exp(-0.5 * s**2)
    if isinstance(family, SechMMS):
        return sech(s)
    raise InvalidArgumentError(f"unknown manufactured family {family!r}")


def mms_solution(family: MMSFamily, x, t: float):
    """u_m(x, t)."""
    out = family.A * np.exp(1j * family.a * t) * _mms_profile(family, x)
    return _scalar_or_array(out, x)


def mms_forcing(family: MMSFamily, gamma: float, x, t: float):
    """f_m = i d_t u_m + u_m,xx / 2 + |u_m|^2 u_m + i gamma u_m."""
    u = np.asarray(family.A * np.exp(1j * family.a * t) * _mms_profile(family, x))
    s = np.asarray(x, dtype=float) / family.w
    if isinstance(family, GaussianMMS):
        curvature = (s**2 - 1.0) / family.w**2
    else:
        curvature = (1.0 - 2.0 * sech(s) ** 2) / family.w**2
    out = u * (-family.a + 0.5 * curvature + np.abs(u) ** 2 + 1j * gamma)
    return _scalar_or_array(out, x)

"""Numerical checks of the decay estimates along computed trajectories.

Weighted norms, the functional J, balance-law residuals, empirical bound
constants, the Agmon inequality, the Gronwall envelope and driver
admissibility integrals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError
from .grid import ChebGrid, derivative, interpolation_matrix, pad
from .integrator import Trajectory
from .model import (
    driver_sampler,
    driver_time_derivative,
    eval_spatial_weight,
    eval_spatial_weight_derivative,
    eval_time_weight,
    eval_time_weight_derivative,
)
from .specs import (
    AlgebraicDriver,
    DriverSpec,
    FieldState,
    GaussianDriver,
    LinearAbs,
    ModelParams,
    SpatialWeight,
    TimeWeight,
    UnitWeight,
)


logger = logging.getLogger(__name__)

# K1 is measured on a uniform resample with this spacing.
K1_RESAMPLE_STEP = 0.5

# admissibility power laws are read this many time scales past the last transition
ASYMPTOTIC_FACTOR = 1e3


# ---------------------------------------------------------------------------
# Weighted quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightVectors:
    """Nodal quadrature vectors for a spatial weight on one grid.

    ``rho2 @ g`` ~ integral of rho^2 g, ``flux @ g`` ~ integral of rho rho' g,
    both accurate across a kink of rho at x = 0.
    """

    rho2: np.ndarray
    flux: np.ndarray
    right: tuple[np.ndarray, np.ndarray]
    left: tuple[np.ndarray, np.ndarray]


def weight_vectors(grid: ChebGrid, w: SpatialWeight) -> WeightVectors:
    """Sample both analytic branches of rho and rho' at every node."""
    right_fn, left_fn = w.branches()
    rR = np.asarray(right_fn(grid.nodes), dtype=float)
    rL = np.asarray(left_fn(grid.nodes), dtype=float)
    drR = grid.D1 @ rR
    drL = grid.D1 @ rL
    h, hl = grid.half_weights, grid.left_weights
    return WeightVectors(
        rho2=h * rR**2 + hl * rL**2,
        flux=h * rR * drR + hl * rL * drL,
        right=(rR, drR),
        left=(rL, drL),
    )


def _full(state: FieldState, grid: ChebGrid) -> np.ndarray:
    if state.values.shape != (grid.size,):
        raise InvalidArgumentError(f"state has {state.values.size} values, grid interior has {grid.size}")
    return pad(state.values)


def mass(grid: ChebGrid, state: FieldState) -> float:
    """N = integral of |u|^2."""
    u = _full(state, grid)
    return float(grid.qweights @ np.abs(u) ** 2)


def weighted_l2(grid: ChebGrid, state: FieldState, w: SpatialWeight) -> float:
    """Integral of rho^2 |u|^2."""
    u = _full(state, grid)
    return float(weight_vectors(grid, w).rho2 @ np.abs(u) ** 2)


def weighted_h1(grid: ChebGrid, state: FieldState, w: SpatialWeight) -> float:
    """Integral of rho^2 (|u|^2 + |u_x|^2)."""
    u = _full(state, grid)
    ux = derivative(grid, u, 1)
    return float(weight_vectors(grid, w).rho2 @ (np.abs(u) ** 2 + np.abs(ux) ** 2))


def functional_J(grid: ChebGrid, state: FieldState, w: SpatialWeight, driver: DriverSpec, t: float) -> float:
    """J = 1/4 int rho^2 |u_x|^2 - 1/4 int rho^2 |u|^4 + Re int rho^2 f conj(u)."""
    if not isinstance(w, (LinearAbs, UnitWeight)):
        raise InvalidArgumentError(f"functional J is defined for the linear weight family, got {w}")
    u = _full(state, grid)
    ux = derivative(grid, u, 1)
    f = driver_sampler(driver, grid.nodes)(t)
    rho2 = weight_vectors(grid, w).rho2
    return float(0.25 * rho2 @ np.abs(ux) ** 2
                 - 0.25 * rho2 @ np.abs(u) ** 4
                 + np.real(rho2 @ (f * np.conj(u))))


# ---------------------------------------------------------------------------
# Balance laws
# ---------------------------------------------------------------------------

def _columns(traj: Trajectory, *names: str) -> list[np.ndarray]:
    missing = [n for n in ("t",) + names if n not in traj.series]
    if missing:
        raise InvalidArgumentError(f"trajectory series lacks column(s) {', '.join(missing)}")
    t = traj.series["t"]
    if t.size < 3:
        raise InvalidArgumentError(f"balance residuals need >= 3 samples, got {t.size}")
    return [t] + [traj.series[n] for n in names]


def _uniform(t: np.ndarray, *columns: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], float]:
    """Resample columns to a uniform time grid with the same sample count."""
    span = t[-1] - t[0]
    # drop near-duplicate times produced by clipped steps
    keep = np.concatenate([[True], np.diff(t) > 1e-10 * max(1.0, span)])
    t = t[keep]
    n = max(5, t.size)
    tu = np.linspace(t[0], t[-1], n)
    resampled = [CubicSpline(t, c[keep])(tu) for c in columns]
    return tu, resampled, tu[1] - tu[0]


def _ddt(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order centred difference on interior samples (two dropped per end)."""
    return (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)


def mass_balance_residual(traj: Trajectory, params: ModelParams, grid: ChebGrid) -> np.ndarray:
    """(t, r) with r = (dN/dt + 2 gamma N - 2 Im int f conj(u)) / max(1, N)."""
    t, N, work = _columns(traj, "mass", "forcing_work")
    tu, (Nu, Wu), h = _uniform(t, N, work)
    core = slice(2, -2)
    r = _ddt(Nu, h) + 2.0 * params.gamma * Nu[core] - 2.0 * Wu[core]
    return np.column_stack([tu[core], r / np.maximum(1.0, Nu[core])])


def weighted_time_balance_residual(
    traj: Trajectory, w: TimeWeight, params: ModelParams, grid: ChebGrid
) -> np.ndarray:
    """(t, r) with r = 1/2 d(phi^2 N)/dt + gamma phi^2 N - phi^2 Im int f conj(u) - phi phi' N."""
    t, N, work = _columns(traj, "mass", "forcing_work")
    tu, (Nu, Wu), h = _uniform(t, N, work)
    phi = np.asarray(eval_time_weight(w, tu), dtype=float) * np.ones_like(tu)
    dphi = np.asarray(eval_time_weight_derivative(w, tu), dtype=float) * np.ones_like(tu)
    core = slice(2, -2)
    p2 = phi**2
    r = (0.5 * _ddt(p2 * Nu, h) + params.gamma * p2[core] * Nu[core]
         - p2[core] * Wu[core] - phi[core] * dphi[core] * Nu[core])
    return np.column_stack([tu[core], r / np.maximum(1.0, Nu[core])])


def weighted_space_balance_residual(
    traj: Trajectory, w: SpatialWeight, params: ModelParams, grid: ChebGrid
) -> np.ndarray:
    """(t, r) with r = 1/2 dW/dt + gamma W - Im int rho rho' u_x conj(u) - Im int rho^2 f conj(u).

    Needs the weighted observer columns recorded for the same weight.
    """
    if traj.weight is not None and traj.weight != str(w):
        raise InvalidArgumentError(f"trajectory recorded weight {traj.weight}, not {w}")
    t, W, flux, work = _columns(traj, "weighted_mass", "weighted_flux", "weighted_forcing_work")
    tu, (Wu, Fu, Pu), h = _uniform(t, W, flux, work)
    core = slice(2, -2)
    r = 0.5 * _ddt(Wu, h) + params.gamma * Wu[core] - Fu[core] - Pu[core]
    return np.column_stack([tu[core], r / np.maximum(1.0, Wu[core])])


# ---------------------------------------------------------------------------
# Agmon inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AgmonReport:
    lhs: float
    rhs: float
    ratio: float
    inconsistent: bool = False


def agmon_check(grid: ChebGrid, state: FieldState, w: SpatialWeight) -> AgmonReport:
    """sup|psi|^2 against ||psi|| ||psi_x|| for psi = rho u."""
    u = _full(state, grid)
    vectors = weight_vectors(grid, w)
    lhs = float(np.max(np.abs(eval_spatial_weight(w, grid.nodes) * u) ** 2))
    ux = derivative(grid, u, 1)
    (rR, drR), (rL, drL) = vectors.right, vectors.left
    # psi_x = rho' u + rho u_x on each branch
    grad_sq = (grid.half_weights @ np.abs(drR * u + rR * ux) ** 2
               + grid.left_weights @ np.abs(drL * u + rL * ux) ** 2)
    norm_sq = vectors.rho2 @ np.abs(u) ** 2
    rhs = float(math.sqrt(max(norm_sq, 0.0)) * math.sqrt(max(grad_sq, 0.0)))
    if rhs == 0.0:
        return AgmonReport(lhs=lhs, rhs=0.0, ratio=0.0, inconsistent=lhs > 0.0)
    return AgmonReport(lhs=lhs, rhs=rhs, ratio=lhs / rhs)


# ---------------------------------------------------------------------------
# Weight validity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpatialWeightValidity:
    beta1: float
    beta2: float
    positive: bool
    valid: bool


def spatial_weight_validity(w: SpatialWeight, xs) -> SpatialWeightValidity:
    """Measure 0 < beta1 <= |rho'| <= beta2 on the sample points."""
    xs = np.asarray(xs, dtype=float)
    slope = np.abs(eval_spatial_weight_derivative(w, xs))
    positive = bool(np.all(eval_spatial_weight(w, xs) > 0))
    beta1, beta2 = float(slope.min()), float(slope.max())
    return SpatialWeightValidity(
        beta1=beta1, beta2=beta2, positive=positive,
        valid=positive and w.theory_valid and beta1 > 0,
    )


@dataclass(frozen=True)
class TimeWeightValidity:
    delta2: float
    delta2_alt: float
    regime: str
    valid: bool
    exempt: bool = False


def time_weight_validity(w: TimeWeight) -> TimeWeightValidity:
    """kappa = 1 falls under the unconditional regime, kappa > 1 needs t0 >= kappa.

    Fitted weights carry no such constraint and are reported as exempt.
    """
    delta2 = w.rate / w.t0
    delta2_alt = w.rate * w.kappa / w.t0
    if w.fitted:
        return TimeWeightValidity(delta2, delta2_alt, "fitted", valid=True, exempt=True)
    if w.kappa == 0 or w.gamma == 0:
        return TimeWeightValidity(delta2, delta2_alt, "constant", valid=False)
    if w.kappa == 1:
        return TimeWeightValidity(delta2, delta2_alt, "unconditional", valid=True)
    return TimeWeightValidity(delta2, delta2_alt, "conditional", valid=w.t0 >= w.kappa)


# ---------------------------------------------------------------------------
# Empirical bound constants
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    K1_emp: float = 0.0
    K2_emp: float = 0.0
    R_emp: float = 0.0
    R0_emp: float = 0.0
    R1_emp: float = 0.0
    times_of_sup: dict[str, float] = field(default_factory=dict)
    certifying: bool = True
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "K1_emp": self.K1_emp, "K2_emp": self.K2_emp, "R_emp": self.R_emp,
            "R0_emp": self.R0_emp, "R1_emp": self.R1_emp,
            "times_of_sup": dict(self.times_of_sup),
            "certifying": self.certifying, "notes": list(self.notes),
        }


def _uniform_points(grid: ChebGrid, step: float) -> np.ndarray:
    n = int(math.floor(2.0 * grid.L / step + 1e-9))
    return -grid.L + step * np.arange(n + 1)


def bound_constants(
    traj: Trajectory, w_space: SpatialWeight, w_time: TimeWeight, grid: ChebGrid
) -> BoundReport:
    """Empirical sup-constants over the snapshots (K2 over the dense series)."""
    report = BoundReport()
    if not traj.snapshots:
        raise InvalidArgumentError("bound constants need at least one snapshot")

    xs = _uniform_points(grid, K1_RESAMPLE_STEP)
    P = interpolation_matrix(grid, xs)[:, 1:-1]
    rho2_x = np.asarray(eval_spatial_weight(w_space, xs)) ** 2
    vectors = weight_vectors(grid, w_space)

    best: dict[str, tuple[float, float]] = {}

    def update(name: str, value: float, t: float) -> None:
        if name not in best or value > best[name][0]:
            best[name] = (value, t)

    for snap in traj.snapshots:
        u = pad(snap.values)
        ux = derivative(grid, u, 1)
        uxx = derivative(grid, u, 2)
        dens = np.abs(u) ** 2
        update("K1_emp", float(np.max(rho2_x * np.abs(P @ snap.values) ** 2)), snap.t)
        update("R_emp", float(grid.qweights @ (dens + np.abs(ux) ** 2 + np.abs(uxx) ** 2)), snap.t)
        update("R0_emp", float(vectors.rho2 @ dens), snap.t)
        update("R1_emp", float(vectors.rho2 @ (dens + np.abs(ux) ** 2)), snap.t)

    if "sup_density" in traj.series:
        ts, sup = traj.series["t"], traj.series["sup_density"]
    else:
        ts = np.array([s.t for s in traj.snapshots])
        sup = np.array([float(np.max(s.density)) if s.values.size else 0.0 for s in traj.snapshots])
    weighted = np.asarray(eval_time_weight(w_time, ts), dtype=float) * sup
    k = int(np.argmax(weighted))
    best["K2_emp"] = (float(weighted[k]), float(ts[k]))

    for name, (value, t) in best.items():
        setattr(report, name, value)
        report.times_of_sup[name] = t

    if not traj.completed:
        report.certifying = False
        report.notes.append(f"trajectory status is {traj.status}")
    if not w_space.theory_valid:
        report.certifying = False
        report.notes.append(f"spatial weight {w_space} is fitting-only")
    validity = time_weight_validity(w_time)
    if not validity.valid:
        report.certifying = False
        report.notes.append(f"time weight {w_time} fails its {validity.regime} condition")
    values = [report.K1_emp, report.K2_emp, report.R_emp, report.R0_emp, report.R1_emp]
    if not all(math.isfinite(v) for v in values):
        report.certifying = False
        report.notes.append("non-finite constant")
    logger.debug("bound constants: %s", report.as_dict())
    return report


# ---------------------------------------------------------------------------
# Gronwall envelope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GronwallReport:
    applicable: bool
    passed: bool
    C: float = 0.0
    max_excess: float = 0.0
    samples: int = 0


def _time_samples(traj: Trajectory, n: int = 2001) -> np.ndarray:
    t0, t1 = traj.snapshots[0].t, traj.snapshots[-1].t
    return np.union1d(np.linspace(t0, t1, n), [s.t for s in traj.snapshots])


def gronwall_check(traj: Trajectory, w: SpatialWeight, params: ModelParams, grid: ChebGrid) -> GronwallReport:
    """W(t) <= W(0) e^{-gamma t} + C (1 - e^{-gamma t}) along the snapshots.

    C = 2 S / gamma with S = sup_t (R beta2^2 + int rho^2 |f|^2) / gamma and
    R = sup of int |u_x|^2 over the snapshots.
    """
    gamma = params.gamma
    if gamma <= 0 or not traj.snapshots:
        return GronwallReport(applicable=False, passed=False)
    vectors = weight_vectors(grid, w)
    beta2 = float(np.max(np.abs(eval_spatial_weight_derivative(w, grid.nodes))))
    R = 0.0
    W = []
    for snap in traj.snapshots:
        u = pad(snap.values)
        R = max(R, float(grid.qweights @ np.abs(derivative(grid, u, 1)) ** 2))
        W.append(float(vectors.rho2 @ np.abs(u) ** 2))
    W = np.asarray(W)
    sample = driver_sampler(params.driver, grid.nodes)
    forcing = max(float(vectors.rho2 @ np.abs(sample(t)) ** 2) for t in _time_samples(traj))
    S = (R * beta2**2 + forcing) / gamma
    C = 2.0 * S / gamma
    ts = np.array([s.t for s in traj.snapshots]) - traj.snapshots[0].t
    decay = np.exp(-gamma * ts)
    envelope = W[0] * decay + C * (1.0 - decay)
    excess = (W - envelope) / np.maximum(1.0, envelope)
    passed = bool(np.all(W <= envelope * (1.0 + 1e-9) + 1e-12))
    return GronwallReport(applicable=True, passed=passed, C=C,
                          max_excess=float(excess.max()), samples=int(W.size))


# ---------------------------------------------------------------------------
# Driver admissibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    """``tail_slope`` is the log-log slope of the integrand over ``[tail_start, 10 tail_start]``.

    The tail window starts at the last decade of the horizon or well past every time
    scale of the driver and the weight, whichever is later, so the flag describes the
    integral as T goes to infinity rather than at the chosen horizon.
    """

    horizon: float
    fd_integral: float
    sup_weighted_f: float
    sup_weighted_ft: float
    tail_slope: float
    divergence_flag: bool
    tail_start: float = math.nan


def _panels(T: float) -> list[tuple[float, float]]:
    edges = [0.0]
    edge = 1.0
    while edge < T:
        edges.append(edge)
        edge *= 10.0
    edges.append(T)
    return list(zip(edges[:-1], edges[1:]))


def _time_scale(spec: DriverSpec, w_time: TimeWeight) -> float:
    """Latest time at which the driver or the weight can still change its power law."""
    scales = [0.0]
    if isinstance(spec, GaussianDriver):
        scales.append(abs(spec.t_center) + spec.sigma_t)
    elif isinstance(spec, AlgebraicDriver):
        scales.append(spec.delta_t)
        if spec.omega > 0:
            scales.append(spec.delta_t / spec.omega)
    if w_time.kappa > 0 and w_time.rate > 0:
        scales.append(w_time.t0 / w_time.rate + abs(w_time.s0))
    return max(scales)


def driver_admissibility(
    spec: DriverSpec,
    w_space: SpatialWeight,
    w_time: TimeWeight,
    T: float,
    grid: ChebGrid,
    *,
    tail_samples: int = 64,
) -> AdmissibilityReport:
    """Time-weighted driver energy integral up to T and the weighted sup norms of f and f_t."""
    if not T > 0:
        raise InvalidArgumentError(f"admissibility horizon must be positive, got {T!r}")
    sample = driver_sampler(spec, grid.nodes)
    rho2 = weight_vectors(grid, w_space).rho2

    def density(t: float) -> float:
        return float(eval_time_weight(w_time, t)) ** 2 * float(grid.qweights @ np.abs(sample(t)) ** 2)

    fd = 0.0
    for a, b in _panels(T):
        value, _ = quad(density, a, b, limit=200)
        fd += value

    ts = np.union1d(np.linspace(0.0, min(T, 10.0), 2001), np.geomspace(min(T, 10.0), T, 400))
    if isinstance(spec, GaussianDriver) and 0.0 <= spec.t_center <= T:
        ts = np.union1d(ts, [spec.t_center])
    sup_f = max(float(rho2 @ np.abs(sample(t)) ** 2) for t in ts)
    sup_ft = max(float(rho2 @ np.abs(driver_time_derivative(spec, grid.nodes, t)) ** 2) for t in ts)

    tail_start = max(T / 10.0, ASYMPTOTIC_FACTOR * _time_scale(spec, w_time))
    tail_t = np.geomspace(tail_start, 10.0 * tail_start, tail_samples)
    tail = np.array([density(t) for t in tail_t])
    if np.all(tail == 0.0):
        slope = -math.inf
    elif np.any(tail < 1e-290):
        # decays faster than any power
        slope = -math.inf
    else:
        slope = float(np.polyfit(np.log(tail_t), np.log(tail), 1)[0])
    flag = slope >= -1.0
    if tail_start > T / 10.0:
        logger.debug("admissibility tail read on [%g, %g], past the horizon %g", tail_start, 10 * tail_start, T)
    logger.info("admissibility of %s with %s: fd(T=%g)=%.6g tail slope %.3f%s",
                spec, w_time, T, fd, slope, " (divergent)" if flag else "")
    return AdmissibilityReport(
        horizon=float(T), fd_integral=fd, sup_weighted_f=sup_f, sup_weighted_ft=sup_ft,
        tail_slope=slope, divergence_flag=flag, tail_start=float(tail_start),
    )


# ---------------------------------------------------------------------------
# Certification summary
# ---------------------------------------------------------------------------

@dataclass
class Certification:
    bounds: BoundReport
    agmon_max_ratio: float
    agmon_inconsistent: bool
    gronwall: GronwallReport
    space_validity: SpatialWeightValidity
    time_validity: TimeWeightValidity

    @property
    def passed(self) -> bool:
        return (self.bounds.certifying
                and self.agmon_max_ratio <= 1.0 + 1e-6
                and not self.agmon_inconsistent
                and (self.gronwall.passed or not self.gronwall.applicable))

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "bounds": self.bounds.as_dict(),
            "agmon_max_ratio": self.agmon_max_ratio,
            "agmon_inconsistent": self.agmon_inconsistent,
            "gronwall": {
                "applicable": self.gronwall.applicable, "passed": self.gronwall.passed,
                "C": self.gronwall.C, "max_excess": self.gronwall.max_excess,
            },
            "space_weight": {"beta1": self.space_validity.beta1, "beta2": self.space_validity.beta2,
                             "valid": self.space_validity.valid},
            "time_weight": {"regime": self.time_validity.regime, "valid": self.time_validity.valid,
                            "exempt": self.time_validity.exempt},
        }


def certify_run(
    traj: Trajectory, w_space: SpatialWeight, w_time: TimeWeight, params: ModelParams, grid: ChebGrid
) -> Certification:
    """Bound constants, Agmon ratios on every snapshot and the Gronwall envelope."""
    bounds = bound_constants(traj, w_space, w_time, grid)
    ratios = [agmon_check(grid, s, w_space) for s in traj.snapshots]
    return Certification(
        bounds=bounds,
        agmon_max_ratio=max((r.ratio for r in ratios), default=0.0),
        agmon_inconsistent=any(r.inconsistent for r in ratios),
        gronwall=gronwall_check(traj, w_space, params, grid),
        space_validity=spatial_weight_validity(w_space, grid.nodes),
        time_validity=time_weight_validity(w_time),
    )

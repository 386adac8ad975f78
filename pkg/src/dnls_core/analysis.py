"""Post-processing of trajectories: peaks, envelope fits, rogue-wave events, support."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import lmfit
import numpy as np
from scipy.signal import find_peaks

from .errors import DegenerateDataError, InvalidArgumentError, NoEventError
from .grid import ChebGrid, resample
from .integrator import Trajectory
from .model import eval_prw, eval_spatial_weight, eval_time_weight
from .specs import FieldState, GaussianWeight, LinearAbs, PRWParams, QuadraticAbs, SpatialWeight, TimeWeight


logger = logging.getLogger(__name__)

SPATIAL_FAMILIES = ("linear", "quadratic", "gaussian")
RESAMPLE_STEP = 0.5
MIN_SPATIAL_SAMPLES = 20
MIN_PEAKS = 4
N_STARTS = 8

# Parameter boxes of the envelope fits
X0_BOUNDS = (1e-3, 1e4)
SIGMA_BOUNDS = (1e-2, 1e5)
T0_BOUNDS = (1e-3, 1e6)

# A temporal envelope varying by less than this (in log) over the data is flat.
FLAT_LOG_VARIATION = 1e-2

PRW_PROFILE_HALF_WIDTH = 10.0
PRW_CENTER_HALF_WINDOW = 1.5
PRW_BACKGROUND_BAND = (5.0, 15.0)
SUPPORT_PLATEAU_BAND = (8.0, 20.0)
SUPPORT_SCAN_START = 20.0
# resampled points this close to the wall carry the imposed zero, not data
SUPPORT_EDGE_MARGIN = 1.0


# ---------------------------------------------------------------------------
# Peaks
# ---------------------------------------------------------------------------

def detect_peaks(series, min_prominence: float = 0.0) -> np.ndarray:
    """Indices of local maxima of ``series[:, 1]`` with at least *min_prominence*."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 2 or series.shape[1] != 2:
        raise InvalidArgumentError(f"peak detection expects an (n, 2) series, got shape {series.shape}")
    if series.shape[0] < 3:
        raise InvalidArgumentError(f"peak detection needs >= 3 samples, got {series.shape[0]}")
    if min_prominence < 0:
        raise InvalidArgumentError(f"min_prominence must be >= 0, got {min_prominence!r}")
    indices, _ = find_peaks(series[:, 1], prominence=min_prominence)
    return indices


def event_peaks(traj: Trajectory, t_max: float = math.inf, min_prominence: float = 0.0) -> np.ndarray:
    """(t, |u(0, t)|^2) at the peaks of the center series up to *t_max*."""
    series = traj.center_series
    series = series[series[:, 0] <= t_max]
    return series[detect_peaks(series, min_prominence)]


# ---------------------------------------------------------------------------
# Envelope fits
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    """Least-squares envelope in log space and its bounding translation.

    ``log_amplitude`` is the best-fit log A; ``bound_log_amplitude`` is the
    smallest log A (never below ``log_amplitude``) that puts the curve on or
    above every sample of the window.
    """

    family: str
    params: dict[str, float]
    rss: float
    window: tuple[float, float]
    translated: bool
    log_amplitude: float
    bound_log_amplitude: float
    n_samples: int
    degenerate: bool = False
    offset: float | None = None
    scale: float | None = None
    extras: dict[str, float] = field(default_factory=dict)

    @property
    def weight(self) -> SpatialWeight | TimeWeight:
        p = self.params
        if self.family == "linear":
            return LinearAbs(x0=p["x0"])
        if self.family == "quadratic":
            return QuadraticAbs(x0=p["x0"])
        if self.family == "gaussian":
            return GaussianWeight(sigma=p["sigma"], x_shift=p["x_shift"])
        return TimeWeight(t0=p["t0"], kappa=p["kappa"], s0=p["s0"], fitted=True)

    def as_dict(self) -> dict:
        out = {
            "family": self.family, "params": dict(self.params), "rss": self.rss,
            "window": list(self.window), "translated": self.translated,
            "log_amplitude": self.log_amplitude, "bound_log_amplitude": self.bound_log_amplitude,
            "n_samples": self.n_samples, "degenerate": self.degenerate,
        }
        if self.offset is not None:
            out["offset"] = self.offset
            out["scale"] = self.scale
        return out


def envelope_curve(fit: FitResult, points, bound: bool = True) -> np.ndarray:
    """Evaluate a fitted envelope (the bounding curve by default) at *points*."""
    points = np.asarray(points, dtype=float)
    log_a = fit.bound_log_amplitude if bound else fit.log_amplitude
    w = fit.weight
    if isinstance(w, TimeWeight):
        return np.exp(log_a) / eval_time_weight(w, points)
    return np.exp(log_a) / np.asarray(eval_spatial_weight(w, points)) ** 2


def _log_rho2(family: str, p: dict[str, float], x: np.ndarray) -> np.ndarray:
    if family == "linear":
        return 2.0 * np.log1p(np.abs(x) / p["x0"])
    if family == "quadratic":
        s = x / p["x0"]
        return 2.0 * np.log1p(np.abs(s) + s**2)
    if family == "gaussian":
        return ((x + p["x_shift"]) / p["sigma"]) ** 2
    raise InvalidArgumentError(f"unknown spatial family {family!r}; expected one of {SPATIAL_FAMILIES}")


def _natural(values: dict[str, float]) -> dict[str, float]:
    """Convert ``log_<name>`` fit variables to ``<name>``."""
    out = {}
    for name, value in values.items():
        if name.startswith("log_"):
            out[name[4:]] = math.exp(value)
        else:
            out[name] = value
    return out


def _profiled(shape: Callable[[dict[str, float]], np.ndarray], y: np.ndarray):
    """Residual with log A eliminated: it is the mean of y - shape at fixed shape parameters."""

    def residual(params: lmfit.Parameters) -> np.ndarray:
        model = shape(_natural(params.valuesdict()))
        log_a = float(np.mean(y - model))
        return y - (log_a + model)

    return residual


def _multistart(residual, starts: list[lmfit.Parameters]) -> lmfit.minimizer.MinimizerResult:
    """Bounded quasi-Newton from each start; the best is polished by trust-region least squares."""
    best = None
    for params in starts:
        result = lmfit.minimize(residual, params, method="lbfgsb")
        rss = float(np.sum(np.square(residual(result.params))))
        if not math.isfinite(rss):
            continue
        if best is None or rss < best[0]:
            best = (rss, result)
    if best is None:
        raise DegenerateDataError("every fit start produced a non-finite residual")
    polished = lmfit.minimize(residual, best[1].params, method="least_squares",
                              xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if np.sum(np.square(residual(polished.params))) <= best[0]:
        return polished
    return best[1]


def _bounding(log_a: float, residuals: np.ndarray) -> tuple[float, bool]:
    shift = max(0.0, float(np.max(residuals)))
    return log_a + shift, shift > 0.0


def fit_envelope(xs, density, family: str, *, half_width: float | None = None) -> FitResult:
    """Fit density(x) ~ A / rho^2(x) in log space for one weight family.

    *half_width* bounds the Gaussian ``x_shift`` (defaults to max |x|).
    """
    if family not in SPATIAL_FAMILIES:
        raise InvalidArgumentError(f"unknown spatial family {family!r}; expected one of {SPATIAL_FAMILIES}")
    xs = np.asarray(xs, dtype=float)
    density = np.asarray(density, dtype=float)
    if xs.shape != density.shape or xs.ndim != 1:
        raise InvalidArgumentError("fit_envelope expects matching one-dimensional xs and density")
    if xs.size < MIN_SPATIAL_SAMPLES:
        raise InvalidArgumentError(f"envelope fit needs >= {MIN_SPATIAL_SAMPLES} samples, got {xs.size}")
    if not np.any(density > 0):
        raise DegenerateDataError("envelope fit window is identically zero")
    positive = density > 0
    if not np.all(positive):
        logger.debug("dropping %d non-positive samples from the fit window", int(np.sum(~positive)))
        xs, density = xs[positive], density[positive]
    if xs.size < MIN_SPATIAL_SAMPLES:
        raise InvalidArgumentError(f"envelope fit needs >= {MIN_SPATIAL_SAMPLES} positive samples, got {xs.size}")
    y = np.log(density)

    def shape(p: dict[str, float]) -> np.ndarray:
        return -_log_rho2(family, p, xs)

    starts = []
    if family == "gaussian":
        reach = half_width if half_width is not None else float(np.max(np.abs(xs)))
        for sigma in np.geomspace(max(SIGMA_BOUNDS[0], reach / 100.0), min(SIGMA_BOUNDS[1], 10.0 * reach), N_STARTS):
            params = lmfit.Parameters()
            params.add("log_sigma", value=math.log(sigma), min=math.log(SIGMA_BOUNDS[0]), max=math.log(SIGMA_BOUNDS[1]))
            params.add("x_shift", value=0.0, min=-reach, max=reach)
            starts.append(params)
    else:
        for x0 in np.geomspace(X0_BOUNDS[0] * 10.0, X0_BOUNDS[1] / 10.0, N_STARTS):
            params = lmfit.Parameters()
            params.add("log_x0", value=math.log(x0), min=math.log(X0_BOUNDS[0]), max=math.log(X0_BOUNDS[1]))
            starts.append(params)

    residual = _profiled(shape, y)
    result = _multistart(residual, starts)
    p = _natural(result.params.valuesdict())
    model = shape(p)
    log_a = float(np.mean(y - model))
    r = y - (log_a + model)
    bound, translated = _bounding(log_a, r)
    fit = FitResult(
        family=family, params=p, rss=float(np.sum(r**2)), window=(float(xs.min()), float(xs.max())),
        translated=translated, log_amplitude=log_a, bound_log_amplitude=bound, n_samples=int(xs.size),
    )
    logger.info("%s envelope fit on [%g, %g]: %s rss=%.3g", family, *fit.window, p, fit.rss)
    return fit


def fit_spatial_envelope(
    snapshot: FieldState,
    grid: ChebGrid,
    family: str,
    x_min: float = 50.0,
    x_max: float | None = None,
) -> FitResult:
    """Fit the decaying support of a snapshot on x_min <= x <= x_max.

    The snapshot is resampled with step 0.5; the wall point x = L is excluded.
    """
    x_hi = grid.L - RESAMPLE_STEP if x_max is None else min(float(x_max), grid.L - RESAMPLE_STEP)
    if x_min > x_hi:
        raise InvalidArgumentError(f"fit window [{x_min:g}, {x_hi:g}] is empty")
    count = int(math.floor((x_hi - x_min) / RESAMPLE_STEP + 1e-9)) + 1
    xs = x_min + RESAMPLE_STEP * np.arange(count)
    if xs.size < MIN_SPATIAL_SAMPLES:
        raise InvalidArgumentError(
            f"fit window [{x_min:g}, {x_hi:g}] has {xs.size} samples, need >= {MIN_SPATIAL_SAMPLES}"
        )
    density = np.abs(resample(grid, snapshot.values, xs)) ** 2
    fit = fit_envelope(xs, density, family, half_width=grid.L)
    fit.extras["snapshot_time"] = snapshot.t
    return fit


def fit_temporal_envelope(peaks, kappa: float = 2.0, amplitude: float | None = None) -> FitResult:
    """Fit value(t) ~ A / [1 + (t + s0) / t0]^kappa to peak samples in log space.

    Without *amplitude* only ``offset = s0 + t0`` and ``scale = A t0^kappa``
    are determined by the data; the (s0, t0) split is whatever the fit reaches.
    A given *amplitude* pins A and makes (s0, t0) identifiable.
    """
    peaks = np.asarray(peaks, dtype=float)
    if peaks.ndim != 2 or peaks.shape[1] != 2:
        raise InvalidArgumentError(f"temporal fit expects an (n, 2) peak array, got shape {peaks.shape}")
    if peaks.shape[0] < MIN_PEAKS:
        raise InvalidArgumentError(f"temporal fit needs >= {MIN_PEAKS} peaks, got {peaks.shape[0]}")
    if not kappa >= 1:
        raise InvalidArgumentError(f"temporal fit exponent must be >= 1, got {kappa!r}")
    if amplitude is not None and not amplitude > 0:
        raise InvalidArgumentError(f"amplitude must be positive, got {amplitude!r}")
    t, values = peaks[:, 0], peaks[:, 1]
    if np.any(values <= 0):
        raise DegenerateDataError("temporal fit needs positive peak values")
    y = np.log(values)
    t_min, t_max = float(t.min()), float(t.max())
    span = max(t_max - t_min, 1.0)
    s0_bounds = (-t_min, 10.0 * span)

    def shape(p: dict[str, float]) -> np.ndarray:
        return -kappa * np.log1p((t + p["s0"]) / p["t0"])

    starts = []
    for t0 in np.geomspace(span / 100.0, 100.0 * span, N_STARTS):
        t0 = min(max(t0, T0_BOUNDS[0]), T0_BOUNDS[1])
        params = lmfit.Parameters()
        params.add("s0", value=min(max(0.0, s0_bounds[0]), s0_bounds[1]), min=s0_bounds[0], max=s0_bounds[1])
        params.add("log_t0", value=math.log(t0), min=math.log(T0_BOUNDS[0]), max=math.log(T0_BOUNDS[1]))
        starts.append(params)

    if amplitude is None:
        residual = _profiled(shape, y)
    else:
        log_amp = math.log(amplitude)

        def residual(params: lmfit.Parameters) -> np.ndarray:
            return y - (log_amp + shape(_natural(params.valuesdict())))

    result = _multistart(residual, starts)
    p = _natural(result.params.valuesdict())
    model = shape(p)
    log_a = float(np.mean(y - model)) if amplitude is None else math.log(amplitude)
    r = y - (log_a + model)
    bound, translated = _bounding(log_a, r)
    offset = p["s0"] + p["t0"]
    variation = kappa * math.log((t_max + offset) / (t_min + offset))
    at_bound = p["t0"] >= 0.999 * T0_BOUNDS[1] or p["s0"] >= s0_bounds[1] - 1e-6 * span
    degenerate = variation < FLAT_LOG_VARIATION or at_bound or offset > 1e4 * span
    p["kappa"] = float(kappa)
    fit = FitResult(
        family="time", params=p, rss=float(np.sum(r**2)), window=(t_min, t_max),
        translated=translated, log_amplitude=log_a, bound_log_amplitude=bound,
        n_samples=int(t.size), degenerate=degenerate,
        offset=offset, scale=math.exp(log_a) * p["t0"] ** kappa,
    )
    if degenerate:
        logger.warning("temporal envelope is flat over [%g, %g] (offset %.3g); fit is degenerate",
                       t_min, t_max, offset)
    else:
        logger.info("temporal envelope fit: s0=%.6g t0=%.6g offset=%.6g rss=%.3g",
                    p["s0"], p["t0"], offset, fit.rss)
    return fit


# ---------------------------------------------------------------------------
# Rogue-wave events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PRWEvent:
    t_star: float
    P0_est: float
    P0_background: float
    peak_density: float
    profile_l2_error: float
    center_series_error: float
    snapshot_time: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _relative_l2(weights: np.ndarray, values: np.ndarray, reference: np.ndarray) -> float:
    ref = float(weights @ reference**2)
    err = float(weights @ (values - reference) ** 2)
    if ref == 0.0:
        return math.sqrt(err)
    return math.sqrt(err / ref)


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros_like(t)
    if t.size < 2:
        return np.ones_like(t)
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def characterize_prw_event(
    traj: Trajectory, grid: ChebGrid, search_window: tuple[float, float] = (0.5, 4.0)
) -> PRWEvent:
    """Locate the largest center-density peak in *search_window* and compare it with a Peregrine wave."""
    t_lo, t_hi = search_window
    series = traj.center_series
    inside = series[(series[:, 0] >= t_lo) & (series[:, 0] <= t_hi)]
    if inside.shape[0] == 0:
        raise NoEventError(f"no center samples in [{t_lo:g}, {t_hi:g}]")
    k = int(np.argmax(inside[:, 1]))
    if k == 0 or k == inside.shape[0] - 1:
        raise NoEventError(
            f"center density in [{t_lo:g}, {t_hi:g}] peaks at the window edge t={inside[k, 0]:g}"
        )
    t_star, peak = float(inside[k, 0]), float(inside[k, 1])
    if not peak > 0:
        raise NoEventError("center density vanishes in the search window")
    P0 = peak / 9.0
    ref = PRWParams(t0=t_star, P0=P0)

    snap = traj.snapshot_at(t_star)
    x = grid.interior
    dens = snap.density
    band = (np.abs(x) >= PRW_BACKGROUND_BAND[0]) & (np.abs(x) <= PRW_BACKGROUND_BAND[1])
    background = float(np.median(dens[band])) if np.any(band) else math.nan

    core = np.abs(x) <= PRW_PROFILE_HALF_WIDTH
    ref_profile = np.abs(eval_prw(x[core], snap.t, ref)) ** 2
    profile_error = _relative_l2(grid.qweights[1:-1][core], dens[core], ref_profile)

    near = series[np.abs(series[:, 0] - t_star) <= PRW_CENTER_HALF_WINDOW]
    ref_center = np.abs(eval_prw(np.zeros(near.shape[0]), near[:, 0], ref)) ** 2
    center_error = _relative_l2(_trapezoid_weights(near[:, 0]), near[:, 1], ref_center)

    event = PRWEvent(
        t_star=t_star, P0_est=P0, P0_background=background, peak_density=peak,
        profile_l2_error=profile_error, center_series_error=center_error, snapshot_time=snap.t,
    )
    logger.info("event at t*=%.4g: peak %.4g, P0 %.4g (background %.4g)", t_star, peak, P0, background)
    if math.isfinite(background) and abs(background - P0) > 0.25 * P0:
        logger.warning("background density %.4g disagrees with peak/9 = %.4g", background, P0)
    return event


# ---------------------------------------------------------------------------
# Support
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportMetrics:
    """``w_s`` is the narrower of the two one-sided half-widths ``w_left`` and ``w_right``."""

    h_s: float
    w_s: float
    has_support: bool
    width_defined: bool
    w_left: float = math.nan
    w_right: float = math.nan

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _half_width(xs: np.ndarray, dens: np.ndarray, level: float, limit: float) -> float:
    """Distance at which ``dens`` first falls below ``level`` scanning outward along ``xs >= 0``."""
    idx = np.flatnonzero((xs >= SUPPORT_SCAN_START) & (xs <= limit))
    below = idx[dens[idx] < level]
    if below.size == 0:
        return math.nan
    j = int(below[0])
    x0, x1, d0, d1 = xs[j - 1], xs[j], dens[j - 1], dens[j]
    return float(x0 + (level - d0) * (x1 - x0) / (d1 - d0))


def support_metrics(snapshot: FieldState, grid: ChebGrid, event: PRWEvent | None = None) -> SupportMetrics:
    """Amplitude and half-width at half-maximum of the pedestal under the event.

    Both half-lines are scanned; the plateau median pools 8 <= |x| <= 20 on either side.
    """
    xs = RESAMPLE_STEP * np.arange(int(math.floor(grid.L / RESAMPLE_STEP + 1e-9)) + 1)
    right = np.abs(resample(grid, snapshot.values, xs)) ** 2
    left = np.abs(resample(grid, snapshot.values, -xs)) ** 2
    plateau = (xs >= SUPPORT_PLATEAU_BAND[0]) & (xs <= SUPPORT_PLATEAU_BAND[1])
    if not np.any(plateau):
        raise InvalidArgumentError(f"domain half-length {grid.L:g} does not reach the support plateau band")
    h_s = float(np.median(np.concatenate([left[plateau], right[plateau]])))
    if not h_s > 0:
        return SupportMetrics(h_s=0.0, w_s=math.nan, has_support=False, width_defined=False)

    limit = grid.L - SUPPORT_EDGE_MARGIN
    w_left = _half_width(xs, left, 0.5 * h_s, limit)
    w_right = _half_width(xs, right, 0.5 * h_s, limit)
    widths = [w for w in (w_left, w_right) if not math.isnan(w)]
    if not widths:
        return SupportMetrics(h_s=h_s, w_s=math.nan, has_support=True, width_defined=False)
    w_s = min(widths)
    if event is not None:
        logger.debug("support of event at t*=%.4g: h_s=%.4g w_s=%.4g (left %.4g, right %.4g)",
                     event.t_star, h_s, w_s, w_left, w_right)
    return SupportMetrics(h_s=h_s, w_s=w_s, has_support=True, width_defined=True,
                          w_left=w_left, w_right=w_right)

"""Experiments: full runs with diagnostics, post-processing commands, MMS and sweeps."""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import metadata
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .analysis import (
    FitResult,
    PRWEvent,
    SupportMetrics,
    characterize_prw_event,
    envelope_curve,
    event_peaks,
    fit_spatial_envelope,
    fit_temporal_envelope,
    support_metrics,
)
from .config import ExperimentConfig, config_hash, format_config, parse_config
from .diagnostics import (
    AdmissibilityReport,
    Certification,
    certify_run,
    driver_admissibility,
    mass_balance_residual,
    weighted_space_balance_residual,
    weighted_time_balance_residual,
)
from .errors import DnlsError, InvalidArgumentError, NoEventError
from .grid import ChebGrid, build_grid, resample
from .integrator import Trajectory
from .model import eval_prw, mms_solution
from .plots import render_heatmap, render_profile, render_series
from .simulation import simulate
from .specs import ManufacturedDriver, ManufacturedIC, PRWParams, TimeWeight
from .storage import (
    RunRecord,
    RunWriter,
    finish_run,
    load_run,
    read_manifest,
    read_metadata,
    uniform_points,
    write_json,
    write_trajectory,
)


logger = logging.getLogger(__name__)

CONVERGENCE_DEGREES = (64, 128, 256, 512)
HEATMAP_HALF_WIDTH = 100.0
HEATMAP_MAX_ROWS = 400
EVENT_PLOT_HALF_WIDTH = 20.0


def package_version() -> str:
    try:
        return metadata.version("dnls-core")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def build_run_grid(config: ExperimentConfig) -> ChebGrid:
    return build_grid(config.grid.N, config.grid.L, config.grid.backend)


def default_run_dir(config: ExperimentConfig) -> Path:
    return Path(config.output.dir) / f"run-{config_hash(config)[:12]}"


# ---------------------------------------------------------------------------
# Analyses shared by runs and post-processing
# ---------------------------------------------------------------------------

@dataclass
class RunAnalysis:
    """Everything computed from a finished trajectory. Missing parts are None."""

    balance: dict[str, float] = field(default_factory=dict)
    event: PRWEvent | None = None
    support: SupportMetrics | None = None
    spatial_fits: list[tuple[float, FitResult]] = field(default_factory=list)
    peaks: np.ndarray | None = None
    temporal_fit: FitResult | None = None
    certification: Certification | None = None
    admissibility: AdmissibilityReport | None = None

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"balance": dict(self.balance)}
        if self.event is not None:
            out["event"] = self.event.as_dict()
        if self.support is not None:
            out["support"] = self.support.as_dict()
        fits = {f"{fit.family}@{t:g}": fit.as_dict() for t, fit in self.spatial_fits}
        if self.temporal_fit is not None:
            fits["temporal"] = self.temporal_fit.as_dict()
        out["fits"] = fits
        if self.certification is not None:
            out["certification"] = self.certification.as_dict()
        if self.admissibility is not None:
            out["admissibility"] = dict(self.admissibility.__dict__)
        return out


def _max_abs(residual: np.ndarray) -> float:
    return float(np.max(np.abs(residual[:, 1]))) if residual.size else 0.0


def balance_summary(traj: Trajectory, config: ExperimentConfig, grid: ChebGrid) -> dict[str, float]:
    """Largest normalized residual of each balance law the recorded columns allow."""
    if traj.series["t"].size < 3:
        return {}
    out = {
        "mass": _max_abs(mass_balance_residual(traj, config.model, grid)),
        "time_weighted": _max_abs(weighted_time_balance_residual(traj, config.time_weight, config.model, grid)),
    }
    if "weighted_mass" in traj.series:
        out["space_weighted"] = _max_abs(
            weighted_space_balance_residual(traj, config.space_weight, config.model, grid))
    return out


def center_peaks(traj: Trajectory, config: ExperimentConfig) -> np.ndarray:
    if traj.series["t"].size < 3:
        return np.zeros((0, 2))
    return event_peaks(traj, config.analysis.temporal_t_max, config.analysis.peak_prominence)


def temporal_fit(peaks: np.ndarray, config: ExperimentConfig, amplitude: float | None = None) -> FitResult | None:
    """Envelope of the center-density peaks, or None with fewer than four peaks."""
    if peaks.shape[0] < 4:
        logger.info("only %d center peak(s) up to t=%g; no temporal fit",
                    peaks.shape[0], config.analysis.temporal_t_max)
        return None
    return fit_temporal_envelope(peaks, kappa=config.analysis.temporal_kappa, amplitude=amplitude)


def certification_time_weight(config: ExperimentConfig, fit: FitResult | None) -> TimeWeight:
    """The fitted time weight when a usable one exists, else the configured one."""
    if fit is not None and not fit.degenerate:
        return fit.weight
    return config.time_weight


def admissibility(config: ExperimentConfig, grid: ChebGrid | None = None) -> AdmissibilityReport:
    grid = grid or build_run_grid(config)
    return driver_admissibility(config.model.driver, config.space_weight, config.time_weight,
                                config.analysis.admissibility_horizon, grid)


def analyse_run(traj: Trajectory, config: ExperimentConfig, grid: ChebGrid) -> RunAnalysis:
    """Every post-run diagnostic; a failing fit is logged and skipped."""
    result = RunAnalysis(balance=balance_summary(traj, config, grid))

    try:
        result.event = characterize_prw_event(traj, grid, config.analysis.prw_window)
        result.support = support_metrics(traj.snapshot_at(result.event.t_star), grid, result.event)
    except NoEventError as exc:
        logger.info("no rogue-wave event: %s", exc)

    for t in config.analysis.fit_times:
        snap = traj.snapshot_at(t)
        for family in config.analysis.fit_families:
            try:
                fit = fit_spatial_envelope(snap, grid, family, config.analysis.fit_x_min, config.analysis.fit_x_max)
            except DnlsError as exc:
                logger.warning("spatial %s fit at t=%g failed: %s", family, snap.t, exc)
                continue
            result.spatial_fits.append((snap.t, fit))

    result.peaks = center_peaks(traj, config)
    try:
        result.temporal_fit = temporal_fit(result.peaks, config)
    except DnlsError as exc:
        logger.warning("temporal fit failed: %s", exc)

    if traj.snapshots and config.model.gamma > 0:
        w_time = certification_time_weight(config, result.temporal_fit)
        result.certification = certify_run(traj, config.space_weight, w_time, config.model, grid)
    try:
        result.admissibility = admissibility(config, grid)
    except DnlsError as exc:
        logger.warning("admissibility check failed: %s", exc)
    return result


# ---------------------------------------------------------------------------
# Plots
# ---------------------------------------------------------------------------

def render_run_plots(writer: RunWriter, traj: Trajectory, config: ExperimentConfig, grid: ChebGrid,
                     analysis: RunAnalysis) -> None:
    log_scale = config.output.log_scale
    center = traj.center_series
    overlays = {}
    if analysis.temporal_fit is not None:
        peaks = analysis.peaks
        ts = np.linspace(max(peaks[0, 0], 1e-3), peaks[-1, 0], 400)
        overlays["bounding envelope"] = (ts, envelope_curve(analysis.temporal_fit, ts))
    render_series(writer.path("plot-center", "plots/center.svg"), center[:, 0], center[:, 1],
                  peaks=analysis.peaks, overlays=overlays, log_scale=log_scale)
    norms = traj.norm_series
    render_series(writer.path("plot-mass", "plots/mass.svg"), norms[:, 0], norms[:, 1], ylabel="N(t)")

    xs = uniform_points(grid)
    if analysis.event is not None:
        event = analysis.event
        snap = traj.snapshot_at(event.t_star)
        core = xs[np.abs(xs) <= EVENT_PLOT_HALF_WIDTH]
        density = np.abs(resample(grid, snap.values, core)) ** 2
        reference = np.abs(eval_prw(core, snap.t, PRWParams(event.t_star, event.P0_est))) ** 2
        render_profile(writer.path("plot-event", "plots/event.svg"), core, density,
                       overlays={"Peregrine": (core, reference)}, title=f"t = {snap.t:g}")

    for t, fit in analysis.spatial_fits:
        density = np.abs(resample(grid, traj.snapshot_at(t).values, xs)) ** 2
        right = xs[(xs >= fit.window[0]) & (xs <= fit.window[1])]
        name = f"fit-{fit.family}-t{t:g}"
        render_profile(writer.path(f"plot-{name}", f"plots/{name}.svg"), xs, density,
                       overlays={f"{fit.family} bound": (right, envelope_curve(fit, right))},
                       log_scale=log_scale, title=f"t = {t:g}")

    hx = xs[np.abs(xs) <= min(HEATMAP_HALF_WIDTH, grid.L)]
    stride = max(1, math.ceil(len(traj.snapshots) / HEATMAP_MAX_ROWS))
    snaps = traj.snapshots[::stride]
    if len(snaps) >= 2:
        density = np.array([np.abs(resample(grid, s.values, hx)) ** 2 for s in snaps])
        render_heatmap(writer.path("plot-heatmap", "plots/heatmap.svg"), hx, np.array([s.t for s in snaps]), density)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

def run_experiment(config: ExperimentConfig, run_dir: Path | None = None) -> RunRecord:
    """Integrate, analyse and persist one experiment.

    A blow-up is a successful run with ``status = "blowup"``; numerical
    failures such as step underflow propagate without writing anything.
    """
    run_dir = Path(run_dir) if run_dir is not None else default_run_dir(config)
    started = time.perf_counter()
    grid = build_run_grid(config)
    traj = simulate(config.model, config.ic, grid, config.integrator, weight=config.space_weight)
    analysis = analyse_run(traj, config, grid)

    with RunWriter(run_dir) as writer:
        write_trajectory(writer, traj, grid)
        if config.output.plots:
            render_run_plots(writer, traj, config, grid, analysis)
        record = RunRecord(
            run_dir=run_dir, config_hash=config_hash(config), version=package_version(),
            wall_time=time.perf_counter() - started, status=traj.status,
            status_time=traj.status_time, summary=analysis.as_dict(),
        )
        finish_run(writer, record, {
            "config": format_config(config),
            "preset": config.preset,
            "weight": traj.weight,
            "steps": {"accepted": traj.accepted, "rejected": traj.rejected},
            "diagnostics": record.summary,
        })
    logger.info("run %s finished (%s) in %.1fs", run_dir, record.status, record.wall_time)
    return record


def replot(run_dir: Path) -> RunRecord:
    """Re-render the figures of a stored run and rewrite its metadata and manifest."""
    run_dir = Path(run_dir)
    config, grid, traj = load_run(run_dir)
    meta = read_metadata(run_dir)
    stored = meta.pop("record")
    kept = {k: v for k, v in read_manifest(run_dir).items() if not k.startswith("plot-")}
    analysis = analyse_run(traj, config, grid)
    with RunWriter(run_dir) as writer:
        writer.files.update(kept)
        render_run_plots(writer, traj, config, grid, analysis)
        record = RunRecord(
            run_dir=run_dir, config_hash=stored["config_hash"], version=stored["version"],
            wall_time=stored["wall_time"], status=traj.status, status_time=traj.status_time,
            summary=analysis.as_dict(),
        )
        meta["diagnostics"] = record.summary
        finish_run(writer, record, meta)
    return record


def fit_spatial_command(run_dir: Path, t: float, family: str,
                        x_min: float | None = None, x_max: float | None = None) -> FitResult:
    config, grid, traj = load_run(run_dir)
    x_min = config.analysis.fit_x_min if x_min is None else x_min
    x_max = config.analysis.fit_x_max if x_max is None else x_max
    return fit_spatial_envelope(traj.snapshot_at(t), grid, family, x_min, x_max)


def fit_temporal_command(run_dir: Path, kappa: float | None = None, t_max: float | None = None,
                         amplitude: float | None = None) -> FitResult:
    config, _, traj = load_run(run_dir)
    analysis = replace(
        config.analysis,
        temporal_kappa=config.analysis.temporal_kappa if kappa is None else kappa,
        temporal_t_max=config.analysis.temporal_t_max if t_max is None else t_max,
    )
    config = replace(config, analysis=analysis)
    fit = temporal_fit(center_peaks(traj, config), config, amplitude=amplitude)
    if fit is None:
        raise InvalidArgumentError(f"fewer than 4 center-density peaks up to t={analysis.temporal_t_max:g}")
    return fit


def detect_event_command(run_dir: Path, window: tuple[float, float] | None = None) -> dict[str, Any]:
    config, grid, traj = load_run(run_dir)
    event = characterize_prw_event(traj, grid, window or config.analysis.prw_window)
    support = support_metrics(traj.snapshot_at(event.t_star), grid, event)
    return {"event": event.as_dict(), "support": support.as_dict()}


def verify_balance_command(run_dir: Path) -> dict[str, float]:
    config, grid, traj = load_run(run_dir)
    return balance_summary(traj, config, grid)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

def _require_manufactured(config: ExperimentConfig) -> None:
    if not isinstance(config.model.driver, ManufacturedDriver) or not isinstance(config.ic, ManufacturedIC):
        raise InvalidArgumentError("MMS studies need driver.kind = manufactured and ic.kind = manufactured")


def mms_error(config: ExperimentConfig, grid: ChebGrid | None = None) -> dict[str, Any]:
    """Max-norm distance between the computed and the exact solution over all snapshots."""
    _require_manufactured(config)
    grid = grid or build_run_grid(config)
    traj = simulate(config.model, config.ic, grid, config.integrator)
    family = config.model.driver.family
    errors = [float(np.max(np.abs(s.values - mms_solution(family, grid.interior, s.t)))) for s in traj.snapshots]
    k = int(np.argmax(errors))
    return {
        "family": str(family), "N": grid.N, "L": grid.L, "t_end": traj.snapshots[-1].t,
        "max_error": errors[k], "t_of_max": traj.snapshots[k].t, "final_error": errors[-1],
        "status": traj.status,
    }


def mms_study(config: ExperimentConfig) -> dict[str, Any]:
    result = mms_error(config)
    logger.info("MMS %s N=%d: max error %.3e", result["family"], result["N"], result["max_error"])
    return result


def convergence_study(config: ExperimentConfig, degrees: Iterable[int] = CONVERGENCE_DEGREES) -> list[dict[str, Any]]:
    """MMS error for each grid degree with everything else fixed."""
    _require_manufactured(config)
    rows = []
    previous = None
    for N in degrees:
        result = mms_error(config, build_grid(int(N), config.grid.L, config.grid.backend))
        result["ratio"] = result["max_error"] / previous if previous else math.nan
        previous = result["max_error"]
        rows.append(result)
        logger.info("convergence N=%d: error %.3e", N, result["max_error"])
    return rows


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def sweep_points(axes: dict[str, list[str]]) -> list[list[str]]:
    """Cartesian product of the axes as lists of ``key=value`` overrides."""
    keys = list(axes)
    return [[f"{k}={v}" for k, v in zip(keys, combo)] for combo in itertools.product(*(axes[k] for k in keys))]


def _sweep_point(text: str, preset: str | None, overrides: list[str], run_dir: str) -> dict[str, Any]:
    point: dict[str, Any] = {"overrides": overrides, "run_dir": run_dir}
    try:
        config = parse_config(text, preset=preset, overrides=overrides)
        record = run_experiment(config, Path(run_dir))
        point.update(status=record.status, config_hash=record.config_hash)
    except DnlsError as exc:
        logger.warning("sweep point %s failed: %s", run_dir, exc)
        point.update(status="failed", error=str(exc))
    return point


def sweep(text: str, axes: dict[str, list[str]], out_dir: Path, *, preset: str | None = None,
          overrides: Iterable[str] = (), workers: int = 1) -> list[dict[str, Any]]:
    """Run every point of the parameter grid into ``out_dir/point-<index>``.

    Failed points are reported in the result and in ``sweep.json``; they do
    not stop the others.
    """
    if not axes:
        raise InvalidArgumentError("a sweep needs at least one --param axis")
    if workers < 1:
        raise InvalidArgumentError(f"workers must be >= 1, got {workers}")
    out_dir = Path(out_dir)
    base = list(overrides)
    jobs = [(text, preset, base + point, str(out_dir / f"point-{i}")) for i, point in enumerate(sweep_points(axes))]
    logger.info("sweep of %d point(s) with %d worker(s)", len(jobs), workers)
    if workers == 1:
        results = [_sweep_point(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_point, *job) for job in jobs]
            results = [f.result() for f in futures]
    for i, r in enumerate(results):
        r["index"] = i
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "sweep.json", {"axes": axes, "points": results})
    return results

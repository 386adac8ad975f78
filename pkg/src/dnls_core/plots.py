"""SVG figures of runs: density profiles, time series and the (x, t) density map."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import InvalidArgumentError  # noqa: E402


logger = logging.getLogger(__name__)

# fixed metadata keeps the SVG bytes reproducible
_SVG_METADATA = {"Date": None, "Creator": "dnls-core"}
matplotlib.rcParams["svg.hashsalt"] = "dnls-core"

Curve = tuple[np.ndarray, np.ndarray]


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def render_profile(
    path: Path,
    xs: np.ndarray,
    density: np.ndarray,
    *,
    overlays: Mapping[str, Curve] | None = None,
    log_scale: bool = False,
    title: str = "",
) -> Path:
    """Density profile |u(x, t)|^2 with optional fitted or reference curves."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, density, color="black", lw=1.0, label="|u|^2")
    for label, (cx, cy) in (overlays or {}).items():
        ax.plot(cx, cy, lw=1.0, ls="--", label=label)
    if log_scale:
        positive = np.asarray(density)[np.asarray(density) > 0]
        if positive.size:
            ax.set_yscale("log")
            ax.set_ylim(bottom=max(positive.min(), positive.max() * 1e-12))
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def render_series(
    path: Path,
    t: np.ndarray,
    values: np.ndarray,
    *,
    peaks: np.ndarray | None = None,
    overlays: Mapping[str, Curve] | None = None,
    log_scale: bool = False,
    ylabel: str = "|u(0, t)|^2",
) -> Path:
    """A time series, its detected peaks and envelope curves."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, values, color="black", lw=0.8)
    if peaks is not None and len(peaks):
        ax.plot(peaks[:, 0], peaks[:, 1], "o", ms=3, color="tab:red", label="peaks")
    for label, (ct, cy) in (overlays or {}).items():
        ax.plot(ct, cy, lw=1.0, ls="--", label=label)
    if log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if peaks is not None and len(peaks) or overlays:
        ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def render_heatmap(path: Path, xs: np.ndarray, ts: np.ndarray, density: np.ndarray) -> Path:
    """Density over (x, t) on a linear color scale; *density* has shape (len(ts), len(xs))."""
    density = np.asarray(density)
    if density.shape != (len(ts), len(xs)):
        raise InvalidArgumentError(
            f"heatmap data has shape {density.shape}, expected ({len(ts)}, {len(xs)})"
        )
    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(xs, ts, density, shading="nearest", cmap="viridis", rasterized=True)
    fig.colorbar(mesh, ax=ax, label="|u|^2")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    fig.tight_layout()
    return _save(fig, path)

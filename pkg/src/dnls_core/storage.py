"""Run directories: CSV snapshots and series, JSON metadata, manifest, reload.

Every writer goes through :class:`RunWriter`, which remembers the files it
created and removes them again when a write fails.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DnlsError, InvalidArgumentError, StorageError
from .grid import ChebGrid, build_grid, resample
from .integrator import Trajectory
from .specs import FieldState, FileIC


logger = logging.getLogger(__name__)

UNIFORM_STEP = 0.5
FLOAT_FORMAT = "%.17g"
SNAPSHOT_HEADER = "x,re_u,im_u,density"
RAW_HEADER = "x,re_u,im_u"
SERIES_COLUMNS = ("t", "center_density", "mass", "sup_density")
MANIFEST = "manifest.json"
METADATA = "metadata.json"


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """What a run produced. ``files`` maps logical names to paths relative to ``run_dir``."""

    run_dir: Path
    config_hash: str
    version: str
    wall_time: float
    status: str
    status_time: float | None = None
    files: dict[str, str] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)

    def get(self, name: str) -> Path:
        if name not in self.files:
            raise InvalidArgumentError(f"run {self.run_dir} has no file {name!r}")
        return self.run_dir / self.files[name]

    def as_dict(self) -> dict[str, Any]:
        return {
            "config_hash": self.config_hash, "version": self.version,
            "wall_time": self.wall_time, "status": self.status,
            "status_time": self.status_time, "files": dict(self.files),
        }


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

class RunWriter:
    """Creates files under one run directory and rolls them back on failure.

    Use as a context manager; any exception inside the block removes every
    file written so far and is re-raised as :class:`StorageError` (errors of
    this package other than I/O pass through unchanged after the rollback).
    """

    def __init__(self, run_dir: Path) -> None:
        self.run_dir = Path(run_dir)
        self.files: dict[str, str] = {}
        self._created: list[Path] = []

    def __enter__(self) -> "RunWriter":
        try:
            self.run_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create run directory {self.run_dir}: {exc}") from exc
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc is None:
            return False
        self.rollback()
        if isinstance(exc, DnlsError) or not isinstance(exc, Exception):
            return False
        raise StorageError(f"writing {self.run_dir} failed: {exc}") from exc

    def rollback(self) -> None:
        for path in reversed(self._created):
            try:
                path.unlink()
            except FileNotFoundError:
                pass
        logger.warning("rolled back %d file(s) in %s", len(self._created), self.run_dir)
        self._created.clear()
        self.files.clear()

    def path(self, name: str, relative: str) -> Path:
        """Register *relative* under logical *name* and return its absolute path."""
        target = self.run_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        self.files[name] = relative
        self._created.append(target)
        return target

    def write_csv(self, name: str, relative: str, header: str, rows: np.ndarray) -> Path:
        target = self.path(name, relative)
        write_csv(target, header, rows)
        return target

    def write_json(self, name: str, relative: str, document: Any) -> Path:
        target = self.path(name, relative)
        write_json(target, document)
        return target


def write_csv(path: Path, header: str, rows: np.ndarray) -> None:
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    np.savetxt(path, rows, fmt=FLOAT_FORMAT, delimiter=",", header=header, comments="")


def write_json(path: Path, document: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(document), fh, indent=2, sort_keys=True)
        fh.write("\n")


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def uniform_points(grid: ChebGrid, step: float = UNIFORM_STEP) -> np.ndarray:
    n = int(math.floor(2.0 * grid.L / step + 1e-9))
    return -grid.L + step * np.arange(n + 1)


def snapshot_rows(snapshot: FieldState, grid: ChebGrid) -> np.ndarray:
    """Uniform resample with columns x, Re u, Im u, |u|^2."""
    xs = uniform_points(grid)
    u = resample(grid, snapshot.values, xs)
    return np.column_stack([xs, u.real, u.imag, np.abs(u) ** 2])


def raw_rows(snapshot: FieldState, grid: ChebGrid) -> np.ndarray:
    """All nodes, ascending in x, boundary zeros included."""
    u = np.zeros(grid.N + 1, dtype=complex)
    u[1:-1] = snapshot.values
    return np.column_stack([grid.nodes[::-1], u.real[::-1], u.imag[::-1]])


def write_snapshot(writer: RunWriter, index: int, snapshot: FieldState, grid: ChebGrid) -> None:
    writer.write_csv(f"snapshot-{index}", f"snapshots/snap-{index:05d}.csv", SNAPSHOT_HEADER,
                     snapshot_rows(snapshot, grid))
    writer.write_csv(f"raw-{index}", f"snapshots/raw-{index:05d}.csv", RAW_HEADER, raw_rows(snapshot, grid))


def write_series(writer: RunWriter, traj: Trajectory) -> None:
    columns = [traj.series[name] for name in SERIES_COLUMNS]
    writer.write_csv("series", "series.csv", ",".join(SERIES_COLUMNS), np.column_stack(columns))


def balance_columns(traj: Trajectory) -> list[str]:
    return ["t", "mass"] + sorted(name for name in traj.series if name not in SERIES_COLUMNS)


def write_balance(writer: RunWriter, traj: Trajectory) -> None:
    names = balance_columns(traj)
    writer.write_csv("balance", "balance.csv", ",".join(names),
                     np.column_stack([traj.series[name] for name in names]))


def write_trajectory(writer: RunWriter, traj: Trajectory, grid: ChebGrid) -> None:
    """Series, balance columns, every snapshot and the snapshot index."""
    write_series(writer, traj)
    write_balance(writer, traj)
    for index, snapshot in enumerate(traj.snapshots):
        write_snapshot(writer, index, snapshot, grid)
    index_rows = np.array([[i, s.t] for i, s in enumerate(traj.snapshots)], dtype=float).reshape(-1, 2)
    writer.write_csv("snapshot-index", "snapshots/index.csv", "index,t", index_rows)
    logger.info("wrote %d snapshot(s) and %d series samples to %s",
                len(traj.snapshots), traj.series["t"].size, writer.run_dir)


def finish_run(writer: RunWriter, record: RunRecord, metadata: dict[str, Any]) -> RunRecord:
    """Write metadata and the manifest; the manifest lists every file including itself."""
    metadata = dict(metadata)
    metadata["record"] = record.as_dict()
    writer.write_json("metadata", METADATA, metadata)
    writer.files["manifest"] = MANIFEST
    record.files = dict(writer.files)
    writer.write_json("manifest", MANIFEST, {"files": record.files, "config_hash": record.config_hash})
    return record


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise InvalidArgumentError(f"{path} is not a numeric CSV file: {exc}") from exc
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return header, data


def read_ic_file(path: Path) -> FileIC:
    """Initial data from a raw or uniform snapshot file (columns x, re_u, im_u first)."""
    header, data = read_csv(Path(path))
    if header[:3] != ["x", "re_u", "im_u"]:
        raise InvalidArgumentError(f"{path}: expected columns x,re_u,im_u, got {','.join(header)}")
    return FileIC(xs=data[:, 0], values=data[:, 1] + 1j * data[:, 2], source=str(path))


def read_snapshot(path: Path, t: float) -> FieldState:
    """Interior field of a raw nodal snapshot file."""
    header, data = read_csv(Path(path))
    if header != RAW_HEADER.split(","):
        raise InvalidArgumentError(f"{path}: not a raw nodal snapshot")
    values = (data[:, 1] + 1j * data[:, 2])[::-1]
    return FieldState(t, values[1:-1])


def read_manifest(run_dir: Path) -> dict[str, str]:
    path = Path(run_dir) / MANIFEST
    try:
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    missing = [rel for rel in manifest["files"].values() if not (Path(run_dir) / rel).exists()]
    if missing:
        raise StorageError(f"run {run_dir} is incomplete; missing {', '.join(missing)}")
    return manifest["files"]


def read_metadata(run_dir: Path) -> dict[str, Any]:
    path = Path(run_dir) / METADATA
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc


def load_run(run_dir: Path):
    """Reload ``(config, grid, trajectory)`` of a finished run."""
    from .config import parse_config

    run_dir = Path(run_dir)
    files = read_manifest(run_dir)
    metadata = read_metadata(run_dir)
    config = parse_config(metadata["config"])
    grid = build_grid(config.grid.N, config.grid.L, config.grid.backend)

    traj = Trajectory(status=metadata["record"]["status"], status_time=metadata["record"]["status_time"])
    traj.accepted = int(metadata.get("steps", {}).get("accepted", 0))
    traj.rejected = int(metadata.get("steps", {}).get("rejected", 0))
    traj.weight = metadata.get("weight")
    header, data = read_csv(run_dir / files["series"])
    series = {name: data[:, i] for i, name in enumerate(header)}
    header, data = read_csv(run_dir / files["balance"])
    series.update({name: data[:, i] for i, name in enumerate(header)})
    traj.series = series

    _, index = read_csv(run_dir / files["snapshot-index"])
    for i, t in index:
        traj.snapshots.append(read_snapshot(run_dir / files[f"raw-{int(i)}"], float(t)))
    logger.info("loaded %s: %s", run_dir, traj)
    return config, grid, traj

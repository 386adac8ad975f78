"""Experiment configuration: parsing, validation, canonical text and hash."""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

from .errors import ConfigError, DnlsError
from .integrator import IntegratorConfig
from .presets import canonical_preset, preset_text
from .reader import ConfigEntry, atom_to_value, read_entries, split_list, unwrap_literal, wrap_literal
from .schema import KEY_TABLE, KEYS, KeyDef
from .specs import (
    AlgebraicDriver,
    AlgebraicIC,
    DriverSpec,
    GaussianDriver,
    GaussianMMS,
    GaussianWeight,
    ICSpec,
    LinearAbs,
    ManufacturedDriver,
    ManufacturedIC,
    MMSFamily,
    ModelParams,
    NoDriver,
    QuadraticAbs,
    SechIC,
    SechMMS,
    SpatialWeight,
    TimeWeight,
    UnitWeight,
)
from .storage import read_ic_file


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    N: int
    L: float
    backend: str = "dense"


@dataclass(frozen=True)
class AnalysisSettings:
    fit_x_min: float = 50.0
    fit_x_max: float | None = None
    fit_families: tuple[str, ...] = ("gaussian", "quadratic", "linear")
    fit_times: tuple[float, ...] = ()
    temporal_kappa: float = 2.0
    temporal_t_max: float = 30.0
    peak_prominence: float = 0.01
    prw_window: tuple[float, float] = (0.5, 4.0)
    admissibility_horizon: float = 1e6


@dataclass(frozen=True)
class OutputSettings:
    dir: str = "runs"
    plots: bool = True
    log_scale: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment; ``values`` holds every resolved key."""

    model: ModelParams
    ic: ICSpec
    grid: GridSpec
    integrator: IntegratorConfig
    space_weight: SpatialWeight
    time_weight: TimeWeight
    analysis: AnalysisSettings
    output: OutputSettings
    values: dict[str, Any] = field(default_factory=dict, compare=False)
    preset: str | None = None

    def get(self, key: str) -> Any:
        if key not in KEY_TABLE:
            raise ConfigError("unknown key", key=key)
        return self.values[key]


# ---------------------------------------------------------------------------
# Value conversion
# ---------------------------------------------------------------------------

def _to_float(text: str, key: KeyDef, line: int | None) -> float:
    value = atom_to_value(text)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {text!r}", key=key.name, line=line)
    return float(value)


def convert_value(key: KeyDef, text: str, line: int | None = None) -> Any:
    """Convert the raw text of one entry according to its key definition."""
    if key.kind == "float":
        return _to_float(text, key, line)
    if key.kind == "auto":
        if text.strip().lower() == "auto":
            return None
        return _to_float(text, key, line)
    if key.kind == "int":
        value = atom_to_value(text)
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {text!r}", key=key.name, line=line)
        return value
    if key.kind == "bool":
        value = atom_to_value(text)
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {text!r}", key=key.name, line=line)
        return value
    if key.kind == "enum":
        value = text.strip()
        if value not in key.choices:
            raise ConfigError(f"expected one of {', '.join(key.choices)}, got {value!r}", key=key.name, line=line)
        return value
    if key.kind == "floats":
        return [_to_float(part, key, line) for part in split_list(text)]
    if key.kind == "names":
        names = split_list(text)
        for name in names:
            if name not in key.choices:
                raise ConfigError(f"expected names from {', '.join(key.choices)}, got {name!r}",
                                  key=key.name, line=line)
        return names
    return text


def format_value(key: KeyDef, value: Any) -> str:
    """Canonical text of one value; floats keep 17 significant digits."""
    if value is None:
        return "auto" if key.kind == "auto" else "[]"
    if key.kind in ("float", "auto"):
        return _format_float(value)
    if key.kind == "bool":
        return "true" if value else "false"
    if key.kind == "int":
        return str(int(value))
    if key.kind == "floats":
        return wrap_literal(", ".join(_format_float(v) for v in value)) if value else "[]"
    if key.kind == "names":
        return wrap_literal(", ".join(value)) if value else "[]"
    return wrap_literal(str(value))


def _format_float(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def default_grid_degree(L: float) -> int:
    """Degree giving at least three nodes per unit length, rounded up to a multiple of 256."""
    return 256 * max(1, math.ceil(3.0 * L / 256.0))


def snapshot_schedule(
    t_start: float,
    t_end: float,
    dt_event: float = 0.02,
    event_end: float = 6.0,
    dt: float = 0.5,
) -> tuple[float, ...]:
    """Dense snapshots on [0, event_end], sparser ones afterwards, both ends included."""
    if not (dt_event > 0 and dt > 0):
        raise ConfigError("snapshot spacings must be positive")
    if t_end <= t_start:
        raise ConfigError(f"t_end={t_end:g} must exceed t_start={t_start:g}", key="integrator.t_end")
    times = {round(t_start, 10), round(t_end, 10)}
    fine_end = min(event_end, t_end)
    for k in range(int(math.floor(fine_end / dt_event + 1e-9)) + 1):
        times.add(round(k * dt_event, 10))
    k = 1
    while event_end + k * dt <= t_end + 1e-9:
        times.add(round(event_end + k * dt, 10))
        k += 1
    return tuple(t for t in sorted(times) if t_start <= t <= t_end)


def _resolve_preset(entries: list[ConfigEntry], preset: str | None) -> tuple[str | None, list[ConfigEntry]]:
    for entry in entries:
        if entry.key == "preset":
            preset = entry.raw.strip() or None
    if preset is None:
        return None, []
    try:
        preset = canonical_preset(preset)
        text = preset_text(preset)
    except KeyError:
        raise ConfigError(f"unknown preset {preset!r}", key="preset") from None
    preset_entries = read_entries(text)
    if any(e.key == "preset" for e in preset_entries):
        raise ConfigError(f"preset {preset!r} must not name another preset", key="preset")
    return preset, preset_entries


def _apply(values: dict[str, Any], entries: Iterable[ConfigEntry]) -> None:
    for entry in entries:
        if entry.key == "preset":
            continue
        key = KEY_TABLE.get(entry.key)
        if key is None:
            raise ConfigError("unknown key", key=entry.key, line=entry.line)
        values[entry.key] = convert_value(key, entry.raw, entry.line)


def _override_entries(overrides: Iterable[str]) -> list[ConfigEntry]:
    entries = []
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, value = item.partition("=")
        entries.append(ConfigEntry(key=key.strip(), raw=unwrap_literal(value.strip()), line=None))
    return entries


def parse_config(text: str = "", *, preset: str | None = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Parse a key-value document into a validated :class:`ExperimentConfig`.

    Pass 1 resolves the preset (a ``preset`` entry beats the *preset*
    argument); pass 2 applies defaults, the preset, the document and then
    *overrides* (``key=value`` strings) before validation.
    """
    entries = read_entries(text)
    preset_name, preset_entries = _resolve_preset(entries, preset)
    override_entries = _override_entries(overrides)

    values: dict[str, Any] = {k.name: _copy(k.default) for k in KEYS if k.name != "preset"}
    _apply(values, preset_entries)
    _apply(values, entries)
    _apply(values, override_entries)
    config = build_config(values, preset=preset_name)
    logger.debug("parsed configuration (preset %s), hash %s", preset_name, config_hash(config)[:12])
    return config


def _copy(value: Any) -> Any:
    return list(value) if isinstance(value, list) else value


def _section(key: str, build: Callable[[], Any]) -> Any:
    try:
        return build()
    except ConfigError:
        raise
    except DnlsError as exc:
        raise ConfigError(str(exc), key=key) from exc


def _mms_family(v: dict[str, Any]) -> MMSFamily:
    cls = GaussianMMS if v["mms.family"] == "gaussian" else SechMMS
    if v["mms.a"] is None:
        return cls(A=v["mms.A"], w=v["mms.w"])
    return cls(A=v["mms.A"], a=v["mms.a"], w=v["mms.w"])


def _driver(v: dict[str, Any]) -> DriverSpec:
    kind = v["driver.kind"]
    if kind == "gaussian":
        return GaussianDriver(Gamma=v["driver.Gamma"], sigma_x=v["driver.sigma_x"], sigma_t=v["driver.sigma_t"],
                              Theta=v["driver.Theta"], t_center=v["driver.t_center"])
    if kind == "algebraic":
        return AlgebraicDriver(Gamma=v["driver.Gamma"], delta_x=v["driver.delta_x"], delta_t=v["driver.delta_t"],
                               theta=v["driver.theta"], omega=v["driver.omega"], Theta=v["driver.Theta"])
    if kind == "manufactured":
        return ManufacturedDriver(family=_mms_family(v), gamma=v["model.gamma"])
    return NoDriver()


def _ic(v: dict[str, Any]) -> ICSpec:
    kind = v["ic.kind"]
    if kind == "algebraic":
        return AlgebraicIC()
    if kind == "sech":
        return SechIC()
    if kind == "manufactured":
        return ManufacturedIC(family=_mms_family(v))
    if not v["ic.path"]:
        raise ConfigError("ic.kind = file needs ic.path", key="ic.path")
    return read_ic_file(Path(v["ic.path"]))


def _space_weight(v: dict[str, Any]) -> SpatialWeight:
    kind = v["weights.space"]
    if kind == "linear":
        return LinearAbs(x0=v["weights.x0"])
    if kind == "quadratic":
        return QuadraticAbs(x0=v["weights.x0"])
    if kind == "gaussian":
        return GaussianWeight(sigma=v["weights.sigma"], x_shift=v["weights.x_shift"])
    return UnitWeight()


def _integrator(v: dict[str, Any]) -> IntegratorConfig:
    t_start, t_end = v["integrator.t_start"], v["integrator.t_end"]
    if v["integrator.snapshot_times"]:
        times = tuple(v["integrator.snapshot_times"])
    else:
        times = snapshot_schedule(t_start, t_end, v["integrator.snapshot_dt_event"],
                                  v["integrator.snapshot_event_end"], v["integrator.snapshot_dt"])
    dt_max = v["integrator.dt_max"]
    return IntegratorConfig(
        snapshot_times=times,
        rel_tol=v["integrator.rel_tol"],
        abs_tol=v["integrator.abs_tol"],
        dt_init=v["integrator.dt_init"],
        dt_min=v["integrator.dt_min"],
        dt_max=math.inf if dt_max is None else dt_max,
        max_steps=v["integrator.max_steps"],
        blowup_threshold=v["integrator.blowup_threshold"],
        backend=v["integrator.backend"],
        t_start=t_start,
    )


def build_config(values: dict[str, Any], preset: str | None = None) -> ExperimentConfig:
    """Validate resolved key values and build the typed configuration."""
    v = values
    L = v["grid.L"]
    if not (L > 0 and math.isfinite(L)):
        raise ConfigError(f"must be positive, got {L!r}", key="grid.L")
    N = v["grid.N"]
    if N is None:
        N = default_grid_degree(L)
    elif not (float(N).is_integer() and N >= 2):
        raise ConfigError(f"must be an integer >= 2, got {N!r}", key="grid.N")
    grid = GridSpec(N=int(N), L=float(L), backend=v["grid.backend"])

    model = _section("model", lambda: ModelParams(gamma=v["model.gamma"], driver=_driver(v)))
    ic = _section("ic", lambda: _ic(v))
    integrator = _section("integrator", lambda: _integrator(v))
    if integrator.snapshot_times[-1] <= integrator.t_start:
        raise ConfigError("needs a snapshot after t_start", key="integrator.snapshot_times")
    space_weight = _section("weights", lambda: _space_weight(v))
    time_weight = _section("weights", lambda: TimeWeight(
        t0=v["weights.time_t0"], kappa=v["weights.time_kappa"], gamma=v["model.gamma"], s0=v["weights.time_s0"]))

    lo, hi = v["analysis.prw_t_lo"], v["analysis.prw_t_hi"]
    if not lo < hi:
        raise ConfigError(f"prw_t_lo={lo:g} must be below prw_t_hi={hi:g}", key="analysis.prw_t_lo")
    if not v["analysis.temporal_kappa"] >= 1:
        raise ConfigError("must be >= 1", key="analysis.temporal_kappa")
    if v["analysis.peak_prominence"] < 0:
        raise ConfigError("must be >= 0", key="analysis.peak_prominence")
    if not v["analysis.admissibility_horizon"] > 0:
        raise ConfigError("must be positive", key="analysis.admissibility_horizon")
    analysis = AnalysisSettings(
        fit_x_min=v["analysis.fit_x_min"],
        fit_x_max=v["analysis.fit_x_max"],
        fit_families=tuple(v["analysis.fit_families"]),
        fit_times=tuple(v["analysis.fit_times"]),
        temporal_kappa=v["analysis.temporal_kappa"],
        temporal_t_max=v["analysis.temporal_t_max"],
        peak_prominence=v["analysis.peak_prominence"],
        prw_window=(lo, hi),
        admissibility_horizon=v["analysis.admissibility_horizon"],
    )
    if not v["output.dir"]:
        raise ConfigError("must not be empty", key="output.dir")
    output = OutputSettings(dir=v["output.dir"], plots=v["output.plots"], log_scale=v["output.log_scale"])

    resolved = dict(v)
    resolved["grid.N"] = grid.N
    return ExperimentConfig(
        model=model, ic=ic, grid=grid, integrator=integrator,
        space_weight=space_weight, time_weight=time_weight,
        analysis=analysis, output=output, values=resolved, preset=preset,
    )


# ---------------------------------------------------------------------------
# Canonical text
# ---------------------------------------------------------------------------

def format_config(config: ExperimentConfig) -> str:
    """Canonical text: every key, sorted, one ``key = value`` per line."""
    lines = []
    for name in sorted(config.values):
        lines.append(f"{name} = {format_value(KEY_TABLE[name], config.values[name])}")
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical text."""
    return hashlib.sha256(format_config(config).encode("utf-8")).hexdigest()

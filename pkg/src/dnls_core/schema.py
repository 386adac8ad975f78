"""Key table of experiment configuration documents."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class KeyDef:
    name: str
    kind: str  # "float"|"int"|"bool"|"text"|"enum"|"floats"|"names"|"auto"
    default: Any = None
    choices: list[str] = field(default_factory=list)  # for enum and names
    doc: str = ""


DRIVER_KINDS = ["gaussian", "algebraic", "none", "manufactured"]
IC_KINDS = ["algebraic", "sech", "file", "manufactured"]
MMS_FAMILIES = ["gaussian", "sech"]
SPACE_WEIGHTS = ["linear", "quadratic", "gaussian", "unit"]
FIT_FAMILIES = ["linear", "quadratic", "gaussian"]


KEYS: list[KeyDef] = [
    KeyDef("preset", "text", None, doc="preset document applied before the user entries"),
    # model
    KeyDef("model.gamma", "float", 0.01, doc="linear damping"),
    KeyDef("driver.kind", "enum", "gaussian", DRIVER_KINDS),
    KeyDef("driver.Gamma", "float", 1.0, doc="driver amplitude"),
    KeyDef("driver.Theta", "float", math.pi / 4, doc="driver phase"),
    KeyDef("driver.sigma_x", "float", 100.0),
    KeyDef("driver.sigma_t", "float", 0.5),
    KeyDef("driver.t_center", "float", 0.0),
    KeyDef("driver.delta_x", "float", 100.0),
    KeyDef("driver.delta_t", "float", 0.5),
    KeyDef("driver.theta", "float", 0.0, doc="quadratic spatial coefficient of the algebraic driver"),
    KeyDef("driver.omega", "float", 0.0, doc="quadratic temporal coefficient of the algebraic driver"),
    KeyDef("ic.kind", "enum", "algebraic", IC_KINDS),
    KeyDef("ic.path", "text", "", doc="snapshot file for ic.kind = file"),
    KeyDef("mms.family", "enum", "gaussian", MMS_FAMILIES),
    KeyDef("mms.A", "float", 1.0),
    KeyDef("mms.a", "auto", None, doc="temporal frequency; auto = family default"),
    KeyDef("mms.w", "float", 1.0),
    # grid
    KeyDef("grid.L", "float", 500.0, doc="half-length of the domain"),
    KeyDef("grid.N", "auto", None, doc="polynomial degree; auto = 256 * ceil(3L / 256)"),
    KeyDef("grid.backend", "enum", "dense", ["dense", "dct"]),
    # integrator
    KeyDef("integrator.backend", "enum", "explicit", ["explicit", "lawson"]),
    KeyDef("integrator.rel_tol", "float", 1e-8),
    KeyDef("integrator.abs_tol", "float", 1e-8),
    KeyDef("integrator.dt_init", "float", 1e-4),
    KeyDef("integrator.dt_min", "float", 1e-12),
    KeyDef("integrator.dt_max", "auto", None, doc="auto = stability bound of the backend"),
    KeyDef("integrator.max_steps", "int", 50_000_000),
    KeyDef("integrator.blowup_threshold", "float", 1e6),
    KeyDef("integrator.t_start", "float", 0.0),
    KeyDef("integrator.t_end", "float", 6.0),
    KeyDef("integrator.snapshot_dt_event", "float", 0.02, doc="snapshot spacing up to snapshot_event_end"),
    KeyDef("integrator.snapshot_event_end", "float", 6.0),
    KeyDef("integrator.snapshot_dt", "float", 0.5, doc="snapshot spacing after the event window"),
    KeyDef("integrator.snapshot_times", "floats", [], doc="explicit snapshot times; replaces the schedule"),
    # weights
    KeyDef("weights.space", "enum", "linear", SPACE_WEIGHTS),
    KeyDef("weights.x0", "float", 100.0),
    KeyDef("weights.sigma", "float", 100.0),
    KeyDef("weights.x_shift", "float", 0.0),
    KeyDef("weights.time_t0", "float", 2.0),
    KeyDef("weights.time_kappa", "float", 2.0),
    KeyDef("weights.time_s0", "float", 0.0),
    # analysis
    KeyDef("analysis.fit_x_min", "float", 50.0),
    KeyDef("analysis.fit_x_max", "auto", None, doc="auto = L - 0.5"),
    KeyDef("analysis.fit_families", "names", ["gaussian", "quadratic", "linear"], FIT_FAMILIES),
    KeyDef("analysis.fit_times", "floats", [], doc="snapshot times whose support is fitted"),
    KeyDef("analysis.temporal_kappa", "float", 2.0),
    KeyDef("analysis.temporal_t_max", "float", 30.0),
    KeyDef("analysis.peak_prominence", "float", 0.01),
    KeyDef("analysis.prw_t_lo", "float", 0.5),
    KeyDef("analysis.prw_t_hi", "float", 4.0),
    KeyDef("analysis.admissibility_horizon", "float", 1e6),
    # output
    KeyDef("output.dir", "text", "runs"),
    KeyDef("output.plots", "bool", True),
    KeyDef("output.log_scale", "bool", True),
]

KEY_TABLE: dict[str, KeyDef] = {k.name: k for k in KEYS}

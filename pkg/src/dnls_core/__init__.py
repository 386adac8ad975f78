"""dnls-core: Chebyshev simulator and estimate checks for the damped, driven 1D NLS."""

from .specs import (
    FieldState,
    PRWParams,
    GaussianMMS,
    SechMMS,
    GaussianDriver,
    AlgebraicDriver,
    NoDriver,
    ManufacturedDriver,
    ModelParams,
    AlgebraicIC,
    SechIC,
    FileIC,
    ManufacturedIC,
    UnitWeight,
    LinearAbs,
    QuadraticAbs,
    GaussianWeight,
    TimeWeight,
)
from .grid import ChebGrid, build_grid, quadrature, interpolate, resample, derivative
from .model import (
    eval_driver,
    eval_ic,
    eval_prw,
    eval_spatial_weight,
    eval_time_weight,
    mms_forcing,
    mms_solution,
    rhs,
)
from .integrator import IntegratorConfig, Trajectory, integrate
from .simulation import simulate
from .diagnostics import (
    mass,
    weighted_l2,
    weighted_h1,
    functional_J,
    mass_balance_residual,
    weighted_time_balance_residual,
    weighted_space_balance_residual,
    agmon_check,
    bound_constants,
    gronwall_check,
    driver_admissibility,
    certify_run,
)
from .analysis import (
    FitResult,
    PRWEvent,
    SupportMetrics,
    detect_peaks,
    fit_envelope,
    fit_spatial_envelope,
    fit_temporal_envelope,
    characterize_prw_event,
    support_metrics,
)
from .config import ExperimentConfig, parse_config, format_config, config_hash
from .storage import RunRecord, load_run
from .studies import run_experiment, mms_study, convergence_study, sweep
from .errors import (
    DnlsError,
    InvalidArgumentError,
    OutOfDomainError,
    NumericOverflowError,
    StepUnderflowError,
    DegenerateDataError,
    NoEventError,
    ConfigError,
    StorageError,
)

__all__ = [
    # specs
    "FieldState",
    "PRWParams",
    "GaussianMMS",
    "SechMMS",
    "GaussianDriver",
    "AlgebraicDriver",
    "NoDriver",
    "ManufacturedDriver",
    "ModelParams",
    "AlgebraicIC",
    "SechIC",
    "FileIC",
    "ManufacturedIC",
    "UnitWeight",
    "LinearAbs",
    "QuadraticAbs",
    "GaussianWeight",
    "TimeWeight",
    # grid and model
    "ChebGrid",
    "build_grid",
    "quadrature",
    "interpolate",
    "resample",
    "derivative",
    "eval_ic",
    "eval_driver",
    "eval_prw",
    "eval_spatial_weight",
    "eval_time_weight",
    "mms_solution",
    "mms_forcing",
    "rhs",
    # time stepping
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "simulate",
    # diagnostics
    "mass",
    "weighted_l2",
    "weighted_h1",
    "functional_J",
    "mass_balance_residual",
    "weighted_time_balance_residual",
    "weighted_space_balance_residual",
    "agmon_check",
    "bound_constants",
    "gronwall_check",
    "driver_admissibility",
    "certify_run",
    # analysis
    "FitResult",
    "PRWEvent",
    "SupportMetrics",
    "detect_peaks",
    "fit_envelope",
    "fit_spatial_envelope",
    "fit_temporal_envelope",
    "characterize_prw_event",
    "support_metrics",
    # harness
    "ExperimentConfig",
    "parse_config",
    "format_config",
    "config_hash",
    "RunRecord",
    "load_run",
    "run_experiment",
    "mms_study",
    "convergence_study",
    "sweep",
    # errors
    "DnlsError",
    "InvalidArgumentError",
    "OutOfDomainError",
    "NumericOverflowError",
    "StepUnderflowError",
    "DegenerateDataError",
    "NoEventError",
    "ConfigError",
    "StorageError",
]

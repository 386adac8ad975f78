"""Adaptive Dormand-Prince 5(4) integration with snapshot clipping and blow-up detection.

The integrator knows nothing about the NLS: it advances ``y' = f(t, y)`` for a
complex vector ``y``. An optional ``observer(t, y)`` supplies named scalar
columns that are recorded on every accepted step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidArgumentError, NumericOverflowError, StepUnderflowError
from .specs import FieldState


logger = logging.getLogger(__name__)

INTEGRATOR_BACKENDS = ("explicit", "lawson")

Observer = Callable[[float, np.ndarray], Mapping[str, float]]

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# y5 - y4
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
MIN_RATIO = 0.2
MAX_RATIO = 5.0


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegratorConfig:
    """Step control settings. ``dt_max = inf`` lets the caller pick a stability bound."""

    snapshot_times: tuple[float, ...]
    rel_tol: float = 1e-8
    abs_tol: float = 1e-8
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    dt_max: float = math.inf
    max_steps: int = 50_000_000
    blowup_threshold: float = 1e6
    backend: str = "explicit"
    t_start: float = 0.0

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.snapshot_times)
        object.__setattr__(self, "snapshot_times", times)
        if not times:
            raise InvalidArgumentError("snapshot_times must not be empty")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidArgumentError("snapshot_times must be strictly increasing")
        if times[0] < self.t_start:
            raise InvalidArgumentError("snapshot_times must not precede t_start")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidArgumentError("tolerances must be positive")
        if not (0 < self.dt_min <= self.dt_max):
            raise InvalidArgumentError("need 0 < dt_min <= dt_max")
        if not self.dt_init > 0:
            raise InvalidArgumentError("dt_init must be positive")
        if self.max_steps < 1:
            raise InvalidArgumentError("max_steps must be >= 1")
        if not self.blowup_threshold > 0:
            raise InvalidArgumentError("blowup_threshold must be positive")
        if self.backend not in INTEGRATOR_BACKENDS:
            raise InvalidArgumentError(
                f"unknown integrator backend {self.backend!r}; expected one of {INTEGRATOR_BACKENDS}"
            )

    @property
    def t_end(self) -> float:
        return self.snapshot_times[-1]


COMPLETED = "completed"
BLOWUP = "blowup"
BUDGET_EXHAUSTED = "step-budget-exhausted"


@dataclass(eq=False)
class Trajectory:
    """Snapshots at requested times plus dense accepted-step series.

    ``series`` maps column names to arrays of equal length; ``"t"`` is always
    present and strictly increasing.
    """

    snapshots: list[FieldState] = field(default_factory=list)
    series: dict[str, np.ndarray] = field(default_factory=dict)
    status: str = COMPLETED
    status_time: float | None = None
    accepted: int = 0
    rejected: int = 0
    weight: str | None = None

    @property
    def times(self) -> np.ndarray:
        return self.series["t"]

    @property
    def center_series(self) -> np.ndarray:
        """(n, 2) array of (t, |u(0, t)|^2)."""
        return np.column_stack([self.series["t"], self.series["center_density"]])

    @property
    def norm_series(self) -> np.ndarray:
        """(n, 3) array of (t, mass, sup density)."""
        return np.column_stack([self.series["t"], self.series["mass"], self.series["sup_density"]])

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    def snapshot_at(self, t: float) -> FieldState:
        """Snapshot whose time is closest to *t*."""
        if not self.snapshots:
            raise InvalidArgumentError("trajectory has no snapshots")
        return min(self.snapshots, key=lambda s: abs(s.t - t))

    def __str__(self) -> str:
        where = f" at t={self.status_time:g}" if self.status_time is not None else ""
        return (f"Trajectory({self.status}{where}, {len(self.snapshots)} snapshots, "
                f"{self.accepted} accepted / {self.rejected} rejected steps)")


# ---------------------------------------------------------------------------
# Single steps
# ---------------------------------------------------------------------------

def _error_norm(y_new: np.ndarray, err: np.ndarray, rel_tol: float, abs_tol: float) -> float:
    if err.size == 0:
        return 0.0
    return float(np.max(np.abs(err) / (abs_tol + rel_tol * np.abs(y_new))))


def _require_finite(k: np.ndarray, t: float, source: np.ndarray | None = None) -> None:
    if not np.all(np.isfinite(k)):
        overflow = bool(np.any(np.isinf(k))) or (source is not None and not np.all(np.isfinite(source)))
        raise NumericOverflowError(f"non-finite Runge-Kutta stage at t={t:.6g}", overflow=overflow)


def _explicit_stages(f, y, t, dt, k1):
    k = [k1]
    for i in range(1, 7):
        yi = y.copy()
        for aij, kj in zip(_A[i], k):
            if aij != 0.0:
                yi += dt * aij * kj
        ki = np.asarray(f(t + _C[i] * dt, yi))
        _require_finite(ki, t, yi)
        k.append(ki)
    y5 = y.copy()
    for bi, ki in zip(_B5, k):
        if bi != 0.0:
            y5 += dt * bi * ki
    err = np.zeros_like(y5)
    for ei, ki in zip(_E, k):
        if ei != 0.0:
            err += dt * ei * ki
    # last stage is f(t + dt, y5)
    return y5, err, k[6]


def step(f, y, t: float, dt: float, *, rel_tol: float = 1e-8, abs_tol: float = 1e-8):
    """One Dormand-Prince 5(4) step; returns ``(y5, error_estimate)``."""
    if not dt > 0:
        raise InvalidArgumentError(f"step size must be positive, got {dt!r}")
    y = np.asarray(y, dtype=complex)
    k1 = np.asarray(f(t, y))
    _require_finite(k1, t)
    y5, err, _ = _explicit_stages(f, y, t, dt, k1)
    return y5, _error_norm(y5, err, rel_tol, abs_tol)


class _ExplicitStepper:
    def __init__(self, f) -> None:
        self.f = f
        self._k1: np.ndarray | None = None

    def reset(self, t: float, y: np.ndarray) -> None:
        self._k1 = np.asarray(self.f(t, y))
        _require_finite(self._k1, t)

    def attempt(self, t, y, dt):
        y5, err, k_last = _explicit_stages(self.f, y, t, dt, self._k1)
        return y5, err, k_last

    def accept(self, k_last) -> None:
        self._k1 = k_last


class _LawsonStepper:
    """Integrating-factor Dormand-Prince in the eigenbasis of the linear part.

    With v = V^-1 u and u_t = A u + n(t, u), A = V diag(lam) V^-1, the stage
    values are w_i = E(c_i) v + dt * sum_j a_ij E(c_i - c_j) k_j where
    E(c) = exp(lam c dt) and k_j = V^-1 n(t + c_j dt, V w_j).
    """

    def __init__(self, split) -> None:
        self.V = split.modes
        self.Vinv = split.inverse
        self.lam = split.eigenvalues
        self.n = split.nonlinear
        self._k1: np.ndarray | None = None

    def _modal_rhs(self, t, v):
        k = self.Vinv @ np.asarray(self.n(t, self.V @ v))
        _require_finite(k, t, v)
        return k

    def reset(self, t: float, y: np.ndarray) -> None:
        self._k1 = self._modal_rhs(t, self.Vinv @ y)

    def attempt(self, t, y, dt):
        v = self.Vinv @ y
        cache: dict[float, np.ndarray] = {}

        def E(c: float) -> np.ndarray:
            if c not in cache:
                cache[c] = np.exp(self.lam * (c * dt))
            return cache[c]

        k = [self._k1]
        for i in range(1, 7):
            wi = E(_C[i]) * v
            for j, (aij, kj) in enumerate(zip(_A[i], k)):
                if aij != 0.0:
                    wi = wi + dt * aij * E(_C[i] - _C[j]) * kj
            k.append(self._modal_rhs(t + _C[i] * dt, wi))
        v5 = E(1.0) * v
        dv = np.zeros_like(v5)
        for j, (bj, ej, kj) in enumerate(zip(_B5, _E, k)):
            scaled = E(1.0 - _C[j]) * kj
            if bj != 0.0:
                v5 = v5 + dt * bj * scaled
            if ej != 0.0:
                dv = dv + dt * ej * scaled
        return self.V @ v5, self.V @ dv, k[6]

    def accept(self, k_last) -> None:
        self._k1 = k_last


# ---------------------------------------------------------------------------
# Driver loop
# ---------------------------------------------------------------------------

class _Recorder:
    def __init__(self, observer: Observer | None) -> None:
        self.observer = observer
        self.rows: dict[str, list[float]] = {"t": [], "sup_density": []}

    def record(self, t: float, y: np.ndarray) -> float:
        sup = float(np.max(np.abs(y) ** 2)) if y.size else 0.0
        self.rows["t"].append(t)
        self.rows["sup_density"].append(sup)
        if self.observer is not None:
            for name, value in self.observer(t, y).items():
                self.rows.setdefault(name, []).append(float(value))
        return sup

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: np.asarray(values, dtype=float) for name, values in self.rows.items()}


def integrate(
    rhs,
    initial: FieldState,
    config: IntegratorConfig,
    *,
    observer: Observer | None = None,
    split=None,
) -> Trajectory:
    """Integrate from ``initial`` through every snapshot time in ``config``.

    ``split`` (a :class:`~dnls_core.model.LinearSplit`) is required by the
    ``lawson`` backend and ignored by ``explicit``.
    """
    if config.backend == "lawson":
        if split is None:
            raise InvalidArgumentError("the lawson backend needs a linear split of the right-hand side")
        stepper = _LawsonStepper(split)
    else:
        stepper = _ExplicitStepper(rhs)
    if not math.isfinite(config.dt_max):
        config = replace(config, dt_max=max(config.t_end - initial.t, config.dt_min))

    t = float(initial.t)
    y = np.asarray(initial.values, dtype=complex).copy()
    if not np.all(np.isfinite(y)):
        raise NumericOverflowError("initial state is not finite")

    traj = Trajectory()
    recorder = _Recorder(observer)
    pending = [ts for ts in config.snapshot_times if ts >= t]
    if pending and pending[0] == t:
        traj.snapshots.append(FieldState(t, y.copy()))
        pending.pop(0)
    recorder.record(t, y)
    stepper.reset(t, y)

    dt = min(config.dt_init, config.dt_max)
    logger.info("integrating to t=%g (%s backend, %d snapshots)",
                config.t_end, config.backend, len(config.snapshot_times))

    while pending:
        if traj.accepted >= config.max_steps:
            traj.status = BUDGET_EXHAUSTED
            traj.status_time = t
            logger.warning("step budget of %d exhausted at t=%g", config.max_steps, t)
            break
        target = pending[0]
        h = min(dt, config.dt_max, target - t)
        clipped = h >= target - t
        try:
            y_new, err_vec, k_last = stepper.attempt(t, y, h)
            err = _error_norm(y_new, err_vec, config.rel_tol, config.abs_tol)
            finite = bool(np.isfinite(err)) and bool(np.all(np.isfinite(y_new)))
            escaped = (bool(np.any(np.isinf(y_new))) or bool(np.any(np.isinf(err_vec)))
                       or float(np.max(np.abs(y_new) ** 2, initial=0.0)) > config.blowup_threshold)
        except NumericOverflowError as exc:
            finite = False
            escaped = exc.overflow
            err = math.inf

        if finite and err <= 1.0:
            t = target if clipped else t + h
            y = y_new
            stepper.accept(k_last)
            traj.accepted += 1
            sup = recorder.record(t, y)
            if clipped:
                traj.snapshots.append(FieldState(t, y.copy()))
                pending.pop(0)
            if sup > config.blowup_threshold:
                traj.status = BLOWUP
                traj.status_time = t
                logger.warning("sup density %.3g exceeded %.3g at t=%g", sup, config.blowup_threshold, t)
                break
            ratio = MAX_RATIO if err == 0.0 else min(MAX_RATIO, max(MIN_RATIO, SAFETY * err ** -0.2))
            # a clipped step says nothing about the admissible step
            dt = max(dt, h * ratio) if clipped else h * ratio
            continue

        traj.rejected += 1
        if finite:
            ratio = min(1.0, max(MIN_RATIO, SAFETY * err ** -0.2))
        else:
            ratio = MIN_RATIO
            logger.debug("non-finite stage at t=%g, dt=%.3g; shrinking", t, h)
        dt = h * ratio
        if dt < config.dt_min:
            if not finite and escaped:
                traj.status = BLOWUP
                traj.status_time = t
                logger.warning("solution left the representable range at t=%g", t)
                break
            # NaN stages next to a bounded state are a defect of the right-hand side
            cause = "" if finite else " after non-finite stages"
            raise StepUnderflowError(
                f"step size {dt:.3g} fell below dt_min={config.dt_min:.3g}{cause} at t={t:.9g}",
                t=t, dt=dt, state=FieldState(t, y.copy()),
            )

    traj.series = recorder.arrays()
    logger.info("%s", traj)
    return traj

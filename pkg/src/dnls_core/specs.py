"""Value types for dnls-core: states, drivers, initial data and weights.

Each tagged union is a set of frozen dataclasses plus a ``Union`` alias; the
``kind`` class attribute is the name used by configuration files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Union

import numpy as np

from .errors import InvalidArgumentError, NumericOverflowError


def _require_positive(owner: str, **values: float) -> None:
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"{owner}.{name} must be positive and finite, got {value!r}")


def _require_nonnegative(owner: str, **values: float) -> None:
    for name, value in values.items():
        if not (value >= 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"{owner}.{name} must be >= 0 and finite, got {value!r}")


def _fmt(value: float) -> str:
    return f"{value:g}"


# ---------------------------------------------------------------------------
# Field state
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FieldState:
    """Complex field at the interior nodes of a grid at time ``t``."""

    t: float
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1:
            raise InvalidArgumentError("FieldState.values must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise NumericOverflowError(f"non-finite field values at t={self.t:g}")

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def __str__(self) -> str:
        return f"FieldState(t={self.t:g}, n={self.values.size})"


@dataclass(frozen=True)
class PRWParams:
    """Peregrine rogue wave centred at time ``t0`` on background density ``P0``."""

    t0: float
    P0: float

    def __post_init__(self) -> None:
        _require_positive("PRWParams", P0=self.P0)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianMMS:
    """u_m = A e^{iat} exp(-x^2 / 2w^2)."""

    kind: ClassVar[str] = "gaussian"
    A: float = 1.0
    a: float = 0.0
    w: float = 1.0

    def __post_init__(self) -> None:
        _require_positive("GaussianMMS", w=self.w)

    def __str__(self) -> str:
        return f"gaussian-mms(A={_fmt(self.A)}, a={_fmt(self.a)}, w={_fmt(self.w)})"


@dataclass(frozen=True)
class SechMMS:
    """u_m = A e^{iat} sech(x / w)."""

    kind: ClassVar[str] = "sech"
    A: float = 1.0
    a: float = 0.5
    w: float = 1.0

    def __post_init__(self) -> None:
        _require_positive("SechMMS", w=self.w)

    def __str__(self) -> str:
        return f"sech-mms(A={_fmt(self.A)}, a={_fmt(self.a)}, w={_fmt(self.w)})"


MMSFamily = Union[GaussianMMS, SechMMS]


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianDriver:
    kind: ClassVar[str] = "gaussian"
    Gamma: float
    sigma_x: float
    sigma_t: float
    Theta: float = math.pi / 4
    t_center: float = 0.0

    def __post_init__(self) -> None:
        _require_positive("GaussianDriver", Gamma=self.Gamma, sigma_x=self.sigma_x, sigma_t=self.sigma_t)

    def __str__(self) -> str:
        return (f"gaussian(Gamma={_fmt(self.Gamma)}, sigma_x={_fmt(self.sigma_x)}, "
                f"sigma_t={_fmt(self.sigma_t)}, Theta={_fmt(self.Theta)}, t_center={_fmt(self.t_center)})")


@dataclass(frozen=True)
class AlgebraicDriver:
    kind: ClassVar[str] = "algebraic"
    Gamma: float
    delta_x: float
    delta_t: float
    theta: float = 0.0
    omega: float = 0.0
    Theta: float = math.pi / 4

    def __post_init__(self) -> None:
        _require_positive("AlgebraicDriver", Gamma=self.Gamma, delta_x=self.delta_x, delta_t=self.delta_t)
        _require_nonnegative("AlgebraicDriver", theta=self.theta, omega=self.omega)

    def __str__(self) -> str:
        return (f"algebraic(Gamma={_fmt(self.Gamma)}, delta_x={_fmt(self.delta_x)}, "
                f"delta_t={_fmt(self.delta_t)}, theta={_fmt(self.theta)}, omega={_fmt(self.omega)}, "
                f"Theta={_fmt(self.Theta)})")


@dataclass(frozen=True)
class NoDriver:
    kind: ClassVar[str] = "none"

    def __str__(self) -> str:
        return "none"


@dataclass(frozen=True)
class ManufacturedDriver:
    """Forcing that makes ``family`` an exact solution at damping ``gamma``."""

    kind: ClassVar[str] = "manufactured"
    family: MMSFamily
    gamma: float = 0.0

    def __post_init__(self) -> None:
        _require_nonnegative("ManufacturedDriver", gamma=self.gamma)

    def __str__(self) -> str:
        return f"manufactured({self.family}, gamma={_fmt(self.gamma)})"


DriverSpec = Union[GaussianDriver, AlgebraicDriver, NoDriver, ManufacturedDriver]


@dataclass(frozen=True)
class ModelParams:
    gamma: float
    driver: DriverSpec = field(default_factory=NoDriver)

    def __post_init__(self) -> None:
        _require_nonnegative("ModelParams", gamma=self.gamma)
        if isinstance(self.driver, ManufacturedDriver) and self.driver.gamma != self.gamma:
            raise InvalidArgumentError(
                f"manufactured driver built for gamma={self.driver.gamma:g} "
                f"but the model uses gamma={self.gamma:g}"
            )


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraicIC:
    """u0 = 1 / (1 + x^2)."""

    kind: ClassVar[str] = "algebraic"

    def __str__(self) -> str:
        return "algebraic"


@dataclass(frozen=True)
class SechIC:
    """u0 = sech x."""

    kind: ClassVar[str] = "sech"

    def __str__(self) -> str:
        return "sech"


# Sampled initial data must already have decayed at the ends of the domain.
FILE_IC_EDGE_TOLERANCE = 1e-4


@dataclass(frozen=True, eq=False)
class FileIC:
    """Sampled initial data; ``xs`` strictly increasing.

    When ``xs`` are exactly the nodes of the simulation grid the samples are
    used as-is (exact restart); otherwise they are interpolated.
    """

    kind: ClassVar[str] = "file"
    xs: np.ndarray
    values: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
            raise InvalidArgumentError("FileIC needs matching one-dimensional xs and values (>= 2 samples)")
        if np.any(np.diff(xs) <= 0):
            raise InvalidArgumentError("FileIC.xs must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("FileIC.values must be finite")
        edge = max(abs(values[0]), abs(values[-1]))
        if edge >= FILE_IC_EDGE_TOLERANCE:
            raise InvalidArgumentError(
                f"FileIC samples must vanish at the domain ends (|u0| = {edge:.3g} >= {FILE_IC_EDGE_TOLERANCE:g})"
            )
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)

    def __str__(self) -> str:
        return f"file({self.source or f'{self.xs.size} samples'})"


@dataclass(frozen=True)
class ManufacturedIC:
    """u0 = u_m(x, 0) of a manufactured solution."""

    kind: ClassVar[str] = "manufactured"
    family: MMSFamily

    def __str__(self) -> str:
        return f"manufactured({self.family})"


ICSpec = Union[AlgebraicIC, SechIC, FileIC, ManufacturedIC]


# ---------------------------------------------------------------------------
# Spatial weights
# ---------------------------------------------------------------------------

Branch = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class UnitWeight:
    """rho = 1. Not certifying: the decay estimates need |rho'| bounded away from 0."""

    kind: ClassVar[str] = "unit"
    theory_valid: ClassVar[bool] = False

    def rho(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def drho(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def branches(self) -> tuple[Branch, Branch]:
        return self.rho, self.rho

    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class LinearAbs:
    """rho = 1 + |x / x0|."""

    kind: ClassVar[str] = "linear"
    theory_valid: ClassVar[bool] = True
    x0: float

    def __post_init__(self) -> None:
        _require_positive("LinearAbs", x0=self.x0)

    def rho(self, x):
        return 1.0 + np.abs(np.asarray(x, dtype=float) / self.x0)

    def drho(self, x):
        # one-sided value at the kink, so |rho'| = 1/x0 everywhere
        return np.where(np.asarray(x, dtype=float) >= 0.0, 1.0, -1.0) / self.x0

    def branches(self) -> tuple[Branch, Branch]:
        return (lambda x: 1.0 + np.asarray(x) / self.x0,
                lambda x: 1.0 - np.asarray(x) / self.x0)

    def __str__(self) -> str:
        return f"linear(x0={_fmt(self.x0)})"


@dataclass(frozen=True)
class QuadraticAbs:
    """rho = 1 + |x / x0| + (x / x0)^2. Used for envelope fits only."""

    kind: ClassVar[str] = "quadratic"
    theory_valid: ClassVar[bool] = False
    x0: float

    def __post_init__(self) -> None:
        _require_positive("QuadraticAbs", x0=self.x0)

    def rho(self, x):
        s = np.asarray(x, dtype=float) / self.x0
        return 1.0 + np.abs(s) + s**2

    def drho(self, x):
        s = np.asarray(x, dtype=float) / self.x0
        return (np.where(s >= 0.0, 1.0, -1.0) + 2.0 * s) / self.x0

    def branches(self) -> tuple[Branch, Branch]:
        return (lambda x: 1.0 + np.asarray(x) / self.x0 + (np.asarray(x) / self.x0) ** 2,
                lambda x: 1.0 - np.asarray(x) / self.x0 + (np.asarray(x) / self.x0) ** 2)

    def __str__(self) -> str:
        return f"quadratic(x0={_fmt(self.x0)})"


@dataclass(frozen=True)
class GaussianWeight:
    """rho^2 = exp(((x + x_shift) / sigma)^2). Used for envelope fits only."""

    kind: ClassVar[str] = "gaussian"
    theory_valid: ClassVar[bool] = False
    sigma: float
    x_shift: float = 0.0

    def __post_init__(self) -> None:
        _require_positive("GaussianWeight", sigma=self.sigma)

    def rho(self, x):
        s = (np.asarray(x, dtype=float) + self.x_shift) / self.sigma
        return np.exp(0.5 * s**2)

    def drho(self, x):
        s = (np.asarray(x, dtype=float) + self.x_shift) / self.sigma
        return s / self.sigma * np.exp(0.5 * s**2)

    def branches(self) -> tuple[Branch, Branch]:
        return self.rho, self.rho

    def __str__(self) -> str:
        return f"gaussian(sigma={_fmt(self.sigma)}, x_shift={_fmt(self.x_shift)})"


SpatialWeight = Union[UnitWeight, LinearAbs, QuadraticAbs, GaussianWeight]


# ---------------------------------------------------------------------------
# Time weight
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeWeight:
    """phi(t) = (1 + c (t + s0) / t0)^kappa with c = gamma, or c = 1 when ``fitted``.

    ``kappa = 0`` is the degenerate weight phi = 1, accepted so that the
    weighted balance law can be checked against the plain mass balance.
    """

    t0: float
    kappa: float
    gamma: float = 0.0
    s0: float = 0.0
    fitted: bool = False

    def __post_init__(self) -> None:
        _require_positive("TimeWeight", t0=self.t0)
        _require_nonnegative("TimeWeight", gamma=self.gamma)
        if not (self.kappa == 0 or self.kappa >= 1):
            raise InvalidArgumentError(f"TimeWeight.kappa must be >= 1 (or exactly 0), got {self.kappa!r}")

    @classmethod
    def constant(cls) -> "TimeWeight":
        return cls(t0=1.0, kappa=0.0)

    @property
    def rate(self) -> float:
        return 1.0 if self.fitted else self.gamma

    def _base(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -self.s0):
            raise InvalidArgumentError(f"time weight evaluated before t = -s0 = {-self.s0:g}")
        return 1.0 + self.rate * (t + self.s0) / self.t0

    def phi(self, t):
        return self._base(t) ** self.kappa

    def dphi(self, t):
        if self.kappa == 0:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.kappa * self.rate / self.t0 * self._base(t) ** (self.kappa - 1.0)

    def __str__(self) -> str:
        form = "fitted" if self.fitted else f"gamma={_fmt(self.gamma)}"
        return f"time(t0={_fmt(self.t0)}, kappa={_fmt(self.kappa)}, s0={_fmt(self.s0)}, {form})"

"""Chebyshev collocation on [-L, L]: nodes, derivatives, quadrature, interpolation.

The state vector of the solver lives on the N-1 interior nodes; the boundary
values u(±L) are identically zero and are re-attached by :func:`pad` whenever
an operation needs the full nodal vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .errors import InvalidArgumentError, OutOfDomainError


logger = logging.getLogger(__name__)

BACKENDS = ("dense", "dct")

# T_m(0) = cos(m*pi/2) by m mod 4, kept exact
_T_AT_ZERO = np.array([1.0, 0.0, -1.0, 0.0])

# Query points this far (relative to L) outside the domain are clipped, not rejected.
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ChebGrid:
    """Immutable Chebyshev-Gauss-Lobatto grid scaled to [-L, L].

    ``nodes`` descend from +L to -L. ``half_weights`` integrate the degree-N
    interpolant over [0, L]; ``qweights - half_weights`` does the same over
    [-L, 0].
    """

    N: int
    L: float
    nodes: np.ndarray
    D1: np.ndarray
    D2_interior: np.ndarray
    qweights: np.ndarray
    half_weights: np.ndarray
    bary_weights: np.ndarray
    backend: str = "dense"

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def size(self) -> int:
        """Length of an interior state vector."""
        return self.N - 1

    @property
    def left_weights(self) -> np.ndarray:
        return self.qweights - self.half_weights

    def __repr__(self) -> str:
        return f"ChebGrid(N={self.N}, L={self.L:g}, backend={self.backend!r})"


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def build_grid(N: int, L: float, backend: str = "dense") -> ChebGrid:
    """Build the collocation grid of degree *N* on [-L, L]."""
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise InvalidArgumentError(f"grid degree N must be an integer >= 2, got {N!r}")
    if not L > 0 or not np.isfinite(L):
        raise InvalidArgumentError(f"grid half-length L must be positive, got {L!r}")
    if backend not in BACKENDS:
        raise InvalidArgumentError(f"unknown derivative backend {backend!r}; expected one of {BACKENDS}")
    N = int(N)
    L = float(L)

    D1 = _cheb_matrix(N) / L
    arrays = {
        "nodes": L * _cheb_points(N),
        "D1": D1,
        "D2_interior": (D1 @ D1)[1:-1, 1:-1],
        "qweights": L * _clencurt(N),
        "half_weights": L * _half_line_weights(N),
        "bary_weights": _barycentric_weights(N),
    }
    for arr in arrays.values():
        arr.setflags(write=False)
    logger.debug("built Chebyshev grid N=%d L=%g backend=%s", N, L, backend)
    return ChebGrid(N=N, L=L, backend=backend, **arrays)


def _cheb_points(N: int) -> np.ndarray:
    # sin form of cos(j*pi/N): exactly symmetric, exact 0 at j = N/2
    j = np.arange(N + 1)
    return np.sin(np.pi * (N - 2 * j) / (2.0 * N))


def _cheb_matrix(N: int) -> np.ndarray:
    """Standard collocation derivative on [-1, 1] (negative-sum diagonal)."""
    j = np.arange(N + 1)
    c = np.ones(N + 1)
    c[0] = c[N] = 2.0
    c *= (-1.0) ** j
    # x_i - x_j via the product-of-sines identity, free of cancellation
    dX = -2.0 * np.sin(np.pi * (j[:, None] + j[None, :]) / (2.0 * N)) \
        * np.sin(np.pi * (j[:, None] - j[None, :]) / (2.0 * N))
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return D


def _clencurt(N: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1]."""
    theta = np.pi * np.arange(N + 1) / N
    inner = theta[1:-1]
    w = np.zeros(N + 1)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N**2 - 1.0)
        k = np.arange(1, N // 2)
        v -= (2.0 * np.cos(2.0 * np.outer(k, inner)) / (4.0 * k[:, None] ** 2 - 1.0)).sum(axis=0)
        v -= np.cos(N * inner) / (N**2 - 1.0)
    else:
        w[0] = w[N] = 1.0 / N**2
        k = np.arange(1, (N - 1) // 2 + 1)
        v -= (2.0 * np.cos(2.0 * np.outer(k, inner)) / (4.0 * k[:, None] ** 2 - 1.0)).sum(axis=0)
    w[1:-1] = 2.0 * v / N
    return w


def _half_line_weights(N: int) -> np.ndarray:
    """Weights h_j = integral over [0, 1] of the j-th Lagrange basis polynomial."""
    k = np.arange(N + 1)
    moments = np.zeros(N + 1)
    moments[0] = 1.0
    if N >= 1:
        moments[1] = 0.5
    if N >= 2:
        kk = k[2:].astype(float)
        upper = 1.0 / (2.0 * (kk + 1.0)) - 1.0 / (2.0 * (kk - 1.0))
        lower = _T_AT_ZERO[(k[2:] + 1) % 4] / (2.0 * (kk + 1.0)) - _T_AT_ZERO[(k[2:] - 1) % 4] / (2.0 * (kk - 1.0))
        moments[2:] = upper - lower
    cbar = np.ones(N + 1)
    cbar[0] = cbar[N] = 2.0
    cosines = np.cos(np.pi * np.outer(k, k) / N)
    # coefficient map a_k = sum_j 2 cos(jk pi/N) v_j / (N cbar_k cbar_j)
    return (2.0 / (N * cbar)) * ((moments / cbar) @ cosines)


def _barycentric_weights(N: int) -> np.ndarray:
    w = (-1.0) ** np.arange(N + 1)
    w[0] *= 0.5
    w[N] *= 0.5
    return w


# ---------------------------------------------------------------------------
# Quadrature and interpolation
# ---------------------------------------------------------------------------

def quadrature(grid: ChebGrid, values) -> complex | float:
    """Clenshaw-Curtis integral of nodal *values* over [-L, L]."""
    values = np.asarray(values)
    if values.shape != (grid.N + 1,):
        raise InvalidArgumentError(
            f"quadrature expects {grid.N + 1} nodal values, got shape {values.shape}"
        )
    return grid.qweights @ values


def split_quadrature(grid: ChebGrid, right_values, left_values) -> complex | float:
    """Integrate a function given by separate analytic branches on x >= 0 and x <= 0.

    Each branch is sampled at all nodes; the right branch is integrated over
    [0, L] and the left one over [-L, 0], so a kink at x = 0 costs no accuracy.
    """
    right_values = np.asarray(right_values)
    left_values = np.asarray(left_values)
    if right_values.shape != (grid.N + 1,) or left_values.shape != (grid.N + 1,):
        raise InvalidArgumentError("split_quadrature expects two full nodal vectors")
    return grid.half_weights @ right_values + grid.left_weights @ left_values


def interpolation_matrix(grid: ChebGrid, xs) -> np.ndarray:
    """Barycentric resampling matrix from the nodes to the points *xs*."""
    xs = _check_domain(grid, np.atleast_1d(np.asarray(xs, dtype=float)))
    diff = xs[:, None] - grid.nodes[None, :]
    hits = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = grid.bary_weights[None, :] / diff
        P = terms / terms.sum(axis=1, keepdims=True)
    rows = hits.any(axis=1)
    P[rows] = hits[rows].astype(float)
    return P


def interpolate(grid: ChebGrid, values, x_query):
    """Evaluate the interpolant through nodal *values* at *x_query* (scalar or array)."""
    values = np.asarray(values)
    if values.shape != (grid.N + 1,):
        raise InvalidArgumentError(
            f"interpolate expects {grid.N + 1} nodal values, got shape {values.shape}"
        )
    result = interpolation_matrix(grid, x_query) @ values
    if np.ndim(x_query) == 0:
        return result[0]
    return result


def _check_domain(grid: ChebGrid, xs: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(xs)):
        raise OutOfDomainError("interpolation point is not finite")
    outside = np.abs(xs) > grid.L * (1.0 + _DOMAIN_SLACK)
    if np.any(outside):
        bad = xs[outside][0]
        raise OutOfDomainError(f"x={bad:g} lies outside [-{grid.L:g}, {grid.L:g}]")
    return np.clip(xs, -grid.L, grid.L)


def pad(values) -> np.ndarray:
    """Attach the zero Dirichlet boundary values to an interior vector."""
    values = np.asarray(values)
    out = np.zeros(values.size + 2, dtype=np.result_type(values.dtype, float))
    out[1:-1] = values
    return out


def resample(grid: ChebGrid, interior_values, xs):
    """Interpolate an interior state (zero at ±L) onto the points *xs*."""
    interior_values = np.asarray(interior_values)
    if interior_values.shape != (grid.size,):
        raise InvalidArgumentError(
            f"expected {grid.size} interior values, got shape {interior_values.shape}"
        )
    return interpolate(grid, pad(interior_values), xs)


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------

def derivative(grid: ChebGrid, values, order: int = 1) -> np.ndarray:
    """Derivative of the interpolant through nodal *values*, sampled at the nodes."""
    values = np.asarray(values)
    if values.shape != (grid.N + 1,):
        raise InvalidArgumentError(
            f"derivative expects {grid.N + 1} nodal values, got shape {values.shape}"
        )
    if order < 0:
        raise InvalidArgumentError(f"derivative order must be >= 0, got {order}")
    if grid.backend == "dct":
        if np.iscomplexobj(values):
            return (_dct_derivative(values.real, order)
                    + 1j * _dct_derivative(values.imag, order)) / grid.L**order
        return _dct_derivative(values, order) / grid.L**order
    out = values
    for _ in range(order):
        out = grid.D1 @ out
    return out


def apply_d2(grid: ChebGrid, interior_values) -> np.ndarray:
    """Second derivative of an interior state with u(±L) = 0, at the interior nodes."""
    if grid.backend == "dct":
        return derivative(grid, pad(interior_values), 2)[1:-1]
    return grid.D2_interior @ interior_values


def _dct_derivative(values: np.ndarray, order: int) -> np.ndarray:
    N = values.size - 1
    coeffs = dct(values, type=1) / N
    coeffs[0] *= 0.5
    coeffs[N] *= 0.5
    for _ in range(order):
        coeffs = _differentiate_coefficients(coeffs)
    out = dct(coeffs, type=1)
    out += coeffs[0] + coeffs[N] * (-1.0) ** np.arange(N + 1)
    return 0.5 * out


def _differentiate_coefficients(a: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of p' from those of p.

    b_k = (2 / c_k) * sum over m > k with m - k odd of m * a_m, c_0 = 2.
    """
    N = a.size - 1
    s = 2.0 * np.arange(N + 1) * a
    odd = s.copy()
    odd[0::2] = 0.0
    even = s.copy()
    even[1::2] = 0.0
    # suffix sums from the high-order end
    tail_odd = np.append(np.cumsum(odd[::-1])[::-1], 0.0)
    tail_even = np.append(np.cumsum(even[::-1])[::-1], 0.0)
    k = np.arange(N)
    b = np.zeros_like(a)
    b[:N] = np.where(k % 2 == 0, tail_odd[k + 1], tail_even[k + 1])
    b[0] *= 0.5
    return b


def estimate_spectral_radius(grid: ChebGrid, iterations: int = 300, rtol: float = 1e-6) -> float:
    """Spectral radius of D2_interior by power iteration from a fixed start vector."""
    n = grid.size
    j = np.arange(n)
    v = (-1.0) ** j * (1.0 + j / n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for it in range(iterations):
        w = apply_d2(grid, v)
        current = float(np.linalg.norm(w))
        if current == 0.0:
            return 0.0
        v = w / current
        if abs(current - estimate) <= rtol * current:
            logger.debug("power iteration converged after %d steps: %.6g", it + 1, current)
            return current
        estimate = current
    return estimate

"""Independent numerical machinery: RK4 integration, quadrature, finite differences.

Everything here is deterministic and kept separate from the closed forms it is
used to validate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DomainError


@dataclass(frozen=True)
class IntegratorSpec:
    """Fixed-step integrator configuration."""

    h: float
    order: int = 4
    richardson: bool = True

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise DomainError(f"step size must be > 0, got {self.h}")
        if self.order != 4:
            raise DomainError(f"only the order-4 integrator is provided, got {self.order}")


@dataclass(frozen=True)
class GridSpec:
    """Uniform space/time grid for wavefunction evolution."""

    half_width: float
    n_points: int
    dt: float
    n_steps: int | None = None

    def __post_init__(self) -> None:
        if not self.half_width > 0:
            raise DomainError(f"grid half-width must be > 0, got {self.half_width}")
        if self.n_points < 3:
            raise DomainError(f"grid needs at least 3 points, got {self.n_points}")
        if not self.dt > 0:
            raise DomainError(f"time step must be > 0, got {self.dt}")
        if self.n_steps is not None and self.n_steps < 1:
            raise DomainError(f"n_steps must be >= 1, got {self.n_steps}")

    def x(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)


@dataclass(frozen=True)
class Rk4Result:
    times: np.ndarray
    states: np.ndarray
    error_estimate: float | None


def _rk4_run(rhs: Callable, y0: np.ndarray, t0: float, t1: float, n: int) -> np.ndarray:
    h = (t1 - t0) / n
    dim = y0.shape[0]
    states = np.empty((n + 1, dim), dtype=float)
    states[0] = y0
    y = y0.copy()
    for i in range(n):
        t = t0 + i * h
        k1 = np.asarray(rhs(t, y))
        k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1))
        k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2))
        k4 = np.asarray(rhs(t + h, y + h * k3))
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise DomainError(f"integration diverged at t={t + h}")
        states[i + 1] = y
    return states


def rk4_integrate(rhs: Callable, y0, t0: float, t1: float, spec: IntegratorSpec) -> Rk4Result:
    """Classic fixed-step RK4 over [t0, t1].

    Returns the full trajectory. With spec.richardson the run is repeated at
    half the step and the end-state difference is reported as the error
    estimate.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if t1 == t0:
        times = np.array([t0])
        return Rk4Result(times, y0[np.newaxis, :].copy(), 0.0 if spec.richardson else None)
    n = max(1, int(round(abs(t1 - t0) / spec.h)))
    states = _rk4_run(rhs, y0, t0, t1, n)
    times = t0 + (t1 - t0) * np.arange(n + 1) / n
    err = None
    if spec.richardson:
        states_half = _rk4_run(rhs, y0, t0, t1, 2 * n)
        err = float(np.max(np.abs(states_half[-1] - states[-1])))
        states = states_half[::2]
    return Rk4Result(times, states, err)


def quadrature(samples, dx: float, *, edge_rtol: float = 1e-12):
    """Composite Simpson integral of uniformly sampled data.

    The integrand must decay at the grid edges; an edge sample exceeding
    edge_rtol relative to the peak raises instead of silently truncating the
    tails. Requires an odd number of samples.
    """
    y = np.asarray(samples)
    n = y.shape[-1]
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Simpson rule needs an odd sample count >= 3, got {n}")
    mags = np.abs(y)
    peak = float(np.max(mags))
    if peak > 0.0:
        edge = float(max(np.max(mags[..., 0]), np.max(mags[..., -1])))
        if edge > edge_rtol * peak:
            raise DomainError(
                f"integrand does not decay at the grid edges (edge/peak = {edge / peak:.3e}); widen the grid"
            )
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    total = np.tensordot(y, weights, axes=([-1], [0])) * (dx / 3.0)
    if np.ndim(total) == 0:
        total = total.item()
    return total


_STENCILS = {
    (1, 2): 1,
    (1, 4): 2,
    (2, 2): 1,
    (2, 4): 2,
}


def finite_difference(values, h: float, *, axis: int = -1, deriv: int = 1, accuracy: int = 2) -> np.ndarray:
    """Central finite difference along one axis of a uniformly sampled field.

    Returns the derivative on the interior points only; the result is shorter
    than the input by twice the stencil radius along the chosen axis.
    """
    if (deriv, accuracy) not in _STENCILS:
        raise DomainError(f"unsupported stencil (deriv={deriv}, accuracy={accuracy})")
    radius = _STENCILS[(deriv, accuracy)]
    y = np.moveaxis(np.asarray(values), axis, -1)
    if y.shape[-1] < 2 * radius + 1:
        raise DomainError(
            f"need at least {2 * radius + 1} samples for this stencil, got {y.shape[-1]}"
        )
    if deriv == 1 and accuracy == 2:
        out = (y[..., 2:] - y[..., :-2]) / (2.0 * h)
    elif deriv == 1 and accuracy == 4:
        out = (y[..., :-4] - 8.0 * y[..., 1:-3] + 8.0 * y[..., 3:-1] - y[..., 4:]) / (12.0 * h)
    elif deriv == 2 and accuracy == 2:
        out = (y[..., 2:] - 2.0 * y[..., 1:-1] + y[..., :-2]) / (h * h)
    else:
        out = (
            -y[..., :-4] + 16.0 * y[..., 1:-3] - 30.0 * y[..., 2:-2] + 16.0 * y[..., 3:-1] - y[..., 4:]
        ) / (12.0 * h * h)
    return np.moveaxis(out, -1, axis)

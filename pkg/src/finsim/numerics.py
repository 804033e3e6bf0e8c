"""Small numerical kernels: composite Simpson quadrature, fixed-step RK4, central differences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SimulationError
from .timeseries import TimeSeries, uniform_grid

DEFAULT_DT = 1e-3
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class Grid1D:
    lower: float
    upper: float
    n_points: int = 101

    def __post_init__(self):
        if not self.upper > self.lower:
            raise ValueError("Grid1D requires upper > lower")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("Grid1D requires an odd n_points >= 3 (composite Simpson)")

    @property
    def step(self) -> float:
        return (self.upper - self.lower) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.n_points)

    def weights(self) -> np.ndarray:
        return simpson_weights(self.n_points, self.step)


def simpson_weights(n_points: int, step: float) -> np.ndarray:
    """Composite Simpson weights (1, 4, 2, 4, ..., 4, 1) * step / 3."""
    w = np.full(n_points, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (step / 3.0)


def simpson_integrate(f: Callable[[float], float], grid: Grid1D) -> float:
    """Integrate a scalar function over ``grid`` with composite Simpson's rule.

    Exact for polynomials up to degree three. A non-finite sample raises
    :class:`SimulationError` naming the offending abscissa.
    """
    xs = grid.points()
    vals = np.empty_like(xs)
    for i, x in enumerate(xs):
        v = float(f(float(x)))
        if not math.isfinite(v):
            raise SimulationError(f"non-finite integrand {v!r} at x={float(x)!r}")
        vals[i] = v
    return float(grid.weights() @ vals)


@dataclass(frozen=True)
class OdeProblem:
    state_dimension: int
    right_hand_side: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    y0: tuple[float, ...]

    def __post_init__(self):
        if self.state_dimension < 1:
            raise ValueError("state_dimension must be positive")
        if len(self.y0) != self.state_dimension:
            raise ValueError("y0 length must equal state_dimension")


def rk4_step(rhs, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def rk4_integrate(problem: OdeProblem, dt: float, t_end: float) -> TimeSeries:
    """Classical fixed-step RK4, returning the state at every step.

    Channels are ``t_s, y0, y1, ...``. Raises :class:`SimulationError` with the
    time of divergence if the state becomes non-finite.
    """
    t = uniform_grid(problem.t0, t_end, dt)
    ys = np.empty((len(t), problem.state_dimension))
    y = np.asarray(problem.y0, dtype=float)
    ys[0] = y
    for k in range(len(t) - 1):
        y = np.asarray(rk4_step(problem.right_hand_side, t[k], y, dt), dtype=float)
        if not np.all(np.isfinite(y)):
            raise SimulationError("non-finite ODE state", float(t[k + 1]))
        ys[k + 1] = y
    names = ("t_s",) + tuple(f"y{i}" for i in range(problem.state_dimension))
    return TimeSeries(names, np.column_stack([t, ys]))


def central_difference(f: Callable[[float], float], x: float, h: float = DEFAULT_FD_STEP) -> float:
    """(f(x+h) - f(x-h)) / 2h."""
    if not h > 0:
        raise ValueError("h must be positive")
    fp = f(x + h)
    fm = f(x - h)
    if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
        raise SimulationError(f"non-finite evaluation near x={x!r}")
    return (fp - fm) / (2.0 * h)


def wrap_angle(a):
    """Wrap angles to (-pi, pi]."""
    out = math.pi - np.mod(math.pi - np.asarray(a, dtype=float), 2 * math.pi)
    return float(out) if np.ndim(out) == 0 else out

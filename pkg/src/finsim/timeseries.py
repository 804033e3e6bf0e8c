"""Uniformly sampled multi-channel record used as the output of every simulation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SimulationError

TIME_CHANNEL = "t_s"


@dataclass
class TimeSeries:
    """Rows of scalars on a uniform time grid.

    The first channel is always ``t_s``. ``data`` has shape ``(n_rows, n_channels)``.
    """

    channels: tuple[str, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.channels = tuple(self.channels)
        if not self.channels or self.channels[0] != TIME_CHANNEL:
            raise ValueError(f"first channel must be {TIME_CHANNEL!r}")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("duplicate channel names")
        data = np.asarray(self.data, dtype=float)
        if data.size == 0:
            data = data.reshape(0, len(self.channels))
        if data.ndim != 2 or data.shape[1] != len(self.channels):
            raise ValueError(
                f"data shape {data.shape} does not match {len(self.channels)} channels"
            )
        t = data[:, 0]
        if len(t) > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise ValueError("time must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(t[-1]), steps[0]) + 1e-12:
                raise ValueError("time step is not constant")
        self.data = data

    @classmethod
    def from_columns(cls, t, **columns) -> "TimeSeries":
        t = np.asarray(t, dtype=float)
        names = [TIME_CHANNEL]
        cols = [t]
        for name, values in columns.items():
            values = np.broadcast_to(np.asarray(values, dtype=float), t.shape)
            names.append(name)
            cols.append(values)
        return cls(tuple(names), np.column_stack(cols) if len(t) else np.empty((0, len(names))))

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.channels.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def dt(self) -> float:
        if len(self) < 2:
            raise ValueError("time step undefined for fewer than two rows")
        return float(self.t[1] - self.t[0])

    def select(self, *names: str) -> "TimeSeries":
        idx = [0] + [self.channels.index(n) for n in names if n != TIME_CHANNEL]
        return TimeSeries(tuple(self.channels[i] for i in idx), self.data[:, idx])

    def with_columns(self, **columns) -> "TimeSeries":
        extra = {k: np.broadcast_to(np.asarray(v, dtype=float), (len(self),)) for k, v in columns.items()}
        return TimeSeries(
            self.channels + tuple(extra),
            np.column_stack([self.data, *extra.values()]) if extra else self.data,
        )

    def check_finite(self) -> None:
        bad = ~np.isfinite(self.data)
        if np.any(bad):
            row = int(np.argmax(bad.any(axis=1)))
            raise SimulationError("non-finite value in output", float(self.t[row]))


def uniform_grid(t0: float, t_end: float, dt: float) -> np.ndarray:
    """Sample times ``t0 + k*dt`` for k = 0..n, requiring ``dt`` to divide the span."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    span = t_end - t0
    if not span > 0:
        raise ValueError("t_end must exceed t0")
    n = round(span / dt)
    if n < 1 or abs(n * dt - span) > 1e-9 * span:
        raise ValueError(f"dt={dt!r} does not divide the interval {span!r}")
    return t0 + dt * np.arange(n + 1)

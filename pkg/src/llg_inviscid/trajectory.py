"""Uniformly sampled time series of fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral_core import Grid


@dataclass
class Trajectory:
    """Snapshots ``values[m]`` at ``times[m] = m * dt_sample`` on [0, T].

    ``values`` has shape ``(M+1, *grid.shape)`` for complex scalar fields and
    ``(M+1, 3, *grid.shape)`` for sphere fields (``kind == "sphere"``).
    """

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    kind: str = "scalar"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        lead = 2 if self.kind == "sphere" else 1
        if self.values.shape[lead:] != self.grid.shape or self.values.shape[0] != self.times.size:
            raise ValueError(
                f"values shape {self.values.shape} inconsistent with times "
                f"({self.times.size}) and grid {self.grid.shape}"
            )
        if self.times.size > 1:
            steps = np.diff(self.times)
            if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, steps.max()):
                raise ValueError("trajectory times must be uniformly spaced and increasing")

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def dt_sample(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def __getitem__(self, m: int) -> np.ndarray:
        return self.values[m]

    def time_weights(self) -> np.ndarray:
        """Trapezoid weights on the sample times (sum to T)."""
        w = np.full(self.times.size, self.dt_sample)
        if w.size == 1:
            return np.ones(1)
        w[0] = w[-1] = 0.5 * self.dt_sample
        return w

    def with_values(self, values: np.ndarray, **meta) -> "Trajectory":
        return Trajectory(self.grid, self.times.copy(), values, {**self.meta, **meta}, self.kind)

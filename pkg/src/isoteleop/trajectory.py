"""Timestamped joint trajectories (seconds, radians)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class JointTrajectory:
    timestamps: np.ndarray  # (T,) seconds, strictly increasing
    values: np.ndarray  # (T, n) radians

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or ts.ndim != 1 or vals.shape[0] != ts.shape[0]:
            raise ValueError(f"shape mismatch: timestamps {ts.shape}, values {vals.shape}")
        if ts.shape[0] == 0:
            raise ValueError("trajectory must contain at least one sample")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    @property
    def n_joints(self) -> int:
        return self.values.shape[1]

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def duration(self) -> float:
        return float(self.timestamps[-1] - self.timestamps[0])

    def uniform_rate(self, tol: float = 1e-9) -> float:
        """Sample rate in Hz; raises if timestamps are not uniformly spaced."""
        if self.n_samples < 2:
            raise ValueError("rate undefined for a single-sample trajectory")
        dt = np.diff(self.timestamps)
        if np.max(np.abs(dt - dt[0])) > tol:
            raise ValueError("timestamps are not uniformly spaced")
        return 1.0 / float(dt[0])

    def values_at(self, times: np.ndarray) -> np.ndarray:
        """Linear interpolation per joint; edge values hold beyond the ends."""
        times = np.asarray(times, dtype=float)
        out = np.empty((times.shape[0], self.n_joints))
        for j in range(self.n_joints):
            out[:, j] = np.interp(times, self.timestamps, self.values[:, j])
        return out

    def with_values(self, values: np.ndarray) -> "JointTrajectory":
        return JointTrajectory(timestamps=self.timestamps, values=values)


def uniform_timestamps(duration_s: float, rate_hz: float) -> np.ndarray:
    """Grid k/rate for k = 0..round(duration*rate)-1."""
    if rate_hz <= 0:
        raise ValueError("rate must be > 0")
    count = int(round(duration_s * rate_hz))
    if count < 1:
        raise ValueError("duration too short for one sample")
    return np.arange(count) / rate_hz

"""Timestamped simulation output containers.

A :class:`TimeSeries` carries the sampled Bloch expectations plus the
optional cavity phase and photocurrent channels, together with a ``meta``
dict echoing every parameter needed to reproduce the run.  A
:class:`HomodyneRecord` is the per-step stochastic measurement record of a
single diffusive trajectory, including the Wiener increments and the RNG
seed so the run is exactly repeatable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class TimeSeries:
    times: np.ndarray
    jx: np.ndarray | None = None
    jy: np.ndarray | None = None
    jz: np.ndarray | None = None
    phase: np.ndarray | None = None
    current: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("jx", "jy", "jz", "phase", "current"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise ValueError(f"channel {name!r} has length {len(arr)}, expected {n}")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def channels(self) -> dict[str, np.ndarray]:
        """Present channels in canonical column order (absent ones omitted)."""
        out = {"t": self.times}
        for name in ("jx", "jy", "jz", "phase", "current"):
            arr = getattr(self, name)
            if arr is not None:
                out[name] = arr
        return out


@dataclass
class HomodyneRecord:
    times: np.ndarray
    current: np.ndarray
    noise_increments: np.ndarray
    seed: int
    dt: float
    gamma_meas: float

    def __post_init__(self):
        if not (len(self.times) == len(self.current) == len(self.noise_increments)):
            raise ValueError("record arrays must have equal length")

    def noise_is_plausible(self, n_sigma: float = 5.0) -> bool:
        """Sample mean of dW/sqrt(dt) within ``n_sigma`` standard errors of 0."""
        if len(self.noise_increments) == 0:
            return True
        z = self.noise_increments / np.sqrt(self.dt)
        return abs(z.mean()) <= n_sigma / np.sqrt(len(z))

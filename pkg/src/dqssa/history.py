"""Uniform-grid sample store for delayed lookups."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from dqssa import _kernels as K

CHANNELS = ("A_tau", "A_s", "R", "C")


class HistoryLookupError(LookupError):
    """Raised when a lookup would extrapolate past the newest sample."""


class HistoryStore:
    """Samples of the delayed-system channels on the grid ``t0 + i*dt``.

    Times at or before ``t0`` read the constant ``pre0`` value of the
    channel.  Interior times interpolate linearly between neighbouring
    samples.  A provisional sample for the next grid point can be supplied
    to :meth:`lookup`; beyond that nothing is extrapolated.

    The backing array is preallocated (``capacity`` samples) so the compiled
    stepper can write into it directly.
    """

    def __init__(self, dt: float, pre0: Mapping[str, float], capacity: int = 1024,
                 t0: float = 0.0):
        if dt <= 0:
            raise ValueError("dt must be positive")
        missing = set(CHANNELS) - set(pre0)
        if missing:
            raise ValueError(f"pre0 lacks channels {sorted(missing)}")
        self.t0 = float(t0)
        self.dt = float(dt)
        self.pre0 = np.array([float(pre0[c]) for c in CHANNELS])
        self.data = np.zeros((len(CHANNELS), max(int(capacity), 1)))
        self.size = 0

    def __len__(self) -> int:
        return self.size

    @property
    def n(self) -> int:
        """Index of the newest committed sample (-1 when empty)."""
        return self.size - 1

    @property
    def t_last(self) -> float:
        return self.t0 + self.n * self.dt

    def append(self, values: Mapping[str, float] | Sequence[float]) -> None:
        if isinstance(values, Mapping):
            row = [float(values[c]) for c in CHANNELS]
        else:
            row = [float(v) for v in values]
        if self.size == self.data.shape[1]:
            self.data = np.concatenate([self.data, np.zeros_like(self.data)], axis=1)
        self.data[:, self.size] = row
        self.size += 1

    def channel(self, name: str) -> np.ndarray:
        return self.data[CHANNELS.index(name), :self.size]

    def lookup(self, name: str, t: float,
               provisional: Mapping[str, float] | None = None) -> float:
        c = CHANNELS.index(name)
        has_prov = provisional is not None
        prov = np.zeros(len(CHANNELS))
        if has_prov:
            prov[:] = [float(provisional.get(ch, np.nan)) for ch in CHANNELS]
        if self.size == 0 and t > self.t0:
            raise HistoryLookupError(f"empty history, cannot look up t={t}")
        value = K.lookup(self.data, self.n, prov, has_prov, self.pre0, c,
                         float(t) - self.t0, self.dt)
        if np.isnan(value):
            raise HistoryLookupError(
                f"{name} at t={t} lies beyond the newest sample (t={self.t_last})")
        return float(value)

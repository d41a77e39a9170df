"""Time-ordered samples of augmented states plus per-step scalars."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled states with strictly increasing times.

    ``steps`` maps scalar names (``t``, ``dt``, ``rho_min``, ...) to arrays
    holding one entry per time step, the first entry describing t = 0.
    """

    states: tuple
    steps: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ValueError("trajectory is empty")
        t = np.array([s.t for s in self.states])
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("trajectory sample times must be strictly increasing")
        grid = self.states[0].grid
        if any(s.grid != grid for s in self.states):
            raise ValueError("trajectory mixes grids")

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    @property
    def grid(self):
        return self.states[0].grid

    @property
    def mu(self):
        return self.states[0].mu

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    @property
    def initial(self):
        return self.states[0]

    @property
    def final(self):
        return self.states[-1]

    @property
    def rho(self):
        return np.array([s.rho for s in self.states])

    @property
    def m(self):
        return np.array([s.m for s in self.states])

    @property
    def v(self):
        return np.array([s.v for s in self.states])

    @property
    def u(self):
        return np.array([s.u for s in self.states])

"""Uniform node-centred grids on an interval or on a radial half-line [0, R]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gamma, pi

import numpy as np

from .errors import GridMismatchError

# Far state (rho, u, v) = (1, 0, 0) used by farfield ghost nodes.
FAR_DENSITY = 1.0
FAR_VELOCITY = 0.0


def sphere_area(N):
    """Surface measure of the unit sphere in R^N (2 for N=1, 2pi, 4pi)."""
    return 2.0 * pi ** (N / 2.0) / gamma(N / 2.0)


@dataclass(frozen=True)
class Grid:
    """Uniform grid with a boundary policy.

    ``line1d`` grids cover ``[x_min, x_max]``; periodic ones carry ``n_cells``
    nodes ``x_min + i h`` (the right end is identified with the left), farfield
    ones carry ``n_cells + 1`` nodes including both ends.  ``radial`` grids carry
    ``n_cells + 1`` nodes ``r_i = i h`` on ``[0, R_max]`` and are always farfield
    at ``R_max``.

    Ghost values outside a farfield boundary are the far state
    ``(rho, u, v) = (1, 0, 0)``.
    """

    kind: str
    n_cells: int
    x_min: float = 0.0
    x_max: float = 1.0
    N: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.kind not in ("line1d", "radial"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError("n_cells must be an integer >= 2")
        if self.boundary not in ("periodic", "farfield"):
            raise ValueError(f"unknown boundary policy {self.boundary!r}")
        if self.kind == "line1d":
            if self.N != 1:
                raise ValueError("line1d grids require N = 1")
            if not self.x_max > self.x_min:
                raise ValueError("x_max must exceed x_min")
        else:
            if self.N not in (2, 3):
                raise ValueError("radial grids require N in {2, 3}")
            if self.x_min != 0.0:
                raise ValueError("radial grids start at r = 0")
            if not self.x_max > 0.0:
                raise ValueError("R_max must be positive")
            if self.boundary != "farfield":
                raise ValueError("radial grids use the farfield boundary")

    @classmethod
    def line(cls, n_cells, x_min, x_max, boundary="periodic"):
        return cls("line1d", n_cells, float(x_min), float(x_max), 1, boundary)

    @classmethod
    def radial(cls, n_cells, R_max, N):
        return cls("radial", n_cells, 0.0, float(R_max), N, "farfield")

    @property
    def R_max(self):
        return self.x_max

    @property
    def h(self):
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def periodic(self):
        return self.boundary == "periodic"

    @property
    def n_nodes(self):
        return self.n_cells if self.periodic else self.n_cells + 1

    @cached_property
    def x(self):
        """Node coordinates (``r`` for radial grids)."""
        return self.x_min + self.h * np.arange(self.n_nodes)

    @cached_property
    def weights(self):
        """Quadrature weights so that ``sum(f * weights)`` approximates the
        integral of f over the domain in R^N.

        Line grids use ``h``; radial grids use the exact measure of the shell
        ``[r_i - h/2, r_i + h/2]`` (``[0, h/2]`` at the axis).
        """
        if self.kind == "line1d":
            return np.full(self.n_nodes, self.h)
        return sphere_area(self.N) * self.cell_volumes

    @cached_property
    def faces(self):
        """Face radii ``r_{i+1/2}`` for i = 0..n (radial grids)."""
        return self.h * (np.arange(self.n_nodes) + 0.5)

    @cached_property
    def cell_volumes(self):
        """Shell volumes divided by the sphere area: (r_+^N - r_-^N)/N."""
        N = self.N
        upper = self.faces ** N
        lower = np.concatenate(([0.0], upper[:-1]))
        return (upper - lower) / N

    def check(self, *fields):
        """Validate that every field has one value per node."""
        for f in fields:
            if np.shape(f) != (self.n_nodes,):
                raise GridMismatchError(
                    f"field of shape {np.shape(f)} does not match grid with "
                    f"{self.n_nodes} nodes"
                )

    def require(self, kind):
        if self.kind != kind:
            raise GridMismatchError(f"operation requires a {kind} grid, got {self.kind}")

    def sample(self, fn):
        """Evaluate ``fn`` at the nodes."""
        return np.asarray(fn(self.x), dtype=float) * np.ones(self.n_nodes)

    def refine(self, factor=2):
        """Grid with ``factor`` times as many cells on the same domain."""
        return Grid(self.kind, self.n_cells * factor, self.x_min, self.x_max, self.N, self.boundary)

    def to_dict(self):
        return {
            "kind": self.kind,
            "n_cells": self.n_cells,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "N": self.N,
            "boundary": self.boundary,
        }

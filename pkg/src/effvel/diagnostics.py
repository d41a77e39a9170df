"""Energy-type functionals and inequality checks evaluated on trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .caloric import koch_tataru_running
from .operators import gradient
from .state import pressure_potential_Pi


class Functional(NamedTuple):
    value: float
    dissipation: float


@dataclass
class FunctionalSeries:
    name: str
    t: np.ndarray
    values: np.ndarray
    units: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.t.shape != self.values.shape:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError(f"series {self.name}: times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"series {self.name}: non-finite values")


@dataclass
class MonotonicityReport:
    series: str
    max_increase: float
    max_relative_increase: float
    total_increase: float
    tolerance: float
    passed: bool
    worst_index: int
    worst_t: float

    def to_dict(self):
        return {
            "series": self.series,
            "max_increase": self.max_increase,
            "max_relative_increase": self.max_relative_increase,
            "total_increase": self.total_increase,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_index": self.worst_index,
            "worst_t": self.worst_t,
        }


@dataclass
class GrowthReport:
    kind: str
    K: float
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    passed: bool

    @property
    def margin(self):
        return float(np.min(self.rhs - self.lhs))

    def to_dict(self):
        return {"kind": self.kind, "K": self.K, "margin": self.margin, "passed": self.passed,
                "worst_t": float(self.t[int(np.argmin(self.rhs - self.lhs))])}


def _strain_squared(u, grid):
    """|D(u)|^2 for a 1-D or radial irrotational velocity."""
    if grid.kind == "line1d":
        return gradient(u, grid) ** 2
    h = grid.h
    up = np.concatenate(([-u[1]], u, [0.0]))
    du = (up[2:] - up[:-2]) / (2.0 * h)
    hoop = np.empty_like(u)
    hoop[0] = du[0]
    hoop[1:] = u[1:] / grid.x[1:]
    return du**2 + (grid.N - 1) * hoop**2


def energy(state, law):
    """Kinetic plus potential energy relative to the far state, and the
    instantaneous dissipation 2 mu rho |D u|^2 integrated in space."""
    grid, rho = state.grid, state.rho
    u = state.u
    w = grid.weights
    density = 0.5 * rho * u**2 + pressure_potential_Pi(rho, law)
    diss = 2.0 * state.mu * rho * _strain_squared(u, grid)
    return Functional(float(np.sum(density * w)), float(np.sum(diss * w)))


def bd_entropy(state, law):
    """Same functional with the effective velocity v in place of u; the
    dissipation returned is (8 mu / gamma) |grad rho^(gamma/2)|^2."""
    grid, rho, v = state.grid, state.rho, state.v
    w = grid.weights
    density = 0.5 * rho * v**2 + pressure_potential_Pi(rho, law)
    g = gradient(rho ** (law.gamma / 2.0), grid)
    diss = 8.0 * state.mu / law.gamma * g**2
    return Functional(float(np.sum(density * w)), float(np.sum(diss * w)))


def energy_monitor(law):
    return lambda state: energy(state, law).value


def bd_entropy_monitor(law):
    return lambda state: bd_entropy(state, law).value


def density_gradient_from_identity(state):
    """grad rho recovered as (rho v - m) / (2 mu)."""
    return (state.rho * state.v - state.m) / (2.0 * state.mu)


def lipschitz_diagnostic(traj, mu=None, t_min=0.01, T=None):
    """sqrt(t) (|rho|_inf + |grad rho|_inf) at every sample, with grad rho
    taken from the identity grad rho = (rho v - m)/(2 mu).

    ``meta['sup']`` holds the supremum over samples in [t_min, T]."""
    t = traj.times
    vals = []
    for s in traj:
        if mu is not None and mu != s.mu:
            s = s.replace(mu=mu)
        grad = density_gradient_from_identity(s)
        vals.append(np.sqrt(s.t) * (np.max(np.abs(s.rho)) + np.max(np.abs(grad))))
    vals = np.array(vals)
    T = t[-1] if T is None else T
    window = (t >= t_min * (1.0 - 1e-12)) & (t <= T * (1.0 + 1e-12))
    sup = float(np.max(vals[window])) if np.any(window) else float("nan")
    return FunctionalSeries("lipschitz", t, vals, meta={"sup": sup, "t_min": t_min, "T": float(T)})


def sup_norm_series(traj):
    """Bundle of sup-norm series: |rho|, |1/rho|, |v|, sqrt(t)|m|, sqrt(t)|u|."""
    t = traj.times
    rho, v, m, u = traj.rho, traj.v, traj.m, traj.u
    st = np.sqrt(t)
    cols = {
        "rho_max": np.max(np.abs(rho), axis=1),
        "inv_rho_max": np.max(1.0 / rho, axis=1),
        "v_max": np.max(np.abs(v), axis=1),
        "sqrt_t_m_max": st * np.max(np.abs(m), axis=1),
        "sqrt_t_u_max": st * np.max(np.abs(u), axis=1),
    }
    return {name: FunctionalSeries(name, t, vals) for name, vals in cols.items()}


def monotonicity_check(series, tol):
    """Pass iff every increment is at most tol * (1 + |previous value|)."""
    vals = series.values
    if vals.size < 2:
        return MonotonicityReport(series.name, 0.0, 0.0, 0.0, tol, True, -1, float("nan"))
    inc = np.diff(vals)
    rel = inc / (1.0 + np.abs(vals[:-1]))
    k = int(np.argmax(rel))
    passed = bool(np.all(rel <= tol))
    return MonotonicityReport(
        series=series.name,
        max_increase=float(max(np.max(inc), 0.0)),
        max_relative_increase=float(max(rel[k], 0.0)),
        total_increase=float(vals[-1] - vals[0]),
        tolerance=tol,
        passed=passed,
        worst_index=k + 1,
        worst_t=float(series.t[k + 1]),
    )


def step_series(traj, name):
    """Per-step scalar recorded by the solver as a FunctionalSeries."""
    return FunctionalSeries(name, traj.steps["t"], traj.steps[name])


def growth_bound_check(traj, kind, K, law=None):
    """Compare a sup-norm against its growth bound at every sample.

    ``density_4160``: |rho(t)| <= K |rho_0| exp(K sqrt(t) sup_{s<=t} |v(s)|).
    ``veloc_4154``: |v(t)| <= |v_0| + K sqrt(t) |rho|^(gamma-2) |m|_{E_t},
    with |rho| the running sup of the density and |m|_{E_t} the running
    Koch-Tataru norm.
    """
    t = traj.times
    rho_inf = np.max(np.abs(traj.rho), axis=1)
    v_inf = np.max(np.abs(traj.v), axis=1)
    if kind == "density_4160":
        lhs = rho_inf
        rhs = K * rho_inf[0] * np.exp(K * np.sqrt(t) * np.maximum.accumulate(v_inf))
    elif kind == "veloc_4154":
        if law is None:
            raise ValueError("veloc_4154 needs the pressure law")
        _, sup_part, carleson = koch_tataru_running(t, traj.m, traj.grid)
        rho_run = np.maximum.accumulate(rho_inf)
        lhs = v_inf
        rhs = v_inf[0] + K * np.sqrt(t) * rho_run ** (law.gamma - 2.0) * (sup_part + carleson)
    else:
        raise ValueError(f"unknown growth bound {kind!r}")
    return GrowthReport(kind, float(K), t, lhs, rhs, bool(np.all(lhs <= rhs)))

"""Time integration of the augmented system and of the classical 1-D system.

The augmented scheme splits each step into

1. density: theta-implicit diffusion with diffusivity 2 mu and explicit
   conservative upwind transport by v;
2. effective velocity: explicit upwind transport by u, then either the
   enthalpy gradient (1-D) or the exact exponential relaxation towards u
   (radial);
3. closure: m = rho v - 2 mu grad(rho), u = m / rho.

u is never evolved on its own, so the compatibility identity holds exactly at
every step.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DensityFloorError, SolverAbort
from .grid import FAR_DENSITY, FAR_VELOCITY
from .operators import (
    divergence,
    gradient_1d,
    laplacian,
    laplacian_stencil,
    solve_tridiagonal,
    upwind_derivative,
    upwind_flux_divergence,
    weighted_div_grad,
    weighted_laplacian_stencil,
)
from .state import (
    AugmentedState,
    enthalpy_F,
    momentum_from,
    pressure,
    pressure_derivative,
    relaxation_rate,
)
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

VELOCITY_EPS = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    scheme: str = "augmented"
    theta: float = 0.5
    cfl: float = 0.4
    rho_floor: float = 1e-8
    stride: int = 1
    T: float = 1.0
    dt_max: float = 1e-2
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.scheme not in ("augmented", "classical1d"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if not self.T > 0.0:
            raise ValueError("final time T must be positive")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not self.dt_max > 0.0:
            raise ValueError("dt_max must be positive")

    def to_dict(self):
        return asdict(self)


def cfl_dt(state, law, cfg):
    """Advective CFL step, capped by ``cfg.dt_max`` and by the damping bound
    dt * max(a gamma rho^(gamma-1) / (2 mu)) <= 1."""
    speed = max(float(np.max(np.abs(state.u))), float(np.max(np.abs(state.v))))
    dt = cfg.dt_max
    if speed > VELOCITY_EPS:
        dt = min(dt, cfg.cfl * state.grid.h / speed)
    if law.a > 0.0:
        lam = float(np.max(relaxation_rate(state.rho, law, state.mu)))
        dt = min(dt, 1.0 / lam)
    return dt


def step_density(rho, v, dt, mu, grid, theta=0.5):
    """One step of rho_t - 2 mu Delta rho + div(rho v) = 0.

    Solves (I - theta kappa dt L) rho' = (I + (1-theta) kappa dt L) rho
    - dt Div_upwind(rho v) with kappa = 2 mu, written for the increment
    rho' - rho so that steady states are reproduced bit for bit.
    """
    rho = np.asarray(rho, dtype=float)
    kappa = 2.0 * mu
    lower, diag, upper = laplacian_stencil(grid)
    rhs = kappa * dt * laplacian(rho, grid, far=FAR_DENSITY)
    rhs -= dt * upwind_flux_divergence(rho, v, grid)
    c = theta * kappa * dt
    delta = solve_tridiagonal(-c * lower, 1.0 - c * diag, -c * upper, rhs, grid.periodic)
    return rho + delta


def _check_floor(rho, floor, t=None):
    if not np.all(np.isfinite(rho)):
        i = int(np.argmax(~np.isfinite(rho)))
        raise SolverAbort(f"non-finite density at node {i}, t={t}", t=t, node=i)
    i = int(np.argmin(rho))
    if rho[i] < floor:
        raise DensityFloorError(
            f"density {rho[i]:.3e} below floor {floor:g} at node {i}, t={t}",
            t=t, node=i, value=float(rho[i]),
        )


def step_effective_velocity_1d(v, u, rho, dt, law, mu, grid, floor=1e-8):
    """v' = v - dt (u D_upwind v + d/dx F(rho))."""
    grid.require("line1d")
    _check_floor(np.asarray(rho, dtype=float), floor)
    adv = upwind_derivative(v, u, grid, far=FAR_VELOCITY)
    if law.a > 0.0:
        adv = adv + gradient_1d(enthalpy_F(rho, law), grid)
    return np.asarray(v, dtype=float) - dt * adv


def step_effective_velocity_radial(v, u, rho, dt, law, mu, grid, floor=1e-8):
    """Upwind radial transport followed by exact relaxation towards u:
    v' = u + (v_adv - u) exp(-dt a gamma rho^(gamma-1) / (2 mu)), u frozen.

    The update is a nodewise convex combination of v_adv and u."""
    grid.require("radial")
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_floor(rho, floor)
    v_adv = np.asarray(v, dtype=float) - dt * upwind_derivative(v, u, grid, far=FAR_VELOCITY, parity=-1)
    w = np.exp(-dt * relaxation_rate(rho, law, mu))
    return w * v_adv + (1.0 - w) * u


def _step_scalars(t, dt, rho, v, u_used):
    return (t, dt, float(np.min(rho)), float(np.max(rho)),
            float(np.max(np.abs(v))), float(np.max(np.abs(u_used))))


_STEP_NAMES = ("t", "dt", "rho_min", "rho_max", "v_max", "u_max")


def _finish(samples, rows, monitor_rows, monitors, meta):
    steps = {name: np.array(col) for name, col in zip(_STEP_NAMES, zip(*rows))}
    for name in monitors or {}:
        steps[name] = np.array(monitor_rows[name])
    return Trajectory(tuple(samples), steps, meta)


def _evaluate_monitors(monitors, state, store):
    for name, fn in (monitors or {}).items():
        store.setdefault(name, []).append(float(fn(state)))


def solve_augmented(init, law, cfg, monitors=None):
    """Integrate the augmented system from ``init`` to ``cfg.T``.

    ``monitors`` maps names to callables ``state -> float`` evaluated after
    every step (and at t = 0); their values land in ``trajectory.steps``.
    """
    grid = init.grid
    mu = init.mu
    radial = grid.kind == "radial"
    rho = np.array(init.rho)
    v = np.array(init.v)
    state = init
    u = state.u
    t = 0.0
    samples = [init]
    rows = [_step_scalars(0.0, 0.0, rho, v, u)]
    mon = {}
    _evaluate_monitors(monitors, init, mon)
    nstep = 0
    while t < cfg.T:
        dt = cfl_dt(state, law, cfg)
        last = t + dt >= cfg.T * (1.0 - 1e-14)
        if last:
            dt = cfg.T - t
        rho_new = step_density(rho, v, dt, mu, grid, cfg.theta)
        t_new = cfg.T if last else t + dt
        _check_floor(rho_new, cfg.rho_floor, t_new)
        if radial:
            v_new = step_effective_velocity_radial(v, u, rho_new, dt, law, mu, grid, cfg.rho_floor)
        else:
            v_new = step_effective_velocity_1d(v, u, rho_new, dt, law, mu, grid, cfg.rho_floor)
        if not np.all(np.isfinite(v_new)):
            i = int(np.argmax(~np.isfinite(v_new)))
            raise SolverAbort(f"non-finite effective velocity at node {i}, t={t_new}", t=t_new, node=i)
        m_new = momentum_from(rho_new, v_new, mu, grid)
        rows.append(_step_scalars(t_new, dt, rho_new, v_new, u))
        rho, v, t = rho_new, v_new, t_new
        state = AugmentedState(t, rho, m_new, v, mu, grid)
        u = state.u
        _evaluate_monitors(monitors, state, mon)
        nstep += 1
        if nstep % cfg.stride == 0 or last:
            samples.append(state)
        if nstep >= cfg.max_steps and not last:
            raise SolverAbort(f"step limit {cfg.max_steps} reached at t={t}", t=t)
    logger.debug("augmented solve: %d steps to T=%g", nstep, cfg.T)
    return _finish(samples, rows, mon, monitors, {"scheme": "augmented", "steps": nstep})


def classical_dt(rho, u, law, mu, grid, cfg):
    """CFL on |u| + c with c^2 = P'(rho), plus the damping cap of cfl_dt."""
    speed = np.abs(u)
    if law.a > 0.0:
        speed = speed + np.sqrt(pressure_derivative(rho, law))
    smax = float(np.max(speed))
    dt = cfg.dt_max
    if smax > VELOCITY_EPS:
        dt = min(dt, cfg.cfl * grid.h / smax)
    if law.a > 0.0:
        dt = min(dt, 1.0 / float(np.max(relaxation_rate(rho, law, mu))))
    return dt


def solve_classical_1d(rho0, u0, law, cfg, mu, grid, monitors=None):
    """Integrate rho_t + (rho u)_x = 0,
    (rho u)_t + (rho u^2)_x - 2 mu (rho u_x)_x + P(rho)_x = 0 on a line grid.

    Continuity and convective momentum flux are conservative upwind, the
    pressure gradient is central, and the viscous term is theta-implicit with
    rho frozen at the old level in the tridiagonal matrix.  The effective
    velocity is reconstructed afterwards from (rho, u).
    """
    grid.require("line1d")
    rho = np.array(rho0, dtype=float)
    u = np.array(u0, dtype=float)
    grid.check(rho, u)
    _check_floor(rho, cfg.rho_floor, 0.0)
    periodic = grid.periodic
    theta = cfg.theta
    t = 0.0
    state = AugmentedState.from_rho_u(0.0, rho, u, mu, grid)
    samples = [state]
    rows = [_step_scalars(0.0, 0.0, rho, state.v, u)]
    mon = {}
    _evaluate_monitors(monitors, state, mon)
    nstep = 0
    while t < cfg.T:
        dt = classical_dt(rho, u, law, mu, grid, cfg)
        last = t + dt >= cfg.T * (1.0 - 1e-14)
        if last:
            dt = cfg.T - t
        t_new = cfg.T if last else t + dt
        q = rho * u
        rho_new = rho - dt * upwind_flux_divergence(rho, u, grid, far_rho=FAR_DENSITY)
        _check_floor(rho_new, cfg.rho_floor, t_new)
        explicit = upwind_flux_divergence(q, u, grid, far_rho=FAR_VELOCITY)
        if law.a > 0.0:
            explicit = explicit + divergence(pressure(rho, law), grid, far=pressure(np.array([FAR_DENSITY]), law)[0])
        q_star = q - dt * explicit
        if theta < 1.0:
            q_star = q_star + (1.0 - theta) * dt * weighted_div_grad(rho, u, grid, mu)
        lower, diag, upper = weighted_laplacian_stencil(rho, grid)
        c = theta * dt * 2.0 * mu
        u_new = solve_tridiagonal(-c * lower, rho_new - c * diag, -c * upper, q_star, periodic)
        if not np.all(np.isfinite(u_new)):
            i = int(np.argmax(~np.isfinite(u_new)))
            raise SolverAbort(f"non-finite velocity at node {i}, t={t_new}", t=t_new, node=i)
        rows_u = u
        rho, u, t = rho_new, u_new, t_new
        state = AugmentedState.from_rho_u(t, rho, u, mu, grid)
        rows.append(_step_scalars(t, dt, rho, state.v, rows_u))
        _evaluate_monitors(monitors, state, mon)
        nstep += 1
        if nstep % cfg.stride == 0 or last:
            samples.append(state)
        if nstep >= cfg.max_steps and not last:
            raise SolverAbort(f"step limit {cfg.max_steps} reached at t={t}", t=t)
    return _finish(samples, rows, mon, monitors, {"scheme": "classical1d", "steps": nstep})


def solve(init, law, cfg, monitors=None):
    """Dispatch on ``cfg.scheme``."""
    if cfg.scheme == "classical1d":
        return solve_classical_1d(init.rho, init.u, law, cfg, init.mu, init.grid, monitors)
    return solve_augmented(init, law, cfg, monitors)

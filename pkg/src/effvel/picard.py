"""Mild-solution oracle: Picard iteration on the Duhamel form of the
augmented system.

Every iterate is a whole trajectory on a uniform time lattice.  Given iterate
k, the density solves the heat equation with diffusivity 2 mu and the frozen
source -div(rho^k v^k) through the Duhamel formula (midpoint rule in the
semigroup); v is carried along the characteristics of u^k = m^k / rho^k by a
semi-Lagrangian step and then receives the enthalpy gradient (1-D) or the
exact relaxation towards u^k (radial).  The discretisation shares only the
spatial first-derivative stencils with :mod:`effvel.evolution`.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .caloric import heat_semigroup
from .errors import DensityFloorError, PicardNonConvergence
from .grid import FAR_DENSITY, FAR_VELOCITY
from .operators import divergence, gradient_1d
from .state import AugmentedState, DEFAULT_RHO_FLOOR, enthalpy_F, momentum_from, relaxation_rate
from .trajectory import Trajectory

logger = logging.getLogger(__name__)


def default_steps(grid, T):
    return max(32, math.ceil(T / (0.25 * grid.h)))


def characteristic_feet_values(f, u, dt, grid):
    """f evaluated at x - dt u by linear interpolation.

    Periodic lines wrap, farfield lines and the outer radial edge see the far
    value 0, and radial feet below the axis use the odd reflection of f."""
    x = grid.x
    feet = x - dt * u
    if grid.kind == "line1d":
        if grid.periodic:
            L = grid.x_max - grid.x_min
            return np.interp(feet, np.append(x, x[0] + L), np.append(f, f[0]), period=L)
        return np.interp(feet, x, f, left=FAR_VELOCITY, right=FAR_VELOCITY)
    sign = np.where(feet < 0.0, -1.0, 1.0)
    return sign * np.interp(np.abs(feet), x, f, right=FAR_VELOCITY)


def _density_sweep(rho0, src, dt, kappa, grid):
    far_rho = None if grid.periodic else FAR_DENSITY
    far_src = None if grid.periodic else 0.0
    out = np.empty_like(src)
    out[0] = rho0
    for j in range(src.shape[0] - 1):
        out[j + 1] = heat_semigroup(out[j], grid, dt, kappa, far=far_rho) + dt * heat_semigroup(
            0.5 * (src[j] + src[j + 1]), grid, 0.5 * dt, kappa, far=far_src
        )
    return out


def _velocity_sweep(v0, u, rho, dt, law, mu, grid):
    radial = grid.kind == "radial"
    out = np.empty_like(u)
    out[0] = v0
    for j in range(u.shape[0] - 1):
        ubar = 0.5 * (u[j] + u[j + 1])
        v_adv = characteristic_feet_values(out[j], ubar, dt, grid)
        if radial:
            w = np.exp(-dt * relaxation_rate(rho[j + 1], law, mu))
            out[j + 1] = w * v_adv + (1.0 - w) * ubar
        elif law.a > 0.0:
            gF = 0.5 * (gradient_1d(enthalpy_F(rho[j], law), grid)
                        + gradient_1d(enthalpy_F(rho[j + 1], law), grid))
            out[j + 1] = v_adv - dt * gF
        else:
            out[j + 1] = v_adv
    return out


def picard_mild_solve(init, law, T, k_max=20, tol=1e-9, n_steps=None,
                      rho_floor=DEFAULT_RHO_FLOOR):
    """Fixed-point iteration for the mild solution on [0, T].

    Returns a :class:`Trajectory` sampled on the uniform time lattice with
    ``n_steps`` steps (default ``max(32, ceil(T / (h/4)))``).  ``meta`` holds
    the iteration count and the residual history; convergence means the sup
    norm of the change in (rho, v) over the whole trajectory fell below
    ``tol``.

    Raises
    ------
    PicardNonConvergence
        After ``k_max`` iterations without convergence, or when an iterate
        stops being finite.
    DensityFloorError
        When the first iterate, which depends on the data alone, drops below
        ``rho_floor``.  Later breaches are reported as non-convergence.
    """
    if not T > 0.0:
        raise ValueError("horizon T must be positive")
    grid, mu = init.grid, init.mu
    n_steps = default_steps(grid, T) if n_steps is None else int(n_steps)
    dt = T / n_steps
    times = dt * np.arange(n_steps + 1)
    times[-1] = T
    kappa = 2.0 * mu

    rho = np.tile(np.asarray(init.rho), (n_steps + 1, 1))
    v = np.tile(np.asarray(init.v), (n_steps + 1, 1))
    m = np.tile(np.asarray(init.m), (n_steps + 1, 1))
    history = []
    for k in range(1, k_max + 1):
        u = m / rho
        src = -np.array([divergence(r * w, grid) for r, w in zip(rho, v)])
        rho_new = _density_sweep(np.asarray(init.rho), src, dt, kappa, grid)
        if not np.all(np.isfinite(rho_new)):
            raise PicardNonConvergence(f"iterate {k} is not finite", iterations=k, residual=math.inf)
        j, i = np.unravel_index(np.argmin(rho_new), rho_new.shape)
        if rho_new[j, i] < rho_floor and k > 1:
            # later iterates leave the admissible set only when the map is not contracting
            raise PicardNonConvergence(
                f"Picard iterate {k} left the admissible set (density {rho_new[j, i]:.3e} "
                f"at t={times[j]:g}); T={T:g} is too large",
                iterations=k, residual=math.inf,
            )
        if rho_new[j, i] < rho_floor:
            raise DensityFloorError(
                f"Picard iterate {k}: density {rho_new[j, i]:.3e} below floor at t={times[j]:g}",
                t=float(times[j]), node=int(i), value=float(rho_new[j, i]),
            )
        v_new = _velocity_sweep(np.asarray(init.v), u, rho_new, dt, law, mu, grid)
        if not np.all(np.isfinite(v_new)):
            raise PicardNonConvergence(f"iterate {k} is not finite", iterations=k, residual=math.inf)
        residual = float(max(np.max(np.abs(rho_new - rho)), np.max(np.abs(v_new - v))))
        history.append(residual)
        rho, v = rho_new, v_new
        m = np.array([momentum_from(r, w, mu, grid) for r, w in zip(rho, v)])
        logger.debug("picard iteration %d: residual %.3e", k, residual)
        if residual < tol:
            break
        if not math.isfinite(residual) or residual > 1e6:
            raise PicardNonConvergence(
                f"Picard iteration diverged at k={k} (residual {residual:.3e}); T={T:g} is too large",
                iterations=k, residual=residual,
            )
    else:
        raise PicardNonConvergence(
            f"Picard iteration did not converge in {k_max} iterations "
            f"(residual {history[-1]:.3e} > {tol:g}); T={T:g} is too large",
            iterations=k_max, residual=history[-1],
        )
    states = tuple(AugmentedState(float(t), r, mm, w, mu, grid) for t, r, mm, w in zip(times, rho, m, v))
    return Trajectory(states, {"t": times}, {"scheme": "picard", "iterations": len(history),
                                             "residuals": history, "n_steps": n_steps})

"""Discrete differential operators on :class:`~effvel.grid.Grid` nodes.

Fields are plain 1-D numpy arrays with one value per grid node.  Radial scalar
fields are even in r, radial vector components (u_1, v_1, m_1 of ``u_1 e_r``)
are odd; the operators use those symmetries at the axis instead of ghost
extrapolation.  Farfield ghosts take the far value supplied by the caller
(1 for density, 0 for velocities and momenta).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .errors import GridMismatchError, InvalidFieldError, SolverAbort
from .grid import FAR_DENSITY, FAR_VELOCITY

AXIS_TOL = 1e-8


def _as_field(f, grid):
    f = np.asarray(f, dtype=float)
    grid.check(f)
    return f


def _padded(f, grid, far, parity=1):
    """``f`` with one ghost value on each side.

    ``parity`` selects the axis reflection for radial grids (+1 even, -1 odd).
    """
    if grid.periodic:
        return np.concatenate(([f[-1]], f, [f[0]]))
    if grid.kind == "radial":
        return np.concatenate(([parity * f[1]], f, [far]))
    return np.concatenate(([far], f, [far]))


def _check_axis_zero(f, what):
    scale = max(np.max(np.abs(f)), 1.0)
    if abs(f[0]) > AXIS_TOL * scale:
        raise InvalidFieldError(
            f"{what}: radial vector component must vanish at r=0, got {f[0]:.3e}"
        )


# ---------------------------------------------------------------------------
# first derivatives


def gradient_1d(f, grid):
    """Second-order central difference on a line grid.

    Periodic grids wrap; farfield edges use the one-sided second-order
    closure ``(-3 f_0 + 4 f_1 - f_2) / 2h``, written in differences so that
    constants give exactly zero.
    """
    grid.require("line1d")
    f = _as_field(f, grid)
    h = grid.h
    if grid.periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
    g = np.empty_like(f)
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    g[0] = (4.0 * (f[1] - f[0]) - (f[2] - f[0])) / (2.0 * h)
    g[-1] = (4.0 * (f[-1] - f[-2]) - (f[-1] - f[-3])) / (2.0 * h)
    return g


def gradient_radial(f, grid):
    """Radial derivative of an even scalar: zero at the axis, central inside,
    one-sided second order at R_max."""
    grid.require("radial")
    f = _as_field(f, grid)
    h = grid.h
    g = np.empty_like(f)
    g[0] = 0.0
    g[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    g[-1] = (4.0 * (f[-1] - f[-2]) - (f[-1] - f[-3])) / (2.0 * h)
    return g


def gradient(f, grid):
    """d/dx on line grids, d/dr of an even scalar on radial grids."""
    if grid.kind == "line1d":
        return gradient_1d(f, grid)
    return gradient_radial(f, grid)


def _radial_flux_divergence(face_flux, grid):
    """(1/V_i) [r_{i+1/2}^{N-1} F_{i+1/2} - r_{i-1/2}^{N-1} F_{i-1/2}] for
    face fluxes F given at r_{i+1/2}, i = 0..n."""
    area = grid.faces ** (grid.N - 1)
    weighted = area * face_flux
    out = weighted.copy()
    out[1:] -= weighted[:-1]
    return out / grid.cell_volumes


def divergence_radial(f, grid, far=FAR_VELOCITY):
    """Divergence of ``f(r) e_r`` in conservative finite-volume form.

    Faces carry arithmetic averages; each node owns the shell
    ``[r_i - h/2, r_i + h/2]`` so that linear fields are differentiated
    exactly (div x = N).  At the axis this reduces to ``N f_1 / h``, the
    symmetric limit of ``N df/dr(0)``.
    """
    grid.require("radial")
    f = _as_field(f, grid)
    _check_axis_zero(f, "divergence_radial")
    fp = np.concatenate((f, [far]))
    face = 0.5 * (fp[:-1] + fp[1:])
    return _radial_flux_divergence(face, grid)


def divergence(f, grid, far=FAR_VELOCITY):
    """Divergence of a 1-D flux or of a radial vector component."""
    if grid.kind == "radial":
        return divergence_radial(f, grid, far)
    f = _as_field(f, grid)
    fp = _padded(f, grid, far)
    return (fp[2:] - fp[:-2]) / (2.0 * grid.h)


# ---------------------------------------------------------------------------
# second derivatives


def laplacian_stencil(grid):
    """Tridiagonal coefficients ``(lower, diag, upper)`` of the scalar Laplacian.

    ``(L f)_i = lower_i f_{i-1} + diag_i f_i + upper_i f_{i+1}`` where
    out-of-range neighbours are the periodic wrap or the farfield ghost.
    ``lower[0]`` is zero at the radial axis.
    """
    n = grid.n_nodes
    h = grid.h
    if grid.kind == "line1d":
        c = np.full(n, 1.0 / h**2)
        return c.copy(), -2.0 * c, c.copy()
    area = grid.faces ** (grid.N - 1)
    vol = grid.cell_volumes
    upper = area / (h * vol)
    lower = np.zeros(n)
    lower[1:] = area[:-1] / (h * vol[1:])
    return lower, -(lower + upper), upper


def laplacian(f, grid, far=FAR_DENSITY):
    """Scalar Laplacian (1-D second difference or radial finite volume)."""
    f = _as_field(f, grid)
    lower, diag, upper = laplacian_stencil(grid)
    fp = _padded(f, grid, far, parity=1)
    return lower * fp[:-2] + diag * f + upper * fp[2:]


def laplacian_radial_scalar(f, grid, far=FAR_DENSITY):
    """Delta f = f'' + (N-1)/r f' for an even radial scalar.

    Conservative form, exact on quadratics; the axis row equals the regular
    limit ``N f''(0)``.
    """
    grid.require("radial")
    return laplacian(f, grid, far)


def laplacian_radial_vector(u1, grid, far=FAR_VELOCITY):
    """Radial component of the vector Laplacian of ``u_1(r) e_r``:
    u'' + (N-1)/r u' - (N-1)/r^2 u by central differences.

    Exact for u_1 = r and u_1 = r^2; the axis value is the symmetric limit 0.
    """
    grid.require("radial")
    u1 = _as_field(u1, grid)
    _check_axis_zero(u1, "laplacian_radial_vector")
    return weighted_div_grad(np.ones_like(u1), u1, grid, 0.5, far_rho=1.0, far_u=far)


def weighted_div_grad(rho, u, grid, mu, far_rho=FAR_DENSITY, far_u=FAR_VELOCITY):
    """Viscous term ``2 div(mu rho D(u))`` for mu(rho) = mu rho.

    Line grids: ``2 mu d/dx(rho du/dx)`` from face fluxes.  Radial grids: the
    e_r component for an irrotational field,
    ``2 mu [d/dr(rho u') + (N-1) rho/r (u' - u/r)]``, with the first term in
    flux form; for constant rho it is the vector Laplacian.
    """
    rho = _as_field(rho, grid)
    u = _as_field(u, grid)
    h = grid.h
    if grid.kind == "radial":
        _check_axis_zero(u, "weighted_div_grad")
        parity_u = -1
    else:
        parity_u = 1
    rp = _padded(rho, grid, far_rho, parity=1)
    up = _padded(u, grid, far_u, parity=parity_u)
    face_rho = 0.5 * (rp[1:] + rp[:-1])
    flux = face_rho * (up[1:] - up[:-1]) / h
    out = (flux[1:] - flux[:-1]) / h
    if grid.kind == "radial":
        r = grid.x
        du = (up[2:] - up[:-2]) / (2.0 * h)
        hoop = np.zeros_like(u)
        hoop[1:] = (grid.N - 1) * rho[1:] / r[1:] * (du[1:] - u[1:] / r[1:])
        out = out + hoop
        out[0] = 0.0
    return 2.0 * mu * out


def weighted_laplacian_stencil(rho, grid, far_rho=FAR_DENSITY):
    """Tridiagonal coefficients of ``f -> d/dx(rho df/dx)`` on a line grid."""
    grid.require("line1d")
    rp = _padded(np.asarray(rho, dtype=float), grid, far_rho)
    face = 0.5 * (rp[1:] + rp[:-1])
    h2 = grid.h**2
    lower = face[:-1] / h2
    upper = face[1:] / h2
    return lower, -(lower + upper), upper


# ---------------------------------------------------------------------------
# transport


def upwind_derivative(f, u, grid, far=FAR_VELOCITY, parity=-1):
    """``u * df/dx`` (or ``u df/dr``) with the one-sided difference picked
    by the sign of u.  ``parity`` is the axis reflection of f on radial grids."""
    f = _as_field(f, grid)
    u = _as_field(u, grid)
    fp = _padded(f, grid, far, parity=parity)
    back = (fp[1:-1] - fp[:-2]) / grid.h
    fwd = (fp[2:] - fp[1:-1]) / grid.h
    return np.where(u > 0.0, u * back, u * fwd)


def upwind_flux_divergence(rho, v, grid, far_rho=FAR_DENSITY, far_v=FAR_VELOCITY):
    """Conservative upwind ``div(rho v)``: face velocity by averaging, face
    density taken from the upwind node."""
    rho = _as_field(rho, grid)
    v = _as_field(v, grid)
    if grid.kind == "line1d":
        rp = _padded(rho, grid, far_rho)
        vp = _padded(v, grid, far_v)
        vf = 0.5 * (vp[1:] + vp[:-1])
        flux = vf * np.where(vf > 0.0, rp[:-1], rp[1:])
        return (flux[1:] - flux[:-1]) / grid.h
    rp = np.concatenate((rho, [far_rho]))
    vp = np.concatenate((v, [far_v]))
    vf = 0.5 * (vp[:-1] + vp[1:])
    flux = vf * np.where(vf > 0.0, rp[:-1], rp[1:])
    return _radial_flux_divergence(flux, grid)


# ---------------------------------------------------------------------------
# linear algebra


def solve_tridiagonal(lower, diag, upper, rhs, periodic=False):
    """Solve ``lower_i x_{i-1} + diag_i x_i + upper_i x_{i+1} = rhs_i``.

    For periodic systems ``lower[0]`` couples to ``x[-1]`` and ``upper[-1]``
    to ``x[0]``; the corner entries are removed with Sherman-Morrison.
    Otherwise ``lower[0]`` and ``upper[-1]`` are ignored.
    """
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        if not periodic:
            x = solve_banded((1, 1), ab, rhs)
        else:
            # A = B + w z^T with w = (g, 0.., upper[-1]), z = (1, 0.., lower[0]/g)
            g = -diag[0]
            ab[1, 0] -= g
            ab[1, -1] -= upper[-1] * lower[0] / g
            w = np.zeros(n)
            w[0] = g
            w[-1] = upper[-1]
            sol = solve_banded((1, 1), ab, np.column_stack((rhs, w)))
            y, q = sol[:, 0], sol[:, 1]
            zy = y[0] + lower[0] / g * y[-1]
            zq = q[0] + lower[0] / g * q[-1]
            x = y - q * (zy / (1.0 + zq))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverAbort(f"tridiagonal solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverAbort("tridiagonal solve produced non-finite values")
    return x


def apply_tridiagonal(lower, diag, upper, f, periodic=False):
    """Matrix-vector product matching :func:`solve_tridiagonal`."""
    out = diag * f
    out[1:] += lower[1:] * f[:-1]
    out[:-1] += upper[:-1] * f[1:]
    if periodic:
        out[0] += lower[0] * f[-1]
        out[-1] += upper[-1] * f[0]
    return out


def check_same_grid(grid, other):
    if grid != other:
        raise GridMismatchError("fields live on different grids")

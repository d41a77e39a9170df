"""Pressure laws, the augmented state (rho, m, v) and initial-data builders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DensityFloorError, GridMismatchError
from .grid import Grid
from .operators import gradient

DEFAULT_RHO_FLOOR = 1e-8


@dataclass(frozen=True)
class PressureLaw:
    """gamma-law pressure P(rho) = a rho^gamma.

    ``a = 0`` is accepted as the pressureless limit used by the diffusion
    oracles.
    """

    a: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if self.a < 0.0:
            raise ValueError("pressure coefficient a must be nonnegative")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")

    def to_dict(self):
        return {"a": self.a, "gamma": self.gamma}


def _positive(rho, floor=0.0):
    rho = np.asarray(rho, dtype=float)
    bad = ~(rho > floor)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DensityFloorError(
            f"density {rho.flat[i]:.3e} at node {i} is not above {floor:g}",
            node=i,
            value=float(rho.flat[i]),
        )
    return rho


def pressure(rho, law):
    rho = _positive(rho)
    return law.a * rho**law.gamma


def pressure_derivative(rho, law):
    rho = _positive(rho)
    return law.a * law.gamma * rho ** (law.gamma - 1.0)


def enthalpy_F(rho, law):
    """Antiderivative F with F'(rho) = P'(rho)/rho.

    ``a gamma/(gamma-1) rho^(gamma-1)`` for gamma > 1 and ``a ln rho`` for
    gamma = 1.
    """
    rho = _positive(rho)
    if law.gamma == 1.0:
        return law.a * np.log(rho)
    g = law.gamma
    return law.a * g / (g - 1.0) * rho ** (g - 1.0)


def pressure_potential_Pi(rho, law):
    """Pi(rho) - Pi(1) for the far state rho_bar = 1, in closed form."""
    rho = _positive(rho)
    a, g = law.a, law.gamma
    if g == 1.0:
        return a * (rho * np.log(rho) + 1.0 - rho)
    if g == 2.0:
        return a * (rho - 1.0) ** 2
    return a / (g - 1.0) * (rho**g - 1.0 - g * (rho - 1.0))


def relaxation_rate(rho, law, mu):
    """Damping coefficient a gamma rho^(gamma-1) / (2 mu) of the v equation."""
    return law.a * law.gamma * np.asarray(rho, dtype=float) ** (law.gamma - 1.0) / (2.0 * mu)


def effective_velocity(rho, u, mu, grid):
    """v = u + 2 mu grad(rho) / rho."""
    rho = _positive(rho)
    return np.asarray(u, dtype=float) + 2.0 * mu * gradient(rho, grid) / rho


def momentum_from(rho, v, mu, grid):
    """m = rho v - 2 mu grad(rho), i.e. grad(rho) = (rho v - m) / (2 mu)."""
    rho = _positive(rho)
    return rho * np.asarray(v, dtype=float) - 2.0 * mu * gradient(rho, grid)


def velocity_from(rho, m, floor=DEFAULT_RHO_FLOOR):
    rho = _positive(rho, floor)
    return np.asarray(m, dtype=float) / rho


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AugmentedState:
    """Time-stamped triple (rho, m, v) on a grid.

    ``m`` and ``v`` are the 1-D components, or the e_r components on radial
    grids.  Arrays are copied and made read-only on construction.
    """

    t: float
    rho: np.ndarray
    m: np.ndarray
    v: np.ndarray
    mu: float
    grid: Grid

    def __post_init__(self):
        for name in ("rho", "m", "v"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        self.grid.check(self.rho, self.m, self.v)
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.m))
                and np.all(np.isfinite(self.v))):
            raise ValueError("state contains non-finite values")
        _positive(self.rho)

    @classmethod
    def from_rho_v(cls, t, rho, v, mu, grid):
        return cls(t, rho, momentum_from(rho, v, mu, grid), v, mu, grid)

    @classmethod
    def from_rho_u(cls, t, rho, u, mu, grid):
        v = effective_velocity(rho, u, mu, grid)
        return cls(t, rho, np.asarray(rho) * np.asarray(u), v, mu, grid)

    @property
    def u(self):
        return velocity_from(self.rho, self.m)

    def compatibility_residual(self):
        """sup |m - (rho v - 2 mu grad rho)|."""
        ref = momentum_from(self.rho, self.v, self.mu, self.grid)
        return float(np.max(np.abs(self.m - ref)))

    def replace(self, **changes):
        kw = dict(t=self.t, rho=self.rho, m=self.m, v=self.v, mu=self.mu, grid=self.grid)
        kw.update(changes)
        return AugmentedState(**kw)


# ---------------------------------------------------------------------------
# initial data

_PROFILE_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "cosh",
                 "sinh", "abs", "pi", "where", "arctan", "minimum", "maximum")
}


@dataclass(frozen=True)
class Profile:
    """Nodal profile description.

    kind ``piecewise``: ``pieces`` is a list of ``(lo, hi, value)`` covering
    the grid domain; ``expr``: a numpy expression in ``x`` (``r`` on radial
    grids); ``constant``: ``value`` everywhere; ``sampled``: one value per node.
    """

    kind: str
    pieces: tuple = ()
    expr: str = ""
    value: float = 0.0
    values: tuple = ()

    def evaluate(self, grid):
        x = grid.x
        if self.kind == "constant":
            return np.full(grid.n_nodes, float(self.value))
        if self.kind == "expr":
            ns = dict(_PROFILE_NAMESPACE, x=x, r=x)
            out = eval(self.expr, {"__builtins__": {}}, ns)  # noqa: S307 - restricted namespace
            return np.asarray(out, dtype=float) * np.ones(grid.n_nodes)
        if self.kind == "sampled":
            vals = np.asarray(self.values, dtype=float)
            if vals.shape != (grid.n_nodes,):
                raise GridMismatchError(
                    f"sampled profile has {vals.size} values, grid has {grid.n_nodes} nodes"
                )
            return vals.copy()
        if self.kind == "piecewise":
            return self._piecewise(grid)
        raise ConfigError(f"unknown profile kind {self.kind!r}")

    def _piecewise(self, grid):
        pieces = sorted((float(lo), float(hi), float(val)) for lo, hi, val in self.pieces)
        if not pieces:
            raise ConfigError("piecewise profile needs at least one piece")
        for (lo0, hi0, _), (lo1, _, _) in zip(pieces, pieces[1:]):
            if abs(hi0 - lo1) > 1e-12 * max(1.0, abs(hi0)):
                raise ConfigError("piecewise intervals must be contiguous and non-overlapping")
        lo, hi = pieces[0][0], pieces[-1][1]
        x = grid.x
        top = grid.x_max
        if lo > grid.x_min + 1e-12 or hi < top - 1e-12:
            raise ConfigError(
                f"piecewise profile covers [{lo}, {hi}], narrower than the grid "
                f"[{grid.x_min}, {top}]"
            )
        out = np.empty(grid.n_nodes)
        # Left-closed pieces so that a jump at a node takes the right value.
        for plo, phi, val in pieces:
            out[(x >= plo) & (x < phi)] = val
        out[x >= pieces[-1][1]] = pieces[-1][2]
        return out

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "expr":
            return {"kind": "expr", "expr": self.expr}
        if self.kind == "sampled":
            return {"kind": "sampled", "values": list(self.values)}
        return {"kind": "piecewise", "pieces": [list(p) for p in self.pieces]}

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, (int, float)):
            return cls("constant", value=float(d))
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError(f"profile must be a number or an object with 'kind': {d!r}")
        kind = d["kind"]
        if kind == "constant":
            return cls("constant", value=float(d["value"]))
        if kind == "expr":
            return cls("expr", expr=str(d["expr"]))
        if kind == "sampled":
            return cls("sampled", values=tuple(float(x) for x in d["values"]))
        if kind == "piecewise":
            pieces = tuple(tuple(float(x) for x in p) for p in d["pieces"])
            if any(len(p) != 3 for p in pieces):
                raise ConfigError("piecewise pieces are [lo, hi, value] triples")
            return cls("piecewise", pieces=pieces)
        raise ConfigError(f"unknown profile kind {kind!r}")


@dataclass(frozen=True)
class InitialDataSpec:
    density: Profile
    v0: Profile
    mu: float
    law: PressureLaw
    mollify_n: Optional[int] = None
    variant: str = "A"

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ConfigError("viscosity mu must be positive")
        if self.mollify_n is not None and self.mollify_n < 1:
            raise ConfigError("mollification level n must be >= 1")
        if self.variant not in ("A", "B", "C"):
            raise ConfigError(f"unknown mollification variant {self.variant!r}")
        if self.density.kind == "piecewise" and any(p[2] <= 0 for p in self.density.pieces):
            raise ConfigError("density values must be positive")
        if self.density.kind == "constant" and self.density.value <= 0:
            raise ConfigError("density values must be positive")

    def to_dict(self):
        d = {
            "density": self.density.to_dict(),
            "v0": self.v0.to_dict(),
            "mu": self.mu,
            "law": self.law.to_dict(),
        }
        if self.mollify_n is not None:
            d["mollify"] = {"n": self.mollify_n, "variant": self.variant}
        return d


def initial_state(spec, grid):
    """AugmentedState at t = 0, mollified when ``spec.mollify_n`` is set."""
    if spec.mollify_n is not None:
        return mollify_initial_data(spec, grid, spec.mollify_n, spec.variant)
    rho = spec.density.evaluate(grid)
    v = spec.v0.evaluate(grid)
    if grid.kind == "radial":
        v = v.copy()
        v[0] = 0.0
    return AugmentedState.from_rho_v(0.0, rho, v, spec.mu, grid)


# ---------------------------------------------------------------------------
# mollification


def bump(s):
    """Unnormalised bump exp(-1/(1-s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def cutoff(x, n):
    """phi(x/n): smooth, 1 on |x| <= n, 0 on |x| >= 2n."""
    s = np.abs(np.asarray(x, dtype=float)) / n

    def psi(z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    a = psi(2.0 - s)
    b = psi(s - 1.0)
    return a / (a + b)


def _line_kernel_matrix(grid, n):
    """Row-normalised discrete convolution with j_n(x) = n j(n x) on a line."""
    h = grid.h
    half = int(np.ceil(1.0 / (n * h)))
    offsets = np.arange(-half, half + 1)
    w = bump(n * offsets * h)
    if w.sum() == 0.0:
        w = (offsets == 0).astype(float)
    return offsets, w / w.sum()


def _convolve_line(f, grid, n, far):
    offsets, w = _line_kernel_matrix(grid, n)
    m = grid.n_nodes
    out = np.zeros(m)
    for k, wk in zip(offsets, w):
        if grid.periodic:
            out += wk * np.roll(f, -k)
        else:
            idx = np.arange(m) + k
            vals = np.where((idx >= 0) & (idx < m), f[np.clip(idx, 0, m - 1)], far)
            out += wk * vals
    return out


def _radial_kernel_matrix(grid, n, n_angle=64):
    """Discrete N-dimensional convolution of radial functions with j_n.

    Row i integrates j_n(|r_i e_1 - s omega|) over directions omega by
    Gauss-Legendre quadrature and over s with the shell weights; rows are
    normalised to unit mass (far-state padding is accounted for by the
    caller)."""
    N = grid.N
    h = grid.h
    support = 1.0 / n
    extra = int(np.ceil(support / h)) + 1
    s = h * np.arange(grid.n_nodes + extra)
    upper = (h * (np.arange(s.size) + 0.5)) ** N
    vol = (upper - np.concatenate(([0.0], upper[:-1]))) / N
    r = grid.x
    nodes, wts = np.polynomial.legendre.leggauss(n_angle)
    if N == 3:
        # omega parameterised by cos(theta) in [-1, 1]; area element 2 pi d(cos)
        cos_t = nodes
        ang_w = 2.0 * np.pi * wts
    else:
        theta = np.pi * (nodes + 1.0) / 2.0  # [0, pi], doubled for symmetry
        cos_t = np.cos(theta)
        ang_w = 2.0 * (np.pi / 2.0) * wts
    K = np.zeros((r.size, s.size))
    for i, ri in enumerate(r):
        cols = np.flatnonzero(np.abs(s - ri) < support)
        if i == 0:
            # The axis node sees a point, not a shell: evaluate exactly.
            K[0, cols] = bump(n * s[cols]) * vol[cols] * (4.0 * np.pi if N == 3 else 2.0 * np.pi)
            continue
        sc = s[cols][:, None]
        dist = np.sqrt(np.maximum(ri**2 + sc**2 - 2.0 * ri * sc * cos_t[None, :], 0.0))
        K[i, cols] = (bump(n * dist) * ang_w).sum(axis=1) * vol[cols]
    rowsum = K.sum(axis=1)
    tiny = rowsum <= 0.0
    if np.any(tiny):
        K[tiny] = 0.0
        K[tiny, np.flatnonzero(tiny)] = 1.0
        rowsum = K.sum(axis=1)
    return K / rowsum[:, None], extra


def mollify(f, grid, n, far=0.0):
    """j_n * f on the grid with far-state extension beyond farfield edges."""
    f = np.asarray(f, dtype=float)
    if grid.kind == "line1d":
        return _convolve_line(f, grid, n, far)
    K, extra = _radial_kernel_matrix(grid, n)
    fe = np.concatenate((f, np.full(extra, far)))
    return K @ fe


def mollify_initial_data(spec, grid, n, variant="A"):
    """Regularised initial triple at t = 0.

    Variant A: rho^n = phi_n j_n*rho_0 + 1/n, m_{0,1}^n = phi_n j_n*(rho_0 v_0),
    v^n = m_{0,1}^n / rho^n.  Variant B mollifies v_0 directly and sets
    m_{0,1}^n = rho^n v^n.  Variant C mollifies rho_0 - 1 around the far
    state: rho^n = phi_n j_n*(rho_0 - 1) + 1, with m_{0,1}^n and v^n as in A.
    In every case m^n = m_{0,1}^n - 2 mu grad(rho^n).
    """
    if n is None or n < 1:
        raise ConfigError("mollification level n must be >= 1")
    rho0 = spec.density.evaluate(grid)
    v0 = spec.v0.evaluate(grid)
    if grid.kind == "radial":
        v0 = v0.copy()
        v0[0] = 0.0
    _positive(rho0)
    phi = cutoff(grid.x, n)
    if variant == "A":
        rho = phi * mollify(rho0, grid, n, far=1.0) + 1.0 / n
        m01 = phi * mollify(rho0 * v0, grid, n, far=0.0)
        v = m01 / rho
    elif variant == "B":
        rho = phi * mollify(rho0, grid, n, far=1.0) + 1.0 / n
        v = phi * mollify(v0, grid, n, far=0.0)
    elif variant == "C":
        rho = phi * mollify(rho0 - 1.0, grid, n, far=0.0) + 1.0
        m01 = phi * mollify(rho0 * v0, grid, n, far=0.0)
        v = m01 / rho
    else:
        raise ConfigError(f"unknown mollification variant {variant!r}")
    if grid.kind == "radial":
        v[0] = 0.0
    return AugmentedState.from_rho_v(0.0, rho, v, spec.mu, grid)

"""Heat semigroup and heat-extension (caloric) norms.

The sup over (x, t) in every norm is taken over grid nodes and over a
geometric time ladder ``t_j = T q^j``; it is therefore a lower bound for the
continuous supremum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import i0e

from .grid import FAR_VELOCITY, sphere_area
from .operators import divergence, gradient_radial

KERNEL_CUTOFF_SIGMAS = 8.0
SUBLADDER_EXTRA_RUNGS = 8
GAUSS_POINTS = 4


@dataclass(frozen=True)
class CaloricConfig:
    T: float = 1.0
    q: float = 0.5
    J: int = 20

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("ladder ratio q must lie in (0, 1)")
        if self.J < 8:
            raise ValueError("ladder needs J >= 8 rungs")
        if not self.T > 0.0:
            raise ValueError("horizon T must be positive")

    def ladder(self):
        return self.T * self.q ** np.arange(self.J + 1)

    def to_dict(self):
        return {"T": self.T, "q": self.q, "J": self.J}


@dataclass
class NormReport:
    name: str
    value: float
    components: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0.0:
            raise ValueError(f"norm {self.name} has invalid value {self.value}")

    def to_dict(self):
        return {
            "name": self.name,
            "value": float(self.value),
            "components": {k: _jsonable(v) for k, v in self.components.items()},
            "config": dict(self.config),
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


# ---------------------------------------------------------------------------
# heat semigroup


def _default_far(f, grid):
    if grid.kind == "radial":
        return float(f[-1])
    return 0.5 * float(f[0] + f[-1])


def _wavenumbers(n, length):
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)


@lru_cache(maxsize=64)
def _line_kernel(grid, t, kappa):
    D = 4.0 * kappa * t
    sigma = np.sqrt(2.0 * kappa * t)
    h = grid.h
    reach = int(np.ceil(KERNEL_CUTOFF_SIGMAS * sigma / h)) + 1
    k = np.arange(-reach, reach + 1)
    lattice = np.exp(-((k * h) ** 2) / D)
    norm = lattice.sum()
    x = grid.x
    diff = x[:, None] - x[None, :]
    K = np.exp(-(diff**2) / D)
    K[np.abs(diff) > KERNEL_CUTOFF_SIGMAS * sigma + h] = 0.0
    K /= norm
    K.setflags(write=False)
    return K


def _radial_angular_kernel(r, s, D, N):
    """Sphere average of the heat kernel: integral over |y| = s directions of
    G(r e_1 - y), per unit s^{N-1} ds."""
    gap = np.exp(-((r - s) ** 2) / D)
    if N == 3:
        x = 4.0 * r * s / D
        phi = np.where(x > 1e-12, -np.expm1(-x) / np.where(x > 1e-12, x, 1.0), 1.0 - x / 2.0)
        return (np.pi * D) ** -1.5 * 4.0 * np.pi * gap * phi
    return (np.pi * D) ** -1.0 * 2.0 * np.pi * gap * i0e(2.0 * r * s / D)


@lru_cache(maxsize=64)
def _radial_kernel(grid, t, kappa):
    D = 4.0 * kappa * t
    sigma = np.sqrt(2.0 * kappa * t)
    h, N = grid.h, grid.N
    n_ext = grid.n_nodes + int(np.ceil(KERNEL_CUTOFF_SIGMAS * sigma / h)) + 1
    s = h * np.arange(n_ext)
    upper = (h * (np.arange(n_ext) + 0.5)) ** N
    vol = (upper - np.concatenate(([0.0], upper[:-1]))) / N
    r = grid.x
    A = _radial_angular_kernel(r[:, None], s[None, :], D, N) * vol[None, :]
    A[np.abs(r[:, None] - s[None, :]) > KERNEL_CUTOFF_SIGMAS * sigma + h] = 0.0
    A /= A.sum(axis=1, keepdims=True)
    K = np.ascontiguousarray(A[:, : grid.n_nodes])
    K.setflags(write=False)
    return K


def heat_semigroup(f, grid, t, kappa=1.0, far=None):
    """e^{kappa t Delta} f.

    Periodic grids use the exact Fourier multiplier exp(-kappa k^2 t).
    Farfield grids convolve ``f - far`` with the Gaussian kernel (truncated at
    8 standard deviations, rows normalised to unit lattice mass) and add the
    far value back; ``far`` defaults to the boundary value of ``f``.
    On radial grids f is treated as an even scalar.
    """
    if t < 0.0:
        raise ValueError("heat semigroup needs t >= 0")
    if kappa <= 0.0:
        raise ValueError("diffusivity must be positive")
    f = np.asarray(f, dtype=float)
    grid.check(f)
    if t == 0.0:
        return f.copy()
    if grid.periodic:
        n = grid.n_nodes
        k = _wavenumbers(n, grid.x_max - grid.x_min)
        return np.fft.irfft(np.fft.rfft(f) * np.exp(-kappa * k**2 * t), n)
    if far is None:
        far = _default_far(f, grid)
    K = _radial_kernel(grid, float(t), float(kappa)) if grid.kind == "radial" \
        else _line_kernel(grid, float(t), float(kappa))
    return K @ (f - far) + far


def heat_semigroup_vector(f, grid, t, kappa=1.0):
    """Heat flow of a vector field: identical to :func:`heat_semigroup` on
    line grids; on radial grids ``f e_r`` is written as the gradient of the
    potential ``int_0^r f`` and the scalar flow is applied to the potential."""
    if grid.kind != "radial":
        return heat_semigroup(f, grid, t, kappa, far=FAR_VELOCITY if not grid.periodic else None)
    f = np.asarray(f, dtype=float)
    grid.check(f)
    if t == 0.0:
        return f.copy()
    h = grid.h
    pot = np.concatenate(([0.0], np.cumsum(0.5 * h * (f[1:] + f[:-1]))))
    heated = heat_semigroup(pot, grid, t, kappa, far=pot[-1])
    return gradient_radial(heated, grid)


# ---------------------------------------------------------------------------
# ball integrals


def _ball_periodic(g, grid, radius):
    """Integral of g over [x_i - radius, x_i + radius] for the periodic
    extension of the trigonometric interpolant of g."""
    n = grid.n_nodes
    k = _wavenumbers(n, grid.x_max - grid.x_min)
    mult = np.empty_like(k)
    mult[0] = 2.0 * radius
    mult[1:] = 2.0 * np.sin(k[1:] * radius) / k[1:]
    return np.fft.irfft(np.fft.rfft(g) * mult, n)


def _ball_line_farfield(g, grid, radius, g_far=0.0):
    x = grid.x
    h = grid.h
    cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (g[1:] + g[:-1]))))

    def C(y):
        inside = np.interp(y, x, cum)
        below = np.minimum(y - x[0], 0.0) * g_far
        above = np.maximum(y - x[-1], 0.0) * g_far
        return inside + below + above

    return C(x + radius) - C(x - radius)


def _ball_fraction_radial(grid, radius):
    """Matrix F[i, j]: fraction of the sphere |y| = r_j inside B(r_i e_1, radius)."""
    N = grid.N
    r = grid.x
    X = r[:, None]
    S = r[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = (S**2 + X**2 - radius**2) / (2.0 * S * X)
    c0 = np.clip(np.nan_to_num(c0, nan=1.0, posinf=1.0, neginf=-1.0), -1.0, 1.0)
    if N == 3:
        frac = (1.0 - c0) / 2.0
    else:
        frac = np.arccos(c0) / np.pi
    full = S <= radius - X
    empty = (S >= X + radius) | (S <= X - radius)
    frac = np.where(full, 1.0, np.where(empty, 0.0, frac))
    return frac


def ball_integrals(g, grid, radius):
    """Integral of the nonnegative density ``g`` over B(x_i, radius) for every
    node x_i (balls in R^N for radial grids; g vanishes beyond farfield edges)."""
    g = np.asarray(g, dtype=float)
    if grid.periodic:
        return _ball_periodic(g, grid, radius)
    if grid.kind == "line1d":
        return _ball_line_farfield(g, grid, radius)
    frac = _ball_fraction_radial(grid, radius)
    return frac @ (g * grid.weights)


def squared(f, grid):
    f = np.asarray(f, dtype=float)
    return f * f


def _gauss_subladder(cfg):
    """Quadrature nodes/weights in s over [0, T]: Gauss-Legendre on each
    geometric interval [T q^{i+1}, T q^i], i = 0..J+7, trapezoid on the last
    sliver [0, T q^{J+8}].  Returns nodes, weights and, for each node, the
    index of the first ladder rung it lies below."""
    gx, gw = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    n_int = cfg.J + SUBLADDER_EXTRA_RUNGS
    edges = cfg.T * cfg.q ** np.arange(n_int + 1)
    nodes, weights, interval = [], [], []
    for i in range(n_int):
        hi, lo = edges[i], edges[i + 1]
        nodes.extend(lo + (hi - lo) * (gx + 1.0) / 2.0)
        weights.extend((hi - lo) / 2.0 * gw)
        interval.extend([i] * GAUSS_POINTS)
    s_min = edges[-1]
    nodes.extend([0.0, s_min])
    weights.extend([s_min / 2.0, s_min / 2.0])
    interval.extend([n_int, n_int])
    return np.array(nodes), np.array(weights), np.array(interval)


def bmo_inv_norm(m0, grid, cfg=None, vector=True):
    """Discrete bmo^{-1} norm

        sup_{x, t<=T} ( t^{-N/2} int_0^t int_{B(x, sqrt t)} |e^{s Delta} m0|^2 dy ds )^{1/2}

    with the sup over nodes and the ladder ``cfg.ladder()``.  The s-integral
    uses 4-point Gauss-Legendre on every geometric interval down to 8 rungs
    below the smallest t.  On radial grids ``m0`` is the e_r component of a
    vector field when ``vector`` is true.
    """
    cfg = cfg or CaloricConfig()
    m0 = np.asarray(m0, dtype=float)
    grid.check(m0)
    N = grid.N
    ladder = cfg.ladder()
    if ladder.size == 0:
        raise ValueError("empty time ladder")
    nodes, weights, interval = _gauss_subladder(cfg)
    n_int = cfg.J + SUBLADDER_EXTRA_RUNGS
    # Accumulated s-integral of |e^{s Delta} m0|^2 over each geometric interval.
    per_interval = np.zeros((n_int + 1, grid.n_nodes))
    flow = heat_semigroup_vector
    for s, w, i in zip(nodes, weights, interval):
        heated = flow(m0, grid, s) if vector else heat_semigroup(m0, grid, s, far=FAR_VELOCITY)
        per_interval[i] += w * squared(heated, grid)
    # Integral from 0 up to ladder rung j = sum over intervals i >= j.
    tail = np.cumsum(per_interval[::-1], axis=0)[::-1]
    best, arg_t, arg_x = 0.0, 0.0, 0.0
    for j, t in enumerate(ladder):
        vals = t ** (-N / 2.0) * ball_integrals(tail[j], grid, np.sqrt(t))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg_t, arg_x = float(vals[i]), float(t), float(grid.x[i])
    return NormReport(
        "bmo_inv",
        float(np.sqrt(max(best, 0.0))),
        {"argmax_t": arg_t, "argmax_x": arg_x},
        cfg.to_dict(),
    )


# ---------------------------------------------------------------------------
# Koch-Tataru solution norm


def _check_times(times):
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("trajectory is empty")
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("trajectory times must be strictly increasing")
    pos = times[times > 0.0]
    if pos.size > 1 and np.any(pos[1:] / pos[:-1] > 2.0 + 1e-12):
        warnings.warn("sample times grow by more than a factor 2; "
                      "Koch-Tataru sup may be under-resolved", RuntimeWarning, stacklevel=3)
    return times


def koch_tataru_running(times, fields, grid, T=None):
    """Running Koch-Tataru components at every sample time.

    Returns ``(times, sup_part, carleson_part)`` where entry k is the value of
    each component with the horizon set to ``times[k]``.  The time integral is
    the trapezoid rule over the samples.
    """
    times = _check_times(times)
    fields = np.asarray(fields, dtype=float)
    if T is not None:
        keep = times <= T * (1.0 + 1e-12)
        times, fields = times[keep], fields[keep]
    N = grid.N
    sup_inst = np.sqrt(times) * np.max(np.abs(fields), axis=1)
    carl_inst = np.zeros(times.size)
    acc = np.zeros(grid.n_nodes)
    prev = squared(fields[0], grid)
    for k in range(1, times.size):
        cur = squared(fields[k], grid)
        acc = acc + 0.5 * (times[k] - times[k - 1]) * (prev + cur)
        prev = cur
        t = times[k]
        if t <= 0.0:
            continue
        vals = t ** (-N / 2.0) * ball_integrals(acc, grid, np.sqrt(t))
        carl_inst[k] = max(float(np.max(vals)), 0.0)
    sup_part = np.maximum.accumulate(sup_inst)
    carleson = np.sqrt(np.maximum.accumulate(carl_inst))
    return times, sup_part, carleson


def koch_tataru_norm(traj, T=None, field_name="m"):
    """Koch-Tataru norm ``sup_t sqrt(t) |m(t)|_inf + (Carleson sup)^{1/2}``
    of a trajectory field over (0, T]."""
    times = traj.times
    fields = getattr(traj, field_name)
    T = float(times[-1]) if T is None else T
    return koch_tataru_from_samples(times, fields, traj.grid, T, name=f"E_T[{field_name}]")


def koch_tataru_from_samples(times, fields, grid, T, name="E_T"):
    _, sup_part, carleson = koch_tataru_running(times, fields, grid, T)
    s, c = float(sup_part[-1]), float(carleson[-1])
    return NormReport(name, s + c, {"sup_part": s, "carleson_part": c}, {"T": T})


# ---------------------------------------------------------------------------
# Besov-type proxies


def caloric_besov_proxy(f, grid, order, cfg=None):
    """Heat-extension surrogates for Besov norms.

    order -1: sup_t t^{1/2} |e^{t Delta} f|_inf.
    order +1: sup_t t^{-1/2} |(e^{t Delta} - Id) f|_inf.
    Both are proxies, not the Littlewood-Paley norms.
    """
    if order not in (-1, 1):
        raise ValueError(f"unsupported order {order}; use -1 or +1")
    cfg = cfg or CaloricConfig()
    f = np.asarray(f, dtype=float)
    best, arg = 0.0, 0.0
    for t in cfg.ladder():
        heated = heat_semigroup(f, grid, t)
        if order == -1:
            val = np.sqrt(t) * np.max(np.abs(heated))
        else:
            val = np.max(np.abs(heated - f)) / np.sqrt(t)
        if val > best:
            best, arg = float(val), float(t)
    return NormReport(f"besov_proxy[{order:+d}]", best, {"argmax_t": arg}, cfg.to_dict())


# ---------------------------------------------------------------------------
# bilinear Duhamel term


def bilinear_duhamel(times, m_fields, v_fields, grid, kappa=1.0):
    """B(m, v)(t) = int_0^t e^{kappa (t-s) Delta} div(v m)(s) ds at the sample
    times, by the midpoint rule in the semigroup with endpoint-averaged
    integrands (line grids)."""
    grid.require("line1d")
    times = _check_times(times)
    m_fields = np.asarray(m_fields, dtype=float)
    v_fields = np.asarray(v_fields, dtype=float)
    src = np.array([divergence(v * m, grid) for m, v in zip(m_fields, v_fields)])
    out = np.zeros_like(m_fields)
    for k in range(1, times.size):
        dt = times[k] - times[k - 1]
        out[k] = heat_semigroup(out[k - 1], grid, dt, kappa, far=0.0) + dt * heat_semigroup(
            0.5 * (src[k - 1] + src[k]), grid, dt / 2.0, kappa, far=0.0
        )
    return out


def bilinear_ratio(times, m_fields, v_fields, grid, T=None):
    """|B(m, v)|_{E_T} / (|m|_{E_T} |v|_inf) for sampled m, v."""
    T = float(times[-1]) if T is None else T
    B = bilinear_duhamel(times, m_fields, v_fields, grid)
    nb = koch_tataru_from_samples(times, B, grid, T).value
    nm = koch_tataru_from_samples(times, m_fields, grid, T).value
    vmax = float(np.max(np.abs(v_fields)))
    if nm == 0.0 or vmax == 0.0:
        return 0.0
    return nb / (nm * vmax)


def surface_constant(N):
    return sphere_area(N)

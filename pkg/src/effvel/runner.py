"""Config-driven experiments: single runs, convergence ladders and the
cross-solver oracle comparison.  All outputs are deterministic except the
wall time recorded in ``manifest.json``."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .caloric import bmo_inv_norm, caloric_besov_proxy, koch_tataru_norm
from .diagnostics import (
    bd_entropy_monitor,
    energy_monitor,
    growth_bound_check,
    lipschitz_diagnostic,
    monotonicity_check,
    step_series,
    sup_norm_series,
)
from .errors import DensityFloorError, PicardNonConvergence, SolverAbort
from .evolution import solve, solve_augmented
from .picard import picard_mild_solve
from .state import initial_state

logger = logging.getLogger(__name__)

MONOTONE_TOL = 1e-6


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time_s: float
    files: dict = field(default_factory=dict)
    status: str = "ok"

    def to_dict(self):
        return {"config": self.config, "version": self.version, "status": self.status,
                "wall_time_s": self.wall_time_s, "files": dict(sorted(self.files.items()))}

    def verify(self, out_dir):
        """True when every listed file exists with the recorded checksum."""
        out_dir = Path(out_dir)
        return all((out_dir / name).is_file() and sha256(out_dir / name) == digest
                   for name, digest in self.files.items())


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def default_out_dir(name):
    return Path(os.environ.get("EFFVEL_OUT", "effvel_out")) / name


def write_csv(path, columns):
    """Header row, one column per entry of ``columns`` (first should be t),
    17 significant digits."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


def read_csv(path):
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {k: data[:, i] for i, k in enumerate(names)}


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _error_report(exc):
    return {"error": type(exc).__name__, "message": str(exc),
            "t": getattr(exc, "t", None), "node": getattr(exc, "node", None)}


def _monitors(cfg):
    mon = {}
    if "energy" in cfg.diagnostics:
        mon["energy"] = energy_monitor(cfg.law)
    if "bd_entropy" in cfg.diagnostics:
        mon["bd_entropy"] = bd_entropy_monitor(cfg.law)
    return mon


def simulate(cfg):
    """Initial data (mollified if requested) and the solver trajectory."""
    init = initial_state(cfg.initial, cfg.grid)
    return init, solve(init, cfg.law, cfg.solver, _monitors(cfg))


def compute_norms(cfg, traj):
    """Everything that goes into ``norms.json``."""
    out = {}
    grid = traj.grid
    steps = traj.steps
    for name in ("energy", "bd_entropy"):
        if name in steps:
            out[f"monotonicity_{name}"] = monotonicity_check(step_series(traj, name), MONOTONE_TOL).to_dict()
    if grid.periodic:
        mass = np.sum((traj.rho - 1.0) * grid.weights, axis=1)
        out["mass_drift"] = float(np.max(np.abs(mass - mass[0])))
    if "lipschitz" in cfg.diagnostics:
        lip = lipschitz_diagnostic(traj)
        out["lipschitz_sup"] = lip.meta
    if "koch_tataru" in cfg.diagnostics:
        out["koch_tataru_m"] = koch_tataru_norm(traj).to_dict()
    if "bmo_inv" in cfg.diagnostics:
        out["bmo_inv_m0"] = bmo_inv_norm(traj.initial.m, grid, cfg.caloric).to_dict()
    if "growth" in cfg.diagnostics:
        out["growth_density"] = growth_bound_check(traj, "density_4160", cfg.growth_K).to_dict()
        out["growth_velocity"] = growth_bound_check(traj, "veloc_4154", cfg.growth_K, cfg.law).to_dict()
    out["final_time"] = float(traj.final.t)
    out["steps"] = int(traj.meta.get("steps", len(steps.get("t", [])) - 1))
    return out


def _sample_columns(cfg, traj):
    cols = {"t": traj.times}
    if "sup_norms" in cfg.diagnostics:
        for name, series in sup_norm_series(traj).items():
            cols[name] = series.values
    if "lipschitz" in cfg.diagnostics:
        cols["lipschitz"] = lipschitz_diagnostic(traj).values
    return cols


def _finish_manifest(cfg, out_dir, files, t0, status="ok"):
    manifest = RunManifest(cfg.to_dict(), __version__, round(time.perf_counter() - t0, 6),
                           {name: sha256(out_dir / name) for name in files}, status)
    write_json(out_dir / "manifest.json", manifest.to_dict())
    return manifest


def run(cfg, out_dir=None, figures=True):
    """Run one experiment and write its outputs.

    Files: ``series_steps.csv`` (per-step scalars), ``series_samples.csv``
    (per-sample norms), ``fields_final.csv``, ``norms.json``, optional
    ``figures/*.png`` and ``manifest.json``.  On a solver abort an
    ``error.json`` naming time and node is written and the exception
    re-raised.
    """
    t0 = time.perf_counter()
    out_dir = Path(out_dir) if out_dir is not None else default_out_dir(cfg.name)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        init, traj = simulate(cfg)
    except (SolverAbort, DensityFloorError) as exc:
        write_json(out_dir / "error.json", _error_report(exc))
        _finish_manifest(cfg, out_dir, ["error.json"], t0, status="solver_abort")
        raise
    files = []
    write_csv(out_dir / "series_steps.csv", traj.steps)
    files.append("series_steps.csv")
    write_csv(out_dir / "series_samples.csv", _sample_columns(cfg, traj))
    files.append("series_samples.csv")
    fin = traj.final
    write_csv(out_dir / "fields_final.csv", {"x": fin.grid.x, "rho": fin.rho, "m": fin.m, "v": fin.v, "u": fin.u})
    files.append("fields_final.csv")
    write_json(out_dir / "norms.json", compute_norms(cfg, traj))
    files.append("norms.json")
    if figures:
        from .plotting import render_run_figures

        files.extend(render_run_figures(out_dir))
    manifest = _finish_manifest(cfg, out_dir, files, t0)
    logger.info("run %s: %d files in %s", cfg.name, len(files), out_dir)
    return manifest


# ---------------------------------------------------------------------------
# convergence


def _order(d0, d1):
    if d0 == 0.0 and d1 == 0.0:
        return "exact"
    if d1 == 0.0 or d0 == 0.0:
        return "nan"
    return float(math.log2(d0 / d1))


def convergence_study(cfg, levels=3, out_dir=None, fields=("rho", "v")):
    """Run ``cfg`` on ``levels`` nested grids (cells n, 2n, 4n, ...; dt_max
    halved with h) and compare consecutive final states on the coarse nodes.

    Returns a list of rows ``{level, n_cells, d_rho, d_v, p_rho, p_v}`` where
    ``d`` is the sup difference against the next finer level and ``p`` the
    observed order log2(d_k / d_{k+1}).  Writes ``convergence.csv`` when
    ``out_dir`` is given.
    """
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    finals = []
    grid = cfg.grid
    solver = cfg.solver
    for k in range(levels):
        c = cfg.with_grid(grid.refine(2**k)) if k else cfg
        c = replace(c, solver=replace(solver, dt_max=solver.dt_max / 2**k), diagnostics=())
        _, traj = simulate(c)
        finals.append(traj.final)
    rows = []
    for k in range(levels - 1):
        row = {"level": k, "n_cells": finals[k].grid.n_cells}
        for f in fields:
            coarse = getattr(finals[k], f)
            fine = getattr(finals[k + 1], f)[::2][: coarse.size]
            row[f"d_{f}"] = float(np.max(np.abs(coarse - fine)))
        rows.append(row)
    for k, row in enumerate(rows):
        for f in fields:
            row[f"p_{f}"] = _order(row[f"d_{f}"], rows[k + 1][f"d_{f}"]) if k + 1 < len(rows) else ""
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        keys = list(rows[0])
        lines = [",".join(keys)]
        for row in rows:
            lines.append(",".join(_fmt(row[k]) for k in keys))
        (out_dir / "convergence.csv").write_text("\n".join(lines) + "\n")
    return rows


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


# ---------------------------------------------------------------------------
# oracle


def oracle_compare(cfg, out_dir=None):
    """Finite-difference solve against the Picard mild-solution oracle at
    ``cfg.solver.T``.  Writes ``oracle.json``; on Picard non-convergence the
    report records the failure and the exception is re-raised."""
    init = initial_state(cfg.initial, cfg.grid)
    T = cfg.solver.T
    report = {"T": T, "config": cfg.to_dict()}
    try:
        pic = picard_mild_solve(init, cfg.law, T, cfg.picard.k_max, cfg.picard.tol, cfg.picard.n_steps,
                                cfg.solver.rho_floor)
    except PicardNonConvergence as exc:
        report.update(status="picard_non_convergence", message=str(exc),
                      iterations=exc.iterations,
                      residual=None if exc.residual is None or not math.isfinite(exc.residual) else exc.residual)
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            write_json(Path(out_dir) / "oracle.json", report)
        raise
    fd = solve_augmented(init, cfg.law, cfg.solver)
    report.update(
        status="ok",
        iterations=pic.meta["iterations"],
        residuals=pic.meta["residuals"],
        discrepancy={f: float(np.max(np.abs(getattr(fd.final, f) - getattr(pic.final, f))))
                     for f in ("rho", "v", "m")},
    )
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_json(Path(out_dir) / "oracle.json", report)
    return report


# ---------------------------------------------------------------------------
# norms of a stored field


def field_norms(values, grid, caloric_cfg, name="m"):
    """bmo^-1 norm and both caloric Besov proxies of one nodal field."""
    values = np.asarray(values, dtype=float)
    return {
        "bmo_inv": bmo_inv_norm(values, grid, caloric_cfg).to_dict(),
        "besov_proxy_minus1": caloric_besov_proxy(values, grid, -1, caloric_cfg).to_dict(),
        "besov_proxy_plus1": caloric_besov_proxy(values, grid, 1, caloric_cfg).to_dict(),
        "field": name,
    }

"""JSON experiment configuration.

A config is a single JSON object::

    {
      "name": "shock",
      "grid": {"kind": "line1d", "n_cells": 1024, "x_min": -10, "x_max": 10,
               "boundary": "periodic"},
      "initial": {"density": {"kind": "piecewise", "pieces": [[-10, -1, 1], [-1, 1, 2], [1, 10, 1]]},
                  "v0": 0, "mu": 0.5, "law": {"a": 1, "gamma": 2},
                  "mollify": {"n": 4, "variant": "A"}},
      "solver": {"T": 1.0, "cfl": 0.4, "theta": 0.5},
      "diagnostics": ["energy", "bd_entropy", "sup_norms"],
      "caloric": {"T": 1.0, "q": 0.5, "J": 20},
      "picard": {"k_max": 20, "tol": 1e-9}
    }

Everything except ``grid`` and ``initial`` is optional.  Radial grids use
``{"kind": "radial", "n_cells": ..., "R_max": ..., "N": 2}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .caloric import CaloricConfig
from .errors import ConfigError
from .evolution import SolverConfig
from .grid import Grid
from .state import InitialDataSpec, PressureLaw, Profile

DIAGNOSTICS = ("energy", "bd_entropy", "sup_norms", "lipschitz", "koch_tataru", "bmo_inv", "growth")
DEFAULT_DIAGNOSTICS = ("energy", "bd_entropy", "sup_norms", "lipschitz")


@dataclass(frozen=True)
class PicardConfig:
    k_max: int = 20
    tol: float = 1e-9
    n_steps: Optional[int] = None

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError("picard.k_max must be >= 1")
        if not self.tol > 0.0:
            raise ConfigError("picard.tol must be positive")
        if self.n_steps is not None and self.n_steps < 1:
            raise ConfigError("picard.n_steps must be >= 1")

    def to_dict(self):
        d = {"k_max": self.k_max, "tol": self.tol}
        if self.n_steps is not None:
            d["n_steps"] = self.n_steps
        return d


@dataclass(frozen=True)
class ExperimentConfig:
    grid: Grid
    initial: InitialDataSpec
    solver: SolverConfig = field(default_factory=SolverConfig)
    diagnostics: tuple = DEFAULT_DIAGNOSTICS
    caloric: CaloricConfig = field(default_factory=CaloricConfig)
    picard: PicardConfig = field(default_factory=PicardConfig)
    growth_K: float = 2.0
    name: str = "experiment"

    @property
    def law(self):
        return self.initial.law

    @property
    def mu(self):
        return self.initial.mu

    def with_grid(self, grid):
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw["grid"] = grid
        return ExperimentConfig(**kw)

    def to_dict(self):
        g = self.grid
        if g.kind == "radial":
            grid = {"kind": "radial", "n_cells": g.n_cells, "R_max": g.R_max, "N": g.N}
        else:
            grid = {"kind": "line1d", "n_cells": g.n_cells, "x_min": g.x_min,
                    "x_max": g.x_max, "boundary": g.boundary}
        return {
            "name": self.name,
            "grid": grid,
            "initial": self.initial.to_dict(),
            "solver": self.solver.to_dict(),
            "diagnostics": list(self.diagnostics),
            "caloric": self.caloric.to_dict(),
            "picard": self.picard.to_dict(),
            "growth_K": self.growth_K,
        }


def _section(d, key):
    sec = d.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be an object")
    return sec


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def _grid_from(d):
    d = dict(d)
    kind = d.pop("kind", "line1d")
    try:
        if kind == "radial":
            return Grid.radial(int(d.pop("n_cells")), float(d.pop("R_max")), int(d.pop("N")))
        return Grid.line(int(d.pop("n_cells")), float(d.pop("x_min")), float(d.pop("x_max")),
                         d.pop("boundary", "periodic"))
    except KeyError as exc:
        raise ConfigError(f"grid: missing field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def config_from_dict(d):
    """Validate a parsed JSON document and build an :class:`ExperimentConfig`."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - {"name", "grid", "initial", "solver", "diagnostics", "caloric", "picard", "growth_K"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "grid" not in d or "initial" not in d:
        raise ConfigError("config needs 'grid' and 'initial'")
    grid = _grid_from(_section(d, "grid"))

    ini = _section(d, "initial")
    try:
        law = _build(PressureLaw, _section(ini, "law"), "initial.law")
        moll = ini.get("mollify")
        initial = InitialDataSpec(
            density=Profile.from_dict(ini["density"]),
            v0=Profile.from_dict(ini.get("v0", 0.0)),
            mu=float(ini["mu"]),
            law=law,
            mollify_n=None if moll is None else int(moll["n"]),
            variant="A" if moll is None else moll.get("variant", "A"),
        )
    except KeyError as exc:
        raise ConfigError(f"initial: missing field {exc}") from exc

    diagnostics = tuple(d.get("diagnostics", DEFAULT_DIAGNOSTICS))
    bad = [x for x in diagnostics if x not in DIAGNOSTICS]
    if bad:
        raise ConfigError(f"unknown diagnostics {bad}; choose from {list(DIAGNOSTICS)}")
    return ExperimentConfig(
        grid=grid,
        initial=initial,
        solver=_build(SolverConfig, _section(d, "solver"), "solver"),
        diagnostics=diagnostics,
        caloric=_build(CaloricConfig, _section(d, "caloric"), "caloric"),
        picard=_build(PicardConfig, _section(d, "picard"), "picard"),
        growth_K=float(d.get("growth_K", 2.0)),
        name=str(d.get("name", "experiment")),
    )


def parse_config(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return config_from_dict(doc)


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def serialize_config(cfg):
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)

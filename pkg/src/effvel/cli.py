"""Command-line entry point: ``effvel <command> --config <path> [--out <dir>]``.

Exit codes: 0 success, 2 config error, 3 solver abort, 4 oracle
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config, serialize_config
from .errors import ConfigError, DensityFloorError, PicardNonConvergence, SolverAbort

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ORACLE = 4


def _parser():
    p = argparse.ArgumentParser(prog="effvel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
        if out:
            sp.add_argument("--out", help="output directory (default $EFFVEL_OUT/<name>)")
        sp.add_argument("--quiet", action="store_true", help="suppress progress output")

    sp = sub.add_parser("run", help="solve, compute diagnostics, write CSV/JSON and figures")
    common(sp)
    sp.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    sp = sub.add_parser("convergence", help="mesh-refinement study, writes convergence.csv")
    common(sp)
    sp.add_argument("--levels", type=int, default=3, help="number of grid levels (>= 3)")

    sp = sub.add_parser("oracle-compare", help="finite-difference solver against the Picard oracle")
    common(sp)

    sp = sub.add_parser("norms", help="caloric norms of a stored field (default: initial momentum)")
    common(sp)
    sp.add_argument("--field", help="CSV with an x column and the field column")
    sp.add_argument("--column", default="m", help="column of --field to use")

    sp = sub.add_parser("validate-config", help="parse and echo a config")
    common(sp, out=False)
    return p


def _out_dir(args, cfg):
    from .runner import default_out_dir

    return Path(args.out) if args.out else default_out_dir(cfg.name)


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _cmd_run(args, cfg):
    from .runner import run

    out = _out_dir(args, cfg)
    manifest = run(cfg, out, figures=not args.no_figures)
    _say(args, f"wrote {len(manifest.files)} files to {out}")


def _cmd_convergence(args, cfg):
    from .runner import convergence_study

    out = _out_dir(args, cfg)
    rows = convergence_study(cfg, args.levels, out)
    for row in rows:
        _say(args, "  ".join(f"{k}={v}" for k, v in row.items()))
    _say(args, f"wrote {out / 'convergence.csv'}")


def _cmd_oracle(args, cfg):
    from .runner import oracle_compare

    out = _out_dir(args, cfg)
    report = oracle_compare(cfg, out)
    _say(args, f"picard iterations {report['iterations']}, discrepancy {report['discrepancy']}")


def _cmd_norms(args, cfg):
    import numpy as np

    from .runner import field_norms, read_csv, write_json
    from .state import initial_state

    if args.field:
        cols = read_csv(args.field)
        if args.column not in cols:
            raise ConfigError(f"column {args.column!r} not in {args.field}")
        values = cols[args.column]
        if values.size != cfg.grid.n_nodes or ("x" in cols and not np.allclose(cols["x"], cfg.grid.x)):
            raise ConfigError("stored field does not match the config grid")
        name = args.column
    else:
        values = initial_state(cfg.initial, cfg.grid).m
        name = "m0"
    report = field_norms(values, cfg.grid, cfg.caloric, name)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "field_norms.json", report)
    _say(args, json.dumps({k: v["value"] for k, v in report.items() if isinstance(v, dict)}))


def _cmd_validate(args, cfg):
    _say(args, serialize_config(cfg))


COMMANDS = {
    "run": _cmd_run,
    "convergence": _cmd_convergence,
    "oracle-compare": _cmd_oracle,
    "norms": _cmd_norms,
    "validate-config": _cmd_validate,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except PicardNonConvergence as exc:
        print(json.dumps({"error": "PicardNonConvergence", "message": str(exc),
                          "iterations": exc.iterations}), file=sys.stderr)
        return EXIT_ORACLE
    except (SolverAbort, DensityFloorError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "t": getattr(exc, "t", None), "node": getattr(exc, "node", None)}),
              file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""PNG figures rendered next to the CSV outputs of a run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Fixed metadata keeps reruns byte-identical.
_PNG_META = {"Software": None}


def _read(path):
    from .runner import read_csv

    return read_csv(path)


def _save(fig, path):
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_step_series(csv_path, png_path):
    cols = _read(csv_path)
    t = cols["t"]
    names = [k for k in ("energy", "bd_entropy") if k in cols]
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for k in names:
        axes[0].plot(t, cols[k], label=k)
    axes[0].set_ylabel("functional")
    if names:
        axes[0].legend()
    axes[1].plot(t, cols["rho_min"], label="min rho")
    axes[1].plot(t, cols["rho_max"], label="max rho")
    axes[1].set_xlabel("t")
    axes[1].legend()
    _save(fig, png_path)


def plot_sample_series(csv_path, png_path):
    cols = _read(csv_path)
    t = cols["t"]
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, vals in cols.items():
        if k != "t":
            ax.plot(t, vals, label=k)
    ax.set_xlabel("t")
    if len(cols) > 1:
        ax.legend(fontsize="small")
    _save(fig, png_path)


def plot_final_fields(csv_path, png_path):
    cols = _read(csv_path)
    x = cols["x"]
    fig, axes = plt.subplots(3, 1, figsize=(7, 7), sharex=True)
    axes[0].plot(x, cols["rho"])
    axes[0].set_ylabel("rho")
    axes[1].plot(x, cols["v"], label="v")
    axes[1].plot(x, cols["u"], label="u", linestyle="--")
    axes[1].legend()
    axes[2].plot(x, cols["m"])
    axes[2].set_ylabel("m")
    axes[2].set_xlabel("x")
    _save(fig, png_path)


def render_run_figures(out_dir):
    """Render the standard figures of a run directory; returns the relative
    paths of the files written."""
    out_dir = Path(out_dir)
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(exist_ok=True)
    jobs = [
        (plot_step_series, "series_steps.csv", "series_steps.png"),
        (plot_sample_series, "series_samples.csv", "series_samples.png"),
        (plot_final_fields, "fields_final.csv", "fields_final.png"),
    ]
    written = []
    for fn, src, dst in jobs:
        fn(out_dir / src, fig_dir / dst)
        written.append(f"figures/{dst}")
    return written

"""Matplotlib renderings: progress curves with CI bands, archive heat-maps.

Kept in its own module and imported lazily so the run path never touches
matplotlib; the Agg backend writes files without a display.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in text).strip("-")


def render_progress(prog_rows, out_dir) -> list:
    """One figure per (treatment, metric): per-method mean curves, 95% bands."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grouped: dict = {}
    for row in prog_rows:
        grouped.setdefault((row["testbed"], row["metric"]), {}).setdefault(
            row["method"], []).append(row)
    paths = []
    for (treatment, metric), per_method in grouped.items():
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for method, rows in per_method.items():
            rows = sorted(rows, key=lambda r: r["evaluations"])
            xs = [r["evaluations"] for r in rows]
            ax.plot(xs, [r["mean"] for r in rows], label=method, linewidth=1.2)
            ax.fill_between(xs, [r["ci_low"] for r in rows],
                            [r["ci_high"] for r in rows], alpha=0.15)
        ax.set_xscale("log")
        ax.set_xlabel("evaluations")
        ax.set_ylabel(metric)
        ax.set_title(treatment)
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        path = out_dir / f"progress_{_slug(treatment)}_{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_heatmap(grid, kind: str, out_path, title: str = "") -> Path:
    """Render a fitness or selection grid; NaN cells are left blank."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    data = np.ma.masked_invalid(np.asarray(grid, float))
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    image = ax.imshow(data, origin="lower", cmap="viridis", aspect="equal")
    fig.colorbar(image, ax=ax, label=kind)
    ax.set_xlabel("descriptor 2 bin")
    ax.set_ylabel("descriptor 1 bin")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path

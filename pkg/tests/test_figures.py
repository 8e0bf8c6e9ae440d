import numpy as np

from bandit_elites.figures import render_heatmap, render_progress
from bandit_elites.metrics import METRIC_COLUMNS

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def progress_rows():
    rows = []
    for method in ("uniform", "greedy"):
        for evals, mean in ((100, 0.1), (200, 0.3), (500, 0.4)):
            for metric in METRIC_COLUMNS[:2]:
                rows.append({
                    "testbed": "rastrigin6",
                    "method": method,
                    "evaluations": evals,
                    "metric": metric,
                    "mean": mean,
                    "ci_low": mean - 0.05,
                    "ci_high": mean + 0.05,
                })
    return rows


def test_render_progress_writes_one_png_per_metric(tmp_path):
    paths = render_progress(progress_rows(), tmp_path / "figures")
    assert len(paths) == 2
    names = {p.name for p in paths}
    assert names == {"progress_rastrigin6_global_performance.png",
                     "progress_rastrigin6_global_reliability.png"}
    for p in paths:
        assert p.read_bytes()[:8] == PNG_MAGIC


def test_render_heatmap_handles_nan(tmp_path):
    grid = np.array([[1.0, np.nan], [0.25, 2.5]])
    out = render_heatmap(grid, "fitness", tmp_path / "maps" / "demo.png",
                         title="demo")
    assert out.is_file()
    assert out.read_bytes()[:8] == PNG_MAGIC


def test_render_heatmap_selection_counts(tmp_path):
    grid = np.array([[0, 5], [12, 3]])
    out = render_heatmap(grid, "selections", tmp_path / "sel.png")
    assert out.read_bytes()[:8] == PNG_MAGIC

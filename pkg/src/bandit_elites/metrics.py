"""Evaluation measures over archive states.

Six measures per checkpoint: coverage, QD-score, global performance,
global reliability, precision, and selection entropy. Reliability and
precision compare a run's per-cell normalized fitness against the best
known value for that cell pooled over a whole experiment, so they are
filled in by a second pass once every run has finished.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "global_performance",
    "global_reliability",
    "precision",
    "coverage",
    "qd_score",
    "selection_entropy",
)

CSV_COLUMNS = ("run_id", "method", "testbed", "evaluations") + METRIC_COLUMNS


@dataclass
class MetricVector:
    global_performance: float
    global_reliability: float
    precision: float
    coverage: float
    qd_score: float
    selection_entropy: float
    evaluations: int

    def as_row(self, run_id, method, testbed) -> list:
        return [
            str(run_id),
            method,
            testbed,
            str(self.evaluations),
            repr(float(self.global_performance)),
            repr(float(self.global_reliability)),
            repr(float(self.precision)),
            repr(float(self.coverage)),
            repr(float(self.qd_score)),
            repr(float(self.selection_entropy)),
        ]


def coverage(fmap) -> float:
    """Occupied cells over total cells."""
    return fmap.occupied_count / fmap.n_cells


def qd_score(fmap) -> float:
    """Sum of raw fitness over occupied cells (negative on maximizing
    testbeds with negative fitness; reporting uses the normalized variant)."""
    n = fmap.occupied_count
    if n == 0:
        return 0.0
    return float(fmap.fitness[fmap.occupied[:n]].sum())


def qd_score_normalized(fmap, normalize) -> float:
    """Sum of normalized fitness over occupied cells; higher is better everywhere."""
    n = fmap.occupied_count
    if n == 0:
        return 0.0
    return float(np.sum(normalize(fmap.fitness[fmap.occupied[:n]])))


def global_performance(fmap, normalize) -> float:
    """Best fitness in the map on the normalized [0, 1] scale (1 = known optimum)."""
    n = fmap.occupied_count
    if n == 0:
        raise ValueError("global_performance on an empty map")
    return float(np.max(normalize(fmap.fitness[fmap.occupied[:n]])))


def selection_entropy(fmap) -> float:
    """Normalized Shannon entropy of per-cell selection counts.

    1 when selections are exactly uniform over all cells, 0 when they all hit
    one cell. Returns 0 by convention before any selection happened.
    """
    total = fmap.total_selections
    if total == 0:
        log.debug("selection_entropy with zero selections; returning 0 by convention")
        return 0.0
    counts = fmap.sel_c[fmap.sel_c > 0]
    p = counts / total
    return float(-(p * np.log(p)).sum() / math.log(fmap.n_cells))


def reliability_from_grids(fnorm, best_known):
    """(global_reliability, precision) from per-cell normalized fitness grids.

    Both inputs use NaN for empty (run grid) or undefined (pool grid) cells.
    Reliability averages filled-cell ratios over every cell with a defined
    best; precision averages over the run's occupied cells only. Cells whose
    best known value is 0 count as fully achieved (the occupant cannot be
    worse than 0 on the normalized scale).
    """
    fnorm = np.asarray(fnorm, float)
    best = np.asarray(best_known, float)
    if fnorm.shape != best.shape:
        raise ValueError("grid shapes differ")
    defined = ~np.isnan(best)
    occupied = ~np.isnan(fnorm)
    if np.any(occupied & ~defined):
        raise ValueError("best_known missing for an occupied cell")
    filled = occupied & defined
    b = best[filled]
    ratios = np.where(b == 0.0, 1.0, fnorm[filled] / np.where(b == 0.0, 1.0, b))
    total = ratios.sum()
    n_defined = int(defined.sum())
    n_occ = int(occupied.sum())
    rel = float(total / n_defined) if n_defined else 0.0
    prec = float(total / n_occ) if n_occ else 0.0
    return rel, prec


def reliability_pair(fmap, best_known, normalize):
    """Map-level wrapper over reliability_from_grids for a live archive."""
    grid = normalized_fitness_grid(fmap, normalize)
    return reliability_from_grids(grid, best_known)


def normalized_fitness_grid(fmap, normalize, dtype=float) -> np.ndarray:
    """Per-cell normalized fitness, NaN where empty."""
    grid = np.full(fmap.n_cells, np.nan, dtype)
    n = fmap.occupied_count
    if n:
        occ = fmap.occupied[:n]
        grid[occ] = normalize(fmap.fitness[occ])
    return grid.reshape(fmap.rows, fmap.cols)

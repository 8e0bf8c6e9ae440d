"""Shared oracles for the test suite.

These reimplement contracts from first principles (definition formulas,
graph checks) so the library code is always compared against an
independently derived answer.
"""
from __future__ import annotations

import math

import numpy as np

from bandit_elites.archive import FeatureMap
from bandit_elites.selection import ucb_score

# tile bit layout: N, E, S, W
_DIRS = ((-1, 0, 1, 4), (0, 1, 2, 8), (1, 0, 4, 1), (0, -1, 8, 2))


def is_perfect_maze(grid) -> bool:
    """Spanning-tree check: reciprocity, edge count T-1, full connectivity."""
    grid = np.asarray(grid)
    h, w = grid.shape
    half_edges = 0
    for r in range(h):
        for c in range(w):
            t = int(grid[r, c])
            if not 0 <= t <= 15:
                return False
            for dr, dc, bit, opp in _DIRS:
                if t & bit:
                    rr, cc = r + dr, c + dc
                    if not (0 <= rr < h and 0 <= cc < w):
                        return False
                    if not int(grid[rr, cc]) & opp:
                        return False
                    half_edges += 1
    if half_edges != 2 * (h * w - 1):
        return False
    seen = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        r, c = frontier.pop()
        t = int(grid[r, c])
        for dr, dc, bit, _ in _DIRS:
            if t & bit and (r + dr, c + dc) not in seen:
                seen.add((r + dr, c + dc))
                frontier.append((r + dr, c + dc))
    return len(seen) == h * w


def random_archive(rng, rows=7, cols=9, occupancy=0.6, max_n=12,
                   maximize=True) -> FeatureMap:
    """Synthetic archive state with randomized counters, rebuilt via the
    documented bulk-injection hook."""
    fmap = FeatureMap(bounds=((0.0, 1.0), (0.0, 1.0)), resolution=(rows, cols),
                      maximize=maximize, genome_size=3)
    n = rows * cols
    occ = rng.random(n) < occupancy
    if not occ.any():
        occ[int(rng.integers(n))] = True
    for j in np.flatnonzero(occ):
        fmap.fitness[j] = rng.normal()
        ni = int(rng.integers(0, max_n + 1))
        wi = int(rng.integers(0, ni + 1))
        fmap.sel_i[j] = ni
        fmap.surv_i[j] = wi
        extra_n = int(rng.integers(0, max_n + 1))
        fmap.sel_c[j] = ni + extra_n
        fmap.surv_c[j] = wi + int(rng.integers(0, extra_n + 1))
        fmap.curiosity[j] = float(rng.integers(-4, 9)) * 0.5
    fmap._recompute_derived()
    return fmap


def oracle_candidates(fmap: FeatureMap, policy) -> set:
    """Indices a correct selector may return, straight from the definitions."""
    occ = [int(j) for j in fmap.occupied[: fmap.occupied_count]]
    kind = policy.kind
    if kind == "uniform":
        return set(occ)
    if kind == "curiosity":
        positive = {j for j in occ if fmap.curiosity[j] > 0.0}
        return positive if positive else set(occ)
    scores = {}
    for j in occ:
        if kind == "greedy":
            scores[j] = fmap.fitness[j] if fmap.maximize else -fmap.fitness[j]
        elif kind in ("explore_individual", "explore_cell"):
            n = int(fmap.sel_i[j] if kind == "explore_individual" else fmap.sel_c[j])
            scores[j] = math.inf if n == 0 else 1.0 / n
        else:
            individual = kind.endswith("individual")
            n = int(fmap.sel_i[j] if individual else fmap.sel_c[j])
            w = int(fmap.surv_i[j] if individual else fmap.surv_c[j])
            scores[j] = ucb_score(w, n, fmap.total_selections, policy.lam)
    best = max(scores.values())
    return {j for j, s in scores.items() if s == best}


def flat(fmap: FeatureMap, cell) -> int:
    return cell[0] * fmap.cols + cell[1]

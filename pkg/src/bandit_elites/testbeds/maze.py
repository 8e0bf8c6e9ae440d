"""Perfect-maze testbed on orthogonal lattices.

A maze genome is a grid of 4-bit tile IDs (bit 0 = North, 1 = East,
2 = South, 3 = West) whose open-passage graph must be a spanning tree.
Generation is randomized depth-first search; mutation destroys tiles with
2% probability each (at least one) and repairs the damage back into a
perfect maze. Five structural metrics in [0, 1] supply the fitness and
behavior dimensions; any of the 30 distinct assignments can drive a run.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Tuple

import numpy as np
from numba import njit

from .._kernels import (insert_core, record_outcome_core,
                        record_selection_core, select_index)

MAZE_METRICS = ("H", "B", "L", "I", "P")
DESTROY_PROB = 0.02

# direction tables indexed N, E, S, W
_DR = np.array([-1, 0, 1, 0], np.int64)
_DC = np.array([0, 1, 0, -1], np.int64)
_BIT = np.array([1, 2, 4, 8], np.uint8)
_OPP = np.array([4, 8, 1, 2], np.uint8)
_NOT_OPP = np.array([255 - 4, 255 - 8, 255 - 1, 255 - 2], np.uint8)
_POPCOUNT = np.array([bin(i).count("1") for i in range(16)], np.int64)


@njit(cache=True)
def _generate(h, w, rng):
    tiles = np.zeros((h, w), np.uint8)
    visited = np.zeros((h, w), np.bool_)
    stack = np.empty(h * w, np.int64)
    options = np.empty(4, np.int64)
    r = int(rng.integers(0, h))
    c = int(rng.integers(0, w))
    visited[r, c] = True
    stack[0] = r * w + c
    top = 0
    while top >= 0:
        p = stack[top]
        r = p // w
        c = p % w
        n_open = 0
        for d in range(4):
            rr = r + _DR[d]
            cc = c + _DC[d]
            if 0 <= rr < h and 0 <= cc < w and not visited[rr, cc]:
                options[n_open] = d
                n_open += 1
        if n_open == 0:
            top -= 1
            continue
        d = options[int(rng.integers(0, n_open))]
        rr = r + _DR[d]
        cc = c + _DC[d]
        tiles[r, c] |= _BIT[d]
        tiles[rr, cc] |= _OPP[d]
        visited[rr, cc] = True
        top += 1
        stack[top] = rr * w + cc
    return tiles


@njit(cache=True)
def _clear_tile(tiles, r, c):
    h, w = tiles.shape
    t = tiles[r, c]
    for d in range(4):
        if t & _BIT[d]:
            tiles[r + _DR[d], c + _DC[d]] &= _NOT_OPP[d]
    tiles[r, c] = 0


@njit(cache=True)
def _destroy(tiles, rng):
    """Per-tile 2% destruction in row-major draw order; forces one when none hit."""
    h, w = tiles.shape
    count = 0
    for r in range(h):
        for c in range(w):
            if rng.random() < DESTROY_PROB:
                _clear_tile(tiles, r, c)
                count += 1
    if count == 0:
        p = int(rng.integers(0, h * w))
        _clear_tile(tiles, p // w, p % w)
        count = 1
    return count


@njit(cache=True)
def _label_components(tiles):
    h, w = tiles.shape
    labels = np.full((h, w), -1, np.int64)
    queue = np.empty(h * w, np.int64)
    n_comp = 0
    for sr in range(h):
        for sc in range(w):
            if labels[sr, sc] >= 0:
                continue
            labels[sr, sc] = n_comp
            queue[0] = sr * w + sc
            head = 0
            tail = 1
            while head < tail:
                p = queue[head]
                head += 1
                r = p // w
                c = p % w
                t = tiles[r, c]
                for d in range(4):
                    if t & _BIT[d]:
                        rr = r + _DR[d]
                        cc = c + _DC[d]
                        if labels[rr, cc] < 0:
                            labels[rr, cc] = n_comp
                            queue[tail] = rr * w + cc
                            tail += 1
            n_comp += 1
    return labels, n_comp


@njit(cache=True)
def _repair(tiles, rng):
    """Grow trees through isolated patches, then merge islands with random edges.

    The input must be a reciprocal forest (e.g. a damaged perfect maze);
    the result is a spanning tree.
    """
    h, w = tiles.shape
    total = h * w
    iso = tiles == 0  # patch membership frozen before any carving
    processed = np.zeros((h, w), np.bool_)
    stack = np.empty(total, np.int64)
    border = np.empty(4 * total, np.int64)
    options = np.empty(4, np.int64)
    for sr in range(h):
        for sc in range(w):
            if not iso[sr, sc] or processed[sr, sc]:
                continue
            # randomized DFS carves a tree covering this isolated patch
            n_border = 0
            processed[sr, sc] = True
            stack[0] = sr * w + sc
            top = 0
            for d in range(4):
                rr = sr + _DR[d]
                cc = sc + _DC[d]
                if 0 <= rr < h and 0 <= cc < w and not iso[rr, cc]:
                    border[n_border] = (sr * w + sc) * 4 + d
                    n_border += 1
            while top >= 0:
                p = stack[top]
                r = p // w
                c = p % w
                n_open = 0
                for d in range(4):
                    rr = r + _DR[d]
                    cc = c + _DC[d]
                    if 0 <= rr < h and 0 <= cc < w and iso[rr, cc] and not processed[rr, cc]:
                        options[n_open] = d
                        n_open += 1
                if n_open == 0:
                    top -= 1
                    continue
                d = options[int(rng.integers(0, n_open))]
                rr = r + _DR[d]
                cc = c + _DC[d]
                tiles[r, c] |= _BIT[d]
                tiles[rr, cc] |= _OPP[d]
                processed[rr, cc] = True
                top += 1
                stack[top] = rr * w + cc
                for d2 in range(4):
                    r2 = rr + _DR[d2]
                    c2 = cc + _DC[d2]
                    if 0 <= r2 < h and 0 <= c2 < w and not iso[r2, c2]:
                        border[n_border] = (rr * w + cc) * 4 + d2
                        n_border += 1
            if n_border > 0:
                # one random bridge attaches the patch to a surviving component
                e = border[int(rng.integers(0, n_border))]
                p = e // 4
                d = e % 4
                r = p // w
                c = p % w
                tiles[r, c] |= _BIT[d]
                tiles[r + _DR[d], c + _DC[d]] |= _OPP[d]

    labels, n_comp = _label_components(tiles)
    edges = np.empty(2 * total, np.int64)
    flat = labels.ravel()
    while n_comp > 1:
        n_e = 0
        for r in range(h):
            for c in range(w):
                if c + 1 < w and labels[r, c] != labels[r, c + 1]:
                    edges[n_e] = (r * w + c) * 4 + 1  # east
                    n_e += 1
                if r + 1 < h and labels[r, c] != labels[r + 1, c]:
                    edges[n_e] = (r * w + c) * 4 + 2  # south
                    n_e += 1
        e = edges[int(rng.integers(0, n_e))]
        p = e // 4
        d = e % 4
        r = p // w
        c = p % w
        rr = r + _DR[d]
        cc = c + _DC[d]
        tiles[r, c] |= _BIT[d]
        tiles[rr, cc] |= _OPP[d]
        a = labels[r, c]
        b = labels[rr, cc]
        for i in range(total):
            if flat[i] == b:
                flat[i] = a
        n_comp -= 1


@njit(cache=True)
def _swap_ew(t):
    return (t & np.uint8(5)) | ((t & np.uint8(2)) << 2) | ((t & np.uint8(8)) >> 2)


@njit(cache=True)
def _swap_ns(t):
    return (t & np.uint8(10)) | ((t & np.uint8(1)) << 2) | ((t & np.uint8(4)) >> 2)


@njit(cache=True)
def _structure_counts(tiles):
    """Tile counts for the symmetry and corridor metrics plus the BFS path.

    Returns (mirror_y_matches, both_mirror_matches, corner_tiles,
    straight_tiles, path_tiles); path_tiles is the tile count of the shortest
    top-left to bottom-right path inclusive of both endpoints.
    """
    h, w = tiles.shape
    total = h * w
    n_h = 0
    n_b = 0
    n_l = 0
    n_i = 0
    for r in range(h):
        for c in range(w):
            t = tiles[r, c]
            ty = _swap_ew(tiles[r, w - 1 - c])
            tx = _swap_ns(tiles[h - 1 - r, c])
            if t == ty:
                n_h += 1
                if t == tx:
                    n_b += 1
            deg = _POPCOUNT[t]
            if deg == 2:
                if t == 5 or t == 10:
                    n_i += 1
                else:
                    n_l += 1
    dist = np.full(total, -1, np.int64)
    queue = np.empty(total, np.int64)
    dist[0] = 0
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        p = queue[head]
        head += 1
        r = p // w
        c = p % w
        t = tiles[r, c]
        for d in range(4):
            if t & _BIT[d]:
                q = (r + _DR[d]) * w + (c + _DC[d])
                if dist[q] < 0:
                    dist[q] = dist[p] + 1
                    queue[tail] = q
                    tail += 1
    return n_h, n_b, n_l, n_i, dist[total - 1] + 1


@njit(cache=True)
def _chunk(iters, code, lam, rng, fitness, descriptors, genomes,
           sel_i, surv_i, sel_c, surv_c, curiosity, generation,
           ratio_i, bonus_i, ratio_c, bonus_c, occupied, ties, state,
           rows, cols, lo1, hi1, lo2, hi2, sign, maximize,
           h, w, fit_idx, b1_idx, b2_idx, count_moves):
    """Fused select/mutate/evaluate/insert loop; returns iterations completed."""
    total = h * w
    vals = np.empty(5)
    for it in range(iters):
        j = select_index(code, lam, fitness, sign, sel_i, sel_c, curiosity,
                         ratio_i, bonus_i, ratio_c, bonus_c,
                         occupied, state[2], state[0], ties, rng)
        record_selection_core(j, sel_i, surv_i, sel_c, surv_c,
                              ratio_i, bonus_i, ratio_c, bonus_c, state)
        pend = generation[j]
        flat = genomes[j].copy()
        grid = flat.reshape(h, w)
        _destroy(grid, rng)
        _repair(grid, rng)
        n_h, n_b, n_l, n_i, p_tiles = _structure_counts(grid)
        if p_tiles <= 0:
            return it
        p = p_tiles - 1 if count_moves else p_tiles
        vals[0] = n_h / total
        vals[1] = n_b / total
        vals[2] = n_l / total
        vals[3] = n_i / total
        vals[4] = 1.0 - abs(2.0 * p / total - 1.0)
        outcome = insert_core(flat, vals[fit_idx], vals[b1_idx], vals[b2_idx],
                              fitness, descriptors, genomes, sel_i, surv_i,
                              curiosity, ratio_i, bonus_i, ratio_c, generation,
                              occupied, state, rows, cols, lo1, hi1, lo2, hi2,
                              maximize)
        record_outcome_core(j, outcome != 2, pend, sel_i, surv_i, sel_c,
                            surv_c, ratio_i, ratio_c, curiosity, generation)
    return iters


def maze_generate(width: int, height: int, rng) -> np.ndarray:
    """Random perfect maze as a (height, width) array of tile IDs."""
    if width < 2 or height < 2:
        raise ValueError("maze needs width and height >= 2")
    return _generate(int(height), int(width), rng)

def maze_mutate(parent: np.ndarray, rng) -> np.ndarray:
    """Destroy ~2% of tiles (at least one) and repair back to a perfect maze."""
    child = parent.copy()
    _destroy(child, rng)
    _repair(child, rng)
    return child


def maze_repair(broken: np.ndarray, rng) -> np.ndarray:
    """Repair a reciprocal forest (possibly with isolated tiles) into a perfect maze."""
    fixed = broken.copy()
    _repair(fixed, rng)
    return fixed


def maze_metric(grid: np.ndarray, metric_id: str, path_count: str = "tiles") -> float:
    """One of the five structural metrics, each in [0, 1].

    H: fraction of tiles matching their Y-axis mirror partner (east/west bits
    swapped); B: fraction matching both mirrors at once; L: corner corridor
    tiles (exactly two connections at a right angle) over T; I: straight
    corridor tiles over T; P: 1 - |2P/T - 1| for shortest-path size P between
    the top-left and bottom-right tiles. `path_count` switches P between tile
    count (default) and move count.
    """
    vals = _metric_values(grid, path_count)
    try:
        return vals[MAZE_METRICS.index(metric_id)]
    except ValueError:
        raise ValueError(f"unknown maze metric {metric_id!r}; known: {MAZE_METRICS}") from None


def _metric_values(grid: np.ndarray, path_count: str = "tiles") -> Tuple[float, ...]:
    total = grid.size
    n_h, n_b, n_l, n_i, p_tiles = _structure_counts(grid)
    if p_tiles <= 0:
        raise ValueError("maze is disconnected; metrics need a perfect maze")
    p = p_tiles if path_count == "tiles" else p_tiles - 1
    return (
        n_h / total,
        n_b / total,
        n_l / total,
        n_i / total,
        1.0 - abs(2.0 * p / total - 1.0),
    )


@dataclass(frozen=True)
class MetricAssignment:
    fitness: str
    behavior: Tuple[str, str]

    def __post_init__(self):
        ids = (self.fitness, *self.behavior)
        for m in ids:
            if m not in MAZE_METRICS:
                raise ValueError(f"unknown maze metric {m!r}; known: {MAZE_METRICS}")
        if len(set(ids)) != 3:
            raise ValueError("fitness and behavior metrics must be three distinct ids")

    @property
    def label(self) -> str:
        return f"{self.fitness}-{self.behavior[0]}{self.behavior[1]}"


def enumerate_assignments() -> Tuple[MetricAssignment, ...]:
    """All 30 distinct fitness/behavior combinations (behavior pair unordered)."""
    out = []
    for fit in MAZE_METRICS:
        rest = [m for m in MAZE_METRICS if m != fit]
        for pair in combinations(rest, 2):
            out.append(MetricAssignment(fit, pair))
    return tuple(out)


def maze_to_text(grid: np.ndarray) -> str:
    """Serialize: "width height" header then one line of tile IDs per row."""
    h, w = grid.shape
    lines = [f"{w} {h}"]
    for r in range(h):
        lines.append(" ".join(str(int(v)) for v in grid[r]))
    return "\n".join(lines) + "\n"


def maze_from_text(text: str) -> np.ndarray:
    rows = [line for line in text.strip().splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty maze text")
    header = rows[0].split()
    if len(header) != 2:
        raise ValueError("maze header must be 'width height'")
    w, h = int(header[0]), int(header[1])
    if len(rows) != h + 1:
        raise ValueError(f"expected {h} tile rows, found {len(rows) - 1}")
    grid = np.zeros((h, w), np.uint8)
    for r, line in enumerate(rows[1:]):
        vals = line.split()
        if len(vals) != w:
            raise ValueError(f"row {r} has {len(vals)} tiles, expected {w}")
        for c, v in enumerate(vals):
            iv = int(v)
            if not 0 <= iv <= 15:
                raise ValueError(f"tile ID {iv} at ({r}, {c}) outside 0..15")
            grid[r, c] = iv
    return grid


class MazeTestbed:
    name = "maze"
    maximize = True
    bounds = ((0.0, 1.0), (0.0, 1.0))
    default_resolution = (50, 50)
    genome_dtype = np.uint8

    def __init__(self, width=8, height=8, fitness_metric="P", behavior_metrics=("H", "L"),
                 path_count="tiles"):
        self.width = int(width)
        self.height = int(height)
        if self.width < 2 or self.height < 2:
            raise ValueError("maze needs width and height >= 2")
        if path_count not in ("tiles", "moves"):
            raise ValueError("path_count must be 'tiles' or 'moves'")
        behavior = tuple(behavior_metrics)
        if len(behavior) != 2:
            raise ValueError("behavior_metrics must name two maze metrics")
        self.assignment = MetricAssignment(fitness_metric, behavior)
        self.path_count = path_count
        self.genome_size = self.width * self.height
        self._fit_idx = MAZE_METRICS.index(self.assignment.fitness)
        self._b1_idx = MAZE_METRICS.index(behavior[0])
        self._b2_idx = MAZE_METRICS.index(behavior[1])

    def _grid(self, genome) -> np.ndarray:
        return np.asarray(genome).reshape(self.height, self.width)

    def random_genome(self, rng) -> np.ndarray:
        return maze_generate(self.width, self.height, rng).ravel()

    def mutate(self, genome, rng) -> np.ndarray:
        return maze_mutate(self._grid(genome), rng).ravel()

    def fitness(self, genome) -> float:
        return self.evaluate(genome)[0]

    def descriptor(self, genome):
        return self.evaluate(genome)[1]

    def evaluate(self, genome):
        vals = _metric_values(self._grid(genome), self.path_count)
        return vals[self._fit_idx], (vals[self._b1_idx], vals[self._b2_idx])

    def normalize(self, fitness):
        return fitness

    def stepper(self):
        """Fused loop kernel plus its testbed-specific trailing arguments."""
        return _chunk, (self.height, self.width, self._fit_idx, self._b1_idx,
                        self._b2_idx, self.path_count == "moves")

    def describe(self) -> dict:
        return {
            "name": self.name,
            "width": self.width,
            "height": self.height,
            "fitness_metric": self.assignment.fitness,
            "behavior_metrics": list(self.assignment.behavior),
            "path_count": self.path_count,
            "destroy_prob": DESTROY_PROB,
            "direction": "maximize",
        }

    @property
    def treatment(self) -> str:
        return f"maze-{self.width}x{self.height}-{self.assignment.label}"

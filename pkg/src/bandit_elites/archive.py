"""2-D elite archive with per-individual and per-cell bandit bookkeeping.

The map state lives in flat numpy arrays so selection kernels can scan it
directly; dataclass views are materialized on demand for inspection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

import numpy as np

Cell = Tuple[int, int]


class InsertOutcome(Enum):
    NEW_CELL = "new_cell"
    REPLACED = "replaced"
    DISCARDED = "discarded"

    @property
    def survived(self) -> bool:
        return self is not InsertOutcome.DISCARDED


class EvaluationFault(RuntimeError):
    """A testbed produced a non-finite fitness; the run must abort."""


@dataclass
class EliteStats:
    selections: int
    survivals: int
    curiosity: float


@dataclass
class CellStats:
    selections: int
    survivals: int


@dataclass
class Elite:
    genome: np.ndarray
    fitness: float
    descriptor: Tuple[float, float]
    stats: EliteStats


class FeatureMap:
    """Grid archive holding at most one elite per cell.

    Replacement requires strictly better fitness under the configured
    direction; ties discard the offspring. Cells never empty out. Per-cell
    counters (selections/survivals of any occupant ever) persist across
    replacement, per-occupant stats reset. Descriptors outside the bounds are
    clamped before binning and the upper boundary maps to the last cell.
    """

    def __init__(self, bounds, resolution, maximize, genome_size, genome_dtype=np.float64):
        (self.lo1, self.hi1), (self.lo2, self.hi2) = (
            (float(bounds[0][0]), float(bounds[0][1])),
            (float(bounds[1][0]), float(bounds[1][1])),
        )
        if not (math.isfinite(self.lo1) and math.isfinite(self.hi1)
                and math.isfinite(self.lo2) and math.isfinite(self.hi2)):
            raise ValueError("map bounds must be finite")
        if self.hi1 <= self.lo1 or self.hi2 <= self.lo2:
            raise ValueError("map bounds must have positive extent")
        self.rows, self.cols = int(resolution[0]), int(resolution[1])
        if self.rows < 1 or self.cols < 1:
            raise ValueError("resolution must be >= 1 per dimension")
        self.maximize = bool(maximize)
        self.sign = 1.0 if self.maximize else -1.0
        n = self.rows * self.cols
        self.n_cells = n

        self.fitness = np.full(n, np.nan)
        self.descriptors = np.zeros((n, 2))
        self.genomes = np.zeros((n, int(genome_size)), dtype=genome_dtype)
        self.sel_i = np.zeros(n, np.int64)
        self.surv_i = np.zeros(n, np.int64)
        self.curiosity = np.zeros(n)
        self.sel_c = np.zeros(n, np.int64)
        self.surv_c = np.zeros(n, np.int64)
        self.generation = np.zeros(n, np.int64)

        # factored selection scores, maintained incrementally:
        # score = ratio + c * bonus with ratio = w/n (+inf while n = 0,
        # -inf for empty cells) and bonus = 1/sqrt(n) (0 while n = 0).
        self.ratio_i = np.full(n, -np.inf)
        self.bonus_i = np.zeros(n)
        self.ratio_c = np.full(n, -np.inf)
        self.bonus_c = np.zeros(n)

        self.occupied = np.zeros(n, np.int64)
        self.occupied_count = 0
        self._ties = np.empty(n, np.int64)

        self.total_selections = 0
        self.evaluations = 0
        self._pending: Optional[Tuple[int, int]] = None

    @property
    def resolution(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def bounds(self):
        return ((self.lo1, self.hi1), (self.lo2, self.hi2))

    @property
    def coverage(self) -> float:
        return self.occupied_count / self.n_cells

    @staticmethod
    def _bin(v: float, lo: float, hi: float, n: int) -> int:
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        idx = int((v - lo) * n / (hi - lo))
        return n - 1 if idx >= n else idx

    def map_to_cell(self, descriptor) -> Cell:
        b1, b2 = descriptor
        return (
            self._bin(float(b1), self.lo1, self.hi1, self.rows),
            self._bin(float(b2), self.lo2, self.hi2, self.cols),
        )

    def _flat(self, cell: Cell) -> int:
        r, c = cell
        return r * self.cols + c

    def try_insert(self, genome, fitness, descriptor) -> InsertOutcome:
        f = float(fitness)
        if not math.isfinite(f):
            raise EvaluationFault(
                f"non-finite fitness {fitness!r} for descriptor {tuple(descriptor)!r}")
        r, c = self.map_to_cell(descriptor)
        j = r * self.cols + c
        self.evaluations += 1
        current = self.fitness[j]
        if np.isnan(current):
            self._store(j, genome, f, descriptor)
            self.occupied[self.occupied_count] = j
            self.occupied_count += 1
            self.ratio_c[j] = np.inf  # cell never selected yet
            return InsertOutcome.NEW_CELL
        if (f > current) if self.maximize else (f < current):
            self._store(j, genome, f, descriptor)
            return InsertOutcome.REPLACED
        return InsertOutcome.DISCARDED

    def _store(self, j: int, genome, f: float, descriptor) -> None:
        self.fitness[j] = f
        self.descriptors[j, 0] = descriptor[0]
        self.descriptors[j, 1] = descriptor[1]
        self.genomes[j] = genome
        self.generation[j] += 1
        self.sel_i[j] = 0
        self.surv_i[j] = 0
        self.curiosity[j] = 0.0
        self.ratio_i[j] = np.inf
        self.bonus_i[j] = 0.0

    def record_selection(self, cell: Cell) -> None:
        """Credit a parent selection to the occupant and its cell.

        Called once right after the parent is chosen; the occupant is captured
        here so a later self-replacement cannot redirect the credit.
        """
        j = self._flat(cell)
        if np.isnan(self.fitness[j]):
            raise ValueError(f"record_selection on empty cell {cell}")
        ni = self.sel_i[j] + 1
        self.sel_i[j] = ni
        self.ratio_i[j] = self.surv_i[j] / ni
        self.bonus_i[j] = 1.0 / math.sqrt(ni)
        nc = self.sel_c[j] + 1
        self.sel_c[j] = nc
        self.ratio_c[j] = self.surv_c[j] / nc
        self.bonus_c[j] = 1.0 / math.sqrt(nc)
        self.total_selections += 1
        self._pending = (j, int(self.generation[j]))

    def record_outcome(self, cell: Cell, outcome: InsertOutcome) -> None:
        """Credit the insert outcome of the offspring to the captured parent.

        Cell counters always take the survival; the captured occupant takes
        w_i/curiosity only if it still occupies the cell (a parent replaced by
        its own offspring carries its credit out of the map).
        """
        j = self._flat(cell)
        pending = self._pending
        if pending is None or pending[0] != j:
            raise ValueError("record_outcome without a matching record_selection")
        self._pending = None
        if outcome.survived:
            wc = self.surv_c[j] + 1
            self.surv_c[j] = wc
            self.ratio_c[j] = wc / self.sel_c[j]
            if self.generation[j] == pending[1]:
                wi = self.surv_i[j] + 1
                self.surv_i[j] = wi
                self.ratio_i[j] = wi / self.sel_i[j]
                self.curiosity[j] += 1.0
        elif self.generation[j] == pending[1]:
            # only the captured occupant pays; a replaced parent took its
            # stats out of the map
            self.curiosity[j] -= 0.5

    def elite_at(self, cell: Cell) -> Optional[Elite]:
        j = self._flat(cell)
        if np.isnan(self.fitness[j]):
            return None
        return Elite(
            genome=self.genomes[j].copy(),
            fitness=float(self.fitness[j]),
            descriptor=(float(self.descriptors[j, 0]), float(self.descriptors[j, 1])),
            stats=EliteStats(int(self.sel_i[j]), int(self.surv_i[j]), float(self.curiosity[j])),
        )

    def cell_stats(self, cell: Cell) -> CellStats:
        j = self._flat(cell)
        return CellStats(int(self.sel_c[j]), int(self.surv_c[j]))

    def genome_at(self, cell: Cell) -> np.ndarray:
        """View into archive storage; treat as read-only."""
        return self.genomes[self._flat(cell)]

    def occupied_cells(self) -> Iterator[Cell]:
        for j in self.occupied[: self.occupied_count]:
            yield (int(j) // self.cols, int(j) % self.cols)

    def fitness_grid(self) -> np.ndarray:
        """Raw fitness per cell, NaN where empty."""
        return self.fitness.reshape(self.rows, self.cols).copy()

    def selection_grid(self) -> np.ndarray:
        """Per-cell selection counts (all occupants ever)."""
        return self.sel_c.reshape(self.rows, self.cols).copy()

    def _recompute_derived(self) -> None:
        """Rebuild factored scores and the occupied list from the counters.

        Only needed after bulk state manipulation (e.g. tests injecting
        synthetic archive states); normal operations maintain these
        incrementally.
        """
        occ = np.flatnonzero(~np.isnan(self.fitness))
        self.occupied_count = len(occ)
        self.occupied[: len(occ)] = occ
        with np.errstate(divide="ignore", invalid="ignore"):
            self.ratio_i[:] = -np.inf
            self.ratio_c[:] = -np.inf
            self.ratio_i[occ] = np.where(
                self.sel_i[occ] > 0, self.surv_i[occ] / self.sel_i[occ], np.inf)
            self.ratio_c[occ] = np.where(
                self.sel_c[occ] > 0, self.surv_c[occ] / self.sel_c[occ], np.inf)
            self.bonus_i[:] = np.where(self.sel_i > 0, 1.0 / np.sqrt(self.sel_i), 0.0)
            self.bonus_c[:] = np.where(self.sel_c > 0, 1.0 / np.sqrt(self.sel_c), 0.0)
        self.total_selections = int(self.sel_c.sum())

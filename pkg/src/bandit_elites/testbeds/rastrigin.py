"""6-D Rastrigin testbed: minimized fitness, first two genes as descriptor."""
from __future__ import annotations

import numpy as np
from numba import njit

from .._kernels import (insert_core, record_outcome_core,
                        record_selection_core, select_index)

GENE_LO = -5.12
GENE_HI = 5.12
MUTATION_STEP = 0.256
DIMS = 6


@njit(cache=True)
def _fitness(x):
    s = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        s += v * v - 10.0 * np.cos(2.0 * np.pi * v)
    return 10.0 * x.shape[0] + s


@njit(cache=True)
def _mutate(parent, child, step, lo, hi, rng):
    for i in range(parent.shape[0]):
        v = parent[i] + rng.uniform(-step, step)
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        child[i] = v


@njit(cache=True)
def _random_fill(out, lo, hi, rng):
    for i in range(out.shape[0]):
        out[i] = rng.uniform(lo, hi)


@njit(cache=True)
def _chunk(iters, code, lam, rng, fitness, descriptors, genomes,
           sel_i, surv_i, sel_c, surv_c, curiosity, generation,
           ratio_i, bonus_i, ratio_c, bonus_c, occupied, ties, state,
           rows, cols, lo1, hi1, lo2, hi2, sign, maximize):
    """Fused select/mutate/evaluate/insert loop; returns iterations completed."""
    child = np.empty(genomes.shape[1])
    for it in range(iters):
        j = select_index(code, lam, fitness, sign, sel_i, sel_c, curiosity,
                         ratio_i, bonus_i, ratio_c, bonus_c,
                         occupied, state[2], state[0], ties, rng)
        record_selection_core(j, sel_i, surv_i, sel_c, surv_c,
                              ratio_i, bonus_i, ratio_c, bonus_c, state)
        pend = generation[j]
        _mutate(genomes[j], child, MUTATION_STEP, GENE_LO, GENE_HI, rng)
        f = _fitness(child)
        if not np.isfinite(f):
            return it
        outcome = insert_core(child, f, child[0], child[1], fitness,
                              descriptors, genomes, sel_i, surv_i, curiosity,
                              ratio_i, bonus_i, ratio_c, generation, occupied,
                              state, rows, cols, lo1, hi1, lo2, hi2, maximize)
        record_outcome_core(j, outcome != 2, pend, sel_i, surv_i, sel_c,
                            surv_c, ratio_i, ratio_c, curiosity, generation)
    return iters


_F_MAX = None


def rastrigin_f_max() -> float:
    """Fitness upper bound: 10*D + D * max of the 1-D term, brute-forced once.

    The per-gene term is separable, so a 1e6-point grid over one gene bounds
    the sum. Cached per process; the value is recorded in run manifests.
    """
    global _F_MAX
    if _F_MAX is None:
        g = np.linspace(GENE_LO, GENE_HI, 1_000_000)
        t = g * g - 10.0 * np.cos(2.0 * np.pi * g)
        _F_MAX = float(10.0 * DIMS + DIMS * t.max())
    return _F_MAX


class RastriginTestbed:
    """Classic multimodal landscape; global minimum 0 at the origin."""

    name = "rastrigin6"
    genome_size = DIMS
    genome_dtype = np.float64
    bounds = ((GENE_LO, GENE_HI), (GENE_LO, GENE_HI))
    default_resolution = (100, 100)
    maximize = False

    def __init__(self):
        self.f_max = rastrigin_f_max()

    def random_genome(self, rng) -> np.ndarray:
        out = np.empty(DIMS)
        _random_fill(out, GENE_LO, GENE_HI, rng)
        return out

    def mutate(self, genome, rng) -> np.ndarray:
        """Independent uniform offset in [-0.256, 0.256] per gene, truncated."""
        child = np.empty(DIMS)
        _mutate(genome, child, MUTATION_STEP, GENE_LO, GENE_HI, rng)
        return child

    def fitness(self, genome) -> float:
        return float(_fitness(np.asarray(genome)))

    def descriptor(self, genome):
        return (float(genome[0]), float(genome[1]))

    def evaluate(self, genome):
        return self.fitness(genome), self.descriptor(genome)

    def normalize(self, fitness):
        """Map to [0, 1] with 1 at the global optimum."""
        return 1.0 - fitness / self.f_max

    def stepper(self):
        """Fused loop kernel plus its testbed-specific trailing arguments."""
        return _chunk, ()

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dims": DIMS,
            "bounds": [GENE_LO, GENE_HI],
            "mutation_step": MUTATION_STEP,
            "direction": "minimize",
            "f_max": self.f_max,
        }

    @property
    def treatment(self) -> str:
        return self.name

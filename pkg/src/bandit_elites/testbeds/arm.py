"""Planar arm repertoire testbed.

Genome is one angle per joint in [-pi, pi]; fitness is the negated mean
squared deviation from the mean angle (max 0 when all joints agree);
descriptor is the endpoint of cumulative-angle forward kinematics.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .._kernels import (insert_core, record_outcome_core,
                        record_selection_core, select_index)

ANGLE_LIMIT = math.pi
MUTATION_STEP = 0.1 * math.pi
DEFAULT_JOINTS = 12


@njit(cache=True)
def _fitness(theta):
    n = theta.shape[0]
    mu = 0.0
    for i in range(n):
        mu += theta[i]
    mu /= n
    s = 0.0
    for i in range(n):
        d = theta[i] - mu
        s += d * d
    return -s / n


@njit(cache=True)
def _endpoint(theta, lengths):
    x = 0.0
    y = 0.0
    a = 0.0
    for i in range(theta.shape[0]):
        a += theta[i]
        x += lengths[i] * np.cos(a)
        y += lengths[i] * np.sin(a)
    return x, y


@njit(cache=True)
def _mutate(parent, child, step, rng):
    for i in range(parent.shape[0]):
        v = parent[i] + rng.uniform(-step, step)
        # wrap, not clamp: joints rotate freely
        child[i] = (v + np.pi) % (2.0 * np.pi) - np.pi


@njit(cache=True)
def _random_fill(out, limit, rng):
    for i in range(out.shape[0]):
        out[i] = rng.uniform(-limit, limit)


@njit(cache=True)
def _chunk(iters, code, lam, rng, fitness, descriptors, genomes,
           sel_i, surv_i, sel_c, surv_c, curiosity, generation,
           ratio_i, bonus_i, ratio_c, bonus_c, occupied, ties, state,
           rows, cols, lo1, hi1, lo2, hi2, sign, maximize, lengths):
    """Fused select/mutate/evaluate/insert loop; returns iterations completed."""
    child = np.empty(genomes.shape[1])
    for it in range(iters):
        j = select_index(code, lam, fitness, sign, sel_i, sel_c, curiosity,
                         ratio_i, bonus_i, ratio_c, bonus_c,
                         occupied, state[2], state[0], ties, rng)
        record_selection_core(j, sel_i, surv_i, sel_c, surv_c,
                              ratio_i, bonus_i, ratio_c, bonus_c, state)
        pend = generation[j]
        _mutate(genomes[j], child, MUTATION_STEP, rng)
        f = _fitness(child)
        if not np.isfinite(f):
            return it
        x, y = _endpoint(child, lengths)
        outcome = insert_core(child, f, x, y, fitness, descriptors, genomes,
                              sel_i, surv_i, curiosity, ratio_i, bonus_i,
                              ratio_c, generation, occupied, state,
                              rows, cols, lo1, hi1, lo2, hi2, maximize)
        record_outcome_core(j, outcome != 2, pend, sel_i, surv_i, sel_c,
                            surv_c, ratio_i, ratio_c, curiosity, generation)
    return iters


_V_MAX = {}


def arm_v_max(joints: int = DEFAULT_JOINTS) -> float:
    """Maximum mean squared angle deviation over the joint box, found numerically.

    Random restarts followed by coordinate pushes to the +/-pi faces; the
    objective is convex in each angle so every push is exact. Fixed internal
    seed keeps the constant process-stable. Cached per joint count.
    """
    if joints not in _V_MAX:
        rng = np.random.default_rng(170_701)
        best_v = -1.0
        for _ in range(64):
            theta = rng.uniform(-ANGLE_LIMIT, ANGLE_LIMIT, joints)
            for _ in range(64):
                changed = False
                for i in range(joints):
                    keep = theta[i]
                    scored = []
                    for cand in (-ANGLE_LIMIT, ANGLE_LIMIT):
                        theta[i] = cand
                        scored.append((-_fitness(theta), cand))
                    _, cand = max(scored)
                    theta[i] = cand
                    if cand != keep:
                        changed = True
                if not changed:
                    break
            v = -_fitness(theta)
            if v > best_v:
                best_v = v
        _V_MAX[joints] = float(best_v)
    return _V_MAX[joints]


class ArmTestbed:
    name = "arm12"
    maximize = True

    def __init__(self, joints: int = DEFAULT_JOINTS, lengths=None):
        self.joints = int(joints)
        if self.joints < 2:
            raise ValueError("arm needs >= 2 joints")
        if lengths is None:
            lengths = np.full(self.joints, 1.0 / self.joints)
        else:
            lengths = np.asarray(lengths, dtype=float)
            if lengths.shape != (self.joints,):
                raise ValueError("lengths must have one entry per joint")
        self.lengths = lengths
        reach = float(lengths.sum())
        self.genome_size = self.joints
        self.genome_dtype = np.float64
        self.bounds = ((-reach, reach), (-reach, reach))
        self.default_resolution = (100, 100)
        self.v_max = arm_v_max(self.joints)

    def random_genome(self, rng) -> np.ndarray:
        out = np.empty(self.joints)
        _random_fill(out, ANGLE_LIMIT, rng)
        return out

    def mutate(self, genome, rng) -> np.ndarray:
        """Independent uniform offset in [-0.1pi, 0.1pi] per joint, wrapped."""
        child = np.empty(self.joints)
        _mutate(genome, child, MUTATION_STEP, rng)
        return child

    def fitness(self, genome) -> float:
        return float(_fitness(np.asarray(genome)))

    def descriptor(self, genome):
        x, y = _endpoint(np.asarray(genome), self.lengths)
        return (float(x), float(y))

    def evaluate(self, genome):
        g = np.asarray(genome)
        x, y = _endpoint(g, self.lengths)
        return float(_fitness(g)), (float(x), float(y))

    def normalize(self, fitness):
        """Map to [0, 1] with 1 at zero variance."""
        return 1.0 + fitness / self.v_max

    def stepper(self):
        """Fused loop kernel plus its testbed-specific trailing arguments."""
        return _chunk, (self.lengths,)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "joints": self.joints,
            "lengths": [float(v) for v in self.lengths],
            "mutation_step": MUTATION_STEP,
            "direction": "maximize",
            "v_max": self.v_max,
        }

    @property
    def treatment(self) -> str:
        return self.name if self.joints == DEFAULT_JOINTS else f"arm{self.joints}"

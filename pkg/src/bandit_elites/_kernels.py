"""Numba kernels for the selection and archive hot paths.

The scan kernels take a tie scratch buffer and a single uniform draw `u` in
[0, 1) so the caller owns the random stream. Score arrays use -inf for empty
cells and +inf for never-selected occupants, which makes the argmax
branch-free.

The *_core functions mirror the FeatureMap methods operation for operation;
testbed chunk loops call them so fused runs stay draw-for-draw identical to
the per-call Python path. The shared mutable scalars travel in a 3-slot
int64 `state` array: [0] total selections, [1] evaluations, [2] occupied
cell count.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

STATE_TOTAL = 0
STATE_EVALS = 1
STATE_OCC = 2


@njit(cache=True)
def argmax_factored(ratio, bonus, c, ties, u):
    """Argmax of ratio[i] + c * bonus[i] with exact tie collection."""
    best = -np.inf
    count = 0
    for i in range(ratio.shape[0]):
        s = ratio[i] + c * bonus[i]
        if s > best:
            best = s
            ties[0] = i
            count = 1
        elif s == best:
            ties[count] = i
            count += 1
    return ties[int(u * count)]


@njit(cache=True)
def argmin_counts(counts, occupied, n_occ, ties, u):
    """Least-selected occupied cell; equivalent to argmax of 1/n with n=0 first."""
    best = np.int64(2**62)
    count = 0
    for j in range(n_occ):
        i = occupied[j]
        v = counts[i]
        if v < best:
            best = v
            ties[0] = i
            count = 1
        elif v == best:
            ties[count] = i
            count += 1
    return ties[int(u * count)]


@njit(cache=True)
def argmax_fitness(fitness, sign, occupied, n_occ, ties, u):
    """Best raw fitness under the map's direction (sign = +1 max, -1 min)."""
    best = -np.inf
    count = 0
    for j in range(n_occ):
        i = occupied[j]
        v = sign * fitness[i]
        if v > best:
            best = v
            ties[0] = i
            count = 1
        elif v == best:
            ties[count] = i
            count += 1
    return ties[int(u * count)]


@njit(cache=True)
def curiosity_pick(curiosity, occupied, n_occ, u):
    """Roulette over max(curiosity, 0); all-zero mass falls back to uniform.

    One draw serves both paths so stream use per call is fixed.
    """
    total = 0.0
    for j in range(n_occ):
        v = curiosity[occupied[j]]
        if v > 0.0:
            total += v
    if total <= 0.0:
        return occupied[int(u * n_occ)]
    target = u * total
    acc = 0.0
    last = occupied[0]
    for j in range(n_occ):
        i = occupied[j]
        v = curiosity[i]
        if v > 0.0:
            last = i
            acc += v
            if target < acc:
                return i
    return last


@njit(cache=True)
def select_index(code, lam, fitness, sign, sel_i, sel_c, curiosity,
                 ratio_i, bonus_i, ratio_c, bonus_c, occupied, n_occ,
                 total, ties, rng):
    """Policy dispatch by code (index into the canonical policy name order).

    Draw usage matches select_parent: one bounded integer for uniform, one
    uniform for everything else.
    """
    if code == 7:  # uniform
        return occupied[int(rng.integers(0, n_occ))]
    if code == 6:  # greedy
        return argmax_fitness(fitness, sign, occupied, n_occ, ties, rng.random())
    if code == 8:  # curiosity
        return curiosity_pick(curiosity, occupied, n_occ, rng.random())
    if code == 4:  # explore_individual
        return argmin_counts(sel_i, occupied, n_occ, ties, rng.random())
    if code == 5:  # explore_cell
        return argmin_counts(sel_c, occupied, n_occ, ties, rng.random())
    c = lam * math.sqrt(math.log(total)) if total >= 1 else 0.0
    if code == 0 or code == 2:  # ucb_individual, exploit_individual
        return argmax_factored(ratio_i, bonus_i, c, ties, rng.random())
    return argmax_factored(ratio_c, bonus_c, c, ties, rng.random())


@njit(cache=True)
def bin_index(v, lo, hi, n):
    """Clamp then bin; the upper bound maps into the last cell."""
    if v < lo:
        v = lo
    elif v > hi:
        v = hi
    idx = int((v - lo) * n / (hi - lo))
    return n - 1 if idx >= n else idx


@njit(cache=True)
def store_core(j, child, f, d1, d2, fitness, descriptors, genomes,
               sel_i, surv_i, curiosity, ratio_i, bonus_i, generation):
    fitness[j] = f
    descriptors[j, 0] = d1
    descriptors[j, 1] = d2
    genomes[j] = child
    generation[j] += 1
    sel_i[j] = 0
    surv_i[j] = 0
    curiosity[j] = 0.0
    ratio_i[j] = np.inf
    bonus_i[j] = 0.0


@njit(cache=True)
def insert_core(child, f, d1, d2, fitness, descriptors, genomes,
                sel_i, surv_i, curiosity, ratio_i, bonus_i, ratio_c,
                generation, occupied, state, rows, cols,
                lo1, hi1, lo2, hi2, maximize):
    """try_insert without the Python wrapper; returns 0 new, 1 replaced, 2 discarded."""
    r = bin_index(d1, lo1, hi1, rows)
    c = bin_index(d2, lo2, hi2, cols)
    j = r * cols + c
    state[STATE_EVALS] += 1
    current = fitness[j]
    if np.isnan(current):
        store_core(j, child, f, d1, d2, fitness, descriptors, genomes,
                   sel_i, surv_i, curiosity, ratio_i, bonus_i, generation)
        occupied[state[STATE_OCC]] = j
        state[STATE_OCC] += 1
        ratio_c[j] = np.inf
        return 0
    better = (f > current) if maximize else (f < current)
    if better:
        store_core(j, child, f, d1, d2, fitness, descriptors, genomes,
                   sel_i, surv_i, curiosity, ratio_i, bonus_i, generation)
        return 1
    return 2


@njit(cache=True)
def record_selection_core(j, sel_i, surv_i, sel_c, surv_c,
                          ratio_i, bonus_i, ratio_c, bonus_c, state):
    ni = sel_i[j] + 1
    sel_i[j] = ni
    ratio_i[j] = surv_i[j] / ni
    bonus_i[j] = 1.0 / math.sqrt(ni)
    nc = sel_c[j] + 1
    sel_c[j] = nc
    ratio_c[j] = surv_c[j] / nc
    bonus_c[j] = 1.0 / math.sqrt(nc)
    state[STATE_TOTAL] += 1


@njit(cache=True)
def record_outcome_core(j, survived, pend_gen, sel_i, surv_i, sel_c, surv_c,
                        ratio_i, ratio_c, curiosity, generation):
    if survived:
        wc = surv_c[j] + 1
        surv_c[j] = wc
        ratio_c[j] = wc / sel_c[j]
        if generation[j] == pend_gen:
            wi = surv_i[j] + 1
            surv_i[j] = wi
            ratio_i[j] = wi / sel_i[j]
            curiosity[j] += 1.0
    elif generation[j] == pend_gen:
        curiosity[j] -= 0.5

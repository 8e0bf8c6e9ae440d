"""Parent-selection policies over a feature map.

Nine policies: UCB and its exploit-only (lambda = 0) and explore-only (1/n)
simplifications, each in an individual-statistics and a cell-statistics
flavor, plus greedy-by-fitness, uniform, and curiosity-proportionate
selection. Ties are always broken uniformly at random; a never-selected
individual or cell scores +inf and therefore takes absolute priority.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .archive import Cell, FeatureMap

UCB_LAMBDA = 1.0 / math.sqrt(2.0)

POLICY_NAMES = (
    "ucb_individual",
    "ucb_cell",
    "exploit_individual",
    "exploit_cell",
    "explore_individual",
    "explore_cell",
    "greedy",
    "uniform",
    "curiosity",
)

_UCB_KINDS = frozenset({"ucb_individual", "ucb_cell"})
_EXPLOIT_KINDS = frozenset({"exploit_individual", "exploit_cell"})


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str
    lam: float = 0.0

    @classmethod
    def from_name(cls, name: str, lam: float | None = None) -> "SelectionPolicy":
        if name not in POLICY_NAMES:
            raise ValueError(f"unknown selection policy {name!r}; known: {', '.join(POLICY_NAMES)}")
        if name in _UCB_KINDS:
            value = UCB_LAMBDA if lam is None else float(lam)
        elif name in _EXPLOIT_KINDS:
            value = 0.0 if lam is None else float(lam)
        else:
            value = 0.0  # lambda is meaningless for explore/greedy/uniform/curiosity
        if value < 0.0:
            raise ValueError("lambda must be >= 0")
        return cls(name, value)


def ucb_score(survivals: int, selections: int, total_selections: int, lam: float) -> float:
    """Mean survival rate plus the lambda-scaled uncertainty bonus.

    Returns +inf while the individual (or cell) has never been selected.
    """
    if survivals > selections:
        raise ValueError(f"survivals {survivals} exceed selections {selections}")
    if selections == 0:
        return math.inf
    return survivals / selections + lam * math.sqrt(math.log(total_selections) / selections)


def exploration_score(selections: int) -> float:
    """Pure exploration: 1/n, +inf for the never selected."""
    if selections == 0:
        return math.inf
    return 1.0 / selections


def select_parent(fmap: FeatureMap, policy: SelectionPolicy, rng) -> Cell:
    """Return the cell of the chosen parent; the map must hold >= 1 elite."""
    n_occ = fmap.occupied_count
    if n_occ == 0:
        raise ValueError("select_parent on an empty map")
    kind = policy.kind
    if kind == "uniform":
        j = fmap.occupied[rng.integers(n_occ)]
    elif kind == "greedy":
        j = _kernels.argmax_fitness(
            fmap.fitness, fmap.sign, fmap.occupied, n_occ, fmap._ties, rng.random())
    elif kind == "curiosity":
        j = _kernels.curiosity_pick(fmap.curiosity, fmap.occupied, n_occ, rng.random())
    elif kind == "explore_individual":
        j = _kernels.argmin_counts(
            fmap.sel_i, fmap.occupied, n_occ, fmap._ties, rng.random())
    elif kind == "explore_cell":
        j = _kernels.argmin_counts(
            fmap.sel_c, fmap.occupied, n_occ, fmap._ties, rng.random())
    else:
        total = fmap.total_selections
        # ln(N_s) appears only multiplied by 1/sqrt(n); guard N_s = 0, where
        # every candidate is unvisited anyway and the bonus must stay out of
        # inf * 0 territory.
        c = policy.lam * math.sqrt(math.log(total)) if total >= 1 else 0.0
        if kind in ("ucb_individual", "exploit_individual"):
            j = _kernels.argmax_factored(fmap.ratio_i, fmap.bonus_i, c, fmap._ties, rng.random())
        else:
            j = _kernels.argmax_factored(fmap.ratio_c, fmap.bonus_c, c, fmap._ties, rng.random())
    j = int(j)
    return (j // fmap.cols, j % fmap.cols)

"""MAP-Elites with bandit-style parent selection, plus a benchmark harness.

The archive keeps one elite per behavior-space cell; selection policies
(UCB variants, curiosity, greedy, uniform) pick parents from per-individual
or per-cell selection/survival statistics. Testbeds, metrics, a seeded
runner, and significance analysis reproduce the accompanying experiments.
"""
from .archive import (Cell, CellStats, Elite, EliteStats, EvaluationFault,
                      FeatureMap, InsertOutcome)
from .metrics import (MetricVector, coverage, global_performance, qd_score,
                      qd_score_normalized, selection_entropy)
from .runner import (RunConfig, RunRecord, Snapshot, checkpoint_schedule,
                     execute_experiment, run, run_experiment)
from .selection import (POLICY_NAMES, UCB_LAMBDA, SelectionPolicy,
                        exploration_score, select_parent, ucb_score)
from .testbeds import make_testbed

__version__ = "0.1.0"

__all__ = [
    "Cell",
    "CellStats",
    "Elite",
    "EliteStats",
    "EvaluationFault",
    "FeatureMap",
    "InsertOutcome",
    "MetricVector",
    "POLICY_NAMES",
    "RunConfig",
    "RunRecord",
    "SelectionPolicy",
    "Snapshot",
    "UCB_LAMBDA",
    "checkpoint_schedule",
    "coverage",
    "execute_experiment",
    "exploration_score",
    "global_performance",
    "make_testbed",
    "qd_score",
    "qd_score_normalized",
    "run",
    "run_experiment",
    "select_parent",
    "selection_entropy",
    "ucb_score",
]

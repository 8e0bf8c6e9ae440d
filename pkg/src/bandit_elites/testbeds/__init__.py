"""Benchmark testbeds.

Each testbed owns its genome representation, random init, mutation, fitness,
behavior descriptor, archive geometry (bounds, resolution, direction), and
the normalization used by reporting metrics.
"""
from __future__ import annotations

from .arm import ArmTestbed, arm_v_max
from .maze import (
    MAZE_METRICS,
    MazeTestbed,
    MetricAssignment,
    enumerate_assignments,
    maze_from_text,
    maze_generate,
    maze_metric,
    maze_mutate,
    maze_repair,
    maze_to_text,
)
from .rastrigin import RastriginTestbed, rastrigin_f_max

TESTBEDS = {
    "rastrigin6": RastriginTestbed,
    "arm12": ArmTestbed,
    "maze": MazeTestbed,
}


def make_testbed(name: str, **params):
    try:
        cls = TESTBEDS[name]
    except KeyError:
        raise ValueError(
            f"unknown testbed {name!r}; known: {', '.join(sorted(TESTBEDS))}") from None
    return cls(**params)


__all__ = [
    "ArmTestbed",
    "MazeTestbed",
    "MetricAssignment",
    "MAZE_METRICS",
    "RastriginTestbed",
    "TESTBEDS",
    "arm_v_max",
    "enumerate_assignments",
    "make_testbed",
    "maze_from_text",
    "maze_generate",
    "maze_metric",
    "maze_mutate",
    "maze_repair",
    "maze_to_text",
    "rastrigin_f_max",
]

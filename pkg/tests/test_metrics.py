import math

import numpy as np
import pytest

from bandit_elites.archive import FeatureMap
from bandit_elites.metrics import (
    MetricVector,
    coverage,
    global_performance,
    normalized_fitness_grid,
    qd_score,
    qd_score_normalized,
    reliability_from_grids,
    reliability_pair,
    selection_entropy,
)

identity = np.asarray


def make_map(rows=10, cols=10, maximize=True):
    return FeatureMap(bounds=((0.0, 1.0), (0.0, 1.0)), resolution=(rows, cols),
                      maximize=maximize, genome_size=1)


def test_coverage():
    fmap = make_map()
    assert coverage(fmap) == 0.0
    fmap.try_insert(np.zeros(1), 1.0, (0.05, 0.05))
    fmap.try_insert(np.zeros(1), 1.0, (0.95, 0.95))
    assert coverage(fmap) == 0.02


def test_qd_score_raw_and_normalized():
    fmap = make_map()
    assert qd_score(fmap) == 0.0
    assert qd_score_normalized(fmap, identity) == 0.0
    fmap.try_insert(np.zeros(1), 2.0, (0.05, 0.05))
    fmap.try_insert(np.zeros(1), -0.5, (0.95, 0.95))
    assert qd_score(fmap) == 1.5
    assert qd_score_normalized(fmap, identity) == 1.5
    assert qd_score_normalized(fmap, lambda f: np.asarray(f) / 2.0) == 0.75


def test_global_performance():
    fmap = make_map()
    with pytest.raises(ValueError):
        global_performance(fmap, identity)
    fmap.try_insert(np.zeros(1), 0.2, (0.05, 0.05))
    fmap.try_insert(np.zeros(1), 0.9, (0.95, 0.95))
    assert global_performance(fmap, identity) == 0.9
    # normalization applies before the max
    assert global_performance(fmap, lambda f: 1.0 - np.asarray(f)) == 0.8


def test_entropy_uniform_is_one():
    fmap = make_map()
    fmap.sel_c[:] = 3
    fmap.total_selections = 3 * fmap.n_cells
    assert selection_entropy(fmap) == pytest.approx(1.0, abs=1e-12)


def test_entropy_concentrated_is_zero():
    fmap = make_map()
    fmap.sel_c[7] = 50
    fmap.total_selections = 50
    assert selection_entropy(fmap) == 0.0


def test_entropy_two_cells_of_hundred():
    fmap = make_map()
    fmap.sel_c[3] = 1
    fmap.sel_c[62] = 1
    fmap.total_selections = 2
    assert selection_entropy(fmap) == pytest.approx(
        math.log(2) / math.log(100), abs=1e-12)


def test_entropy_before_any_selection():
    assert selection_entropy(make_map()) == 0.0


def test_reliability_toy_grids():
    best = np.array([[1.0, 0.8], [0.5, np.nan]])
    fnorm = np.array([[0.5, np.nan], [0.5, np.nan]])
    rel, prec = reliability_from_grids(fnorm, best)
    assert rel == pytest.approx(0.5, abs=1e-12)
    assert prec == pytest.approx(0.75, abs=1e-12)


def test_reliability_zero_best_counts_as_achieved():
    rel, prec = reliability_from_grids(np.array([[0.0]]), np.array([[0.0]]))
    assert rel == 1.0
    assert prec == 1.0


def test_reliability_empty_run_grid():
    best = np.array([[1.0, np.nan]])
    rel, prec = reliability_from_grids(np.array([[np.nan, np.nan]]), best)
    assert rel == 0.0
    assert prec == 0.0


def test_reliability_errors():
    with pytest.raises(ValueError):
        reliability_from_grids(np.array([[0.5]]), np.array([[np.nan]]))
    with pytest.raises(ValueError):
        reliability_from_grids(np.zeros((2, 2)), np.zeros((2, 3)))


def test_reliability_pair_from_live_map():
    fmap = make_map(rows=2, cols=2)
    fmap.try_insert(np.zeros(1), 0.5, (0.25, 0.25))
    best = np.array([[1.0, 0.8], [0.5, np.nan]])
    rel, prec = reliability_pair(fmap, best, identity)
    assert rel == pytest.approx(0.5 / 3.0, abs=1e-12)
    assert prec == pytest.approx(0.5, abs=1e-12)


def test_normalized_fitness_grid():
    fmap = make_map(rows=2, cols=2)
    fmap.try_insert(np.zeros(1), 0.4, (0.25, 0.75))
    grid = normalized_fitness_grid(fmap, lambda f: np.asarray(f) * 2.0)
    assert grid.shape == (2, 2)
    assert grid[0, 1] == pytest.approx(0.8)
    assert np.isnan(grid[0, 0]) and np.isnan(grid[1, 0]) and np.isnan(grid[1, 1])


def test_metric_vector_row():
    mv = MetricVector(global_performance=0.5, global_reliability=0.25,
                      precision=1.0, coverage=0.1, qd_score=12.5,
                      selection_entropy=0.0, evaluations=100)
    row = mv.as_row(7, "uniform", "rastrigin6")
    assert row[:4] == ["7", "uniform", "rastrigin6", "100"]
    assert row[4:] == ["0.5", "0.25", "1.0", "0.1", "12.5", "0.0"]

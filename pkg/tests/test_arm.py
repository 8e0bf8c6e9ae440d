import math

import numpy as np
import pytest

from bandit_elites.testbeds.arm import (
    ANGLE_LIMIT,
    DEFAULT_JOINTS,
    MUTATION_STEP,
    ArmTestbed,
    arm_v_max,
)


def reference_endpoint(theta, lengths):
    angles = np.cumsum(theta)
    return (float(np.sum(lengths * np.cos(angles))),
            float(np.sum(lengths * np.sin(angles))))


def test_equal_angles_score_zero():
    tb = ArmTestbed()
    assert tb.fitness(np.zeros(DEFAULT_JOINTS)) == 0.0
    for a in (1.0, -math.pi / 3):
        assert tb.fitness(np.full(DEFAULT_JOINTS, a)) == pytest.approx(0.0, abs=1e-30)


def test_known_variance_point():
    tb = ArmTestbed()
    g = np.zeros(DEFAULT_JOINTS)
    g[0] = math.pi / 2
    g[1] = -math.pi / 2
    # mean angle 0; two joints deviate by pi/2 each
    assert tb.fitness(g) == pytest.approx(-math.pi ** 2 / 24.0, abs=1e-12)


def test_straight_arm_endpoint():
    tb = ArmTestbed()
    x, y = tb.descriptor(np.zeros(DEFAULT_JOINTS))
    assert x == pytest.approx(1.0, abs=1e-12)
    assert y == pytest.approx(0.0, abs=1e-12)
    g = np.zeros(DEFAULT_JOINTS)
    g[0] = math.pi / 2
    x, y = tb.descriptor(g)
    assert x == pytest.approx(0.0, abs=1e-12)
    assert y == pytest.approx(1.0, abs=1e-12)


def test_endpoint_matches_reference_fk():
    tb = ArmTestbed()
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = rng.uniform(-ANGLE_LIMIT, ANGLE_LIMIT, DEFAULT_JOINTS)
        x, y = tb.descriptor(g)
        rx, ry = reference_endpoint(g, tb.lengths)
        assert x == pytest.approx(rx, abs=1e-12)
        assert y == pytest.approx(ry, abs=1e-12)
        assert math.hypot(x, y) <= 1.0 + 1e-12


def test_random_genome_in_limits():
    tb = ArmTestbed()
    rng = np.random.default_rng(1)
    for _ in range(100):
        g = tb.random_genome(rng)
        assert g.shape == (DEFAULT_JOINTS,)
        assert np.all(np.abs(g) <= ANGLE_LIMIT)


def test_mutation_wraps_not_clamps():
    tb = ArmTestbed()
    rng = np.random.default_rng(2)
    near_edge = np.full(DEFAULT_JOINTS, ANGLE_LIMIT - 0.01)
    wrapped = False
    for _ in range(300):
        child = tb.mutate(near_edge, rng)
        assert np.all(child >= -ANGLE_LIMIT)
        assert np.all(child <= ANGLE_LIMIT)
        if np.any(child < 0.0):
            wrapped = True  # crossed pi and came out near -pi
    assert wrapped
    interior = np.zeros(DEFAULT_JOINTS)
    for _ in range(100):
        child = tb.mutate(interior, rng)
        assert np.all(np.abs(child) <= MUTATION_STEP + 1e-15)


def test_v_max_is_extreme_split():
    # half the joints at +pi, half at -pi: mean 0, every deviation pi
    assert arm_v_max(12) == pytest.approx(math.pi ** 2, rel=1e-12)
    g = np.array([math.pi] * 6 + [-math.pi] * 6)
    tb = ArmTestbed()
    assert tb.fitness(g) == pytest.approx(-arm_v_max(12), rel=1e-12)


def test_normalize_range():
    tb = ArmTestbed()
    assert tb.normalize(0.0) == 1.0
    assert tb.normalize(-tb.v_max) == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(3)
    for _ in range(50):
        g = rng.uniform(-ANGLE_LIMIT, ANGLE_LIMIT, DEFAULT_JOINTS)
        assert -1e-12 <= tb.normalize(tb.fitness(g)) <= 1.0


def test_constructor_validation():
    with pytest.raises(ValueError):
        ArmTestbed(joints=1)
    with pytest.raises(ValueError):
        ArmTestbed(joints=4, lengths=[0.5, 0.5])
    tb = ArmTestbed(joints=4)
    assert tb.treatment == "arm4"
    assert tb.bounds == ((-1.0, 1.0), (-1.0, 1.0))
    assert ArmTestbed().treatment == "arm12"

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avgmix.functionals import augmented_entropy, check_probability, distance, entropy, is_probability
from avgmix.process import StateVector


def test_distance_examples():
    v = StateVector.from_values([1.0, 0, 0, 0])
    assert distance(v, 1) == (1.5, 1.5)
    sq, root = distance(v, 2)
    assert sq == 0.75 and root == pytest.approx(math.sqrt(0.75))
    u = StateVector.from_values([0.25] * 4)
    assert distance(u, 1)[0] == 0 and distance(u, 2)[0] == 0


def test_distance_bad_q():
    with pytest.raises(ValueError):
        distance(np.ones(3), 3)


def test_distance_uses_recorded_mean():
    assert distance(np.array([1.0, 0.0]), 1, mean=0.0)[0] == 1.0


def test_entropy_examples():
    assert entropy(np.eye(5)[2]) == 0.0
    assert entropy(np.full(7, 1 / 7)) == pytest.approx(math.log(7))
    assert entropy([0.5, 0.5, 0, 0]) == pytest.approx(math.log(2))


def test_entropy_rejects_invalid():
    with pytest.raises(ValueError, match="negative"):
        entropy([1.2, -0.2])
    with pytest.raises(ValueError, match="sums"):
        entropy([0.5, 0.4])
    assert not is_probability([0.5, 0.4])
    check_probability([0.5, 0.5 + 1e-12])


def test_augmented_entropy_examples():
    log2 = math.log(2)
    assert augmented_entropy(np.eye(4)[1], [log2, 0, 0, 0]) == 0.0
    v = np.array([0.1, 0.2, 0.3, 0.4])
    assert augmented_entropy(v, np.zeros(4)) == entropy(v)
    assert augmented_entropy(np.eye(4)[0], [log2, 0, 0, 0]) == pytest.approx(log2)
    with pytest.raises(ValueError):
        augmented_entropy(v, [-1, 0, 0, 0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=2, max_size=40).filter(lambda x: sum(x) > 1e-3))
def test_entropy_bounds(x):
    v = np.array(x) / math.fsum(x)
    v = v / math.fsum(v)
    S = entropy(v)
    assert -1e-12 <= S <= math.log(v.size) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=30))
def test_distance_power_relation(x):
    v = np.array(x)
    l1, l1n = distance(v, 1)
    l2sq, l2 = distance(v, 2)
    assert l1 == l1n >= 0
    assert l2 == pytest.approx(math.sqrt(l2sq))
    # Cauchy-Schwarz between the two norms
    assert l1 <= math.sqrt(v.size) * l2 + 1e-9

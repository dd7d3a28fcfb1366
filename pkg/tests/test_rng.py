import numpy as np
import pytest

from avgmix.rng import RngStream, trial_streams


def test_same_key_same_draws():
    a = RngStream(7, 3).integers(10, 100)
    b = RngStream(7, 3).integers(10, 100)
    assert np.array_equal(a, b)


def test_draws_do_not_depend_on_chunking():
    whole = RngStream(1, 0).integers(17, 50)
    r = RngStream(1, 0)
    parts = np.concatenate([r.integers(17, 13), r.integers(17, 1), r.integers(17, 36)])
    assert np.array_equal(whole, parts)
    r = RngStream(1, 0)
    singles = np.array([r.integers(17) for _ in range(50)])
    assert np.array_equal(whole, singles)


def test_counter_resumes_stream():
    r = RngStream(5, 2)
    r.raw(7)
    tail = r.raw(20)
    resumed = RngStream(5, 2, counter=7).raw(20)
    assert np.array_equal(tail, resumed)


def test_distinct_streams_differ():
    a = RngStream(9, 0).raw(8)
    b = RngStream(9, 1).raw(8)
    assert not np.array_equal(a, b)


def test_integers_in_range_and_roughly_uniform():
    x = RngStream(0, 0).integers(6, 60000)
    assert x.min() == 0 and x.max() == 5
    counts = np.bincount(x, minlength=6)
    sigma = np.sqrt(60000 * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - 10000) < 4 * sigma)


def test_uniform_range():
    u = RngStream(0, 4).uniform(1000)
    assert np.all((u >= 0) & (u < 1))


def test_bad_high():
    with pytest.raises(ValueError):
        RngStream(0).integers(0)


def test_trial_streams_ids():
    s = trial_streams(11, 3, first=5)
    assert [x.stream for x in s] == [5, 6, 7]

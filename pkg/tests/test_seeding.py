import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from quasiphys.seeding import HashStream, seed_split, trial_draws


def test_known_values_are_stable():
    assert seed_split(0, 0) == seed_split(0, 0)
    assert seed_split(7, 3) != seed_split(3, 7)


def test_no_collisions_over_a_million_indices():
    seeds = {seed_split(2024, i) for i in range(1_000_000)}
    assert len(seeds) == 1_000_000


@given(st.integers(0, 2**64), st.integers(0, 2**40))
def test_seed_range(master, index):
    assert 0 <= seed_split(master, index) < 2**64


@given(st.integers(0, 2**64))
def test_stream_is_reproducible_and_unit(seed):
    a, b = HashStream(seed), HashStream(seed)
    xs = [a.random() for _ in range(20)]
    assert xs == [b.random() for _ in range(20)]
    assert all(0.0 <= x < 1.0 for x in xs)


def test_trial_draws_match_streams():
    draws = trial_draws(5, 10, 20, 3)
    for row, i in enumerate(range(10, 20)):
        s = HashStream(seed_split(5, i))
        assert list(draws[row]) == [s.random() for _ in range(3)]


def test_stream_is_roughly_uniform():
    draws = trial_draws(1, 0, 20000, 1).ravel()
    hist, _ = np.histogram(draws, bins=10, range=(0, 1))
    assert np.all(np.abs(hist - 2000) < 5 * np.sqrt(2000))

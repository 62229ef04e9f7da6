import numpy as np

from llgfront import rng


def test_streams_depend_only_on_key():
    a = rng.stream(5, 3).standard_normal(10)
    rng.stream(5, 2).standard_normal(1000)  # unrelated draws in between
    b = rng.stream(5, 3).standard_normal(10)
    assert np.array_equal(a, b)


def test_purposes_and_members_differ():
    base = rng.stream(1, 0, rng.DRIVE).standard_normal(5)
    for other in (rng.stream(1, 0, rng.BRIDGE), rng.stream(1, 1, rng.DRIVE), rng.stream(2, 0, rng.DRIVE)):
        assert not np.array_equal(base, other.standard_normal(5))


def test_block_generation_is_prefix_stable():
    whole = rng.wiener_increments(7, 0, 1000, 1e-3)
    g = rng.stream(7, 0)
    parts = np.concatenate([g.standard_normal(300), g.standard_normal(700)]) * np.sqrt(1e-3)
    assert np.array_equal(whole, parts)

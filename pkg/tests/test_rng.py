import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superswap import rng

M = (1 << 64) - 1


def splitmix(x):
    x = (x + 0x9E3779B97F4A7C15) & M
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & M
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & M
    return x ^ (x >> 31)


def reference_uniform(seed, stream, purpose, counter):
    h = splitmix(seed & M)
    h = splitmix(h ^ stream)
    h = splitmix(h ^ (counter | (purpose << 48)))
    return ((h >> 11) + 0.5) / 2.0**53


@given(st.integers(0, M), st.integers(0, 2**40), st.integers(0, 5), st.integers(0, 2**40))
def test_matches_pure_python_splitmix(seed, stream, purpose, counter):
    got = rng.uniforms(seed, stream, purpose, counter)[0]
    assert got == reference_uniform(seed, stream, purpose, counter)


def test_open_interval_and_broadcast():
    u = rng.uniforms(1, np.arange(1000)[:, None], rng.WAIT, np.arange(50)[None, :])
    assert u.shape == (1000, 50)
    assert np.all((u > 0) & (u < 1))


def test_uniformity_and_independence():
    u = rng.uniforms(42, np.arange(200_000), rng.WAIT, 0)
    assert abs(u.mean() - 0.5) < 5 * np.sqrt(1 / 12 / len(u))
    hist, _ = np.histogram(u, bins=20, range=(0, 1))
    chi2 = ((hist - len(u) / 20) ** 2 / (len(u) / 20)).sum()
    assert chi2 < 50  # 19 dof
    v = rng.uniforms(42, np.arange(200_000), rng.CHANNEL, 0)
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.01


def test_stream_counters_are_per_purpose():
    s = rng.RngStream(7, 3)
    a = [s.uniform(rng.WAIT) for _ in range(3)]
    b = s.uniform(rng.CHANNEL)
    assert s.peek_counter(rng.WAIT) == 3 and s.peek_counter(rng.CHANNEL) == 1
    assert a == list(rng.uniforms(7, 3, rng.WAIT, np.arange(3)))
    assert b == rng.uniforms(7, 3, rng.CHANNEL, 0)[0]
    assert rng.RngStream(8, 3).uniform() != a[0]

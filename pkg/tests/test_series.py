"""Moment bookkeeping checked against brute-force convolutions."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brmgame import _series

ORDER = 4


def moments(values, probs, order=ORDER):
    values, probs = np.asarray(values, float), np.asarray(probs, float)
    return np.array([probs @ values**j for j in range(order + 1)])


def convolve(dist_a, dist_b):
    out = {}
    for (va, pa), (vb, pb) in itertools.product(dist_a.items(), dist_b.items()):
        out[va + vb] = out.get(va + vb, 0.0) + pa * pb
    return out


small_dist = st.lists(st.tuples(st.integers(0, 5), st.floats(0.05, 1.0)), min_size=1, max_size=4)


def _normalise(pairs):
    total = sum(p for _, p in pairs)
    d = {}
    for v, p in pairs:
        d[float(v)] = d.get(float(v), 0.0) + p / total
    return d


@given(small_dist, st.integers(1, 4))
@settings(max_examples=40)
def test_iid_sum_matches_convolution(pairs, count):
    d = _normalise(pairs)
    total = {0.0: 1.0}
    for _ in range(count):
        total = convolve(total, d)
    expect = moments(list(total), list(total.values()))
    got = _series.iid_sum_moments(moments(list(d), list(d.values())), count)
    assert np.allclose(got, expect, rtol=1e-9, atol=1e-12)


@given(small_dist, small_dist)
@settings(max_examples=40)
def test_independent_sum(pa, pb):
    a, b = _normalise(pa), _normalise(pb)
    ab = convolve(a, b)
    got = _series.independent_sum_moments(moments(list(a), list(a.values())),
                                          moments(list(b), list(b.values())))
    assert np.allclose(got, moments(list(ab), list(ab.values())), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("mean_count", [0.3, 2.0, 10.0])
def test_geometric_compound_matches_direct_sum(mean_count):
    d = {0.0: 0.6, 1.0: 0.3, 2.5: 0.1}
    q = mean_count / (1 + mean_count)
    expect = np.zeros(ORDER + 1)
    total = {0.0: 1.0}
    for n in range(400):
        weight = (1 - q) * q**n
        expect += weight * moments(list(total), list(total.values()))
        total = convolve(total, d)
        # round support to keep the dictionary small
        total = {round(k, 9): v for k, v in total.items()}
    got = _series.geometric_compound_moments(moments(list(d), list(d.values())), mean_count)
    assert np.allclose(got, expect, rtol=1e-6)


def test_cumulant_roundtrip():
    m = moments([0, 1, 3], [0.2, 0.5, 0.3])
    assert np.allclose(_series.moments_from_cumulants(_series.cumulants_from_moments(m)), m)
    assert math.isclose(_series.cumulants_from_moments(m)[2], m[2] - m[1] ** 2)

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaoslim.symfun import ESFState, esf, esf_from_power_sums, esf_incremental_absorb, esf_merge, esf_newton

floats = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def brute(c, k):
    out = [1.0] + [0.0] * k
    for j in range(1, k + 1):
        out[j] = sum(math.prod(s) for s in itertools.combinations(c, j))
    return np.array(out)


def test_small_examples():
    assert esf([1, 2, 3], 2)[2] == 11
    assert esf([5.0], 2)[2] == 0
    np.testing.assert_array_equal(esf([1, 2, 3], 5)[4:], 0.0)


def test_random_length_eight_order_three():
    rng = np.random.default_rng(3)
    c = rng.standard_normal(8)
    e = esf(c, 3)
    b = brute(c, 3)
    assert abs(e[3] - b[3]) <= 1e-12 * abs(b[3])


@given(st.lists(floats, min_size=0, max_size=10), st.integers(1, 4))
def test_matches_enumeration(c, k):
    e = esf(np.array(c, dtype=float), k) if c else esf(np.zeros(0), k)
    b = brute(c, k)
    scale = max(1.0, np.max(np.abs(b)))
    np.testing.assert_allclose(e, b, rtol=0, atol=1e-12 * scale)


@given(st.lists(floats, min_size=1, max_size=20))
def test_generating_function(c):
    c = np.array(c)
    k = c.size
    e = esf(c, k)
    for t in (1.0, -1.0, 0.5, -0.5):
        lhs = np.prod(1 + c * t)
        rhs = np.sum(e * t ** np.arange(k + 1))
        scale = np.sum(np.abs(e) * abs(t) ** np.arange(k + 1))
        assert abs(lhs - rhs) <= 1e-10 * max(scale, 1.0)


@given(st.lists(floats, min_size=1, max_size=15), st.integers(1, 4), st.randoms())
def test_permutation_invariance(c, k, rnd):
    a = np.array(c)
    b = a.copy()
    rnd.shuffle(b)
    ea, eb = esf(a, k), esf(b, k)
    scale = np.maximum(1.0, brute(np.abs(a), k))
    assert np.all(np.abs(ea - eb) <= 1e-12 * scale)


@given(st.lists(floats, min_size=1, max_size=15), st.integers(1, 4), st.floats(-2, 2))
def test_homogeneity(c, k, lam):
    c = np.array(c)
    lhs = esf(lam * c, k)
    rhs = lam ** np.arange(k + 1) * esf(c, k)
    scale = abs(lam) ** np.arange(k + 1) * np.maximum(1.0, brute(np.abs(c), k))
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale)


@given(st.lists(floats, max_size=10), st.lists(floats, max_size=10), st.integers(1, 4))
def test_merge_is_concatenation(a, b, k):
    ea = esf(np.array(a), k) if a else np.eye(1, k + 1)[0]
    eb = esf(np.array(b), k) if b else np.eye(1, k + 1)[0]
    expect = brute(a + b, k)
    scale = max(1.0, np.max(brute([abs(x) for x in a + b], k)))
    np.testing.assert_allclose(esf_merge(ea, eb), expect, rtol=0, atol=1e-12 * scale)


def test_incremental_examples():
    s = ESFState.empty(2)
    np.testing.assert_array_equal(s.as_array(), [1.0, 0.0, 0.0])
    s = esf_incremental_absorb(esf_incremental_absorb(s, 1.0), 2.0)
    np.testing.assert_array_equal(s.as_array(), [1.0, 3.0, 2.0])


def test_incremental_stream_matches_batch():
    rng = np.random.default_rng(0)
    c = rng.standard_normal(100)
    s = ESFState.empty(4)
    for x in c:
        s = esf_incremental_absorb(s, float(x))
    batch = esf(c, 4)
    assert np.max(np.abs(s.as_array() - batch)) <= 1e-12 * np.max(np.abs(batch))


def test_newton_identities_agree_for_positive_inputs():
    rng = np.random.default_rng(1)
    c = rng.uniform(0.1, 1.0, 30)
    np.testing.assert_allclose(esf_newton(c, 4), esf(c, 4), rtol=1e-12)
    p = np.array([np.sum(c**j) for j in range(1, 5)])
    np.testing.assert_allclose(esf_from_power_sums(p, 4), esf(c, 4), rtol=1e-12)


def test_blocked_route_for_long_input():
    rng = np.random.default_rng(2)
    c = rng.uniform(0, 1e-2, 10000)
    e = esf(c, 3)
    ref = esf(c, 3, compensated=True)
    np.testing.assert_allclose(e, ref, rtol=1e-12)


def test_batch_axes():
    rng = np.random.default_rng(4)
    c = rng.standard_normal((5, 7))
    e = esf(c, 3)
    for r in range(5):
        np.testing.assert_allclose(e[r], brute(c[r], 3), atol=1e-12)


def test_rejects_bad_order():
    with pytest.raises(ValueError):
        esf([1.0], 0)

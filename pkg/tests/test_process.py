import itertools
import math

import numpy as np
import pytest

from chaoslim.coefficients import Explicit, RegVar, geometric
from chaoslim.covariance import cross_gamma_lags, exact_partial_sum_variance, gamma_auto
from chaoslim.noise import NoiseSpec, NoiseWindow, SeedPolicy, noise_window
from chaoslim.process import (
    ChaosProcessSpec,
    DiscreteKernel,
    HistoryBlocks,
    _interpolation_matrix,
    effective_spec,
    evaluate_polynomial_form,
    history_power_sums,
    partial_sum_kernel,
    sample_history,
    simulate_path,
    simulate_truncated_path,
    simulate_vector,
)


def brute_path(a, k, eps, start, N):
    """X(n) = sum over i_1 < ... < i_k of prod a_i eps_{n-i}."""
    M = len(a)
    out = np.zeros(N)
    for n in range(1, N + 1):
        for idx in itertools.combinations(range(1, M + 1), k):
            out[n - 1] += math.prod(a[i - 1] * eps[n - i - start] for i in idx)
    return out


def window(seed, start, stop, r=0):
    return noise_window(NoiseSpec(), SeedPolicy(seed), r, start, stop)


def test_identity_filter():
    w = window(0, 0, 19)
    x = simulate_path(ChaosProcessSpec(Explicit([1.0]), 1), w, 20)
    np.testing.assert_array_equal(x, w.values[:20])


def test_single_pair():
    w = window(1, -1, 9)
    x = simulate_path(ChaosProcessSpec(Explicit([1.0, 1.0]), 2), w, 10)
    eps = w.values
    expect = np.array([eps[n - 1 + 1] * eps[n - 2 + 1] for n in range(1, 11)])
    np.testing.assert_allclose(x, expect, rtol=1e-15)


@pytest.mark.parametrize("method", ["dp", "fft"])
def test_order_three_against_triple_sum(method):
    rng = np.random.default_rng(11)
    a = rng.standard_normal(6)
    w = window(2, -5, 29)
    x = simulate_path(ChaosProcessSpec(Explicit(a), 3), w, 30, method=method)
    b = brute_path(a, 3, w.values, -5, 30)
    assert np.max(np.abs(x - b)) <= 1e-12 * np.max(np.abs(b))


def test_insufficient_window():
    w = window(0, 0, 9)
    with pytest.raises(ValueError, match="insufficient noise window"):
        simulate_path(ChaosProcessSpec(Explicit([1.0, 1.0]), 2), w, 10)


def test_truncation_examples():
    spec = ChaosProcessSpec(Explicit([1.0] * 6), 2)
    w = window(3, -5, 49)
    full = simulate_path(spec, w, 50)
    np.testing.assert_array_equal(simulate_truncated_path(spec, 6, w, 50), full)
    x = simulate_truncated_path(spec, 3, w, 50)
    e = lambda t: w.values[t + 5]
    expect = [e(n - 1) * e(n - 2) + e(n - 1) * e(n - 3) + e(n - 2) * e(n - 3) for n in range(1, 51)]
    np.testing.assert_allclose(x, expect, rtol=1e-13, atol=1e-14)
    with pytest.raises(ValueError):
        simulate_truncated_path(spec, 2, w, 50)


def test_truncated_path_is_m_dependent():
    spec = ChaosProcessSpec(RegVar(0.3), 2)
    N, m = 10**5, 5
    w = window(4, 1 - N, N - 1)
    x = simulate_truncated_path(spec, m, w, N)
    x = x - x.mean()
    r = np.dot(x[m + 1 :], x[: -(m + 1)]) / np.dot(x, x)
    assert abs(r) < 4 / math.sqrt(N)


def test_identical_components_bit_identical():
    s = ChaosProcessSpec(geometric(0.5), 2, "a")
    t = ChaosProcessSpec(geometric(0.5), 2, "b")
    pm = simulate_vector([s, t], NoiseSpec(), SeedPolicy(0), 200, 3)
    assert pm.values[:, 0].tobytes() == pm.values[:, 1].tobytes()


def test_components_share_noise():
    a = ChaosProcessSpec(Explicit([1.0]), 1, "w")
    b = ChaosProcessSpec(Explicit([0.0, 2.0]), 1, "w2")
    pm = simulate_vector([a, b], NoiseSpec(), SeedPolicy(9), 50, 2)
    np.testing.assert_allclose(pm.values[:, 1, 1:], 2 * pm.values[:, 0, :-1], rtol=1e-14)


def test_different_orders_uncorrelated():
    a = ChaosProcessSpec(geometric(0.5), 1, "x1")
    b = ChaosProcessSpec(geometric(0.5), 2, "x2")
    pm = simulate_vector([a, b], NoiseSpec(), SeedPolicy(5), 10**5, 1)
    x, y = pm.values[0, 0], pm.values[0, 1]
    for lag in (0, 1, 3):
        c = np.mean(x[lag:] * y[: y.size - lag])
        se = np.std(x[lag:] * y[: y.size - lag]) / math.sqrt(x.size)
        # neighbouring products are dependent; allow for it with a wider band
        assert abs(c) < 4 * 3 * se


def test_cross_covariance_matches_formula():
    a = ChaosProcessSpec(Explicit([1.0, -0.5, 0.25]), 2, "a")
    b = ChaosProcessSpec(Explicit([0.5, 1.0, 0.3, -0.2]), 2, "b")
    N, R = 20000, 20
    pm = simulate_vector([a, b], NoiseSpec(), SeedPolicy(17), N, R)
    g = cross_gamma_lags(a, b, 3)
    for n in (-2, 0, 1, 3):
        x = pm.values[:, 0, :]
        y = pm.values[:, 1, :]
        # gamma_ab(n) = Cov(X_a(m), X_b(m + n))
        if n >= 0:
            prod = x[:, : N - n] * y[:, n:]
        else:
            prod = x[:, -n:] * y[:, : N + n]
        per_rep = prod.mean(axis=1)
        est, se = per_rep.mean(), per_rep.std(ddof=1) / math.sqrt(R)
        assert abs(est - g[n + 3]) < 4 * se


@pytest.mark.parametrize("spec", [
    ChaosProcessSpec(geometric(0.6), 1),
    ChaosProcessSpec(Explicit([1.0, 0.5, -0.3, 0.2]), 3),
    ChaosProcessSpec(RegVar(0.4), 2),
])
def test_mean_zero_and_variance_identity(spec):
    N, R = 2**14, 100
    pm = simulate_vector([spec], NoiseSpec(), SeedPolicy(21), N, R)
    x = pm.values[:, 0, :]
    assert np.all(np.isfinite(x))
    # replication means are independent; time points within one path are not
    means = x.mean(axis=1)
    assert abs(means.mean()) < 4 * means.std(ddof=1) / math.sqrt(R) + 1e-12
    var_rep = (x**2).mean(axis=1)
    g0 = gamma_auto(effective_spec(spec, N, "truncated") if spec.coeffs.infinite else spec, 0)
    if spec.coeffs.infinite:
        g0 = gamma_auto(spec, 0)
    assert abs(var_rep.mean() - g0) < 4 * var_rep.std(ddof=1) / math.sqrt(R)


def test_dp_and_fft_agree_with_history():
    spec = ChaosProcessSpec(RegVar(0.4), 2)
    N = 40
    a = simulate_vector([spec], NoiseSpec(), SeedPolicy(1), N, 2, method="dp")
    b = simulate_vector([spec], NoiseSpec(), SeedPolicy(1), N, 2, method="fft")
    np.testing.assert_allclose(a.values, b.values, rtol=1e-10, atol=1e-12)


def test_history_blocks_partition_past():
    blocks = HistoryBlocks.build(256, 256)
    assert blocks.hi[0] == -256
    np.testing.assert_allclose(blocks.hi[1:], blocks.lo[:-1] - 1, rtol=1e-15)
    assert np.all(blocks.sizes >= 1)
    assert 1 - blocks.lo[-1] >= 2**60 * 256 * 0.9


def test_history_interpolation_matches_direct_sum():
    N = 1000
    spec = RegVar(0.4)
    blocks = HistoryBlocks.build(N, N)
    T = sample_history(blocks, NoiseSpec(), SeedPolicy(3), [0], 2)
    got = history_power_sums(spec, blocks, T, 2)
    n = np.arange(1, N + 1, dtype=float)
    base = spec.formula(n[:, None] - blocks.centers[None, :])
    for j in (1, 2):
        direct = (base**j) @ T[0, :, j - 1]
        np.testing.assert_allclose(got[0, :, j - 1], direct, rtol=1e-9, atol=1e-12 * np.max(np.abs(direct)))


def test_interpolation_matrix_reproduces_polynomials():
    t, mat = _interpolation_matrix(500)
    n = np.arange(1, 501, dtype=float)
    f = lambda x: (x / 500) ** 5 - 2 * (x / 500) ** 2
    np.testing.assert_allclose(mat @ f(t), f(n), atol=1e-12)


def test_history_sample_moments():
    blocks = HistoryBlocks.build(64, 64)
    T = sample_history(blocks, NoiseSpec(), SeedPolicy(4), range(400), 2)
    m = blocks.sizes
    z = T[:, :, 1] - m  # sum eps^2 has mean m and variance 2m
    assert abs(np.mean(z / np.sqrt(2 * m))) < 4 / math.sqrt(z.size) * 3


def test_aggregated_history_reproduces_infinite_variance():
    spec = ChaosProcessSpec(RegVar(0.4), 1)
    N, R = 256, 4000
    pm = simulate_vector([spec], NoiseSpec(), SeedPolicy(8), N, R)
    s = pm.values[:, 0, :].sum(axis=1)
    v = exact_partial_sum_variance(spec, N)
    est = np.var(s, ddof=1)
    assert abs(est / v - 1) < 4 * math.sqrt(2 / R)
    truncated = exact_partial_sum_variance(effective_spec(spec, N, "truncated"), N)
    assert truncated < 0.7 * v


def test_truncated_history_mode():
    spec = ChaosProcessSpec(RegVar(0.3), 1)
    N = 30
    pm = simulate_vector([spec], NoiseSpec(), SeedPolicy(0), N, 1, history="truncated")
    w = window(0, 1 - N, N - 1)
    np.testing.assert_allclose(pm.values[0, 0], simulate_path(spec, w, N), rtol=1e-12)
    with pytest.raises(ValueError):
        simulate_vector([spec], NoiseSpec(), SeedPolicy(0), N, 1, history="nope")


def test_simulate_vector_deterministic_and_batch_invariant():
    specs = [ChaosProcessSpec(RegVar(0.4), 2, "L"), ChaosProcessSpec(geometric(0.5), 1, "S")]
    a = simulate_vector(specs, NoiseSpec(), SeedPolicy(12), 128, 4)
    b = simulate_vector(specs, NoiseSpec(), SeedPolicy(12), 128, 4)
    assert a.values.tobytes() == b.values.tobytes()
    c = simulate_vector(specs, NoiseSpec(), SeedPolicy(12), 128, 2, first_replication=2)
    np.testing.assert_allclose(c.values, a.values[2:], rtol=1e-13, atol=1e-15)


def test_polynomial_form_examples():
    w = window(0, 0, 5)
    h = DiscreteKernel.point((1, 2))
    assert evaluate_polynomial_form(h, w) == pytest.approx(w.values[1] * w.values[2])
    zero = DiscreteKernel(np.zeros((0, 2), dtype=np.int64), np.zeros(0))
    assert evaluate_polynomial_form(zero, w) == 0.0


def test_polynomial_form_rejects_diagonal_and_cap():
    with pytest.raises(ValueError, match="diagonal"):
        DiscreteKernel(np.array([[1, 1]]), np.array([1.0]))
    with pytest.raises(ValueError, match="cap"):
        DiscreteKernel.from_function(lambda i, j: 1.0, 0, 100, 2, cap=10)
    h = DiscreteKernel.from_function(lambda i, j: 1.0, 0, 9, 2)
    with pytest.raises(ValueError, match="cap"):
        evaluate_polynomial_form(h, window(0, 0, 9), cap=5)


def test_banded_product_kernel_equals_path():
    rng = np.random.default_rng(5)
    a = rng.standard_normal(5)
    spec = ChaosProcessSpec(Explicit(a), 2)
    n0 = 7
    # h(s1, s2) = a_{n0 - s1} a_{n0 - s2} on s1 < s2
    h = DiscreteKernel.from_function(
        lambda s1, s2: spec.coeffs.at(np.array([n0 - s1]))[0] * spec.coeffs.at(np.array([n0 - s2]))[0],
        n0 - 5, n0 - 1, 2)
    w = window(6, -4, 9)
    x = simulate_path(spec, w, 10)
    assert evaluate_polynomial_form(h, w) == pytest.approx(x[n0 - 1], rel=1e-12)


def test_partial_sum_kernel_equals_path_sum():
    spec = ChaosProcessSpec(Explicit([1.0, -0.4, 0.3]), 2)
    h = partial_sum_kernel(spec, 1, 12, scale=0.5)
    w = window(7, -2, 11)
    x = simulate_path(spec, w, 12)
    assert evaluate_polynomial_form(h, w) == pytest.approx(0.5 * x.sum(), rel=1e-12)
    assert h.second_moment() == pytest.approx(0.25 * exact_partial_sum_variance(spec, 12), rel=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaoslim.coefficients import Explicit, RegimeError, RegVar, geometric
from chaoslim.covariance import exact_partial_sum_variance, loglog_slope
from chaoslim.noise import NoiseSpec, SeedPolicy
from chaoslim.partial_sums import (
    NormalizationMode,
    NormalizationPlan,
    TimeGrid,
    asymptotic_lrd_plan,
    asymptotic_srd_plan,
    calibrate_lrd_normalization,
    exact_variance_plan,
    lrd_scale,
    partial_sum_process,
    partial_sums_at,
)
from chaoslim.process import ChaosProcessSpec, simulate_vector


def test_zero_path():
    plan = NormalizationPlan("exact", 2.0, 10)
    np.testing.assert_array_equal(partial_sum_process(np.zeros(10), plan), 0.0)


def test_white_noise_exact_plan():
    spec = ChaosProcessSpec(Explicit([1.0]), 1)
    N = 1000
    plan = exact_variance_plan(spec, N)
    assert plan.value == pytest.approx(math.sqrt(N))
    pm = simulate_vector([spec], NoiseSpec(), SeedPolicy(3), N, 1)
    x = pm.values[0, 0]
    y = partial_sum_process(x, plan)
    assert y[-1] == pytest.approx(x.sum() / math.sqrt(N), rel=1e-13)


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=8, max_size=40))
def test_increments_are_window_sums(values):
    x = np.array(values)
    N = x.size
    plan = NormalizationPlan("srd", 3.0, N)
    grid = TimeGrid((0.3, 0.6, 1.0))
    y = partial_sum_process(x, plan, grid)
    ends = grid.ends(N)
    assert np.all(ends <= N) and ends[-1] == N
    for a, b in ((0, 1), (1, 2)):
        assert y[b] - y[a] == pytest.approx(x[ends[a] : ends[b]].sum() / 3.0, abs=1e-12)


def test_partial_sums_batch_axes():
    x = np.arange(24.0).reshape(2, 3, 4)
    out = partial_sums_at(x, [0, 2, 4])
    np.testing.assert_array_equal(out[..., 0], 0.0)
    np.testing.assert_array_equal(out[..., 2], x.sum(axis=-1))
    with pytest.raises(ValueError):
        partial_sums_at(x, [5])


@pytest.mark.parametrize("points", [(), (0.5,), (0.5, 0.25, 1.0), (0.0, 1.0), (0.5, 1.2)])
def test_grid_validation(points):
    with pytest.raises(ValueError):
        TimeGrid(points)


def test_grid_ends_floor():
    assert TimeGrid((0.25, 0.5, 0.75, 1.0)).ends(10).tolist() == [2, 5, 7, 10]
    assert TimeGrid((0.1, 0.3, 1.0)).ends(10).tolist() == [1, 3, 10]
    assert TimeGrid.parse("0.5, 1").points == (0.5, 1.0)


@pytest.mark.parametrize("value", [0.0, -1.0, float("inf"), float("nan")])
def test_plan_rejects_nonpositive(value):
    with pytest.raises(ValueError):
        NormalizationPlan(NormalizationMode.EXACT_VARIANCE, value, 10)


@pytest.mark.parametrize("spec", [
    ChaosProcessSpec(geometric(0.5), 1),
    ChaosProcessSpec(Explicit([1.0, -0.3, 0.2]), 2),
    ChaosProcessSpec(geometric(-0.6), 2),
])
def test_exact_and_asymptotic_srd_agree(spec):
    N = 2**16
    e, a = exact_variance_plan(spec, N), asymptotic_srd_plan(spec, N)
    pm = simulate_vector([spec], NoiseSpec(), SeedPolicy(0), N, 1)
    ye = partial_sum_process(pm.values[0, 0], e)[-1]
    ya = partial_sum_process(pm.values[0, 0], a)[-1]
    assert abs(ye / ya - 1) < 0.02


def test_c_hat_stabilizes():
    spec = ChaosProcessSpec(RegVar(0.4), 1)
    c15 = calibrate_lrd_normalization(spec, 2**15).c_hat
    c17 = calibrate_lrd_normalization(spec, 2**17).c_hat
    assert abs(c17 / c15 - 1) < 0.01


def test_lrd_exponent_quick():
    spec = ChaosProcessSpec(RegVar(0.4), 2)
    Ns = [2**j for j in range(10, 14)]
    A = [exact_variance_plan(spec, N).value for N in Ns]
    assert loglog_slope(Ns, A) == pytest.approx(1 + (0.4 - 0.5) * 2, abs=0.02)


def test_lrd_plan_and_regime_gates():
    lrd = ChaosProcessSpec(RegVar(0.4), 2)
    plan = asymptotic_lrd_plan(lrd, 1024, 2.0)
    assert plan.value == pytest.approx(2.0 * 1024**0.8)
    with pytest.raises(RegimeError):
        lrd_scale(ChaosProcessSpec(RegVar(0.2), 3), 1024)
    with pytest.raises(RegimeError):
        calibrate_lrd_normalization(ChaosProcessSpec(RegVar(1 / 3), 3), 1024)
    with pytest.raises(RegimeError):
        asymptotic_srd_plan(lrd, 1024)


def test_lrd_scale_uses_slowly_varying_power_k():
    from chaoslim.coefficients import LogPower

    spec = ChaosProcessSpec(RegVar(0.4, LogPower(1.0)), 2)
    N = 4096
    assert lrd_scale(spec, N) == pytest.approx(N**0.8 * (1 + math.log(N)) ** 2)


@pytest.mark.parametrize("spec", [ChaosProcessSpec(geometric(0.5), 2), ChaosProcessSpec(RegVar(0.4), 1)])
def test_exact_plan_gives_unit_variance(spec):
    N, R = 1024, 2000
    pm = simulate_vector([spec], NoiseSpec(), SeedPolicy(42), N, R)
    plan = exact_variance_plan(spec, N)
    y = partial_sum_process(pm.values[:, 0, :], plan)[:, -1]
    assert abs(np.var(y, ddof=1) - 1) < 4 * math.sqrt(2 / R)

import math

import numpy as np
import pytest

from contagion.ctmc import EventLog, intensities, loss_process, monte_carlo, simulate_path
from contagion.errors import GridOutOfRange
from contagion.model import FirmClass, build_portfolio, validate_environment
from contagion.rng import stream


def make_env(classes):
    return validate_environment([FirmClass(*c) for c in classes])


def takeoff_portfolio(n=125, w1=0.4):
    env = make_env([(4.0, 4.0, 3.0, 1.0, w1), (0.1, 0.1, 3.0, 1.0, 1.0 - w1)])
    return build_portfolio(env, n)


# -------------------------------------------------------------- intensities

def test_intensities_all_defaulted():
    pf = takeoff_portfolio(10)
    np.testing.assert_array_equal(
        intensities(pf, np.ones(10, dtype=bool)), np.zeros(10))


def test_intensities_fresh_portfolio():
    env = make_env([(4.0, 4.0, 3.0, 1.0, 1.0)])
    pf = build_portfolio(env, 10)
    rates = intensities(pf, np.zeros(10, dtype=bool))
    np.testing.assert_allclose(rates, math.exp(-3.0))
    assert rates[0] == pytest.approx(0.0497871, abs=1e-7)


def test_intensities_feedback_after_default():
    env = make_env([(1.0, 2.0, 0.0, 1.0, 0.5), (1.0, 0.0, 0.0, 1.0, 0.5)])
    pf = build_portfolio(env, 2)
    defaulted = np.array([False, True])
    rates = intensities(pf, defaulted)
    np.testing.assert_allclose(rates, [math.e, 0.0])


# ------------------------------------------------------------ simulate_path

def test_horizon_must_be_positive():
    with pytest.raises(ValueError):
        simulate_path(takeoff_portfolio(5), 0.0, stream(0, 0, 0))


def test_tiny_horizon_empty_log():
    env = make_env([(1.0, 0.0, 0.0, 1.0, 1.0)])
    log = simulate_path(build_portfolio(env, 10), 1e-9, stream(0, 0, 0))
    assert log.times.size == 0
    assert log.horizon == 1e-9


def test_event_log_invariants():
    pf = takeoff_portfolio(200)
    log = simulate_path(pf, 5.0, stream(3, 0, 0))
    assert log.times.size > 0
    assert np.all(np.diff(log.times) > 0)
    assert log.times[0] > 0.0 and log.times[-1] <= 5.0
    assert np.unique(log.firms).size == log.firms.size  # absorbing


def test_single_firm_truncated_default_time():
    """One firm, gamma=0: its clock is Exp(1); mean of min(tau, 10)
    is 1 - e^{-10} (tests/oracles/normal_tail.py)."""
    env = make_env([(1.0, 1.0, 0.0, 1.0, 1.0)])
    pf = build_portfolio(env, 1)
    m = 20000
    total = 0.0
    for r in range(m):
        log = simulate_path(pf, 10.0, stream(17, 0, r))
        total += log.times[0] if log.times.size else 10.0
    mean = total / m
    se = 1.0 / math.sqrt(m)  # SD(min(tau,10)) < 1
    assert abs(mean - 0.9999546000702375) < 3 * se


def test_reproducible_paths():
    pf = takeoff_portfolio(100)
    a = simulate_path(pf, 5.0, stream(11, 0, 0))
    b = simulate_path(pf, 5.0, stream(11, 0, 0))
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.firms, b.firms)


# ------------------------------------------------------------- loss_process

def manual_log(times, firms, horizon, pf):
    return EventLog(
        times=np.asarray(times, dtype=float),
        firms=np.asarray(firms, dtype=np.intp),
        horizon=horizon,
        portfolio=pf,
    )


def test_empty_log_zero_grid():
    pf = takeoff_portfolio(8)
    grid = loss_process(manual_log([], [], 5.0, pf), np.linspace(0, 5, 11))
    np.testing.assert_array_equal(grid.loss_fraction, 0.0)
    np.testing.assert_array_equal(grid.class_fraction, 0.0)


def test_loss_counts_defaults():
    env = make_env([(1.0, 0.0, 0.0, 1.0, 1.0)])
    pf = build_portfolio(env, 4)
    log = manual_log([0.5, 1.5], [2, 0], 2.0, pf)
    grid = loss_process(log, np.array([1.0, 2.0]))
    np.testing.assert_allclose(grid.loss_fraction, [0.25, 0.5])


def test_loss_weights_exposures():
    env = make_env([(1.0, 0.0, 0.0, 2.0, 0.5), (1.0, 1.0, 0.0, 1.0, 0.5)])
    pf = build_portfolio(env, 2)
    log = manual_log([0.3, 0.7], [0, 1], 1.0, pf)
    grid = loss_process(log, np.array([1.0]))
    assert grid.loss_fraction[0] == pytest.approx(1.5)


def test_loss_right_continuous_at_event():
    env = make_env([(1.0, 0.0, 0.0, 1.0, 1.0)])
    pf = build_portfolio(env, 2)
    log = manual_log([0.5], [0], 1.0, pf)
    grid = loss_process(log, np.array([0.5]))
    assert grid.loss_fraction[0] == 0.5  # event at exactly t counts


def test_empty_class_fraction_is_zero():
    env = make_env([(1.0, 0.0, 0.0, 1.0, 0.001), (1.0, 1.0, 0.0, 1.0, 0.999)])
    pf = build_portfolio(env, 3)  # class 0 gets no firms
    assert pf.class_counts[0] == 0
    log = manual_log([0.1], [1], 1.0, pf)
    grid = loss_process(log, np.array([0.5]))
    assert grid.class_fraction[0, 0] == 0.0


def test_grid_out_of_range():
    pf = takeoff_portfolio(4)
    log = manual_log([], [], 2.0, pf)
    with pytest.raises(GridOutOfRange):
        loss_process(log, np.array([1.0, 2.5]))
    with pytest.raises(GridOutOfRange):
        loss_process(log, np.array([-0.1, 1.0]))


def test_path_grid_invariants():
    pf = takeoff_portfolio(300)
    log = simulate_path(pf, 5.0, stream(5, 0, 0))
    grid = loss_process(log, np.linspace(0, 5, 101))
    assert np.all(np.diff(grid.loss_fraction) >= 0)
    assert np.all((grid.class_fraction >= 0) & (grid.class_fraction <= 1))
    assert np.all(np.diff(grid.class_fraction, axis=0) >= 0)
    # conservation: class defaults recombine to the total count
    counts = pf.class_counts
    total = grid.class_fraction @ counts
    expected = np.searchsorted(log.times, grid.t_grid, side="right")
    np.testing.assert_allclose(total, expected)


# -------------------------------------------------------------- monte_carlo

def test_mc_mean_matches_binomial():
    """No contagion: defaults are iid with q(t) = 1 - e^{-t}."""
    env = make_env([(1.0, 0.0, 0.0, 1.0, 1.0)])
    pf = build_portfolio(env, 125)
    m = 2000
    stats = monte_carlo(pf, 1.0, np.array([1.0]), m, seed=2)
    q = 1.0 - math.exp(-1.0)
    se = math.sqrt(q * (1.0 - q) / (125 * m))
    assert abs(stats.mean_loss_fraction[0] - q) < 3 * se


def test_mc_var_scaled_matches_binomial():
    env = make_env([(1.0, 0.0, 0.0, 1.0, 1.0)])
    pf = build_portfolio(env, 125)
    stats = monte_carlo(pf, 1.0, np.array([1.0]), 4000, seed=4)
    q = 1.0 - math.exp(-1.0)
    target = q * (1.0 - q)
    # variance of a sample variance: ~ target * sqrt(2/m) relative
    assert abs(stats.var_scaled_loss[0] - target) < 4 * target * math.sqrt(2 / 4000)


def test_mc_no_events_zero_variance():
    env = make_env([(1.0, 1.0, 50.0, 1.0, 1.0)])  # rate e^-50: never fires
    pf = build_portfolio(env, 20)
    stats = monte_carlo(pf, 5.0, np.linspace(0, 5, 6), 2, seed=0)
    np.testing.assert_array_equal(stats.mean_loss_fraction, 0.0)
    np.testing.assert_array_equal(stats.var_scaled_loss, 0.0)


def test_mc_single_replica_allowed():
    pf = takeoff_portfolio(50)
    stats = monte_carlo(pf, 2.0, np.array([1.0, 2.0]), 1, seed=9)
    np.testing.assert_array_equal(stats.var_scaled_loss, 0.0)
    assert stats.replicas == 1


def test_mc_worker_count_invisible():
    pf = takeoff_portfolio(60)
    grid = np.linspace(0, 3, 7)
    one = monte_carlo(pf, 3.0, grid, 130, thresholds=(0.1,), seed=6, workers=1)
    three = monte_carlo(pf, 3.0, grid, 130, thresholds=(0.1,), seed=6, workers=3)
    np.testing.assert_array_equal(one.mean_loss_fraction, three.mean_loss_fraction)
    np.testing.assert_array_equal(one.var_scaled_loss, three.var_scaled_loss)
    np.testing.assert_array_equal(one.mean_class_fractions, three.mean_class_fractions)
    np.testing.assert_array_equal(one.excess_prob[0.1], three.excess_prob[0.1])


def test_mc_excess_monotone_in_threshold():
    pf = takeoff_portfolio(125)
    stats = monte_carlo(
        pf, 5.0, np.linspace(0, 5, 21), 400,
        thresholds=(0.05, 0.15, 0.25), seed=1)
    lo, mid, hi = (stats.excess_prob[x] for x in (0.05, 0.15, 0.25))
    assert np.all(lo >= mid) and np.all(mid >= hi)
    for arr in (lo, mid, hi):
        assert np.all((arr >= 0) & (arr <= 1))


def test_mc_raising_robustness_lowers_defaults():
    """With beta=0 the per-class laws are binomial, so a 3-sigma
    comparison of mean fractions is exact."""
    env_lo = make_env([(1.0, 0.0, 0.0, 1.0, 1.0)])
    env_hi = make_env([(1.0, 0.0, 0.5, 1.0, 1.0)])
    m, n = 2000, 200
    s_lo = monte_carlo(build_portfolio(env_lo, n), 1.0, np.array([1.0]), m, seed=8)
    s_hi = monte_carlo(build_portfolio(env_hi, n), 1.0, np.array([1.0]), m, seed=8)
    q_lo, q_hi = 1.0 - math.exp(-1.0), 1.0 - math.exp(-math.exp(-0.5))
    pooled_se = math.sqrt((q_lo * (1 - q_lo) + q_hi * (1 - q_hi)) / (n * m))
    diff = s_lo.mean_loss_fraction[0] - s_hi.mean_loss_fraction[0]
    assert diff > 3 * pooled_se


def test_mc_rejects_zero_replicas():
    with pytest.raises(ValueError):
        monte_carlo(takeoff_portfolio(10), 1.0, np.array([1.0]), 0)

import numpy as np
import pytest

from qce_lqr.control_math import DimensionMismatch, lqr_cost, solve_dare
from qce_lqr.plant_sim import (
    EXPLORATION,
    PROCESS_NOISE,
    CostAccumulator,
    SimConfig,
    gaussian_stream,
    regret_account,
    simulate_linear_policy,
    step,
)


def test_step(scalar):
    sys, _ = scalar
    assert step([1.0], [0.5], sys, [0.1]).tolist() == pytest.approx([1.7])
    with pytest.raises(DimensionMismatch):
        step([1.0, 2.0], [0.5], sys, [0.1])


def test_streams_deterministic_and_independent():
    a = gaussian_stream(7, 100, 2, PROCESS_NOISE)
    assert np.array_equal(a, gaussian_stream(7, 100, 2, PROCESS_NOISE))
    b = gaussian_stream(7, 100, 2, EXPLORATION)
    assert not np.allclose(a, b)
    assert a.shape == (100, 2)


def test_regret_account():
    r = regret_account([3.0, 1.0, 2.0], 2.0)
    assert r.tolist() == [1.0, 0.0, 0.0]
    acc = CostAccumulator(2.0)
    for c in (3.0, 1.0, 2.0):
        acc.add(c)
    assert acc.cumulative_cost == 6.0
    assert acc.regret_curve.tolist() == [1.0, 0.0, 0.0]


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(T=3, seed=0)
    with pytest.raises(ValueError):
        SimConfig(T=10, seed=0, sigma_w=0.0)


def test_zero_noise_stays_at_origin(scalar):
    sys, cost = scalar
    K = solve_dare(sys, cost).K
    xs, us, costs = simulate_linear_policy(sys, cost, K, SimConfig(50, 0, sigma_w=1e-300))
    assert np.abs(xs).max() < 1e-290 and costs.max() < 1e-290


def test_average_cost_approaches_lqr_cost(scalar):
    sys, cost = scalar
    K = solve_dare(sys, cost).K
    _, _, costs = simulate_linear_policy(sys, cost, K, SimConfig(200_000, 3))
    assert costs.mean() == pytest.approx(lqr_cost(sys, cost, K), rel=0.03)

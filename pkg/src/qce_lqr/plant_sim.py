"""Seeded simulation of ``x_{t+1} = A x_t + B u_t + w_t`` with cost and regret bookkeeping.

Gaussian draws come from numpy's PCG64 generator (``standard_normal`` uses the
ziggurat method). One master seed is split with :class:`numpy.random.SeedSequence`
into independent sub-streams for process noise, exploration noise and
posterior sampling, so two controllers run from the same seed see the same
disturbance realization.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control_math import DimensionMismatch, SystemPair

# spawn keys for the per-trial sub-streams
PROCESS_NOISE = 0
EXPLORATION = 1
BOOTSTRAP = 2


@dataclass(frozen=True)
class SimConfig:
    T: int
    seed: int
    sigma_w: float = 1.0

    def __post_init__(self):
        if self.T < 4:
            raise ValueError("horizon T must be >= 4")
        if not (np.isfinite(self.sigma_w) and self.sigma_w > 0):
            raise ValueError("sigma_w must be finite and positive")


def step(x, u, sys: SystemPair, w) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape != (sys.dx,) or w.shape != (sys.dx,) or u.shape != (sys.du,):
        raise DimensionMismatch(f"x{x.shape} u{u.shape} w{w.shape} vs system ({sys.dx}, {sys.du})")
    return sys.A @ x + sys.B @ u + w


def stream_rng(seed: int, key: int) -> np.random.Generator:
    """Independent generator for sub-stream ``key`` of master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


def gaussian_stream(seed: int, n: int, dim: int = 1, key: int = PROCESS_NOISE) -> np.ndarray:
    """``n`` i.i.d. ``N(0, I_dim)`` draws as an ``(n, dim)`` array."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return stream_rng(seed, key).standard_normal((n, dim))


def regret_account(costs, jstar: float) -> np.ndarray:
    """Prefix sums of ``costs`` minus ``t * jstar`` for ``t = 1..len(costs)``."""
    costs = np.asarray(costs, dtype=float)
    t = np.arange(1, costs.size + 1)
    return np.cumsum(costs) - t * jstar


@dataclass
class CostAccumulator:
    jstar: float
    per_step_costs: list = field(default_factory=list)

    def add(self, c: float):
        self.per_step_costs.append(float(c))

    @property
    def cumulative_cost(self) -> float:
        return float(np.sum(self.per_step_costs))

    @property
    def regret_curve(self) -> np.ndarray:
        return regret_account(self.per_step_costs, self.jstar)


def simulate_linear_policy(sys: SystemPair, cost, K, cfg: SimConfig, explore_std: float = 0.0):
    """Roll out ``u_t = K x_t + explore_std * g_t`` from ``x_1 = 0``.

    Returns ``(states, inputs, costs)`` with ``states`` of shape ``(T+1, dx)``.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    w = cfg.sigma_w * gaussian_stream(cfg.seed, cfg.T, sys.dx, PROCESS_NOISE)
    g = gaussian_stream(cfg.seed, cfg.T, sys.du, EXPLORATION)
    xs = np.zeros((cfg.T + 1, sys.dx))
    us = np.zeros((cfg.T, sys.du))
    costs = np.zeros(cfg.T)
    A, B, Rx, Ru = sys.A, sys.B, cost.Rx, cost.Ru
    for t in range(cfg.T):
        x = xs[t]
        u = K @ x + explore_std * g[t]
        us[t] = u
        costs[t] = x @ Rx @ x + u @ Ru @ u
        xs[t + 1] = A @ x + B @ u + w[t]
    return xs, us, costs

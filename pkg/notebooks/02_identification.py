"""
Least squares on doubling epochs
================================

Each epoch k uses only the samples in [2^(k-1), 2^k - 1]. The estimate
error shrinks like 1/sqrt(window) while the confidence scalar used by the
theoretical trigger stays far above the safe threshold.
"""
import math

import numpy as np

from qce_lqr.experiments import benchmark_system
from qce_lqr.ols import confidence, ols_fit, sample_ols_posterior
from qce_lqr.plant_sim import SimConfig, simulate_linear_policy

bs = benchmark_system("scalar")
xs, us, _ = simulate_linear_policy(bs.sys, bs.cost, bs.K0, SimConfig(2**14, seed=1), explore_std=1.0)

threshold = 1 / (9 * 54 * 1.7738**5)
print(f"{'k':>3} {'window':>7} {'err':>9} {'sqrt(Conf)':>11}   (threshold {threshold:.2e})")
for k in range(3, 15):
    lo, hi = 2 ** (k - 1), 2**k
    res = ols_fit(xs[lo - 1:hi], us[lo - 1:hi - 1])
    err = np.linalg.norm(res.theta - bs.sys.vec())
    print(f"{k:3d} {hi - lo:7d} {err:9.2e} {math.sqrt(confidence(res, k, 1e-4).value):11.3e}")

# %%
# The bootstrap trigger looks at the same estimate through posterior samples instead.
res = ols_fit(xs[2**9 - 1:2**10], us[2**9 - 1:2**10 - 1])
draws = sample_ols_posterior(res, 1.0, 5, seed=0)
for d in draws:
    print("sample A, B:", round(float(d.A[0, 0]), 4), round(float(d.B[0, 0]), 4))

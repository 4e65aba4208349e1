"""
Hard instances and the bit lower bound
======================================

For any gain K there is a plant whose optimal gain is exactly K and whose
optimal cost does not depend on K. A scheme that gets low regret on all of
them must tell the controller which one it faces, which costs bits.
"""
import numpy as np

from qce_lqr.converse import (
    bellman_residual,
    bits_lower_bound,
    build_hard_instance,
    comm_budget_bound,
    inflation_factors,
    regret_identity_check,
    verify_fixed_point,
)

inst = build_hard_instance(0.3, 1, 1, sigma_w=1.0, c=2.0)
print("Phi_K, B_K, A_K =", inst.Phi_K[0, 0], inst.B_K[0, 0], inst.A_K[0, 0])
print("Riccati gain gap, cost error:", verify_fixed_point(inst))
print("invariants:", inst.invariant_errors())
print("Bellman residual at x=1, u=-0.5:", bellman_residual(inst, [1.0], [-0.5]))

# %%
rep = regret_identity_check(inst, inst.K + 0.1, T=500, n_trials=2000, seed=0)
print(f"\nsum of excess {rep.excess_mean:.3f} vs regret + terminal value {rep.rhs_mean:.3f} (z = {rep.z:.2f})")

# %%
for T in (2**10, 2**14, 2**20):
    b = bits_lower_bound(0.5, T, 2, 1, r=0.5)
    print(f"T = 2^{int(np.log2(T))}: lower bound {b.bits_lower:7.2f} bits, upper-bound leading term "
          f"{comm_budget_bound(6, 0.5, T):7.1f} bits")
print("\ninflation factors at rho = 0.5:", inflation_factors(0.5))

"""
Riccati solutions and safe constants of the four benchmarks
===========================================================

The certainty-equivalent controller only works once the parameter estimate is
inside a ball whose radius scales like 1 / ||P||^5. This script prints the
numbers that make the theoretical safe trigger impractical.
"""
import numpy as np

from qce_lqr.control_math import dlyap, hinf_diagnostic, safe_constant, solve_dare, spectral_radius
from qce_lqr.experiments import SYSTEMS, benchmark_system

print(f"{'system':>18} {'rho(A)':>8} {'||P||':>8} {'C_safe':>10} {'2 eps':>10} {'iters':>6}")
for name in SYSTEMS:
    bs = benchmark_system(name)
    sol = solve_dare(bs.sys, bs.cost)
    cs = safe_constant(bs.sys, bs.cost)
    print(f"{name:>18} {spectral_radius(bs.sys.A):8.4f} {sol.P_op:8.3f} {cs:10.3g} {2 / (9 * cs):10.3g} {sol.iterations:6d}")

# %%
# The closed loop of the optimal gain, its Lyapunov matrix and an H-infinity style margin
bs = benchmark_system("double_integrator")
sol = solve_dare(bs.sys, bs.cost)
X = dlyap(sol.A_cl)
print("\nK* =", np.round(sol.K, 4))
print("rho(A + B K*) =", round(spectral_radius(sol.A_cl), 4))
print("||dlyap(A_cl)|| =", round(np.linalg.norm(X, 2), 4))
for n in (64, 256, 1024):
    print(f"  resolvent peak on {n:5d} grid points: {hinf_diagnostic(sol.A_cl, n):.6f}")

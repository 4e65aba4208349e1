"""
One closed-loop run, three ways
===============================

Same seed, same disturbances: full-precision certainty equivalence, the
practical quantized scheme and the lattice codec with projection onto the
safe set. The plant and controller each keep their own copy of the shared
estimate; the run checks that both agree bit for bit after every epoch.
"""
from qce_lqr.experiments import benchmark_system
from qce_lqr.protocol import preset, run_trial

bs = benchmark_system("double_integrator")
for name, extra in (("unquantized_ce", {}), ("practical_qce", {}), ("theoretical", {"trigger": "bootstrap"})):
    res = run_trial(bs.sys, bs.cost, bs.K0, preset(name, T=10_000, seed=7, **extra))
    print(f"{name:>15}: regret {res.final_regret:9.1f}  bits {res.total_bits:5d}  "
          f"k_safe {res.k_safe}  fallbacks {res.fallback_count}  mirror ok {res.mirror_always_equal}")
    print(f"{'':>17}breakdown {res.bits_breakdown}")

# %%
# Per-epoch view of the practical run
res = run_trial(bs.sys, bs.cost, bs.K0, preset("practical_qce", T=10_000, seed=7))
for e in res.epochs:
    inn = "" if e.innovation_norm is None else f"innovation {e.innovation_norm:.3f}"
    print(f"  epoch {e.k:2d} (t={e.tau_k:5d}) {'safe' if e.safe else 'pre '} {e.bits:4d} bits  {inn}")
print("uplink hex:", res.uplink_hex[:64], "...")

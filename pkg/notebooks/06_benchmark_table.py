"""
Paired comparison on the benchmarks
===================================

Fifty paired seeds per system; the quantized scheme sees exactly the noise the
full-precision baseline sees. Writes CSV curves and a JSON summary to ./out.
Set QCE_THREADS to use more worker processes.
"""
import sys

from qce_lqr.experiments import run_experiment, trigger_gap_table

systems = sys.argv[1:] or ["scalar", "double_integrator"]

for row in trigger_gap_table(systems):
    print(f"{row['system']:>18}: 2 eps {row['two_eps_target']:.2e}, sqrt(Conf) at T=1e4 {row['sqrt_conf_median']:.2e}")

for name in systems:
    out = run_experiment(name, T=10_000, n_trials=50, base_seed=0, out_dir="out")
    s = out.summary
    ce, q = s.variants["unquantized_ce"], s.variants["practical_qce"]
    print(f"{name:>18}: CE regret {ce.median_regret:8.0f}  QCE regret {q.median_regret:8.0f}  "
          f"overhead {s.overhead_pct:+6.1f}%  QCE bits {q.median_bits:6.0f}  CE bits {ce.median_bits:6.0f}")

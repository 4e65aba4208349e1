"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from qce_lqr import codec
from qce_lqr.control_math import CostPair, SystemPair, dlyap, safe_constant, solve_dare, spectral_radius
from qce_lqr.converse import (
    bellman_residual,
    bits_lower_bound,
    build_hard_instance,
    cube_halfwidth,
    default_c,
    inflation_factors,
    regret_identity_check,
    verify_fixed_point,
)
from qce_lqr.experiments import benchmark_system, run_experiment
from qce_lqr.protocol import preset, run_trial

ALL = ("scalar", "double_integrator", "inverted_pendulum", "boeing747")


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail, elapsed=None):
        t = "" if elapsed is None else f" [{elapsed:.1f}s]"
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}{t}")
        return ok
    return _report


# shared trial pools, reused by criterion 10
_POOLS: dict = {}


def theoretical_pool():
    """Scalar runs of the lattice codec (rho = 0.5, 20 seeds, T = 2^14).

    The confidence trigger cannot fire at this horizon, so the safe epoch is
    found with the bootstrap test; everything after it (projection onto the
    safe set, two-scale schedule, multiplier, lattice quantizer) is the
    theoretical scheme.
    """
    if "theory" not in _POOLS:
        bs = benchmark_system("scalar")
        cfg = lambda s: preset("theoretical", T=2**14, seed=s, rho=0.5, trigger="bootstrap")  # noqa: E731
        _POOLS["theory"] = [run_trial(bs.sys, bs.cost, bs.K0, cfg(s)) for s in range(20)]
    return _POOLS["theory"]


def table_pool():
    if "table" not in _POOLS:
        t0 = time.time()
        out = {name: run_experiment(name, T=10_000, n_trials=50, base_seed=0) for name in ("scalar", "double_integrator")}
        _POOLS["table"] = (out, time.time() - t0)
    return _POOLS["table"]


def test_01_dare_golden(report):
    t0 = time.time()
    golden = {"scalar": 1.77, "double_integrator": 3.60, "inverted_pendulum": 24.0, "boeing747": 55.9}
    errs = {}
    for name, ref in golden.items():
        bs = benchmark_system(name)
        errs[name] = abs(solve_dare(bs.sys, bs.cost).P_op - ref) / ref
    el = time.time() - t0
    ok = max(errs.values()) <= 0.02 and el < 1.0
    detail = ", ".join(f"{k} {v:.2%}" for k, v in errs.items())
    assert report(1, ok, f"||P|| relative errors: {detail}", el)


def test_02_safe_constants(report):
    t0 = time.time()
    golden = {
        "scalar": (9.5e2, 2.3e-4), "double_integrator": (3.3e4, 6.8e-6),
        "inverted_pendulum": (4.3e8, 5.2e-10), "boeing747": (2.9e10, 7.5e-12),
    }
    worst = 0.0
    parts = []
    for name, (cs_ref, e_ref) in golden.items():
        bs = benchmark_system(name)
        cs = safe_constant(bs.sys, bs.cost)
        two_eps = 2 / (9 * cs)
        e1, e2 = abs(cs - cs_ref) / cs_ref, abs(two_eps - e_ref) / e_ref
        worst = max(worst, e1, e2)
        parts.append(f"{name} C_safe {cs:.3g} / 2eps {two_eps:.3g}")
    el = time.time() - t0
    ok = worst <= 0.05 and el < 1.0
    assert report(2, ok, f"worst relative error {worst:.2%}; " + "; ".join(parts), el)


def test_03_hard_instance_oracle(report):
    t0 = time.time()
    rng = np.random.default_rng(3)
    gap = jerr = 0.0
    for dx, du in ((1, 1), (2, 1), (2, 2)):
        a = cube_halfwidth(0.5, dx, du)
        c = default_c(0.5, np.eye(dx), np.eye(du))
        for _ in range(100):
            inst = build_hard_instance(rng.uniform(-a, a, (du, dx)), np.eye(dx), np.eye(du), 1.0, c)
            g, j = verify_fixed_point(inst)
            gap, jerr = max(gap, g), max(jerr, j)
    el = time.time() - t0
    ok = gap <= 1e-7 and jerr <= 1e-8 and el < 10
    assert report(3, ok, f"max gain gap {gap:.2e}, max cost rel err {jerr:.2e} over 300 instances", el)


def test_04_bellman_identity(report):
    t0 = time.time()
    rng = np.random.default_rng(4)
    insts = [build_hard_instance(0.3, 1, 1, 1.0, 2.0),
             build_hard_instance([[0.2, -0.1]], np.eye(2), np.eye(1), 1.0),
             build_hard_instance([[0.1, 0.2], [-0.2, 0.05]], np.eye(2), np.eye(2), 1.0)]
    worst = 0.0
    for inst in insts:
        du, dx = inst.K.shape
        for _ in range(1000):
            x, u = rng.normal(size=dx) * 3, rng.normal(size=du) * 3
            worst = max(worst, abs(bellman_residual(inst, x, u)) / (1 + x @ x + u @ u))
    el = time.time() - t0
    ok = worst <= 1e-9 and el < 1.0
    assert report(4, ok, f"max normalized residual {worst:.2e} (3 instances x 1000 samples)", el)


def test_05_regret_identity(report):
    t0 = time.time()
    inst = build_hard_instance(0.3, 1, 1, 1.0, 2.0)
    rep = regret_identity_check(inst, inst.K + 0.1, T=500, n_trials=2000, seed=5)
    el = time.time() - t0
    ok = rep.agrees and el < 30
    assert report(5, ok, f"sum excess {rep.excess_mean:.3f} vs regret+V {rep.rhs_mean:.3f}, "
                         f"|diff|/SE = {abs(rep.z):.2f} (limit 3)", el)


def test_06_codec_properties(report):
    t0 = time.time()
    bad = {}
    # Elias Gamma length for every n in [1, 1e6]
    bad["eg_len"] = sum(len(codec.eg_encode(n)) != 2 * (n.bit_length() - 1) + 1 for n in range(1, 10**6 + 1))
    bad["eg_len"] += sum(codec.eg_length(n) != 2 * int(math.floor(math.log2(n))) + 1 for n in range(1, 10**6 + 1, 7))
    # round trips of every message type
    rng = np.random.default_rng(6)
    cb = codec.build_codebook(2, 0.5)
    rt = 0
    for i in range(10_000):
        kind = i % 5
        if kind == 0:
            msg = codec.SafeFlag(bool(rng.integers(2)))
            back = lambda s: codec.read_safe_flag(s)  # noqa: E731
        elif kind == 1:
            d = int(rng.integers(1, 25))
            msg = codec.Init(int(rng.integers(1, 64)), tuple(int(z) for z in rng.integers(-2**40, 2**40, d)))
            back = lambda s, d=d: codec.read_init(s, d)  # noqa: E731
        elif kind == 2:
            msg = codec.Track(int(rng.integers(1, 10**6)), int(rng.integers(cb.size)), cb.index_bits)
            back = lambda s: codec.read_track(s, cb.index_bits)  # noqa: E731
        elif kind == 3:
            d = int(rng.integers(1, 25))
            msg, _ = codec.coord_quantize(rng.normal(size=d) * 10 ** rng.uniform(-3, 1), int(rng.integers(1, 2**14)))
            back = lambda s, d=d: codec.read_coord_track(s, d)  # noqa: E731
        else:
            z = int(rng.integers(-10**9, 10**9))
            rt += codec.signed_eg_decode(codec.signed_eg_encode(z)) != z
            continue
        s = codec.BitStream.from_hex(codec.encode_message(msg).to_hex(), msg.bit_cost())
        rt += back(s) != msg or s.remaining() != 0
    bad["roundtrip"] = rt
    # absolute initialization error
    ai = 0
    for _ in range(1000):
        d = int(rng.integers(1, 25))
        theta = rng.normal(size=d) * 10 ** rng.uniform(-2, 2)
        eps = 10 ** rng.uniform(-11, 0)
        _, rec = codec.absolute_init(theta, eps)
        ai += np.linalg.norm(rec - theta) > eps
    bad["init"] = ai
    # covering radius
    cov = 0
    for d in (1, 2, 6):
        cbd = codec.build_codebook(d, 0.5)
        v = rng.normal(size=(10_000, d))
        v *= rng.uniform(size=(10_000, 1)) ** (1 / d) / np.linalg.norm(v, axis=1, keepdims=True)
        s_scale = 10 ** rng.uniform(-3, 3, size=10_000)
        for row, s in zip(v, s_scale):
            _, rec = codec.quantize_innovation(s * row, s, cbd)
            cov += np.linalg.norm(rec - s * row) > 0.5 * s * (1 + 1e-12)
    bad["covering"] = cov
    el = time.time() - t0
    ok = sum(bad.values()) == 0 and el < 30
    assert report(6, ok, "violations " + ", ".join(f"{k}={v}" for k, v in bad.items()), el)


def test_07_multiplier_contraction(report):
    t0 = time.time()
    trials = theoretical_pool()
    M = math.ceil(inflation_factors(0.5)["m_inf"])
    settled = []
    for tr in trials:
        ks = sorted(tr.m_series)
        ok_from = None
        for k in reversed(ks):
            if tr.m_series[k] > M:
                break
            ok_from = k
        settled.append(ok_from)
    el = time.time() - t0
    max_m = max(max(t.m_series.values()) for t in trials if t.m_series)
    ok = all(s is not None for s in settled) and M == 5 and el < 60
    assert report(7, ok, f"m_k <= {M} from a seed-dependent epoch on in {sum(s is not None for s in settled)}/20 "
                         f"trials; largest m_k seen {max_m}", el)


def test_08_bit_budget_log_growth(report):
    t0 = time.time()
    trials = theoretical_pool()
    Ts = np.array([2**j for j in range(10, 15)])
    B = np.array([np.median([tr.bits_curve[T - 1] for tr in trials]) for T in Ts], dtype=float)
    X = np.column_stack([np.ones(len(Ts)), np.log2(Ts)])
    coef, *_ = np.linalg.lstsq(X, B, rcond=None)
    rel = np.abs(X @ coef - B) / B
    # per-epoch cost after contraction is constant (m_k = 1 -> 1 + index bits)
    per_epoch = {e.bits for tr in trials for e in tr.epochs if e.m is not None and e.m == 1}
    el = time.time() - t0
    ok = rel.max() < 0.10 and len(per_epoch) == 1 and el < 60
    assert report(8, ok, f"B(T) = {coef[0]:.1f} + {coef[1]:.2f} log2 T, max rel residual {rel.max():.2%}; "
                         f"post-contraction epoch cost {sorted(per_epoch)} bits", el)


def test_09_results_table(report):
    out, el = table_pool()
    s = out["scalar"].summary.variants
    d = out["double_integrator"].summary.variants
    checks = {
        "scalar bits in [60,250]": 60 <= s["practical_qce"].median_bits <= 250,
        "DI bits in [140,560]": 140 <= d["practical_qce"].median_bits <= 560,
        "scalar CE regret in [300,3000]": 300 <= s["unquantized_ce"].median_regret <= 3000,
        "scalar QCE regret in [300,3000]": 300 <= s["practical_qce"].median_regret <= 3000,
        "scalar overhead <= 50%": abs(out["scalar"].summary.overhead_pct) <= 50,
        "DI overhead <= 50%": abs(out["double_integrator"].summary.overhead_pct) <= 50,
        "runtime < 300 s": el < 300,
    }
    detail = (
        f"scalar bits {s['practical_qce'].median_bits:g}, DI bits {d['practical_qce'].median_bits:g}; "
        f"scalar regret CE {s['unquantized_ce'].median_regret:.0f} / QCE {s['practical_qce'].median_regret:.0f}; "
        f"overhead scalar {out['scalar'].summary.overhead_pct:+.1f}% DI {out['double_integrator'].summary.overhead_pct:+.1f}%"
    )
    failed = [k for k, v in checks.items() if not v]
    if failed:
        detail += "; failed: " + ", ".join(failed)
    assert report(9, not failed, detail, el)


def test_10_shared_state_bit_exact(report):
    trials = list(theoretical_pool())
    out, _ = table_pool()
    for exp in out.values():
        for lst in exp.trials.values():
            trials.extend(lst)
    epochs = sum(len(t.epochs) for t in trials)
    bad = sum(not e.mirror_equal for t in trials for e in t.epochs)
    assert report(10, bad == 0, f"{bad} mismatches over {epochs} epochs in {len(trials)} trials")


def test_11_lemma_diagnostics(report):
    t0 = time.time()
    bs = benchmark_system("scalar")
    A, B, cost = bs.sys.A, bs.sys.B, bs.cost
    star = solve_dare(bs.sys, cost)
    X = dlyap(star.A_cl)
    bound = 1 - 0.5 / np.linalg.norm(X, 2)
    r = 1 / (3 * safe_constant(bs.sys, cost))
    rng = np.random.default_rng(11)
    worst_rho, worst_gap = 0.0, -math.inf
    for _ in range(50):
        dA = rng.uniform(-r, r, A.shape)
        dB = rng.uniform(-r, r, B.shape)
        Kt = solve_dare(SystemPair(A + dA, B + dB), cost).K
        Acl = A + B @ Kt
        worst_rho = max(worst_rho, spectral_radius(Acl))
        D = Acl.T @ X @ Acl - bound * X
        worst_gap = max(worst_gap, float(np.linalg.eigvalsh(0.5 * (D + D.T)).max()))
    el = time.time() - t0
    ok = worst_rho < 1 and worst_gap <= 1e-8 and el < 10
    assert report(11, ok, f"max rho(A+BK) {worst_rho:.4f}, max eig of contraction gap {worst_gap:.3e} "
                          f"(r_safe {r:.2e})", el)


def test_12_bound_calculators(report):
    coefs = {(dx, du): bits_lower_bound(0.5, 2**20, dx, du, 0.5).coefficient for dx, du in ((1, 1), (2, 1), (4, 2))}
    exact = all(c == dx * du / 4 for (dx, du), c in coefs.items())
    f = inflation_factors(1e-6, C0=1.0)
    ok = exact and f["Q_slow"] < 1e-10 and f["Q_fast"] < 1e-10
    assert report(12, ok, f"coefficients {list(coefs.values())}; Q_slow {f['Q_slow']:.2e}, Q_fast {f['Q_fast']:.2e}")

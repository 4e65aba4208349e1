"""Self-contained property checks behind ``qce-lqr verify`` (no test runner needed)."""
from __future__ import annotations

import numpy as np

from . import codec
from .control_math import safe_constant, solve_dare
from .converse import bellman_residual, build_hard_instance, cube_halfwidth, default_c, verify_fixed_point
from .experiments import benchmark_system
from .protocol import SafeSet, preset, project_safe, run_trial

GOLDEN_PNORM = {"scalar": 1.77, "double_integrator": 3.60, "inverted_pendulum": 24.0, "boeing747": 55.9}


def _dare_golden():
    worst = 0.0
    for name, ref in GOLDEN_PNORM.items():
        bs = benchmark_system(name)
        worst = max(worst, abs(solve_dare(bs.sys, bs.cost).P_op - ref) / ref)
    return worst <= 0.02, f"max relative error {worst:.2e}"


def _hard_instances(rng, n):
    gap = jerr = inv = 0.0
    for dx, du in ((1, 1), (2, 1), (2, 2)):
        a = cube_halfwidth(0.5, dx, du)
        c = default_c(0.5, np.eye(dx), np.eye(du))
        for _ in range(n):
            inst = build_hard_instance(rng.uniform(-a, a, (du, dx)), np.eye(dx), np.eye(du), 1.0, c)
            g, j = verify_fixed_point(inst)
            gap, jerr = max(gap, g), max(jerr, j)
            inv = max(inv, max(inst.invariant_errors().values()))
    ok = gap <= 1e-7 and jerr <= 1e-8 and inv <= 1e-10
    return ok, f"gain gap {gap:.1e}, cost err {jerr:.1e}, invariant err {inv:.1e}"


def _bellman(rng, n):
    inst = build_hard_instance(0.3, 1, 1, 1.0, 2.0)
    worst = 0.0
    for _ in range(n):
        x, u = rng.normal(size=1) * 10, rng.normal(size=1) * 10
        worst = max(worst, abs(bellman_residual(inst, x, u)) / (1 + x @ x + u @ u))
    return worst <= 1e-9, f"max normalized residual {worst:.1e}"


def _codec(rng, n):
    bad = 0
    for _ in range(n):
        v = int(rng.integers(1, 10**6))
        bad += codec.eg_decode(codec.eg_encode(v)) != v or len(codec.eg_encode(v)) != codec.eg_length(v)
        z = int(rng.integers(-10**6, 10**6))
        bad += codec.signed_eg_decode(codec.signed_eg_encode(z)) != z
    for _ in range(n // 10):
        d = int(rng.integers(1, 7))
        theta = rng.normal(size=d) * 3
        eps = 10 ** rng.uniform(-8, -1)
        _, rec = codec.absolute_init(theta, eps)
        bad += np.linalg.norm(rec - theta) > eps
    for d in (1, 2, 6):
        cb = codec.build_codebook(d, 0.5)
        v = rng.normal(size=(n // 10, d))
        v *= (rng.uniform(size=(n // 10, 1)) ** (1 / d)) / np.linalg.norm(v, axis=1, keepdims=True)
        for row in v:
            _, rec = codec.quantize_innovation(row, 1.0, cb)
            bad += np.linalg.norm(rec - row) > 0.5 + 1e-12
    return bad == 0, f"{bad} failures"


def _projection(rng, n):
    safe = SafeSet(np.array([1.1, 1.0, 0.2, -0.3, 0.5, 0.7]), 0.3, 2, 1)
    bad = 0
    for _ in range(n):
        a, b = rng.normal(size=6), rng.normal(size=6)
        pa, pb = project_safe(a, safe), project_safe(b, safe)
        bad += not safe.contains(pa)
        bad += not np.allclose(project_safe(pa, safe), pa, atol=1e-12)
        bad += np.linalg.norm(pa - pb) > np.linalg.norm(a - b) * (1 + 1e-12)
    return bad == 0, f"{bad} failures"


def _mirror(seeds):
    bad = 0
    for name in ("scalar", "double_integrator"):
        bs = benchmark_system(name)
        for variant in ("practical_qce", "unquantized_ce", "theoretical"):
            over = {"trigger": "bootstrap"} if variant == "theoretical" else {}
            for s in seeds:
                res = run_trial(bs.sys, bs.cost, bs.K0, preset(variant, T=2**11, seed=s, **over))
                bad += not res.mirror_always_equal
                bad += sum(res.bits_breakdown.values()) != res.total_bits
    return bad == 0, f"{bad} mismatching trials"


def _safe_constants():
    golden = {"scalar": 9.5e2, "double_integrator": 3.3e4, "inverted_pendulum": 4.3e8, "boeing747": 2.9e10}
    worst = 0.0
    for name, ref in golden.items():
        bs = benchmark_system(name)
        worst = max(worst, abs(safe_constant(bs.sys, bs.cost) - ref) / ref)
    return worst <= 0.05, f"max relative error {worst:.2e}"


def run_checks(seed: int = 0, quick: bool = False) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    n = 200 if quick else 2000
    checks = [
        ("riccati golden norms", lambda: _dare_golden()),
        ("safe constants", lambda: _safe_constants()),
        ("hard-instance fixed point", lambda: _hard_instances(rng, 10 if quick else 100)),
        ("bellman identity", lambda: _bellman(rng, n)),
        ("codec round trips and covering", lambda: _codec(rng, n)),
        ("safe-set projection", lambda: _projection(rng, n // 2)),
        ("plant/controller mirror", lambda: _mirror(range(2 if quick else 5))),
    ]
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out

"""Benchmark plants, the safe-trigger gap table and the multi-trial experiment runner.

All benchmarks use ``Rx = I``, ``Ru = I`` and unit process noise. The
pendulum and Boeing 747 matrices live in ``data/*.json`` with a SHA-256 of the
discrete matrices, checked on load together with the spectral radius and the
Riccati norm.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .control_math import CostPair, NonConvergence, SystemPair, safe_constant, solve_dare, spectral_radius
from .ols import confidence, ols_fit
from .plant_sim import SimConfig, simulate_linear_policy
from .protocol import TrialConfig, TrialResult, preset, run_trial

SYSTEMS = ("scalar", "double_integrator", "inverted_pendulum", "boeing747")
VARIANTS = ("unquantized_ce", "practical_qce")
PRIOR_SCALE = 0.9


class UnknownSystem(KeyError):
    pass


class ValidationFailure(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkSystem:
    name: str
    sys: SystemPair
    cost: CostPair
    K0: np.ndarray
    expected_rho: float
    expected_Pnorm: float
    expected_Csafe: Optional[float] = None

    @property
    def d_s(self) -> int:
        return self.sys.d_s


def prior_gain(sys: SystemPair, cost: CostPair, scale: float = PRIOR_SCALE) -> np.ndarray:
    """Optimal gain of the coarse model ``(scale * A, B)``, checked to stabilize ``(A, B)``."""
    K0 = solve_dare(SystemPair(scale * sys.A, sys.B), cost).K
    if spectral_radius(sys.A + sys.B @ K0) >= 1.0:
        raise ValidationFailure("prior gain does not stabilize the true plant")
    return K0


def matrix_digest(A, B) -> str:
    return hashlib.sha256(json.dumps({"A": A, "B": B}, sort_keys=True).encode()).hexdigest()


def _load_data(name: str) -> dict:
    text = resources.files("qce_lqr").joinpath("data", f"{name}.json").read_text()
    d = json.loads(text)
    if matrix_digest(d["A"], d["B"]) != d["sha256"]:
        raise ValidationFailure(f"{name}: matrix digest mismatch")
    return d


def _validate(bs: BenchmarkSystem):
    rho = spectral_radius(bs.sys.A)
    if abs(rho - bs.expected_rho) > 0.005:
        raise ValidationFailure(f"{bs.name}: spectral radius {rho:.4f}, expected {bs.expected_rho}")
    try:
        sol = solve_dare(bs.sys, bs.cost)
    except NonConvergence as exc:
        raise ValidationFailure(f"{bs.name}: Riccati solve failed") from exc
    if abs(sol.P_op - bs.expected_Pnorm) > 0.02 * bs.expected_Pnorm:
        raise ValidationFailure(f"{bs.name}: ||P|| = {sol.P_op:.4g}, expected {bs.expected_Pnorm}")
    if bs.expected_Csafe is not None:
        cs = 54.0 * sol.P_op**5
        if abs(cs - bs.expected_Csafe) > 0.05 * bs.expected_Csafe:
            raise ValidationFailure(f"{bs.name}: C_safe = {cs:.3g}, expected {bs.expected_Csafe:.3g}")


def benchmark_system(name: str) -> BenchmarkSystem:
    if name == "scalar":
        sys, rho, pn = SystemPair([[1.1]], [[1.0]]), 1.1, 1.77
    elif name == "double_integrator":
        sys, rho, pn = SystemPair([[1.0, 1.0], [0.0, 1.0]], [[0.5], [1.0]]), 1.0, 3.60
    elif name in ("inverted_pendulum", "boeing747"):
        d = _load_data(name)
        sys, rho, pn = SystemPair(d["A"], d["B"]), d["expected_rho"], d["expected_Pnorm"]
    else:
        raise UnknownSystem(f"unknown system {name!r}; choose from {SYSTEMS}")
    cost = CostPair.identity(sys.dx, sys.du)
    cs = {"boeing747": 2.9e10}.get(name)
    bs = BenchmarkSystem(name, sys, cost, prior_gain(sys, cost), rho, pn, cs)
    _validate(bs)
    return bs


# ------------------------------------------------------------ trigger gap

def empirical_conf(bs: BenchmarkSystem, T: int, delta: float, seed: int) -> float:
    """``sqrt(Conf_k)`` on the last full epoch window before ``T`` under ``u = K0 x + g``."""
    k = int(math.floor(math.log2(T)))
    xs, us, _ = simulate_linear_policy(bs.sys, bs.cost, bs.K0, SimConfig(2**k, seed), explore_std=1.0)
    lo, hi = 2 ** (k - 1), 2**k
    res = ols_fit(xs[lo - 1:hi], us[lo - 1:hi - 1])
    return math.sqrt(confidence(res, k, delta, bs.sys.d).value)


def trigger_gap_table(systems=SYSTEMS, T: int = 10_000, delta: float = 1e-4, n_seeds: int = 10) -> list[dict]:
    rows = []
    for name in systems:
        bs = benchmark_system(name)
        Pn = solve_dare(bs.sys, bs.cost).P_op
        cs = safe_constant(bs.sys, bs.cost)
        conf = [empirical_conf(bs, T, delta, s) for s in range(n_seeds)]
        rows.append({
            "system": name,
            "dims": [bs.sys.dx, bs.sys.du],
            "P_norm": Pn,
            "C_safe": cs,
            "two_eps_target": 2.0 / (9.0 * cs),
            "sqrt_conf_median": float(np.median(conf)),
            "gap": float(np.median(conf)) / (2.0 / (9.0 * cs)),
        })
    return rows


# ------------------------------------------------------------ experiments

def _worker_count(n_jobs: int) -> int:
    cap = int(os.environ.get("QCE_THREADS", os.cpu_count() or 1))
    return max(1, min(cap, n_jobs))


def _trial_job(args):
    name, cfg_dict = args
    bs = benchmark_system(name)
    return run_trial(bs.sys, bs.cost, bs.K0, TrialConfig.from_dict(cfg_dict))


@dataclass
class VariantSummary:
    variant: str
    median_regret: float
    regret_q25: float
    regret_q75: float
    median_bits: float
    bits_q25: float
    bits_q75: float
    median_k_safe: Optional[float]
    never_safe: int
    fallback_events: int
    riccati_failures: int
    diverged: int
    mirror_ok: bool


@dataclass
class ExperimentSummary:
    system: str
    T: int
    n_trials: int
    base_seed: int
    variants: dict = field(default_factory=dict)
    overhead_pct: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "T": self.T,
            "n_trials": self.n_trials,
            "base_seed": self.base_seed,
            "overhead_pct": self.overhead_pct,
            "variants": {k: asdict(v) for k, v in self.variants.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSummary":
        return cls(d["system"], d["T"], d["n_trials"], d["base_seed"],
                   {k: VariantSummary(**v) for k, v in d["variants"].items()}, d["overhead_pct"])


def overhead_pct(qce: float, ce: float) -> float:
    return (qce - ce) / ce * 100.0


def _summarize(variant: str, trials: list[TrialResult]) -> tuple[VariantSummary, dict]:
    R = np.vstack([t.regret_curve for t in trials])
    Bc = np.vstack([t.bits_curve for t in trials]).astype(float)
    fr, tb = R[:, -1], Bc[:, -1]
    ks = [t.k_safe for t in trials if t.k_safe is not None]
    vs = VariantSummary(
        variant,
        float(np.median(fr)), float(np.percentile(fr, 25)), float(np.percentile(fr, 75)),
        float(np.median(tb)), float(np.percentile(tb, 25)), float(np.percentile(tb, 75)),
        float(np.median(ks)) if ks else None,
        sum(t.k_safe is None for t in trials),
        sum(t.fallback_count for t in trials),
        sum(t.riccati_failures for t in trials),
        sum(t.diverged for t in trials),
        all(t.mirror_always_equal for t in trials),
    )
    curves = {
        "t": np.arange(1, R.shape[1] + 1),
        "median_regret": np.median(R, axis=0),
        "q25": np.percentile(R, 25, axis=0),
        "q75": np.percentile(R, 75, axis=0),
        "median_bits": np.median(Bc, axis=0),
    }
    return vs, curves


CSV_COLUMNS = ("t", "median_regret", "q25", "q75", "median_bits")


def write_curves_csv(path, curves: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for i in range(len(curves["t"])):
            w.writerow([int(curves["t"][i])] + [repr(float(curves[c][i])) for c in CSV_COLUMNS[1:]])


def read_curves_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {rows[0]}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    out = {c: data[:, i] for i, c in enumerate(CSV_COLUMNS)}
    out["t"] = out["t"].astype(int)
    return out


@dataclass
class ExperimentOutput:
    summary: ExperimentSummary
    trials: dict  # variant -> list[TrialResult]
    curves: dict  # variant -> curve dict
    files: list = field(default_factory=list)


def run_experiment(
    system: str,
    variants=VARIANTS,
    T: int = 10_000,
    n_trials: int = 50,
    base_seed: int = 0,
    out_dir=None,
    workers: Optional[int] = None,
    overrides: Optional[dict] = None,
) -> ExperimentOutput:
    """Run ``n_trials`` paired trials per variant (trial ``i`` uses seed ``base_seed + i`` in every variant).

    Results are ordered by seed, so the output does not depend on scheduling.
    With ``out_dir`` set, writes ``<system>_<variant>.csv`` and ``<system>_summary.json``.
    """
    benchmark_system(system)  # validate early
    overrides = overrides or {}
    jobs = [(system, preset(v, T=T, seed=base_seed + i, **overrides).to_dict()) for v in variants for i in range(n_trials)]
    nw = _worker_count(len(jobs)) if workers is None else max(1, workers)
    if nw > 1:
        with ProcessPoolExecutor(nw) as ex:
            results = list(ex.map(_trial_job, jobs))
    else:
        results = [_trial_job(j) for j in jobs]
    trials = {v: results[i * n_trials:(i + 1) * n_trials] for i, v in enumerate(variants)}
    summary = ExperimentSummary(system, T, n_trials, base_seed)
    curves = {}
    for v in variants:
        summary.variants[v], curves[v] = _summarize(v, trials[v])
    if "unquantized_ce" in summary.variants and "practical_qce" in summary.variants:
        summary.overhead_pct = overhead_pct(summary.variants["practical_qce"].median_regret,
                                            summary.variants["unquantized_ce"].median_regret)
    out = ExperimentOutput(summary, trials, curves)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for v in variants:
            p = out_dir / f"{system}_{v}.csv"
            write_curves_csv(p, curves[v])
            out.files.append(p)
        p = out_dir / f"{system}_summary.json"
        p.write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n")
        out.files.append(p)
    return out


def read_summary(path) -> ExperimentSummary:
    return ExperimentSummary.from_dict(json.loads(Path(path).read_text()))

"""Command-line entry point: ``qce-lqr {simulate,bench,converse,codec,verify}``.

Exit codes: 0 success, 1 validation failure, 2 usage error. Option
precedence is command-line flag, then ``--config`` JSON file, then default.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import codec
from .protocol import ConfigError

DEFAULTS = {
    "seed": 0,
    "out_dir": None,
    "format": "json",
    "system": "scalar",
    "variant": "practical_qce",
    "T": 10_000,
    "trials": 1,
    "rho": 0.5,
    "delta": 1e-4,
    "systems": "scalar,double_integrator",
    "alpha": 0.5,
    "dx": 1,
    "du": 1,
    "r": 0.5,
    "C1": 1.0,
    "c": None,
    "sigma_w": 1.0,
    "n_instances": 20,
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="base seed (default 0)")
    common.add_argument("--out-dir", dest="out_dir", help="directory for output files")
    common.add_argument("--format", choices=("csv", "json"), help="stdout format (default json)")
    common.add_argument("--config", help="JSON file of option defaults")

    p = argparse.ArgumentParser(prog="qce-lqr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run trials of one controller variant")
    s.add_argument("--system", help="scalar | double_integrator | inverted_pendulum | boeing747")
    s.add_argument("--variant", help="practical_qce | unquantized_ce | theoretical")
    s.add_argument("--T", type=int, help="horizon (default 10000)")
    s.add_argument("--trials", type=int, help="number of seeds (default 1)")
    s.add_argument("--rho", type=float, help="codebook covering radius (default 0.5)")
    s.add_argument("--delta", type=float, help="failure probability (default 1e-4)")

    b = sub.add_parser("bench", parents=[common], help="trigger-gap table and paired CE/QCE comparison")
    b.add_argument("--systems", help="comma-separated system names (default scalar,double_integrator)")
    b.add_argument("--T", type=int, help="horizon (default 10000)")
    b.add_argument("--trials", type=int, help="paired trials per variant (default 1)")
    b.add_argument("--delta", type=float, help="failure probability for the gap table (default 1e-4)")

    c = sub.add_parser("converse", parents=[common], help="bit lower bound and hard-instance checks")
    c.add_argument("--alpha", type=float, help="regret exponent in [1/2, 1) (default 0.5)")
    c.add_argument("--T", type=int, help="horizon (default 10000)")
    c.add_argument("--dx", type=int, help="state dimension (default 1)")
    c.add_argument("--du", type=int, help="input dimension (default 1)")
    c.add_argument("--r", type=float, help="gain-cube radius (default 0.5)")
    c.add_argument("--C1", type=float, help="regret constant (default 1)")
    c.add_argument("--c", type=float, help="Riccati scale (default 1.01 x threshold)")
    c.add_argument("--sigma-w", dest="sigma_w", type=float, help="noise std (default 1)")
    c.add_argument("--n-instances", dest="n_instances", type=int, help="random hard instances to verify (default 20)")

    k = sub.add_parser("codec", help="Elias Gamma / bit stream tools")
    ksub = k.add_subparsers(dest="action", required=True)
    e = ksub.add_parser("encode", help="encode integers; prints the bit string")
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--eg", type=int, nargs="+", help="positive integers, Elias Gamma")
    g.add_argument("--signed-eg", dest="signed_eg", type=int, nargs="+", help="integers, zigzag + Elias Gamma")
    e.add_argument("--hex", action="store_true", help="print hex and bit count instead of bits")
    d = ksub.add_parser("decode", help="decode a stream of Elias Gamma integers")
    d.add_argument("stream", help="bit string, or hex with --nbits")
    d.add_argument("--nbits", type=int, help="treat STREAM as hex holding this many bits")
    d.add_argument("--signed", action="store_true", help="undo the zigzag map")

    v = sub.add_parser("verify", parents=[common], help="run the built-in property checks")
    v.add_argument("--quick", action="store_true", help="fewer samples")
    return p


def _resolve(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key, val in vars(args).items():
        if val is not None and key in DEFAULTS:
            cfg[key] = val
    return cfg


def _emit(obj, cfg, name: str):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if cfg.get("out_dir"):
        out = Path(cfg["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n")
    print(text)


# ------------------------------------------------------------------ commands

def cmd_simulate(cfg) -> int:
    from .experiments import benchmark_system, run_experiment
    from .protocol import preset, run_trial

    bs = benchmark_system(cfg["system"])
    if cfg["trials"] < 1:
        raise UsageError("--trials must be >= 1")
    if cfg["trials"] == 1:
        tc = preset(cfg["variant"], T=cfg["T"], seed=cfg["seed"], rho=cfg["rho"], delta=cfg["delta"])
        res = run_trial(bs.sys, bs.cost, bs.K0, tc)
        d = res.to_dict(curves=False)
        d["system"] = bs.name
        _emit(d, cfg, f"{bs.name}_{cfg['variant']}_seed{cfg['seed']}.json")
        return 1 if not res.mirror_always_equal else 0
    out = run_experiment(bs.name, (cfg["variant"],), cfg["T"], cfg["trials"], cfg["seed"], cfg["out_dir"],
                         overrides={"rho": cfg["rho"], "delta": cfg["delta"]})
    _emit_summary(out.summary, cfg)
    return 0 if all(v.mirror_ok for v in out.summary.variants.values()) else 1


def _emit_summary(summary, cfg):
    if cfg["format"] == "csv":
        cols = ["system", "variant", "median_regret", "median_bits", "median_k_safe", "overhead_pct"]
        print(",".join(cols))
        for v in summary.variants.values():
            print(",".join(str(x) for x in (summary.system, v.variant, v.median_regret, v.median_bits,
                                            v.median_k_safe, summary.overhead_pct)))
    else:
        print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))


def cmd_bench(cfg) -> int:
    from .experiments import run_experiment, trigger_gap_table

    names = [s for s in cfg["systems"].split(",") if s]
    table = trigger_gap_table(names, T=cfg["T"], delta=cfg["delta"])
    ok = True
    summaries = []
    for name in names:
        out = run_experiment(name, T=cfg["T"], n_trials=cfg["trials"], base_seed=cfg["seed"], out_dir=cfg["out_dir"])
        summaries.append(out.summary.to_dict())
        ok &= all(v.mirror_ok for v in out.summary.variants.values())
    result = {"trigger_gap": table, "results": summaries}
    if cfg["format"] == "csv":
        print("system,P_norm,C_safe,two_eps_target,sqrt_conf_median")
        for r in table:
            print(f"{r['system']},{r['P_norm']!r},{r['C_safe']!r},{r['two_eps_target']!r},{r['sqrt_conf_median']!r}")
        if cfg["out_dir"]:
            Path(cfg["out_dir"], "bench.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    else:
        _emit(result, cfg, "bench.json")
    return 0 if ok else 1


def cmd_converse(cfg) -> int:
    from .converse import bits_lower_bound, build_hard_instance, cube_halfwidth, default_c, verify_fixed_point

    rep = bits_lower_bound(cfg["alpha"], cfg["T"], cfg["dx"], cfg["du"], cfg["r"],
                           sigma_w=cfg["sigma_w"], C1=cfg["C1"], c=cfg["c"])
    dx, du = cfg["dx"], cfg["du"]
    a = cube_halfwidth(cfg["r"], dx, du)
    rng = np.random.default_rng(cfg["seed"])
    c = cfg["c"] if cfg["c"] is not None else default_c(cfg["r"], np.eye(dx), np.eye(du))
    gaps, jerr, inv = [], [], []
    for _ in range(cfg["n_instances"]):
        inst = build_hard_instance(rng.uniform(-a, a, (du, dx)), np.eye(dx), np.eye(du), cfg["sigma_w"], c)
        g, j = verify_fixed_point(inst)
        gaps.append(g)
        jerr.append(j)
        inv.append(max(inst.invariant_errors().values()))
    check = {"n_instances": cfg["n_instances"], "max_gain_gap": max(gaps, default=0.0),
             "max_cost_rel_err": max(jerr, default=0.0), "max_invariant_err": max(inv, default=0.0)}
    ok = check["max_gain_gap"] <= 1e-7 and check["max_cost_rel_err"] <= 1e-8 and check["max_invariant_err"] <= 1e-10
    _emit({"bounds": rep.to_dict(), "instances": check, "ok": ok}, cfg, "converse.json")
    return 0 if ok else 1


def cmd_codec(args) -> int:
    if args.action == "encode":
        bs = codec.BitStream()
        try:
            if args.eg is not None:
                for n in args.eg:
                    codec.eg_write(bs, n)
            else:
                for z in args.signed_eg:
                    codec.signed_eg_write(bs, z)
        except codec.ZeroOrNegative as exc:
            raise UsageError(str(exc)) from exc
        print(f"{bs.to_hex()} {len(bs)}" if args.hex else bs.to_str())
        return 0
    try:
        bs = codec.BitStream.from_hex(args.stream, args.nbits) if args.nbits is not None else codec.BitStream.from_str(args.stream)
        vals = codec.eg_decode_all(bs)
    except (ValueError, codec.CodecError) as exc:
        print(f"decode failed: {exc}", file=sys.stderr)
        return 1
    if args.signed:
        vals = [codec.unzigzag(v - 1) for v in vals]
    print(" ".join(str(v) for v in vals))
    return 0


def cmd_verify(cfg, quick: bool) -> int:
    from .verify import run_checks

    results = run_checks(seed=cfg["seed"], quick=quick)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    try:
        if args.command == "codec":
            return cmd_codec(args)
        cfg = _resolve(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "bench":
            return cmd_bench(cfg)
        if args.command == "converse":
            return cmd_converse(cfg)
        return cmd_verify(cfg, args.quick)
    except (UsageError, ConfigError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

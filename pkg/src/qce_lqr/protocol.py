"""Plant and controller state machines for quantized certainty-equivalent LQR.

Time runs ``t = 1..T`` from ``x_1 = 0``. Epoch ``k >= 2`` starts at
``tau_k = 2**k``; at that boundary the plant fits least squares on the
previous window ``[tau_{k-1}, tau_k - 1]``, writes one uplink message, the
controller decodes it from the same bits and returns a gain that is held for
the whole epoch. Before the first boundary (``t = 1..3``) the plant plays the
pre-safe policy ``u = K0 x + g``, which makes ``u_1 ~ N(0, I)`` because
``x_1 = 0``.

Uplink per epoch:

* pre-safe: one flag bit; when the trigger fires the flag is ``1`` and is
  followed in the same epoch by the absolute initialization,
* post-safe: ``Track`` (lattice codec), ``CoordTrack`` (coordinate codec) or
  ``RawParams`` (unquantized baseline, 64 bits per parameter).
"""
from __future__ import annotations

import json
import logging
import math
import struct
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import codec
from .codec import BitStream, CoordTrack, Init, SafeFlag, Track
from .control_math import (
    CostPair,
    NonConvergence,
    SystemPair,
    safe_constant,
    solve_dare,
    spectral_radius,
)
from .ols import OlsResult, confidence, ols_fit, sample_ols_posterior
from .plant_sim import BOOTSTRAP, EXPLORATION, PROCESS_NOISE, stream_rng

log = logging.getLogger(__name__)

PHAT_INFLATION = 1.0835


class RiccatiFailure(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ helpers

def epoch_length(k: int) -> int:
    return 2**k


@dataclass(frozen=True)
class EpochSchedule:
    k: int

    @property
    def tau_k(self) -> int:
        return epoch_length(self.k)


def split_theta(theta, dx: int, du: int):
    theta = np.asarray(theta, dtype=float)
    return theta[: dx * dx].reshape(dx, dx), theta[dx * dx:].reshape(dx, du)


def join_theta(A, B) -> np.ndarray:
    return np.concatenate([np.asarray(A, float).ravel(), np.asarray(B, float).ravel()])


def base_schedule(sched: "ScheduleConstants", tau_k: int) -> float:
    """Two-scale radius ``c_slow tau^{-1/4} + c_fast tau^{-1/2}``."""
    if tau_k < 1:
        raise ValueError("tau_k must be >= 1")
    return sched.c_slow * tau_k ** -0.25 + sched.c_fast * tau_k ** -0.5


def exploration_variance(sigma_in_sq: float, tau_k: int) -> float:
    if tau_k < 1:
        raise ValueError("tau_k must be >= 1")
    return min(1.0, sigma_in_sq * tau_k ** -0.5)


def fallback_shield(x_norm: float, presafe_max_norm: float, mult: float = 5.0) -> bool:
    """True when the state left ``mult`` times the largest pre-safe norm."""
    if math.isinf(mult):
        return False
    return x_norm > mult * presafe_max_norm


# ------------------------------------------------------------------ safe set

@dataclass(frozen=True)
class SafeSet:
    center_theta: np.ndarray
    r_safe: float
    dx: int
    du: int

    def contains(self, theta, tol: float = 1e-12) -> bool:
        A, B = split_theta(theta, self.dx, self.du)
        A0, B0 = split_theta(self.center_theta, self.dx, self.du)
        dist = max(np.linalg.norm(A - A0, 2), np.linalg.norm(B - B0, 2))
        return dist <= self.r_safe * (1 + tol) + tol


def _clip_block(D, r):
    U, s, Vt = np.linalg.svd(D, full_matrices=False)
    if s.size == 0 or s[0] <= r:
        return D
    return (U * np.minimum(s, r)) @ Vt


def project_safe(theta, safe: SafeSet) -> np.ndarray:
    """Frobenius projection onto the safe set: clip singular values of each block offset."""
    A, B = split_theta(theta, safe.dx, safe.du)
    A0, B0 = split_theta(safe.center_theta, safe.dx, safe.du)
    return join_theta(A0 + _clip_block(A - A0, safe.r_safe), B0 + _clip_block(B - B0, safe.r_safe))


@dataclass(frozen=True)
class ParamEstimate:
    theta: np.ndarray
    tag: str  # "raw_ols" | "plant_projected" | "shared_decoded" | "controller_projected"


# ------------------------------------------------------- schedule constants

@dataclass(frozen=True)
class ScheduleConstants:
    sigma_in_sq: float
    c_slow: float
    c_fast: float
    Vslow_hat: float
    Vfast_hat: float
    Pop_hat: float
    C0: float
    rho: float


def safe_radius(theta, dx: int, du: int, cost: CostPair) -> float:
    """``1 / (3 C_safe)`` at the decoded center; raises :class:`RiccatiFailure`."""
    try:
        return 1.0 / (3.0 * safe_constant(SystemPair.from_vec(theta, dx, du), cost))
    except NonConvergence as exc:
        raise RiccatiFailure(str(exc)) from exc


def safe_round_init(
    decoded: ParamEstimate,
    dx: int,
    du: int,
    r_safe: float,
    rho: float,
    delta: float,
    cost: CostPair,
    C0: float = 1.0,
    sigma_in_sq_override: Optional[float] = None,
) -> tuple[ScheduleConstants, SafeSet]:
    """Exploration constant and two-scale quantization constants from the shared center.

    Logs are base 2. ``sigma_in_sq_override`` replaces the computed exploration
    constant (and is then used inside ``Vslow_hat`` as well).
    """
    sys = SystemPair.from_vec(decoded.theta, dx, du)
    try:
        P_op = solve_dare(sys, cost).P_op
    except NonConvergence as exc:
        raise RiccatiFailure(str(exc)) from exc
    Pop_hat = PHAT_INFLATION * P_op
    if sigma_in_sq_override is None:
        B_op = np.linalg.norm(sys.B, 2)
        sigma_in_sq = (
            math.sqrt(dx) * Pop_hat**4.5 * max(1.0, B_op + r_safe) * math.sqrt(max(0.0, math.log2(Pop_hat / delta)))
        )
    else:
        sigma_in_sq = float(sigma_in_sq_override)
    log_inv_delta = math.log2(1.0 / delta)
    Vslow = math.sqrt(C0) * Pop_hat * math.sqrt(dx * du * log_inv_delta / sigma_in_sq) if sigma_in_sq > 0 else math.inf
    Vfast = math.sqrt(C0) * Pop_hat**1.5 * dx * log_inv_delta
    q = 2**0.25
    c_slow = (1 + q) / (1 - rho * q) * Vslow
    c_fast = (1 + math.sqrt(2)) / (1 - rho * math.sqrt(2)) * Vfast
    consts = ScheduleConstants(sigma_in_sq, c_slow, c_fast, Vslow, Vfast, Pop_hat, C0, rho)
    return consts, SafeSet(np.array(decoded.theta, dtype=float), r_safe, dx, du)


# ------------------------------------------------------------------ triggers

@dataclass(frozen=True)
class TriggerConfig:
    variant: str = "bootstrap"  # "bootstrap" | "theoretical"
    n_mc: int = 50
    rho_threshold: float = 0.99
    fallback_multiplier: float = 5.0


def theoretical_trigger(ols: OlsResult, conf, cost: CostPair) -> bool:
    if not ols.lambda_min >= 1.0:
        return False
    if not math.isfinite(conf.value):
        return False
    try:
        cs = safe_constant(ols.system, cost)
    except NonConvergence:
        return False
    return math.sqrt(conf.value) <= 1.0 / (9.0 * cs)


def bootstrap_trigger(ols: OlsResult, sigma_w: float, cfg: TriggerConfig, cost: CostPair, seed) -> bool:
    """All posterior draws stabilized by the certainty-equivalent gain of ``ols``."""
    if ols.is_singular():
        return False
    try:
        K_hat = solve_dare(ols.system, cost).K
    except NonConvergence:
        return False
    if cfg.n_mc == 0:
        return True
    for s in sample_ols_posterior(ols, sigma_w, cfg.n_mc, seed):
        if not spectral_radius(s.A + s.B @ K_hat) < cfg.rho_threshold:
            return False
    return True


# ------------------------------------------------------ unquantized messages

@dataclass(frozen=True)
class RawParams:
    """Full-precision parameter vector (unquantized baseline), IEEE-754 doubles."""

    theta: tuple

    def bit_cost(self) -> int:
        return 64 * len(self.theta)


def write_raw(stream: BitStream, msg: RawParams) -> int:
    for v in msg.theta:
        stream.write_uint(struct.unpack(">Q", struct.pack(">d", v))[0], 64)
    return 64 * len(msg.theta)


def read_raw(stream: BitStream, d_s: int) -> RawParams:
    return RawParams(tuple(struct.unpack(">d", struct.pack(">Q", stream.read_uint(64)))[0] for _ in range(d_s)))


def send(stream: BitStream, msg) -> int:
    if isinstance(msg, RawParams):
        return write_raw(stream, msg)
    return codec.write_message(stream, msg)


# ------------------------------------------------------------- trial config

CODECS = ("lattice", "coordinate", "none")
TRIGGERS = ("theoretical", "bootstrap")


@dataclass(frozen=True)
class TrialConfig:
    T: int = 10_000
    seed: int = 0
    sigma_w: float = 1.0
    delta: float = 1e-4
    rho: float = 0.5
    codec: str = "coordinate"
    trigger: str = "bootstrap"
    sigma_in_sq: Optional[float] = None
    C0: float = 1.0
    n_mc: int = 50
    rho_threshold: float = 0.99
    fallback_multiplier: float = 5.0
    safe_projection: bool = True

    def __post_init__(self):
        if self.T < 4:
            raise ConfigError("T must be >= 4")
        if self.codec not in CODECS:
            raise ConfigError(f"codec must be one of {CODECS}")
        if self.trigger not in TRIGGERS:
            raise ConfigError(f"trigger must be one of {TRIGGERS}")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if not 0 < self.rho < 1 / math.sqrt(2):
            raise ConfigError("rho must lie in (0, 1/sqrt(2))")
        if not self.sigma_w > 0:
            raise ConfigError("sigma_w must be positive")

    @property
    def trigger_config(self) -> TriggerConfig:
        return TriggerConfig(self.trigger, self.n_mc, self.rho_threshold, self.fallback_multiplier)

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["fallback_multiplier"]):
            d["fallback_multiplier"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown trial config keys: {sorted(unknown)}")
        d = dict(d)
        if "fallback_multiplier" in d and d["fallback_multiplier"] is None:
            d["fallback_multiplier"] = math.inf
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "TrialConfig":
        return cls.from_dict(json.loads(text))

    def replace(self, **kw) -> "TrialConfig":
        d = asdict(self)
        d.update(kw)
        return TrialConfig(**d)


def preset(name: str, **overrides) -> TrialConfig:
    """Named configurations.

    ``practical_qce``: bootstrap trigger, x5 fallback shield, coordinate codec,
    ``sigma_in^2 = 1``, no safe-set projection.
    ``unquantized_ce``: same but the estimate travels at full precision.
    ``theoretical``: lattice codec, confidence trigger, projection on, no shield.
    """
    practical = dict(codec="coordinate", trigger="bootstrap", sigma_in_sq=1.0,
                     fallback_multiplier=5.0, safe_projection=False)
    table = {
        "practical_qce": practical,
        "unquantized_ce": {**practical, "codec": "none"},
        "theoretical": dict(codec="lattice", trigger="theoretical", sigma_in_sq=None,
                            fallback_multiplier=math.inf, safe_projection=True),
    }
    if name not in table:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(table)}")
    return TrialConfig(**{**table[name], **overrides})


# ---------------------------------------------------------- state machines

class _Shared:
    """State both endpoints derive from the uplink bits."""

    def __init__(self, dx, du, cost, cfg: TrialConfig, codebook):
        self.dx, self.du, self.cost, self.cfg = dx, du, cost, cfg
        self.d_s = dx * dx + dx * du
        self.codebook = codebook
        self.safe = False
        self.k_safe: Optional[int] = None
        self.theta_tilde: Optional[np.ndarray] = None
        self.safe_set: Optional[SafeSet] = None
        self.consts: Optional[ScheduleConstants] = None

    def _enter_safe(self, theta_tilde, k):
        r_safe = safe_radius(theta_tilde, self.dx, self.du, self.cost)
        self.consts, self.safe_set = safe_round_init(
            ParamEstimate(theta_tilde, "shared_decoded"), self.dx, self.du, r_safe,
            self.cfg.rho, self.cfg.delta, self.cost, self.cfg.C0, self.cfg.sigma_in_sq,
        )
        self.theta_tilde = np.array(theta_tilde, dtype=float)
        self.safe, self.k_safe = True, k

    def project(self, theta):
        if self.cfg.safe_projection and self.safe_set is not None:
            return project_safe(theta, self.safe_set)
        return np.array(theta, dtype=float)


@dataclass
class EpochRecord:
    k: int
    tau_k: int
    safe: bool
    bits: int
    m: Optional[int] = None
    innovation_norm: Optional[float] = None
    scale: Optional[float] = None
    recon_error: Optional[float] = None
    mirror_equal: bool = True
    riccati_failure: bool = False


class Plant(_Shared):
    """Plant side: estimates, triggers, encodes. Keeps a mirror of the shared estimate."""

    def epoch_end(self, k: int, ols: OlsResult, boot_rng) -> tuple[list, dict]:
        """Messages for epoch ``k`` plus diagnostics (innovation, multiplier, ...)."""
        cfg, info = self.cfg, {}
        theta_hat = ols.theta
        if not self.safe:
            fired = self._check_trigger(k, ols, boot_rng)
            if fired:
                eps = 1.0 / (9.0 * safe_constant(ols.system, self.cost))
                if cfg.codec == "none":
                    init_msg, recon = RawParams(tuple(float(v) for v in theta_hat)), theta_hat.copy()
                else:
                    init_msg, recon = codec.absolute_init(theta_hat, eps)
                try:
                    self._enter_safe(recon, k)
                except RiccatiFailure:
                    log.info("epoch %d: decoded center not stabilizable, staying pre-safe", k)
                    return [SafeFlag(False)], info
                info["eps_target"] = eps
                return [SafeFlag(True), init_msg], info
            return [SafeFlag(False)], info

        tau = epoch_length(k)
        theta_bar = self.project(theta_hat)
        delta = theta_bar - self.theta_tilde
        info["innovation_norm"] = float(np.linalg.norm(delta))
        if cfg.codec == "lattice":
            s_base = base_schedule(self.consts, tau)
            m = codec.adaptive_multiplier(info["innovation_norm"], s_base)
            s = m * s_base
            q, step = codec.quantize_innovation(delta, s, self.codebook)
            msg = Track(m, q, self.codebook.index_bits)
            self.theta_tilde = self.theta_tilde + s * self.codebook.codewords[q]
            info.update(m=m, scale=s)
        elif cfg.codec == "coordinate":
            msg, step = codec.coord_quantize(delta, tau)
            self.theta_tilde = self.theta_tilde + step
        else:
            msg = RawParams(tuple(float(v) for v in theta_bar))
            self.theta_tilde = theta_bar.copy()
        info["recon_error"] = float(np.linalg.norm(self.theta_tilde - theta_bar))
        return [msg], info

    def _check_trigger(self, k, ols, boot_rng) -> bool:
        if self.cfg.trigger == "theoretical":
            conf = confidence(ols, k, self.cfg.delta, self.dx + self.du)
            return theoretical_trigger(ols, conf, self.cost)
        return bootstrap_trigger(ols, self.cfg.sigma_w, self.cfg.trigger_config, self.cost, boot_rng)


class Controller(_Shared):
    """Controller side: decodes the uplink and synthesizes the certainty-equivalent gain."""

    def __init__(self, dx, du, cost, cfg, codebook, K0):
        super().__init__(dx, du, cost, cfg, codebook)
        self.K0 = np.atleast_2d(np.asarray(K0, dtype=float))
        self.K = self.K0.copy()
        self.riccati_failures = 0

    def epoch(self, k: int, stream: BitStream) -> tuple[np.ndarray, bool]:
        """Consume epoch ``k``'s bits; return ``(gain, riccati_failed)``."""
        cfg = self.cfg
        if not self.safe:
            if not codec.read_safe_flag(stream).safe:
                self.K = self.K0.copy()
                return self.K, False
            if cfg.codec == "none":
                theta = np.array(read_raw(stream, self.d_s).theta)
            else:
                theta = codec.read_init(stream, self.d_s).reconstruct()
            self._enter_safe(theta, k)
        else:
            tau = epoch_length(k)
            if cfg.codec == "lattice":
                msg = codec.read_track(stream, self.codebook.index_bits)
                s = msg.m * base_schedule(self.consts, tau)
                self.theta_tilde = self.theta_tilde + s * self.codebook.codewords[msg.q]
            elif cfg.codec == "coordinate":
                msg = codec.read_coord_track(stream, self.d_s)
                self.theta_tilde = self.theta_tilde + msg.reconstruct(tau)
            else:
                self.theta_tilde = np.array(read_raw(stream, self.d_s).theta)
        theta_check = self.project(self.theta_tilde)
        try:
            self.K = solve_dare(SystemPair.from_vec(theta_check, self.dx, self.du), self.cost).K
        except NonConvergence:
            self.riccati_failures += 1
            log.info("epoch %d: Riccati failure on projected estimate, keeping previous gain", k)
            return self.K, True
        return self.K, False


# ------------------------------------------------------------------ results

BIT_CATEGORIES = ("flags", "init", "multipliers", "indices", "raw")


@dataclass
class TrialResult:
    config: dict
    regret_curve: np.ndarray
    bits_curve: np.ndarray
    bits_breakdown: dict
    k_safe: Optional[int]
    m_series: dict
    fallback_count: int
    seed: int
    jstar: float
    epochs: list = field(default_factory=list)
    riccati_failures: int = 0
    diverged: bool = False
    uplink_hex: str = ""
    uplink_bits: int = 0

    @property
    def normalized_regret(self) -> np.ndarray:
        return self.regret_curve / np.sqrt(np.arange(1, self.regret_curve.size + 1))

    @property
    def total_bits(self) -> int:
        return int(self.bits_curve[-1])

    @property
    def final_regret(self) -> float:
        return float(self.regret_curve[-1])

    @property
    def mirror_always_equal(self) -> bool:
        return all(e.mirror_equal for e in self.epochs)

    @property
    def trigger_time(self) -> Optional[int]:
        return None if self.k_safe is None else epoch_length(self.k_safe)

    def to_dict(self, curves: bool = True) -> dict:
        d = {
            "config": self.config,
            "seed": self.seed,
            "jstar": self.jstar,
            "k_safe": self.k_safe,
            "trigger_time": self.trigger_time,
            "total_bits": self.total_bits,
            "final_regret": self.final_regret,
            "bits_breakdown": self.bits_breakdown,
            "m_series": {str(k): v for k, v in self.m_series.items()},
            "fallback_count": self.fallback_count,
            "riccati_failures": self.riccati_failures,
            "diverged": self.diverged,
            "uplink_bits": self.uplink_bits,
            "uplink_hex": self.uplink_hex,
            "epochs": [asdict(e) for e in self.epochs],
        }
        if curves:
            d["regret_curve"] = self.regret_curve.tolist()
            d["bits_curve"] = self.bits_curve.tolist()
        return d

    def to_json(self, curves: bool = True) -> str:
        return json.dumps(self.to_dict(curves), allow_nan=True)


def _categorize(msg, nbits: int, breakdown: dict):
    if isinstance(msg, SafeFlag):
        breakdown["flags"] += nbits
    elif isinstance(msg, Init):
        breakdown["init"] += nbits
    elif isinstance(msg, Track):
        mb = codec.eg_length(msg.m)
        breakdown["multipliers"] += mb
        breakdown["indices"] += nbits - mb
    elif isinstance(msg, CoordTrack):
        breakdown["indices"] += nbits
    else:
        breakdown["raw"] += nbits


def run_trial(sys: SystemPair, cost: CostPair, K0, cfg: TrialConfig, codebook=None) -> TrialResult:
    """Simulate one closed-loop run of the quantized certainty-equivalent scheme.

    Process noise, exploration noise and posterior sampling use separate
    sub-streams of ``cfg.seed``; configs differing only in codec see the same
    disturbances. Instability at run time is recorded (``diverged``), not raised.
    """
    K0 = np.atleast_2d(np.asarray(K0, dtype=float))
    dx, du = sys.dx, sys.du
    if K0.shape != (du, dx):
        raise ConfigError(f"K0 must be {du}x{dx}, got {K0.shape}")
    if spectral_radius(sys.A + sys.B @ K0) >= 1.0:
        raise ConfigError("K0 does not stabilize the plant")
    d_s = dx * dx + dx * du
    if cfg.codec == "lattice" and codebook is None:
        try:
            codebook = codec.build_codebook(d_s, cfg.rho)
        except codec.Infeasible as exc:
            raise ConfigError(f"lattice codec unavailable for d_s={d_s}: {exc}") from exc

    T = cfg.T
    jstar = cfg.sigma_w**2 * float(np.trace(solve_dare(sys, cost).P))
    w = cfg.sigma_w * stream_rng(cfg.seed, PROCESS_NOISE).standard_normal((T, dx))
    g = stream_rng(cfg.seed, EXPLORATION).standard_normal((T, du))
    boot_rng = stream_rng(cfg.seed, BOOTSTRAP)

    plant = Plant(dx, du, cost, cfg, codebook)
    ctrl = Controller(dx, du, cost, cfg, codebook, K0)
    uplink = BitStream()
    breakdown = {c: 0 for c in BIT_CATEGORIES}

    A, B, Rx, Ru = sys.A, sys.B, cost.Rx, cost.Ru
    xs = np.zeros((T + 1, dx))  # xs[t-1] is x_t
    us = np.zeros((T, du))
    costs = np.full(T, np.nan)
    bits_curve = np.zeros(T, dtype=np.int64)

    K = K0.copy()
    explore = 1.0
    presafe = True
    presafe_max = 0.0
    fallback_active = False
    fallback_count = 0
    m_series: dict = {}
    epochs: list[EpochRecord] = []
    diverged = False
    mult = cfg.fallback_multiplier
    next_boundary = 4

    for t in range(1, T + 1):
        if t == next_boundary:
            k = t.bit_length() - 1
            lo = t // 2
            ols = ols_fit(xs[lo - 1:t], us[lo - 1:t - 1])
            msgs, info = plant.epoch_end(k, ols, boot_rng)
            nbits = 0
            for msg in msgs:
                n = send(uplink, msg)
                _categorize(msg, n, breakdown)
                nbits += n
            K, failed = ctrl.epoch(k, uplink)
            equal = (plant.theta_tilde is None and ctrl.theta_tilde is None) or (
                plant.theta_tilde is not None and ctrl.theta_tilde is not None
                and np.array_equal(plant.theta_tilde, ctrl.theta_tilde)
            )
            if "m" in info:
                m_series[k] = info["m"]
            epochs.append(EpochRecord(k, t, plant.safe, nbits, info.get("m"), info.get("innovation_norm"),
                                      info.get("scale"), info.get("recon_error"), bool(equal), failed))
            presafe = not plant.safe
            explore = 1.0 if presafe else math.sqrt(exploration_variance(plant.consts.sigma_in_sq, t))
            fallback_active = False
            next_boundary *= 2
        x = xs[t - 1]
        xn = math.sqrt(float(x @ x))
        if presafe:
            presafe_max = max(presafe_max, xn)
        elif not fallback_active and fallback_shield(xn, presafe_max, mult):
            fallback_active = True
            fallback_count += 1
        if presafe or fallback_active:
            u = K0 @ x + g[t - 1]
        else:
            u = K @ x + explore * g[t - 1]
        us[t - 1] = u
        costs[t - 1] = x @ Rx @ x + u @ Ru @ u
        xs[t] = A @ x + B @ u + w[t - 1]
        bits_curve[t - 1] = len(uplink)
        if not np.isfinite(xs[t]).all() or xn > 1e150:
            diverged = True
            bits_curve[t:] = len(uplink)
            break

    regret = np.cumsum(costs) - jstar * np.arange(1, T + 1)
    return TrialResult(
        config=cfg.to_dict(),
        regret_curve=regret,
        bits_curve=bits_curve,
        bits_breakdown=breakdown,
        k_safe=plant.k_safe,
        m_series=m_series,
        fallback_count=fallback_count,
        seed=cfg.seed,
        jstar=jstar,
        epochs=epochs,
        riccati_failures=ctrl.riccati_failures,
        diverged=diverged,
        uplink_hex=uplink.to_hex(),
        uplink_bits=len(uplink),
    )

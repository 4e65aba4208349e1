"""Hard-instance construction for the communication lower bound, and bound calculators.

For a gain ``K`` and a scalar ``c`` large enough, the pair ``(A_K, B_K)`` built
here has ``K`` as its exact optimal LQR gain and ``P = c Rx`` as its Riccati
solution, so its optimal cost ``sigma_w^2 Tr(P)`` does not depend on ``K``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control_math import CostPair, NonConvergence, SystemPair, solve_dare

EIG_FLOOR = 1e-12


class CChoiceViolated(ValueError):
    pass


class SingularPhi(ValueError):
    pass


class RhoOutOfRange(ValueError):
    pass


def _sym_power(M, p: float):
    """``M^p`` for symmetric positive definite ``M`` via eigendecomposition."""
    M = 0.5 * (M + M.T)
    ev, V = np.linalg.eigh(M)
    if ev.min() < EIG_FLOOR:
        raise SingularPhi(f"matrix not positive definite (min eigenvalue {ev.min():.3e})")
    return (V * ev**p) @ V.T


def c_threshold(r: float, Rx, Ru) -> float:
    """Smallest admissible ``c`` (exclusive): ``1 + r^2 lambda_max(Ru) / lambda_min(Rx)``."""
    Rx, Ru = np.atleast_2d(Rx), np.atleast_2d(Ru)
    return 1.0 + r * r * np.linalg.eigvalsh(Ru)[-1] / np.linalg.eigvalsh(Rx)[0]


def default_c(r: float, Rx, Ru) -> float:
    return 1.01 * c_threshold(r, Rx, Ru)


def cube_halfwidth(r: float, dx: int, du: int) -> float:
    """Entry bound ``a = r / sqrt(du dx)`` of the gain cube, so ``||K||_F <= r``."""
    return r / math.sqrt(du * dx)


@dataclass(frozen=True)
class HardInstance:
    K: np.ndarray
    c: float
    P: np.ndarray
    M_K: np.ndarray
    Phi_K: np.ndarray
    A_K: np.ndarray
    B_K: np.ndarray
    S_K: np.ndarray
    J_P: float
    Rx: np.ndarray
    Ru: np.ndarray
    sigma_w: float

    @property
    def system(self) -> SystemPair:
        return SystemPair(self.A_K, self.B_K)

    @property
    def cost(self) -> CostPair:
        return CostPair(self.Rx, self.Ru)

    def invariant_errors(self) -> dict:
        """Max-abs errors of the four algebraic identities."""
        K, P, Phi, Rx, Ru = self.K, self.P, self.Phi_K, self.Rx, self.Ru
        return {
            "closed_loop": float(np.abs(self.A_K + self.B_K @ K - Phi).max()),
            "phi_quadratic": float(np.abs(Phi.T @ P @ Phi - self.M_K).max()),
            "cross_term": float(np.abs(self.B_K.T @ P @ Phi + Ru @ K).max()),
            "riccati": float(np.abs(Rx + K.T @ Ru @ K + Phi.T @ P @ Phi - P).max()),
        }


def build_hard_instance(K, Rx, Ru, sigma_w: float = 1.0, c: float | None = None) -> HardInstance:
    """Construct ``(A_K, B_K)`` whose optimal gain is ``K`` and whose Riccati solution is ``c Rx``.

    ``c`` defaults to ``1.01 (1 + ||K||_F^2 lambda_max(Ru) / lambda_min(Rx))``.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    Rx = np.atleast_2d(np.asarray(Rx, dtype=float))
    Ru = np.atleast_2d(np.asarray(Ru, dtype=float))
    du, dx = K.shape
    if Rx.shape != (dx, dx) or Ru.shape != (du, du):
        raise ValueError(f"cost shapes {Rx.shape}, {Ru.shape} do not fit K {K.shape}")
    rK = float(np.linalg.norm(K, "fro"))
    thr = c_threshold(rK, Rx, Ru)
    if c is None:
        c = 1.01 * thr
    if not c > thr:
        raise CChoiceViolated(f"c = {c} must exceed {thr}")
    P = c * Rx
    M_K = (c - 1.0) * Rx - K.T @ Ru @ K
    M_K = 0.5 * (M_K + M_K.T)
    Phi = _sym_power(P, -0.5) @ _sym_power(M_K, 0.5)
    # B_K = -P^{-1} Phi^{-T} K' Ru
    B_K = -np.linalg.solve(P, np.linalg.solve(Phi.T, K.T @ Ru))
    A_K = Phi - B_K @ K
    S_K = Ru + B_K.T @ P @ B_K
    J_P = sigma_w**2 * float(np.trace(P))
    return HardInstance(K, float(c), P, M_K, Phi, A_K, B_K, S_K, J_P, Rx, Ru, float(sigma_w))


def verify_fixed_point(inst: HardInstance, cost: CostPair | None = None) -> tuple[float, float]:
    """``(||K_inf(A_K, B_K) - K||_F, relative error of sigma_w^2 Tr(P_inf) vs J_P)``.

    Uses the value-iteration Riccati solver, an independent route to the closed form.
    """
    cost = inst.cost if cost is None else cost
    try:
        sol = solve_dare(inst.system, cost, tol=1e-14, max_iter=200_000)
    except NonConvergence as exc:
        from .protocol import RiccatiFailure

        raise RiccatiFailure(str(exc)) from exc
    gap = float(np.linalg.norm(sol.K - inst.K, "fro"))
    J = inst.sigma_w**2 * float(np.trace(sol.P))
    return gap, abs(J - inst.J_P) / inst.J_P


def bellman_residual(inst: HardInstance, x, u) -> float:
    """One-step identity residual with the noise expectation taken analytically."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    P = inst.P
    xn = inst.A_K @ x + inst.B_K @ u
    lhs = (
        x @ inst.Rx @ x + u @ inst.Ru @ u + xn @ P @ xn
        + inst.sigma_w**2 * np.trace(P) - x @ P @ x - inst.J_P
    )
    e = u - inst.K @ x
    return float(lhs - e @ inst.S_K @ e)


@dataclass(frozen=True)
class RegretIdentityReport:
    excess_mean: float
    excess_se: float
    rhs_mean: float
    rhs_se: float
    diff: float
    combined_se: float
    n_trials: int
    T: int

    @property
    def z(self) -> float:
        return self.diff / self.combined_se if self.combined_se > 0 else (0.0 if self.diff == 0 else math.inf)

    @property
    def agrees(self) -> bool:
        return abs(self.diff) <= 3.0 * self.combined_se + 1e-9 * (1 + abs(self.rhs_mean))


def regret_identity_check(inst: HardInstance, policy, T: int, n_trials: int, seed=0) -> RegretIdentityReport:
    """Monte Carlo check of ``sum_t E[excess_t] = E[Regret_T] + E[V(x_{T+1})]`` from ``x_1 = 0``.

    ``policy`` is a gain matrix (``u = F x``) or a callable ``x_batch -> u_batch``
    acting on ``(n_trials, dx)`` arrays. Trials are simulated side by side.
    """
    if callable(policy):
        act = policy
    else:
        F = np.atleast_2d(np.asarray(policy, dtype=float))
        act = lambda X: X @ F.T  # noqa: E731
    rng = np.random.default_rng(seed)
    dx = inst.A_K.shape[0]
    X = np.zeros((n_trials, dx))
    excess = np.zeros(n_trials)
    cost = np.zeros(n_trials)
    for _ in range(T):
        U = act(X)
        E = U - X @ inst.K.T
        excess += np.einsum("ni,ij,nj->n", E, inst.S_K, E)
        cost += np.einsum("ni,ij,nj->n", X, inst.Rx, X) + np.einsum("ni,ij,nj->n", U, inst.Ru, U)
        X = X @ inst.A_K.T + U @ inst.B_K.T + inst.sigma_w * rng.standard_normal((n_trials, dx))
    rhs = cost - T * inst.J_P + np.einsum("ni,ij,nj->n", X, inst.P, X)
    se = lambda v: float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0  # noqa: E731
    d = rhs - excess
    return RegretIdentityReport(
        float(excess.mean()), se(excess), float(rhs.mean()), se(rhs),
        float(d.mean()), math.hypot(se(excess), se(rhs)), n_trials, T,
    )


@dataclass(frozen=True)
class BoundsReport:
    bits_lower: float
    coefficient: float
    constant_C: float
    C_est: float
    alpha: float
    T: int
    dx: int
    du: int
    r: float
    c: float
    C1: float
    sigma_w: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bits_lower_bound(alpha, T, dx, du, r, Rx=None, Ru=None, sigma_w=1.0, C1=1.0, c=None) -> BoundsReport:
    """Lower bound ``coefficient * log2 T - C`` on the uplink bits of any scheme with regret ``O(T^alpha)``."""
    if not 0.5 <= alpha < 1:
        raise ValueError("alpha must lie in [1/2, 1)")
    if T < 4:
        raise ValueError("T must be >= 4")
    if not r > 0:
        raise ValueError("r must be positive")
    Rx = np.eye(dx) if Rx is None else np.atleast_2d(np.asarray(Rx, dtype=float))
    Ru = np.eye(du) if Ru is None else np.atleast_2d(np.asarray(Ru, dtype=float))
    thr = c_threshold(r, Rx, Ru)
    if c is None:
        c = 1.01 * thr
    if not c > thr:
        raise CChoiceViolated(f"c = {c} must exceed {thr}")
    m = du * dx
    c0 = sigma_w**2 * float(np.linalg.eigvalsh(Ru)[0])
    J_P = sigma_w**2 * float(np.trace(c * Rx))
    C_est = 5.0 * c / c0 * (C1 + c * J_P)
    C = 1.0 + m / 2 * math.log2(2 * math.pi * math.e * C_est / m) - m * math.log2(2 * r / math.sqrt(m))
    coef = m * (1 - alpha) / 2
    return BoundsReport(coef * math.log2(T) - C, coef, C, C_est, alpha, int(T), dx, du, r, float(c), C1, sigma_w)


def inflation_factors(rho: float, C0: float = 1.0) -> dict:
    if not 0 < rho < 1 / math.sqrt(2):
        raise RhoOutOfRange("rho must lie in (0, 1/sqrt(2))")
    s2, q = math.sqrt(2), 2**0.25
    C_rho = 1.0 / (1.0 - rho * s2)
    beta = rho * s2
    m_inf = (2 - beta) / (1 - beta)
    M_rho = math.ceil(m_inf)
    b_rho = 2 * math.floor(math.log2(M_rho)) + 1
    Q_slow = rho**2 * C_rho**2 * ((1 + q) / (1 - rho * q)) ** 2 * C0 * 1.0835**4
    Q_fast = rho**2 * C_rho**2 * ((1 + s2) / (1 - rho * s2)) ** 2 * C0 * 1.0835**6
    return dict(C_rho=C_rho, beta=beta, m_inf=m_inf, M_rho=M_rho, b_rho=b_rho, Q_slow=Q_slow, Q_fast=Q_fast)


def comm_budget_bound(d_s: int, rho: float, T: int) -> float:
    """Horizon-dependent part of the uplink budget, ``[d_s log2(1 + 2/rho) + b_rho] log2 T``.

    One-time terms (flags up to the safe epoch, initialization) have no
    numerical scale and are left out.
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    b = inflation_factors(rho)["b_rho"]
    return (d_s * math.log2(1 + 2 / rho) + b) * math.log2(T)


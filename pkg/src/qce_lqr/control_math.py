"""Matrix primitives for LQR synthesis.

Discrete algebraic Riccati equation (DARE), discrete Lyapunov equation,
optimal gains, spectral quantities and the safe constant
``54 * ||P||_op ** 5`` used to size the safe parameter ball.

Conventions: the gain ``K`` is applied as ``u = K x`` so the closed loop is
``A + B K`` and ``K = -(Ru + B'PB)^{-1} B'PA``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ControlMathError(Exception):
    """Base class for errors raised by the matrix primitives."""


class NonConvergence(ControlMathError):
    """Riccati iteration diverged or missed its tolerance (pair likely not stabilizable)."""


class DimensionMismatch(ControlMathError, ValueError):
    pass


class Unstable(ControlMathError, ValueError):
    """A matrix that must be Schur stable has spectral radius >= 1."""


def _as_matrix(M, name="M"):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class SystemPair:
    """Plant matrices of ``x_{t+1} = A x_t + B u_t + w_t``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("system matrices must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dx(self) -> int:
        return self.A.shape[0]

    @property
    def du(self) -> int:
        return self.B.shape[1]

    @property
    def d(self) -> int:
        return self.dx + self.du

    @property
    def d_s(self) -> int:
        """Number of unknown parameters, ``dx^2 + dx*du``."""
        return self.dx * self.dx + self.dx * self.du

    def vec(self) -> np.ndarray:
        """Row-major stacking of ``[A | B]``."""
        return np.concatenate([self.A.ravel(), self.B.ravel()])

    @classmethod
    def from_vec(cls, theta, dx: int, du: int) -> "SystemPair":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (dx * dx + dx * du,):
            raise DimensionMismatch(f"theta has shape {theta.shape}, expected ({dx * dx + dx * du},)")
        return cls(theta[: dx * dx].reshape(dx, dx), theta[dx * dx:].reshape(dx, du))


@dataclass(frozen=True)
class CostPair:
    """Quadratic stage cost ``x'Rx x + u'Ru u``."""

    Rx: np.ndarray
    Ru: np.ndarray

    def __post_init__(self):
        for name in ("Rx", "Ru"):
            R = _as_matrix(getattr(self, name), name)
            if R.shape[0] != R.shape[1]:
                raise DimensionMismatch(f"{name} must be square, got {R.shape}")
            if not np.allclose(R, R.T, atol=1e-12, rtol=0.0):
                raise ValueError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(R).min() <= 0:
                raise ValueError(f"{name} is not positive definite")
            object.__setattr__(self, name, R)

    @classmethod
    def identity(cls, dx: int, du: int) -> "CostPair":
        return cls(np.eye(dx), np.eye(du))

    def stage(self, x, u) -> float:
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return float(x @ self.Rx @ x + u @ self.Ru @ u)


@dataclass(frozen=True)
class RiccatiSolution:
    P: np.ndarray
    K: np.ndarray
    A_cl: np.ndarray
    iterations: int
    residual: float

    @property
    def P_op(self) -> float:
        return float(np.linalg.norm(self.P, 2))


@dataclass(frozen=True)
class LyapunovSolution:
    X: np.ndarray


def _check_pair(sys: SystemPair, cost: CostPair):
    if cost.Rx.shape[0] != sys.dx or cost.Ru.shape[0] != sys.du:
        raise DimensionMismatch(
            f"cost dims ({cost.Rx.shape[0]}, {cost.Ru.shape[0]}) do not match system ({sys.dx}, {sys.du})"
        )


def riccati_map(P, A, B, Rx, Ru):
    """One application of the DARE right-hand side."""
    BtP = B.T @ P
    S = Ru + BtP @ B
    return A.T @ P @ A + Rx - (A.T @ P @ B) @ np.linalg.solve(S, BtP @ A)


def gain_from_P(P, A, B, Ru) -> np.ndarray:
    BtP = B.T @ P
    return -np.linalg.solve(Ru + BtP @ B, BtP @ A)


def dare_residual(P, A, B, Rx, Ru) -> float:
    return float(np.linalg.norm(P - riccati_map(P, A, B, Rx, Ru), "fro"))


def spectral_radius(M) -> float:
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"spectral radius needs a square matrix, got {M.shape}")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def solve_dare(sys: SystemPair, cost: CostPair, tol: float = 1e-12, max_iter: int = 10_000) -> RiccatiSolution:
    """Stabilizing solution of the DARE by Riccati value iteration.

    Iterates ``P <- A'PA + Rx - A'PB (Ru + B'PB)^{-1} B'PA`` from ``P = Rx`` until
    ``||P_{n+1} - P_n||_F <= tol * (1 + ||P_n||_F)``.

    Raises
    ------
    NonConvergence
        If the iterate blows up, goes non-finite, misses ``tol`` within
        ``max_iter`` steps or yields a closed loop with spectral radius >= 1.
    DimensionMismatch
        If the cost and system dimensions disagree.
    """
    _check_pair(sys, cost)
    A, B, Rx, Ru = sys.A, sys.B, cost.Rx, cost.Ru
    P = Rx.copy()
    n = 0
    for n in range(1, max_iter + 1):
        try:
            P_next = riccati_map(P, A, B, Rx, Ru)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(f"singular inner matrix at iteration {n}") from exc
        P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)) or np.linalg.norm(P_next, "fro") > 1e150:
            raise NonConvergence(f"Riccati iterate diverged at iteration {n}")
        step = np.linalg.norm(P_next - P, "fro")
        P = P_next
        if step <= tol * (1.0 + np.linalg.norm(P, "fro")):
            break
    else:
        raise NonConvergence(f"no convergence within {max_iter} iterations (last step {step:.3e})")
    K = gain_from_P(P, A, B, Ru)
    A_cl = A + B @ K
    if spectral_radius(A_cl) >= 1.0:
        raise NonConvergence("fixed point is not stabilizing")
    return RiccatiSolution(P=P, K=K, A_cl=A_cl, iterations=n, residual=dare_residual(P, A, B, Rx, Ru))


def optimal_gain(sys: SystemPair, cost: CostPair) -> np.ndarray:
    return solve_dare(sys, cost).K


def solve_dlyap(M, Q) -> LyapunovSolution:
    """Solve ``X = M' X M + Q`` for Schur-stable ``M``.

    Kronecker vectorization for dimension <= 8, doubling on the series
    ``sum_i (M')^i Q M^i`` above that.
    """
    M = _as_matrix(M, "M")
    Q = _as_matrix(Q, "Q")
    n = M.shape[0]
    if M.shape != (n, n) or Q.shape != (n, n):
        raise DimensionMismatch(f"M {M.shape} and Q {Q.shape} must be square and equal")
    if spectral_radius(M) >= 1.0:
        raise Unstable(f"spectral radius {spectral_radius(M):.6g} >= 1")
    if n <= 8:
        Mt = M.T
        lhs = np.eye(n * n) - np.kron(Mt, Mt)
        # row-major vec: vec(M'XM) = (M' kron M') vec(X)
        X = np.linalg.solve(lhs, Q.reshape(-1)).reshape(n, n)
    else:
        X = Q.copy()
        Mk = M.copy()
        for _ in range(200):
            dX = Mk.T @ X @ Mk
            X = X + dX
            Mk = Mk @ Mk
            if np.linalg.norm(dX, "fro") <= 1e-16 * (1 + np.linalg.norm(X, "fro")):
                break
    return LyapunovSolution(X=0.5 * (X + X.T))


def dlyap(M, Q=None) -> np.ndarray:
    M = _as_matrix(M)
    return solve_dlyap(M, np.eye(M.shape[0]) if Q is None else Q).X


def lqr_cost(sys: SystemPair, cost: CostPair, K, sigma_w: float = 1.0) -> float:
    """Average infinite-horizon cost of ``u = K x`` under noise ``N(0, sigma_w^2 I)``."""
    K = _as_matrix(K, "K")
    A_cl = sys.A + sys.B @ K
    X = solve_dlyap(A_cl, cost.Rx + K.T @ cost.Ru @ K).X
    return float(sigma_w**2 * np.trace(X))


def safe_constant(sys: SystemPair, cost: CostPair) -> float:
    """``54 * ||P_inf(A, B)||_op ** 5``; propagates :class:`NonConvergence`."""
    return 54.0 * solve_dare(sys, cost).P_op ** 5


def hinf_diagnostic(M, grid_points: int = 512) -> float:
    """Grid estimate of ``sup_w sigma_max((e^{iw} I - M)^{-1})``.

    The grid is ``w_j = 2 pi j / grid_points`` so refining by an integer
    factor can only increase the estimate.
    """
    M = _as_matrix(M)
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    if spectral_radius(M) >= 1.0:
        raise Unstable(f"spectral radius {spectral_radius(M):.6g} >= 1")
    n = M.shape[0]
    w = 2.0 * np.pi * np.arange(grid_points) / grid_points
    R = np.exp(1j * w)[:, None, None] * np.eye(n)[None] - M[None]
    smin = np.linalg.svd(R, compute_uv=False)[:, -1]
    return float(1.0 / smin.min())

"""Per-epoch least-squares identification and the self-normalized confidence scalar."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control_math import SystemPair


class EmptyWindow(ValueError):
    pass


class SingularCovariance(ValueError):
    pass


@dataclass(frozen=True)
class OlsResult:
    Ahat: np.ndarray
    Bhat: np.ndarray
    Lambda: np.ndarray
    n_samples: int

    @property
    def dx(self) -> int:
        return self.Ahat.shape[0]

    @property
    def du(self) -> int:
        return self.Bhat.shape[1]

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.Ahat.ravel(), self.Bhat.ravel()])

    @property
    def system(self) -> SystemPair:
        return SystemPair(self.Ahat, self.Bhat)

    @property
    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.Lambda)[0])

    def is_singular(self) -> bool:
        ev = np.linalg.eigvalsh(self.Lambda)
        return not ev[0] > _cutoff(ev)


def _cutoff(ev) -> float:
    return 1e-10 * max(float(ev[-1]), 0.0)


def _pinv_psd(L) -> np.ndarray:
    ev, V = np.linalg.eigh(L)
    keep = ev > _cutoff(ev)
    if not np.any(keep):
        return np.zeros_like(L)
    return (V[:, keep] / ev[keep]) @ V[:, keep].T


def ols_fit(states, inputs) -> OlsResult:
    """Least squares ``[A|B]`` from ``states`` (n+1, dx) and ``inputs`` (n, du).

    Regressors are ``z_t = (x_t, u_t)`` for ``t < n`` with target ``x_{t+1}``.
    A pseudo-inverse (eigen-cutoff ``1e-10 * lambda_max``) handles rank-deficient windows.
    """
    X = np.atleast_2d(np.asarray(states, dtype=float))
    U = np.asarray(inputs, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    n = U.shape[0]
    if n == 0:
        raise EmptyWindow("no samples in the estimation window")
    if X.shape[0] != n + 1:
        raise ValueError(f"need {n + 1} states for {n} inputs, got {X.shape[0]}")
    dx = X.shape[1]
    Z = np.hstack([X[:-1], U])
    Lam = Z.T @ Z
    Lam = 0.5 * (Lam + Lam.T)
    theta = (X[1:].T @ Z) @ _pinv_psd(Lam)
    return OlsResult(Ahat=theta[:, :dx], Bhat=theta[:, dx:], Lambda=Lam, n_samples=n)


@dataclass(frozen=True)
class ConfidenceScalar:
    value: float
    lambda_min: float
    k: int
    delta: float


def confidence(res: OlsResult, k: int, delta: float, d: int | None = None) -> ConfidenceScalar:
    """``6/lambda_min * (d log 5 + log(4 k^2 det(3 Lambda) / delta))``, base-2 logs.

    ``+inf`` when ``Lambda`` is not positive definite.
    """
    if k < 1:
        raise ValueError("epoch index k must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if d is None:
        d = res.Lambda.shape[0]
    ev = np.linalg.eigvalsh(res.Lambda)
    lam_min = float(ev[0])
    if not lam_min > 0 or res.is_singular():
        return ConfidenceScalar(math.inf, lam_min, k, delta)
    n = res.Lambda.shape[0]
    # log2 det(3 Lambda) from eigenvalues; avoids overflow of det for large windows
    log_det = n * math.log2(3.0) + float(np.sum(np.log2(ev)))
    inner = d * math.log2(5.0) + math.log2(4.0 * k * k) + log_det - math.log2(delta)
    return ConfidenceScalar(6.0 / lam_min * inner, lam_min, k, delta)


def sample_ols_posterior(res: OlsResult, sigma_w: float, n_samples: int, seed) -> list[SystemPair]:
    """Draw ``[A|B]`` with row ``i ~ N(row_i([Ahat|Bhat]), sigma_w^2 Lambda^{-1})``.

    ``seed`` may be an int or a :class:`numpy.random.Generator`.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if res.is_singular():
        raise SingularCovariance("Lambda is not invertible")
    dx, d = res.dx, res.Lambda.shape[0]
    center = np.hstack([res.Ahat, res.Bhat])
    # Lambda^{-1} = L^{-T} L^{-1} with Lambda = L L^T, so z = L^{-T} g has covariance Lambda^{-1}
    L = np.linalg.cholesky(res.Lambda)
    g = rng.standard_normal((n_samples, dx, d))
    noise = np.linalg.solve(L.T, g.reshape(-1, d).T).T.reshape(n_samples, dx, d)
    draws = center[None] + sigma_w * noise
    return [SystemPair(D[:, :dx], D[:, dx:]) for D in draws]

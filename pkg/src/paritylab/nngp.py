"""Fixed-kernel infinite-width limit: Monte-Carlo NNGP kernel plus ridge regression.

The kernel K(x, x') = sigma_a^2 E_w[phi(w.x) phi(w.x')] is estimated by a
plain Monte-Carlo average over M weight draws shared by every entry (common
random numbers), so Gram matrices are exactly symmetric and positive
semidefinite by construction. The weight prior is either the isotropic
N(0, sigma_w^2 I / d) or, when a precision vector rho is supplied, the
deformed N(0, diag(rho)^-1). No label ever enters the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConfigError, IllConditionedError, InputDomainError
from .rngs import stream
from .tasks import Dataset, Hyperparams

__all__ = [
    "KernelEstimate",
    "mc_kernel",
    "arccos_kernel",
    "krr_predict",
    "ridge_tau",
    "nngp_run",
]

# Weight draws are consumed in fixed-size blocks so the accumulation order
# (and hence the result, bit for bit) never depends on available memory.
CHUNK_M = 1024

RngSeed = Union[int, np.random.Generator]


@dataclass(frozen=True)
class KernelEstimate:
    """Monte-Carlo Gram matrices for one train/eval pair."""

    K: np.ndarray
    K_cross: np.ndarray
    M: int
    rho: Optional[np.ndarray] = None


def _weight_scale(hyper: Hyperparams, d: int, rho: Optional[np.ndarray]):
    if rho is None:
        if hyper.sigma_w <= 0:
            raise ConfigError("isotropic prior requires positive sigma_w")
        return np.full(d, hyper.sigma_w / math.sqrt(d))
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (d,):
        raise InputDomainError(f"rho must have length {d}, got {rho.shape}")
    if np.any(rho <= 0) or not np.all(np.isfinite(rho)):
        raise InputDomainError("precisions must be positive and finite")
    return 1.0 / np.sqrt(rho)


def mc_kernel(
    X1: np.ndarray,
    X2: np.ndarray,
    hyper: Hyperparams,
    rho: Optional[np.ndarray] = None,
    M: int = 8192,
    seed: RngSeed = 0,
) -> np.ndarray:
    """(sigma_a^2 / M) sum_m phi(w_m . x) phi(w_m . x') over shared draws.

    Two calls with the same seed and d reuse identical weight samples, which
    is how train and cross Grams stay mutually consistent.
    """
    if M < 1:
        raise ConfigError(f"M must be >= 1, got {M}")
    X1 = np.asarray(X1, dtype=np.float64)
    X2 = np.asarray(X2, dtype=np.float64)
    if X1.ndim != 2 or X2.ndim != 2 or X1.shape[1] != X2.shape[1]:
        raise InputDomainError("X1 and X2 must share a second dimension")
    d = X1.shape[1]
    scale = _weight_scale(hyper, d, rho)
    rng = seed if isinstance(seed, np.random.Generator) else stream(
        int(seed), "nngp-weights", d
    )
    same = X1 is X2
    K = np.zeros((X1.shape[0], X2.shape[0]))
    done = 0
    while done < M:
        m = min(CHUNK_M, M - done)
        W = rng.standard_normal((m, d)) * scale[None, :]
        Phi1 = np.maximum(X1 @ W.T, 0.0)
        Phi2 = Phi1 if same else np.maximum(X2 @ W.T, 0.0)
        K += Phi1 @ Phi2.T
        done += m
    K *= hyper.sigma_a**2 / M
    if same:
        # gemm output is symmetric only up to rounding; mirror one triangle
        il = np.tril_indices(K.shape[0], -1)
        K.T[il] = K[il]
    return K


def arccos_kernel(X1: np.ndarray, X2: np.ndarray, hyper: Hyperparams) -> np.ndarray:
    """Closed-form isotropic ReLU kernel; an oracle, not the production path.

    K(x, x') = sigma_a^2 (sigma_w^2 / d) |x||x'| (sin t + (pi - t) cos t) / (2 pi)
    with t the angle between x and x'. On hypercube points (|x|^2 = d) this
    reduces to sigma_a^2 sigma_w^2 (sin t + (pi - t) cos t) / (2 pi).
    """
    X1 = np.asarray(X1, dtype=np.float64)
    X2 = np.asarray(X2, dtype=np.float64)
    if X1.ndim != 2 or X2.ndim != 2 or X1.shape[1] != X2.shape[1]:
        raise InputDomainError("X1 and X2 must share a second dimension")
    n1 = np.linalg.norm(X1, axis=1)
    n2 = np.linalg.norm(X2, axis=1)
    denom = np.outer(n1, n2)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(denom > 0, (X1 @ X2.T) / denom, 0.0)
    theta = np.arccos(np.clip(c, -1.0, 1.0))
    J = np.sin(theta) + (np.pi - theta) * np.cos(theta)
    return hyper.sigma_a**2 * hyper.sigma_w**2 / X1.shape[1] * denom * J / (
        2.0 * np.pi
    )


def krr_predict(
    K: np.ndarray, K_cross: np.ndarray, y: np.ndarray, tau: float
) -> np.ndarray:
    """f_eval = K_cross (K + tau I)^-1 y via a symmetric factorization."""
    K = np.asarray(K, dtype=np.float64)
    K_cross = np.asarray(K_cross, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    P = K.shape[0]
    if K.shape != (P, P):
        raise InputDomainError("K must be square")
    if K_cross.ndim != 2 or K_cross.shape[1] != P or y.shape != (P,):
        raise InputDomainError("K_cross/y shapes must match K")
    if tau < 0:
        raise ConfigError(f"ridge tau must be >= 0, got {tau}")
    A = K + tau * np.eye(P)
    try:
        factor = cho_factor(A, lower=True, check_finite=False)
    except LinAlgError as exc:
        cond = float(np.linalg.cond(A))
        raise IllConditionedError(
            f"ridge system factorization failed: {exc}", cond
        ) from exc
    alpha = cho_solve(factor, y, check_finite=False)
    return K_cross @ alpha


def ridge_tau(hyper: Hyperparams, convention: str = "main") -> float:
    """Ridge from the noise scale: kappa^2/sigma_a^2, or half that under "half"."""
    if hyper.sigma_a <= 0:
        raise ConfigError("ridge_tau requires positive sigma_a")
    tau = hyper.kappa**2 / hyper.sigma_a**2
    if convention == "main":
        return tau
    if convention == "half":
        return 0.5 * tau
    raise ConfigError(f"unknown tau convention {convention!r}")


def nngp_run(
    data_train: Dataset,
    data_eval: Dataset,
    hyper: Hyperparams,
    rho: Optional[np.ndarray] = None,
    M: int = 8192,
    seed: RngSeed = 0,
    tau_convention: str = "main",
):
    """Kernel regression end to end; returns (predictions, m_S, test MSE)."""
    from .diagnostics import empirical_mS, test_error

    if data_train.spec.d != data_eval.spec.d:
        raise InputDomainError("train and eval sets must share d")
    if isinstance(seed, np.random.Generator):
        # a live generator would advance between the two calls and break
        # the common-random-number coupling of K and K_cross
        raise ConfigError("nngp_run needs an integer seed, not a Generator")
    K = mc_kernel(data_train.X, data_train.X, hyper, rho, M, seed)
    K_cross = mc_kernel(data_eval.X, data_train.X, hyper, rho, M, seed)
    tau = ridge_tau(hyper, tau_convention)
    preds = krr_predict(K, K_cross, data_train.y, tau)
    m_S, _ = empirical_mS(preds, data_eval, data_eval.spec.S)
    mse, _ = test_error(preds, data_eval, data_eval.spec.S)
    return preds, m_S, mse

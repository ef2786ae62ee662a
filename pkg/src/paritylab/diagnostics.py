"""Order parameters and feature-learning signatures shared by all model routes.

Everything here is pure: same inputs, same outputs. The overlap m_S and the
Gram scalar g are plain empirical averages against the Walsh character c on
an eval set; the test-error decomposition 0.5*(f_bar_sq - 2 m_S + g) is exact
algebra whenever the labels are that character.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as _sstats

from .errors import InputDomainError
from .tasks import Dataset, walsh_eval_batch

__all__ = [
    "DiagnosticsReport",
    "empirical_mS",
    "test_error",
    "specialization",
    "weight_marginal_stats",
    "kernel_outlier_ratio",
    "outlier_ratio_from_gram",
    "gram_wwt",
]


@dataclass(frozen=True)
class DiagnosticsReport:
    """One run's summary observables."""

    m_S: float
    test_mse: float
    train_mse: float
    f_bar_sq: float
    g: float
    specialization: Optional[np.ndarray] = None
    coord_var: Optional[np.ndarray] = None
    coord_kurtosis: Optional[np.ndarray] = None
    outlier_ratio: Optional[float] = None


def _character(eval_data: Dataset, S: Sequence[int]) -> np.ndarray:
    if eval_data.P < 1:
        raise InputDomainError("eval set must be nonempty")
    return walsh_eval_batch(S, eval_data.X)


def empirical_mS(f: np.ndarray, eval_data: Dataset, S: Sequence[int]):
    """Overlap against the Walsh character: m_S = c.f/P, g = c.c/P."""
    f = np.asarray(f, dtype=np.float64)
    c = _character(eval_data, S)
    if f.shape != c.shape:
        raise InputDomainError(
            f"predictions must be length {c.shape[0]}, got {f.shape}"
        )
    P = eval_data.P
    return float(c @ f) / P, float(c @ c) / P


def test_error(f: np.ndarray, eval_data: Dataset, S: Sequence[int]):
    """Half mean squared error plus, for character-labeled sets, its split.

    Returns (mse, parts) where parts is {"f_bar_sq", "m_S", "g"} satisfying
    mse == 0.5*(f_bar_sq - 2*m_S + g) whenever y is the Walsh character c;
    parts is None for single-index eval sets, where only the direct MSE is
    meaningful.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != eval_data.y.shape:
        raise InputDomainError(
            f"predictions must be length {eval_data.P}, got {f.shape}"
        )
    e = f - eval_data.y
    mse = 0.5 * float(e @ e) / eval_data.P
    if eval_data.spec.kind != "parity":
        return mse, None
    m_S, g = empirical_mS(f, eval_data, S)
    parts = {"f_bar_sq": float(f @ f) / eval_data.P, "m_S": m_S, "g": g}
    return mse, parts


def _unit_arrays(state):
    # ParticleState carries W_p/a_p, ModelParams carries W/a and maybe b
    if hasattr(state, "W_p"):
        return state.W_p, state.a_p, None
    return state.W, state.a, getattr(state, "b", None)


def _features(W, b, X) -> np.ndarray:
    Z = X @ W.T
    if b is not None:
        Z += b
    return np.maximum(Z, 0.0, out=Z)


def specialization(state, eval_data: Dataset, S: Sequence[int]) -> np.ndarray:
    """Per-unit alignment m_tilde_i = a_i * mean_mu(phi(w_i . x_mu) c_mu).

    The predictor-scale times the sum of these recovers the empirical m_S of
    the corresponding predictor on the same eval set.
    """
    W, a, b = _unit_arrays(state)
    c = _character(eval_data, S)
    Phi = _features(W, b, eval_data.X)
    return a * (Phi.T @ c) / eval_data.P


def weight_marginal_stats(W: np.ndarray):
    """Per-column sample variance and excess kurtosis of the weight matrix.

    Kurtosis uses the plain moment estimator m4/m2^2 - 3, reported as 0 for
    degenerate (zero-variance) columns.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] < 4:
        raise InputDomainError("need a 2-d matrix with at least 4 rows")
    var = np.var(W, axis=0, ddof=1)
    kurt = _sstats.kurtosis(W, axis=0, fisher=True, bias=True)
    kurt = np.where(np.isfinite(kurt), kurt, 0.0)
    return var, np.asarray(kurt, dtype=np.float64)


def outlier_ratio_from_gram(K: np.ndarray, c: np.ndarray) -> float:
    """c.K.c / tr(K) for an explicit feature Gram matrix."""
    K = np.asarray(K, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    tr = float(np.trace(K))
    if tr <= 0:
        raise InputDomainError("Gram trace must be positive")
    return float(c @ K @ c) / tr


def kernel_outlier_ratio(state, X: np.ndarray, S: Sequence[int]) -> float:
    """Alignment of the empirical feature kernel with the target character.

    With K = Phi Phi^T / N this is c.K.c / tr(K) = |Phi^T c|^2 / |Phi|_F^2;
    the width factor cancels so the Gram is never materialized.
    """
    W, _, b = _unit_arrays(state)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputDomainError("X must be a nonempty [P x d] matrix")
    c = walsh_eval_batch(S, X)
    Phi = _features(W, b, X)
    denom = float(np.sum(Phi * Phi))
    if denom <= 0:
        raise InputDomainError("feature matrix is identically zero")
    v = Phi.T @ c
    return float(v @ v) / denom


def gram_wwt(W: np.ndarray, per_unit: bool = False) -> np.ndarray:
    """Coordinate-space Gram W^T W / N ([d x d]).

    per_unit=True instead returns the raw unit-space Gram W W^T ([N x N]).
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise InputDomainError("W must be a matrix")
    if per_unit:
        return W @ W.T
    return W.T @ W / W.shape[0]

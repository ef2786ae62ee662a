"""NumPy implementation of the gradient kernels (fallback backend).

Matches the compiled backend's interface exactly; see _kernels.pyx for the
fused fast path. Both backends treat the ReLU subgradient at 0 as 0.
"""

from __future__ import annotations

import numpy as np

name = "numpy"


class ReferenceKernel:
    """Data-term gradients of mean((f - y)^2) for a fixed training set.

    f(x) = scale * sum_i a_i relu(w_i . x + b_i). Gradients are fresh arrays
    each call.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray, scale: float, with_bias: bool = False):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.scale = float(scale)
        self.with_bias = bool(with_bias)
        self.P = self.X.shape[0]

    def grads(self, W: np.ndarray, a: np.ndarray, b: np.ndarray | None = None):
        Z = self.X @ W.T
        if self.with_bias:
            Z += b
        Phi = np.maximum(Z, 0.0, out=Z)
        f = Phi @ a
        f *= self.scale
        e = f - self.y
        mse = float(e @ e) / self.P
        coef = 2.0 * self.scale / self.P
        ga = coef * (Phi.T @ e)
        M = np.where(Phi > 0.0, e[:, None], 0.0)
        gW = (coef * a)[:, None] * (M.T @ self.X)
        gb = (coef * a) * M.sum(axis=0) if self.with_bias else None
        return gW, ga, gb, mse


class ParticleKernel:
    """Per-particle sufficient statistics against a frozen residual.

    C1_b = sum_p phi(z_pb) r_p
    C2_b = sum_p phi(z_pb)^2
    G[b] = -(2 s_f a_b / P) sum_p (r_p - s_f a_b phi(z_pb)) phi'(z_pb) x_p
    Gb[b] is the same sum with x_p replaced by 1 (bias coordinate).
    """

    def __init__(self, X: np.ndarray, s_f: float, with_bias: bool = False):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.s_f = float(s_f)
        self.with_bias = bool(with_bias)
        self.P = self.X.shape[0]

    def stats(self, W: np.ndarray, a: np.ndarray, b: np.ndarray | None, r: np.ndarray):
        Z = self.X @ W.T
        if self.with_bias:
            Z += b
        Phi = np.maximum(Z, 0.0, out=Z)
        C1 = Phi.T @ r
        C2 = np.einsum("pb,pb->b", Phi, Phi)
        H = np.where(Phi > 0.0, r[:, None] - self.s_f * a[None, :] * Phi, 0.0)
        coef = -2.0 * self.s_f / self.P
        G = (coef * a)[:, None] * (H.T @ self.X)
        Gb = (coef * a) * H.sum(axis=0) if self.with_bias else None
        return C1, C2, G, Gb

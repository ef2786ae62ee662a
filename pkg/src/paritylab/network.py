"""Width-N two-layer ReLU network trained by full-batch Langevin dynamics.

The update is plain Euler-Maruyama on the posterior potential
U = T * E_prior + mean((f - y)^2) with T = 2 kappa^2: per-parameter decay
gamma_w = T d / sigma_w^2, gamma_a = T / sigma_a^2 (gamma_b = T / sigma_b^2),
noise sqrt(2 T eta) xi. Its stationary law is the Bayesian posterior.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._core import get_backend
from .errors import ConfigError, DivergenceError, InputDomainError, RunTimeout
from .rngs import stream
from .tasks import Dataset, Hyperparams

__all__ = [
    "ModelParams",
    "LrSchedule",
    "SgldConfig",
    "init_params",
    "forward",
    "lr_at",
    "sgld_step",
    "train_sgld",
    "potential",
    "potential_grads",
]

PARAM_LIMIT = 1e6
MSE_LIMIT = 1e6

RngSeed = Union[int, np.random.Generator]


def _as_rng(seed: RngSeed, *tags) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed), *tags)


@dataclass
class ModelParams:
    """Network state: rows of W are the hidden units; bias is optional."""

    W: np.ndarray
    a: np.ndarray
    b: Optional[np.ndarray]
    hyper: Hyperparams

    def __post_init__(self):
        if self.W.ndim != 2 or self.W.shape[0] != self.hyper.N:
            raise InputDomainError(
                f"W must be [{self.hyper.N} x d], got shape {self.W.shape}"
            )
        if self.a.shape != (self.hyper.N,):
            raise InputDomainError("a must have one amplitude per hidden unit")
        if self.b is not None and self.b.shape != (self.hyper.N,):
            raise InputDomainError("b must have one bias per hidden unit")

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(
            W=self.W.copy(),
            a=self.a.copy(),
            b=None if self.b is None else self.b.copy(),
            hyper=self.hyper,
        )

    def max_abs(self) -> float:
        m = max(np.abs(self.W).max(), np.abs(self.a).max())
        if self.b is not None:
            m = max(m, np.abs(self.b).max())
        return float(m)


@dataclass(frozen=True)
class LrSchedule:
    """Polynomial (power 2) decay from eta_start to eta_end over decay_steps."""

    eta_start: float
    eta_end: float
    decay_steps: int
    power: int = 2

    def __post_init__(self):
        if not (self.eta_start >= self.eta_end > 0):
            raise ConfigError("need eta_start >= eta_end > 0")
        if self.decay_steps < 1:
            raise ConfigError("decay_steps must be >= 1")
        if self.power != 2:
            raise ConfigError("only power=2 schedules are supported")


def lr_at(sched: LrSchedule, step: int) -> float:
    """eta(step) = eta_end + (eta_start - eta_end)(1 - step/decay_steps)^2, clamped."""
    if step < 0:
        raise InputDomainError(f"step must be >= 0, got {step}")
    if step > sched.decay_steps:
        return sched.eta_end
    frac = 1.0 - step / sched.decay_steps
    return sched.eta_end + (sched.eta_start - sched.eta_end) * frac * frac


@dataclass(frozen=True)
class SgldConfig:
    """Run configuration for train_sgld."""

    hyper: Hyperparams
    steps: int
    lr: LrSchedule
    with_bias: bool = False
    log_every: int = 1000
    prior_only: bool = False
    time_budget_s: Optional[float] = None
    backend: Optional[str] = None

    def __post_init__(self):
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")


def init_params(
    hyper: Hyperparams, d: int, with_bias: bool = False, seed: RngSeed = 0
) -> ModelParams:
    """Prior draw: W_ij ~ N(0, sigma_w^2/d), a_i ~ N(0, sigma_a^2), b_i ~ N(0, sigma_b^2)."""
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    rng = _as_rng(seed, "init", hyper.N, d)
    W = rng.standard_normal((hyper.N, d)) * (hyper.sigma_w / math.sqrt(d))
    a = rng.standard_normal(hyper.N) * hyper.sigma_a
    b = rng.standard_normal(hyper.N) * hyper.sigma_b if with_bias else None
    return ModelParams(W=W, a=a, b=b, hyper=hyper)


def forward(params: ModelParams, X: np.ndarray) -> np.ndarray:
    """f(x) = N^-gamma sum_i a_i relu(w_i . x + b_i)."""
    if X.ndim != 2 or X.shape[1] != params.d:
        raise InputDomainError(
            f"X must be [P x {params.d}], got shape {getattr(X, 'shape', None)}"
        )
    Z = X @ params.W.T
    if params.b is not None:
        Z += params.b
    np.maximum(Z, 0.0, out=Z)
    scale = float(params.hyper.N) ** (-params.hyper.gamma)
    return scale * (Z @ params.a)


def _decay_coeffs(hyper: Hyperparams, d: int, with_bias: bool):
    if hyper.sigma_w <= 0 or hyper.sigma_a <= 0:
        raise ConfigError("training requires positive sigma_w and sigma_a")
    if with_bias and hyper.sigma_b <= 0:
        raise ConfigError("bias-enabled training requires positive sigma_b")
    T = hyper.T
    gamma_w = T * d / hyper.sigma_w**2
    gamma_a = T / hyper.sigma_a**2
    gamma_b = T / hyper.sigma_b**2 if with_bias else 0.0
    return T, gamma_w, gamma_a, gamma_b


def _step_inplace(params, engine, coeffs, lr, rng, noise):
    """One Euler-Maruyama step, mutating params; returns the pre-step train MSE.

    Noise draw order is fixed: W, then a, then b.
    """
    T, gamma_w, gamma_a, gamma_b = coeffs
    W, a, b = params.W, params.a, params.b
    xi_W, xi_a, xi_b = noise
    if engine is None:
        gW = ga = gb = None
        mse = math.nan
    else:
        gW, ga, gb, mse = engine.grads(W, a, b)
    sigma = math.sqrt(2.0 * T * lr)
    rng.standard_normal(out=xi_W)
    W *= 1.0 - lr * gamma_w
    if gW is not None:
        W -= lr * gW
    if sigma:
        W += sigma * xi_W
    rng.standard_normal(out=xi_a)
    a *= 1.0 - lr * gamma_a
    if ga is not None:
        a -= lr * ga
    if sigma:
        a += sigma * xi_a
    if b is not None:
        rng.standard_normal(out=xi_b)
        b *= 1.0 - lr * gamma_b
        if gb is not None:
            b -= lr * gb
        if sigma:
            b += sigma * xi_b
    return mse


def _noise_bufs(params: ModelParams):
    return (
        np.empty_like(params.W),
        np.empty_like(params.a),
        None if params.b is None else np.empty_like(params.b),
    )


def _check_state(params: ModelParams, mse: float, step: int):
    if not math.isnan(mse) and not (mse <= MSE_LIMIT):
        raise DivergenceError(f"train MSE {mse:.3e} exceeded the guard", step)
    if not (params.max_abs() <= PARAM_LIMIT):
        raise DivergenceError("parameter magnitude exceeded the guard", step)


def sgld_step(
    params: ModelParams, data: Dataset, lr: float, rng: np.random.Generator
) -> ModelParams:
    """One full-batch SGLD step; returns updated params, input untouched."""
    out = params.copy()
    with_bias = out.b is not None
    coeffs = _decay_coeffs(out.hyper, out.d, with_bias)
    scale = float(out.hyper.N) ** (-out.hyper.gamma)
    engine = get_backend().ReferenceKernel(data.X, data.y, scale, with_bias)
    mse = _step_inplace(out, engine, coeffs, lr, rng, _noise_bufs(out))
    _check_state(out, mse, 0)
    return out


def train_sgld(config: SgldConfig, data: Dataset, seed: RngSeed, on_snapshot=None):
    """Run the configured number of full-batch steps.

    Returns (final params, trace of (step, train MSE)). The trace records the
    MSE seen by each logged step's gradient (pre-update), so entry (s, m) is
    the loss of the parameters after s steps. on_snapshot, when given, is
    called as on_snapshot(step, params) at every log point with the live
    parameter object; callers must copy anything they keep.
    """
    rng = _as_rng(seed, "sgld-train")
    params = init_params(config.hyper, data.spec.d, config.with_bias, rng)
    coeffs = _decay_coeffs(config.hyper, data.spec.d, config.with_bias)
    if config.prior_only:
        engine = None
    else:
        scale = float(config.hyper.N) ** (-config.hyper.gamma)
        engine = get_backend(config.backend).ReferenceKernel(
            data.X, data.y, scale, config.with_bias
        )
    noise = _noise_bufs(params)
    trace: list[tuple[int, float]] = []
    t0 = time.perf_counter()
    for step in range(config.steps):
        mse = _step_inplace(params, engine, coeffs, lr_at(config.lr, step), rng, noise)
        if step % config.log_every == 0 or step == config.steps - 1:
            trace.append((step, mse))
            _check_state(params, mse, step)
            if on_snapshot is not None:
                on_snapshot(step, params)
            if (
                config.time_budget_s is not None
                and time.perf_counter() - t0 > config.time_budget_s
            ):
                raise RunTimeout(
                    f"budget {config.time_budget_s}s exhausted at step {step}", trace
                )
        elif not (math.isnan(mse) or mse <= MSE_LIMIT):
            raise DivergenceError(f"train MSE {mse:.3e} exceeded the guard", step)
    return params, trace


def potential(params: ModelParams, data: Dataset) -> float:
    """Posterior potential U = T * E_prior + mean((f - y)^2).

    E_prior = (d / 2 sigma_w^2) |W|_F^2 + (1 / 2 sigma_a^2) |a|^2
    (+ (1 / 2 sigma_b^2) |b|^2 when bias is enabled).
    """
    h = params.hyper
    if h.sigma_w <= 0 or h.sigma_a <= 0:
        raise ConfigError("potential requires positive sigma_w and sigma_a")
    e_prior = params.d / (2.0 * h.sigma_w**2) * float(
        np.sum(params.W * params.W)
    ) + float(np.sum(params.a * params.a)) / (2.0 * h.sigma_a**2)
    if params.b is not None:
        if h.sigma_b <= 0:
            raise ConfigError("bias potential requires positive sigma_b")
        e_prior += float(np.sum(params.b * params.b)) / (2.0 * h.sigma_b**2)
    e = forward(params, data.X) - data.y
    return h.T * e_prior + float(e @ e) / data.P


def potential_grads(params: ModelParams, data: Dataset):
    """Analytic gradient of potential() w.r.t. (W, a, b)."""
    with_bias = params.b is not None
    _, gamma_w, gamma_a, gamma_b = _decay_coeffs(params.hyper, params.d, with_bias)
    scale = float(params.hyper.N) ** (-params.hyper.gamma)
    engine = get_backend().ReferenceKernel(data.X, data.y, scale, with_bias)
    gW, ga, gb, _ = engine.grads(params.W, params.a, params.b)
    gW = gW + gamma_w * params.W
    ga = ga + gamma_a * params.a
    gb = gb + gamma_b * params.b if with_bias else None
    return gW, ga, gb

"""Particle mean-field solver: B single neurons coupled through a shared residual.

Outer loop protocol per iteration t: refresh the residual r = y - f once,
freeze it, run K(t) inner Langevin steps on every particle's cavity
potential, then (optionally) update the per-coordinate input precisions rho
from the particle weights. Particles never interact inside the inner loop,
which is what makes the iteration a fixed-point map on the predictor.

With the residual frozen, particle b descends
    U_b = T * (0.5 * sum_j rho_j w_bj^2 + a_b^2 / (2 sigma_a^2))
        + (1/P) * sum_p (r_p - s_f a_b phi(w_b . x_p))^2,
whose exact gradients are the closed forms assembled in mf_gradients.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._core import get_backend
from .errors import ConfigError, DivergenceError, InputDomainError, RunTimeout
from .network import MSE_LIMIT, PARAM_LIMIT, LrSchedule, lr_at
from .rngs import stream
from .tasks import Dataset, Hyperparams

__all__ = [
    "ArdConfig",
    "ParticleState",
    "SufficientStats",
    "MfConfig",
    "mf_init",
    "mf_predict",
    "compute_stats",
    "mf_gradients",
    "mf_inner_step",
    "ard_update",
    "mf_outer_solve",
    "mf_potential",
]

log = logging.getLogger(__name__)

RngSeed = Union[int, np.random.Generator]


def _as_rng(seed: RngSeed, *tags) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed), *tags)


@dataclass(frozen=True)
class ArdConfig:
    """Automatic relevance determination settings.

    beta0=None means the scale-matching rate alpha0/d, resolved at init time.
    rho_min defaults to the smallest positive normal so precisions stay > 0.
    """

    enabled: bool = False
    alpha0: float = 1.0
    beta0: Optional[float] = None
    ema: float = 0.5
    rho_min: float = sys.float_info.min
    rho_max: float = 1e18

    def __post_init__(self):
        if self.alpha0 <= 0:
            raise ConfigError("alpha0 must be positive")
        if self.beta0 is not None and self.beta0 <= 0:
            raise ConfigError("beta0 must be positive when given")
        if not (0.0 < self.ema <= 1.0):
            raise ConfigError("ema mixing must lie in (0, 1]")
        if not (0.0 < self.rho_min < self.rho_max):
            raise ConfigError("need 0 < rho_min < rho_max")

    def rate(self, d: int) -> float:
        return self.alpha0 / d if self.beta0 is None else self.beta0


@dataclass
class ParticleState:
    """B particles (rows of W_p with amplitudes a_p) plus input precisions."""

    W_p: np.ndarray
    a_p: np.ndarray
    rho: np.ndarray
    s_f: float
    hyper: Hyperparams

    def __post_init__(self):
        if self.W_p.ndim != 2:
            raise InputDomainError("W_p must be [B x d]")
        B, d = self.W_p.shape
        if self.a_p.shape != (B,):
            raise InputDomainError("a_p must have one amplitude per particle")
        if self.rho.shape != (d,):
            raise InputDomainError("rho must have one precision per coordinate")
        if not np.all(np.isfinite(self.rho)) or np.any(self.rho <= 0):
            raise InputDomainError("precisions must be positive and finite")
        expect = self.hyper.N ** (1.0 - self.hyper.gamma) / B
        if not math.isclose(self.s_f, expect, rel_tol=1e-12):
            raise InputDomainError(
                f"s_f must equal N^(1-gamma)/B = {expect!r}, got {self.s_f!r}"
            )

    @property
    def B(self) -> int:
        return self.W_p.shape[0]

    @property
    def d(self) -> int:
        return self.W_p.shape[1]

    def copy(self) -> "ParticleState":
        return ParticleState(
            W_p=self.W_p.copy(),
            a_p=self.a_p.copy(),
            rho=self.rho.copy(),
            s_f=self.s_f,
            hyper=self.hyper,
        )

    def max_abs(self) -> float:
        return float(max(np.abs(self.W_p).max(), np.abs(self.a_p).max()))


@dataclass(frozen=True)
class SufficientStats:
    """Per-particle residual statistics; the only data coupling in the inner loop."""

    C1: np.ndarray
    C2: np.ndarray
    G_data: np.ndarray


@dataclass(frozen=True)
class MfConfig:
    """Outer-loop configuration. LR and the inner-step count K are both
    scheduled on the outer step counter; the LR is constant within one
    outer step's inner loop."""

    hyper: Hyperparams
    B: int
    outer_steps: int
    lr: LrSchedule
    k0: int = 12
    k_min: int = 2
    k_decay_steps: Optional[int] = None
    ard: ArdConfig = field(default_factory=ArdConfig)
    log_every: int = 50
    time_budget_s: Optional[float] = None
    backend: Optional[str] = None

    def __post_init__(self):
        if self.B < 1:
            raise ConfigError("B must be >= 1")
        if self.outer_steps < 0:
            raise ConfigError("outer_steps must be >= 0")
        if not (1 <= self.k_min <= self.k0):
            raise ConfigError("need 1 <= k_min <= k0")
        if self.k_decay_steps is not None and self.k_decay_steps < 1:
            raise ConfigError("k_decay_steps must be >= 1 when given")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")


def k_at(config: MfConfig, t: int) -> int:
    """Inner-step budget K(t): linear decay k0 -> k_min over k_decay_steps
    outer iterations (the full horizon when unset), clamped at k_min after."""
    if t < 0:
        raise InputDomainError(f"outer step must be >= 0, got {t}")
    window = config.k_decay_steps
    if window is None:
        window = max(1, config.outer_steps - 1)
    frac = min(1.0, t / window)
    return max(config.k_min, round(config.k0 - (config.k0 - config.k_min) * frac))


def mf_init(
    hyper: Hyperparams, B: int, d: int, ard: ArdConfig, seed: RngSeed = 0
) -> ParticleState:
    """Prior particle draw with isotropic precisions rho_j = d / sigma_w^2."""
    if B < 1:
        raise ConfigError(f"B must be >= 1, got {B}")
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    if hyper.sigma_w <= 0:
        raise ConfigError("mf_init requires positive sigma_w")
    rng = _as_rng(seed, "mf-init", B, d)
    W_p = rng.standard_normal((B, d)) * (hyper.sigma_w / math.sqrt(d))
    a_p = rng.standard_normal(B) * hyper.sigma_a
    rho = np.full(d, d / hyper.sigma_w**2)
    s_f = hyper.N ** (1.0 - hyper.gamma) / B
    return ParticleState(W_p=W_p, a_p=a_p, rho=rho, s_f=s_f, hyper=hyper)


def mf_predict(state: ParticleState, X: np.ndarray) -> np.ndarray:
    """f(x) = s_f sum_b a_b phi(w_b . x)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != state.d:
        raise InputDomainError(
            f"X must be [P x {state.d}], got shape {X.shape}"
        )
    Z = X @ state.W_p.T
    np.maximum(Z, 0.0, out=Z)
    return state.s_f * (Z @ state.a_p)


def compute_stats(
    state: ParticleState, data: Dataset, residuals: np.ndarray
) -> SufficientStats:
    """C1_b = sum_p phi r_p, C2_b = sum_p phi^2, and the residual force G_data."""
    residuals = np.asarray(residuals, dtype=np.float64)
    if residuals.shape != (data.P,):
        raise InputDomainError("residuals must have one entry per sample")
    engine = get_backend().ParticleKernel(data.X, state.s_f, False)
    C1, C2, G, _ = engine.stats(state.W_p, state.a_p, None, residuals)
    return SufficientStats(C1=C1.copy(), C2=C2.copy(), G_data=G.copy())


def mf_gradients(state: ParticleState, stats: SufficientStats, P: int):
    """Exact gradients of the frozen-residual cavity potential.

    grad_a_b = (T/sigma_a^2) a_b - (2 s_f/P) C1_b + (2 s_f^2/P) C2_b a_b
    grad_w_b = G_data_b + T (rho * w_b)
    """
    h = state.hyper
    if h.sigma_a <= 0:
        raise ConfigError("mf gradients require positive sigma_a")
    T = h.T
    s_f = state.s_f
    grad_a = (
        (T / h.sigma_a**2) * state.a_p
        - (2.0 * s_f / P) * stats.C1
        + (2.0 * s_f**2 / P) * stats.C2 * state.a_p
    )
    grad_w = stats.G_data + T * (state.rho[None, :] * state.W_p)
    return grad_a, grad_w


def _inner_inplace(state, engine, residuals, lr, rng, noise):
    """One Euler-Maruyama inner step on all particles, mutating state.

    Noise draw order is fixed: W, then a.
    """
    h = state.hyper
    T = h.T
    xi_W, xi_a = noise
    if engine is None:
        grad_w_data = None
        C1 = C2 = None
    else:
        C1, C2, grad_w_data, _ = engine.stats(state.W_p, state.a_p, None, residuals)
    s_f = state.s_f
    P = residuals.shape[0]
    sigma = math.sqrt(2.0 * T * lr)
    rng.standard_normal(out=xi_W)
    state.W_p -= (lr * T) * (state.rho[None, :] * state.W_p)
    if grad_w_data is not None:
        state.W_p -= lr * grad_w_data
    if sigma:
        state.W_p += sigma * xi_W
    rng.standard_normal(out=xi_a)
    state.a_p *= 1.0 - lr * T / h.sigma_a**2
    if C1 is not None:
        state.a_p -= lr * (-(2.0 * s_f / P) * C1 + (2.0 * s_f**2 / P) * C2 * state.a_p)
    if sigma:
        state.a_p += sigma * xi_a


def mf_inner_step(
    state: ParticleState,
    data: Dataset,
    lr: float,
    rng: np.random.Generator,
    residuals: Optional[np.ndarray] = None,
) -> ParticleState:
    """One inner Langevin step; residuals default to a fresh y - f(X).

    The outer solver passes the frozen residual instead of refreshing.
    """
    if state.hyper.sigma_a <= 0:
        raise ConfigError("mf_inner_step requires positive sigma_a")
    out = state.copy()
    if residuals is None:
        residuals = data.y - mf_predict(out, data.X)
    residuals = np.asarray(residuals, dtype=np.float64)
    if residuals.shape != (data.P,):
        raise InputDomainError("residuals must have one entry per sample")
    engine = get_backend().ParticleKernel(data.X, out.s_f, False)
    noise = (np.empty_like(out.W_p), np.empty_like(out.a_p))
    _inner_inplace(out, engine, residuals, lr, rng, noise)
    if not (out.max_abs() <= PARAM_LIMIT):
        raise DivergenceError("particle magnitude exceeded the guard", 0)
    return out


def ard_update(state: ParticleState, ard: ArdConfig) -> np.ndarray:
    """Precision refresh: EMA toward rho_target_j = (alpha0 + B/2) / (beta0 + 0.5 sum_b w_bj^2)."""
    if not ard.enabled:
        raise ConfigError("ard_update called with ARD disabled")
    alpha_post = ard.alpha0 + state.B / 2.0
    beta_post = ard.rate(state.d) + 0.5 * np.sum(state.W_p * state.W_p, axis=0)
    rho_target = alpha_post / beta_post
    rho_new = (1.0 - ard.ema) * state.rho + ard.ema * rho_target
    clipped = np.clip(rho_new, ard.rho_min, ard.rho_max)
    if np.any(clipped != rho_new):
        log.warning(
            "ARD precision clip activated on %d coordinate(s)",
            int(np.sum(clipped != rho_new)),
        )
    return clipped


def mf_potential(
    state: ParticleState, data: Dataset, residuals: np.ndarray
) -> float:
    """Total frozen-residual potential sum_b U_b; the oracle for gradient tests."""
    h = state.hyper
    if h.sigma_a <= 0:
        raise ConfigError("mf_potential requires positive sigma_a")
    residuals = np.asarray(residuals, dtype=np.float64)
    Z = data.X @ state.W_p.T
    np.maximum(Z, 0.0, out=Z)
    prior = h.T * (
        0.5 * float(np.sum(state.rho[None, :] * state.W_p * state.W_p))
        + float(state.a_p @ state.a_p) / (2.0 * h.sigma_a**2)
    )
    dev = residuals[:, None] - state.s_f * state.a_p[None, :] * Z
    return prior + float(np.sum(dev * dev)) / data.P


def mf_outer_solve(config: MfConfig, data: Dataset, seed: RngSeed, eval_data=None):
    """Run the full fixed-point iteration.

    Returns (state, trace); trace rows are (outer step, m_S, test MSE,
    (rho min, rho median, rho max)). Overlap and test MSE come from eval_data
    and are NaN when no eval set is supplied.
    """
    from .diagnostics import empirical_mS, test_error

    rng = _as_rng(seed, "mf-solve")
    state = mf_init(config.hyper, config.B, data.spec.d, config.ard, rng)
    engine = get_backend(config.backend).ParticleKernel(data.X, state.s_f, False)
    noise = (np.empty_like(state.W_p), np.empty_like(state.a_p))
    trace: list[tuple[int, float, float, tuple[float, float, float]]] = []

    def rho_summary():
        return (
            float(state.rho.min()),
            float(np.median(state.rho)),
            float(state.rho.max()),
        )

    def eval_metrics():
        if eval_data is None:
            return math.nan, math.nan
        f = mf_predict(state, eval_data.X)
        m_S, _ = empirical_mS(f, eval_data, eval_data.spec.S)
        mse, _ = test_error(f, eval_data, eval_data.spec.S)
        return m_S, mse

    t0 = time.perf_counter()
    for t in range(config.outer_steps):
        f = mf_predict(state, data.X)
        residuals = data.y - f
        train_mse = float(residuals @ residuals) / data.P
        if not (train_mse <= MSE_LIMIT):
            raise DivergenceError(f"train MSE {train_mse:.3e} exceeded the guard", t)
        lr = lr_at(config.lr, t)
        for _ in range(k_at(config, t)):
            _inner_inplace(state, engine, residuals, lr, rng, noise)
        if not (state.max_abs() <= PARAM_LIMIT):
            raise DivergenceError("particle magnitude exceeded the guard", t)
        if config.ard.enabled:
            state.rho = ard_update(state, config.ard)
        if t % config.log_every == 0 or t == config.outer_steps - 1:
            m_S, test_mse = eval_metrics()
            trace.append((t, m_S, test_mse, rho_summary()))
        if (
            config.time_budget_s is not None
            and time.perf_counter() - t0 > config.time_budget_s
        ):
            raise RunTimeout(
                f"budget {config.time_budget_s}s exhausted at outer step {t}", trace
            )
    return state, trace

"""Domain types and dataset generation for the two teacher families.

Teachers: k-sparse parity (Walsh monomial on the uniform hypercube) and
single-index Hermite ridge functions on Gaussian inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, InputDomainError
from .rngs import stream

__all__ = [
    "TaskSpec",
    "Dataset",
    "Hyperparams",
    "walsh_eval",
    "walsh_eval_batch",
    "hermite_he",
    "gen_parity_dataset",
    "gen_single_index_dataset",
    "index_teacher",
]

RngSeed = Union[int, np.random.Generator]


def _as_rng(seed: RngSeed, *tags) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed), *tags)


@dataclass(frozen=True)
class TaskSpec:
    """Teacher descriptor.

    kind: "parity" or "single_index"; S is the support (ordered, distinct,
    all < d); hermite_degree is required for single_index teachers.
    """

    kind: str
    d: int
    S: tuple
    hermite_degree: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("parity", "single_index"):
            raise ConfigError(f"unknown task kind {self.kind!r}")
        object.__setattr__(self, "S", tuple(int(j) for j in self.S))
        if self.d < 1:
            raise ConfigError(f"d must be positive, got {self.d}")
        if len(self.S) < 1:
            raise ConfigError("support S must be nonempty")
        if len(set(self.S)) != len(self.S):
            raise ConfigError(f"support indices must be distinct, got {self.S}")
        if any(j < 0 or j >= self.d for j in self.S):
            raise ConfigError(f"support indices must lie in [0, {self.d}), got {self.S}")
        if self.kind == "single_index":
            if self.hermite_degree is None or self.hermite_degree < 1:
                raise ConfigError("single_index tasks need hermite_degree >= 1")

    @property
    def k(self) -> int:
        return len(self.S)


@dataclass(frozen=True)
class Dataset:
    """Immutable sample matrix with labels and the spec that generated it."""

    X: np.ndarray
    y: np.ndarray
    spec: TaskSpec

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != self.spec.d:
            raise InputDomainError(
                f"X must be [P x {self.spec.d}], got shape {self.X.shape}"
            )
        if self.y.shape != (self.X.shape[0],):
            raise InputDomainError("y length must match X rows")
        self.X.flags.writeable = False
        self.y.flags.writeable = False

    @property
    def P(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class Hyperparams:
    """Network prior and noise scales.

    The temperature is always the derived quantity T = 2*kappa**2, never set
    independently. sigma_b is only consulted by runs that enable a bias.
    """

    N: int
    gamma: float
    sigma_w: float
    sigma_a: float
    kappa: float
    sigma_b: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if not (0.5 <= self.gamma <= 1.0):
            raise ConfigError(f"gamma must be in [1/2, 1], got {self.gamma}")
        # sigma_a = 0 is allowed as a degenerate init scale; training ops
        # that divide by sigma_a reject it themselves
        if self.sigma_w < 0 or self.sigma_a < 0 or self.sigma_b < 0:
            raise ConfigError("prior scales must be nonnegative")
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")

    @property
    def T(self) -> float:
        return 2.0 * self.kappa**2


def walsh_eval(S: Sequence[int], x: np.ndarray) -> float:
    """Walsh monomial chi_S(x) = prod_{j in S} x_j; 1 for empty S."""
    x = np.asarray(x)
    S = tuple(int(j) for j in S)
    if any(j < 0 or j >= x.shape[-1] for j in S):
        raise InputDomainError(f"support {S} out of range for d={x.shape[-1]}")
    if not S:
        return 1.0
    return float(np.prod(x[..., S], axis=-1))


def walsh_eval_batch(S: Sequence[int], X: np.ndarray) -> np.ndarray:
    """Row-wise chi_S over a [P x d] matrix."""
    S = tuple(int(j) for j in S)
    if any(j < 0 or j >= X.shape[1] for j in S):
        raise InputDomainError(f"support {S} out of range for d={X.shape[1]}")
    if not S:
        return np.ones(X.shape[0])
    return np.prod(X[:, S], axis=1)


def hermite_he(p: int, z):
    """Probabilists' Hermite polynomial He_p(z) via the three-term recurrence."""
    if p < 0:
        raise InputDomainError(f"Hermite degree must be >= 0, got {p}")
    z = np.asarray(z, dtype=np.float64)
    prev = np.ones_like(z)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = z.copy()
    for n in range(1, p):
        prev, cur = cur, z * cur - n * prev
    return cur if cur.ndim else float(cur)


def gen_parity_dataset(spec: TaskSpec, P: int, seed: RngSeed) -> Dataset:
    """i.i.d. uniform hypercube rows with labels chi_S."""
    if spec.kind != "parity":
        raise ConfigError(f"expected a parity spec, got kind={spec.kind!r}")
    if P <= 0:
        raise ConfigError(f"P must be positive, got {P}")
    rng = _as_rng(seed, "parity-data", spec.d, spec.S, P)
    X = rng.integers(0, 2, size=(P, spec.d)).astype(np.float64) * 2.0 - 1.0
    y = walsh_eval_batch(spec.S, X)
    return Dataset(X=X, y=y, spec=spec)


def index_teacher(spec: TaskSpec) -> np.ndarray:
    """Unit teacher vector: 1/sqrt(k) on the support, 0 elsewhere."""
    v = np.zeros(spec.d)
    v[list(spec.S)] = 1.0 / np.sqrt(spec.k)
    return v


def gen_single_index_dataset(spec: TaskSpec, P: int, seed: RngSeed) -> Dataset:
    """Gaussian rows with labels He_p(v . x)."""
    if spec.kind != "single_index":
        raise ConfigError(f"expected a single_index spec, got kind={spec.kind!r}")
    if P <= 0:
        raise ConfigError(f"P must be positive, got {P}")
    rng = _as_rng(seed, "index-data", spec.d, spec.S, spec.hermite_degree, P)
    X = rng.standard_normal((P, spec.d))
    y = hermite_he(spec.hermite_degree, X @ index_teacher(spec))
    return Dataset(X=X, y=np.asarray(y, dtype=np.float64), spec=spec)

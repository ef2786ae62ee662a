"""Closed-form analytic layer.

ReLU-parity geometric constants (C_k, D_k, R_k), the scalar overlap fixed
point through the positive root A*, the critical noise kappa_c^2, and the
dimension-scaling table comparing the isotropic and ARD priors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError, ResourceError

__all__ = [
    "TheoryConstants",
    "OnsetInputs",
    "parity_constants",
    "brute_constants",
    "a_star",
    "solve_scalar_fp",
    "kappa_c",
    "scaling_table",
]

_FP_TOL = 1e-10


@dataclass(frozen=True)
class TheoryConstants:
    """Activation-geometry constants of the k-sparse parity teacher.

    C_k = 2^-k sum_{r<=floor((k-1)/2)} C(k,r) (k-2r)^2
    D_k = 2^-k sum_{r<=floor((k-1)/2)} C(k,r) (k-2r) (-1)^r
    R_k = D_k^2 / C_k
    """

    k: int
    C: float
    D: float
    R: float


@dataclass(frozen=True)
class OnsetInputs:
    """Arguments of the onset quadratic.

    C is the curvature of the effective weight prior: d*k/sigma_w^2 for the
    isotropic prior, k*rho_on under ARD.
    """

    C: float
    N: int
    gamma: float
    sigma_a: float
    kappa: float
    m_S: float = 0.0

    def __post_init__(self):
        if self.C <= 0:
            raise ConfigError(f"curvature C must be positive, got {self.C}")
        if self.sigma_a <= 0:
            raise ConfigError("sigma_a must be positive")
        if not (0.0 <= self.m_S <= 1.0):
            raise ConfigError(f"m_S must be in [0, 1], got {self.m_S}")


def _exact_constants(k: int) -> tuple[Fraction, Fraction, Fraction]:
    half = 2**k
    c_num = sum(math.comb(k, r) * (k - 2 * r) ** 2 for r in range((k - 1) // 2 + 1))
    d_num = sum(
        math.comb(k, r) * (k - 2 * r) * (-1) ** r for r in range((k - 1) // 2 + 1)
    )
    C = Fraction(c_num, half)
    D = Fraction(d_num, half)
    R = D * D / C if C else Fraction(0)
    return C, D, R


def parity_constants(k: int) -> TheoryConstants:
    """Exact binomial-sum evaluation (integer binomials, late division)."""
    if not (1 <= k <= 25):
        raise ConfigError(f"k must be in [1, 25], got {k}")
    C, D, R = _exact_constants(k)
    return TheoryConstants(k=k, C=float(C), D=float(D), R=float(R))


def brute_constants(k: int) -> TheoryConstants:
    """Independent oracle: enumerate all 2^k sign patterns in exact rationals.

    C_k = E[phi(sum x_j)^2], D_k = E[phi(sum x_j) prod x_j] over the uniform
    hypercube restricted to the support.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if k > 20:
        raise ResourceError(f"brute enumeration over 2^{k} patterns refused")
    c_total = 0
    d_total = 0
    for pattern in itertools.product((-1, 1), repeat=k):
        s = sum(pattern)
        if s > 0:
            c_total += s * s
            d_total += s * math.prod(pattern)
    C = Fraction(c_total, 2**k)
    D = Fraction(d_total, 2**k)
    R = D * D / C if C else Fraction(0)
    return TheoryConstants(k=k, C=float(C), D=float(D), R=float(R))


def a_star(inputs: OnsetInputs, ck: TheoryConstants) -> float:
    """Positive root of C kappa^2 N^{2g} A^2 + C_k A - (1-m_S)^2 D_k^2 / (sigma_a^2 kappa^2) = 0.

    Evaluated on the cancellation-free branch 2|c| / (b + sqrt(b^2 + 4 a |c|));
    the kappa^2 factors cancel under the radical, so the discriminant stays
    finite as kappa -> 0 while the root itself diverges like 1/kappa^2.
    """
    if inputs.kappa <= 0:
        raise ConfigError("kappa must be positive")
    qa = inputs.C * inputs.kappa**2 * float(inputs.N) ** (2.0 * inputs.gamma)
    qb = ck.C
    qc_abs = (1.0 - inputs.m_S) ** 2 * ck.D**2 / (inputs.sigma_a**2 * inputs.kappa**2)
    if qc_abs == 0.0:
        return 0.0
    return 2.0 * qc_abs / (qb + math.sqrt(qb * qb + 4.0 * qa * qc_abs))


def kappa_c(inputs: OnsetInputs, ck: TheoryConstants) -> float:
    """Critical noise kappa_c^2 where the trivial fixed point loses stability.

    Closed form (sqrt(C_k^2 + 4 C N^{2 gamma} D_k^2 / sigma_a^2) - C_k)
    / (2 C N^{2 gamma} / sigma_a^2), rationalized to avoid cancellation.
    """
    cn = inputs.C * float(inputs.N) ** (2.0 * inputs.gamma)
    disc = ck.C**2 + 4.0 * cn * ck.D**2 / inputs.sigma_a**2
    return 2.0 * ck.D**2 / (math.sqrt(disc) + ck.C)


def _overlap_map(m: float, inputs: OnsetInputs, ck: TheoryConstants) -> float:
    """F(m) = (1-m) N R_k (1 - sigma_a^-2 / A*(m))."""
    astar = a_star(
        OnsetInputs(
            C=inputs.C,
            N=inputs.N,
            gamma=inputs.gamma,
            sigma_a=inputs.sigma_a,
            kappa=inputs.kappa,
            m_S=m,
        ),
        ck,
    )
    inv_sa2 = 1.0 / inputs.sigma_a**2
    return (1.0 - m) * inputs.N * ck.R * (1.0 - inv_sa2 / astar)


def solve_scalar_fp(inputs: OnsetInputs, ck: TheoryConstants) -> float:
    """Unique fixed point of the overlap map on [0, 1).

    Returns 0 when F(0) <= 0 (noise at or above threshold); otherwise
    bisection on m - F(m), which is strictly increasing.
    """
    if ck.R == 0.0:
        return 0.0
    if _overlap_map(0.0, inputs, ck) <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0 - 1e-15
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - _overlap_map(mid, inputs, ck) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < _FP_TOL:
            break
    return 0.5 * (lo + hi)


def scaling_table(
    mode: str,
    d_list,
    k: int,
    *,
    N: int,
    gamma: float,
    sigma_w: float = 1.0,
    sigma_a: float = 1.0,
    rho_on: float = 1.0,
) -> list[tuple[int, float]]:
    """Rows (d, kappa_c^2) under the isotropic ("MF") or ARD curvature."""
    mode = mode.upper()
    if mode not in ("MF", "ARD"):
        raise ConfigError(f"mode must be MF or ARD, got {mode!r}")
    ck = parity_constants(k)
    rows = []
    for d in d_list:
        if mode == "MF":
            curvature = d * k / sigma_w**2
        else:
            curvature = k * rho_on
        inputs = OnsetInputs(
            C=curvature, N=N, gamma=gamma, sigma_a=sigma_a, kappa=1.0
        )
        rows.append((int(d), kappa_c(inputs, ck)))
    return rows

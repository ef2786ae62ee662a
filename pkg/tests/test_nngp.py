"""Kernel-limit tests: Monte-Carlo Gram construction, the closed-form
arc-cosine oracle, ridge regression algebra, and scale invariances.

The invariance tests use exact powers of two so every floating-point
operation scales exactly and results can be compared bitwise.
"""

import numpy as np
import pytest

from paritylab.errors import ConfigError, IllConditionedError, InputDomainError
from paritylab.nngp import arccos_kernel, krr_predict, mc_kernel, nngp_run, ridge_tau
from paritylab.rngs import stream
from paritylab.tasks import Dataset, Hyperparams, TaskSpec, gen_parity_dataset


def hyp(sigma_w=1.0, sigma_a=1.0, kappa=0.1):
    return Hyperparams(
        N=16, gamma=0.5, sigma_w=sigma_w, sigma_a=sigma_a, sigma_b=1.0, kappa=kappa
    )


def cube_points(P, d, seed=0):
    return gen_parity_dataset(TaskSpec(kind="parity", d=d, S=(0,)), P, seed).X


# ------------------------------------------------------------ closed form


def test_arccos_diagonal_on_hypercube():
    # theta = 0 gives J = pi, so K(x,x) = sigma_a^2 sigma_w^2 / 2 on the cube
    X = cube_points(8, 6)
    K = arccos_kernel(X, X, hyp(sigma_w=0.7, sigma_a=1.3))
    assert np.allclose(np.diag(K), 1.3**2 * 0.7**2 / 2, rtol=1e-12)


def test_arccos_orthogonal_and_antipodal_points():
    X = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
    K = arccos_kernel(X, X, hyp())
    # orthogonal: theta = pi/2, J = 1, K = (1/d)|x||x'|/(2 pi); antipodal: J = 0
    assert K[0, 1] == pytest.approx(1.0 / (2 * np.pi), rel=1e-12)
    assert K[0, 2] == pytest.approx(0.0, abs=1e-12)


def test_arccos_zero_norm_row_is_zero():
    X1 = np.array([[0.0, 0.0], [1.0, 1.0]])
    K = arccos_kernel(X1, X1, hyp())
    assert K[0, 0] == 0.0 and K[0, 1] == 0.0


def test_arccos_shape_validation():
    with pytest.raises(InputDomainError):
        arccos_kernel(np.zeros((3, 2)), np.zeros((3, 4)), hyp())


# ------------------------------------------------------------- MC kernel


def test_mc_matches_arccos_oracle():
    X = cube_points(16, 8)
    M = 4096
    K_mc = mc_kernel(X, X, hyp(), M=M, seed=0)
    K_cf = arccos_kernel(X, X, hyp())
    assert np.abs(K_mc - K_cf).max() < 5.0 / np.sqrt(M)


def test_mc_gram_is_exactly_symmetric_and_psd():
    X = cube_points(20, 6)
    K = mc_kernel(X, X, hyp(), M=512, seed=3)
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() > -1e-10


def test_mc_common_draws_make_transposed_calls_agree():
    X1 = cube_points(7, 5, seed=1)
    X2 = cube_points(9, 5, seed=2)
    K12 = mc_kernel(X1, X2, hyp(), M=256, seed=4)
    K21 = mc_kernel(X2, X1, hyp(), M=256, seed=4)
    assert np.allclose(K12, K21.T, rtol=1e-13, atol=1e-15)


def test_mc_determinism_and_seed_separation():
    X = cube_points(6, 4)
    one = mc_kernel(X, X, hyp(), M=128, seed=5)
    two = mc_kernel(X, X, hyp(), M=128, seed=5)
    other = mc_kernel(X, X, hyp(), M=128, seed=6)
    assert np.array_equal(one, two)
    assert not np.array_equal(one, other)


def test_mc_isotropic_equals_matching_precision_vector():
    X = cube_points(10, 5)
    iso = mc_kernel(X, X, hyp(sigma_w=0.7), M=256, seed=1)
    rho = np.full(5, 5 / 0.7**2)
    deformed = mc_kernel(X, X, hyp(sigma_w=0.7), rho=rho, M=256, seed=1)
    assert np.allclose(iso, deformed, rtol=1e-12)


def test_mc_large_offsupport_precision_collapses_coordinates():
    # Points that differ only off-support look identical to a kernel whose
    # off-support precisions are huge.
    d = 6
    x = np.ones((1, d))
    x2 = np.ones((1, d))
    x2[0, 3:] = -1.0
    rho = np.ones(d)
    rho[3:] = 1e8
    K11 = mc_kernel(x, x, hyp(), rho=rho, M=2048, seed=0)
    K12 = mc_kernel(x, x2, hyp(), rho=rho, M=2048, seed=0)
    assert K12[0, 0] == pytest.approx(K11[0, 0], rel=1e-3)


def test_mc_validation():
    X = cube_points(4, 3)
    with pytest.raises(ConfigError):
        mc_kernel(X, X, hyp(), M=0)
    with pytest.raises(InputDomainError):
        mc_kernel(X, np.zeros((4, 2)), hyp())
    with pytest.raises(ConfigError):
        mc_kernel(X, X, hyp(sigma_w=0.0))
    with pytest.raises(InputDomainError):
        mc_kernel(X, X, hyp(), rho=np.ones(2))
    with pytest.raises(InputDomainError):
        mc_kernel(X, X, hyp(), rho=np.array([1.0, -1.0, 1.0]))
    with pytest.raises(InputDomainError):
        mc_kernel(X, X, hyp(), rho=np.array([1.0, np.inf, 1.0]))


# ------------------------------------------------------ ridge regression


def test_krr_identity_kernel():
    y = np.array([1.0, -2.0, 3.0])
    I = np.eye(3)
    assert np.allclose(krr_predict(I, I, y, 0.0), y, rtol=1e-14)
    assert np.allclose(krr_predict(I, I, y, 0.5), y / 1.5, rtol=1e-14)


def test_krr_interpolates_at_zero_ridge():
    rng = stream(0, "krr")
    A = rng.standard_normal((6, 6))
    K = A @ A.T + 1e-3 * np.eye(6)
    y = rng.standard_normal(6)
    assert np.allclose(krr_predict(K, K, y, 0.0), y, rtol=1e-8)


def test_krr_rank_one_closed_form():
    # (u u^T + tau I)^-1 y has the Sherman-Morrison closed form.
    rng = stream(1, "krr")
    u = rng.standard_normal(5)
    y = rng.standard_normal(5)
    Kc = rng.standard_normal((3, 5))
    tau = 0.7
    K = np.outer(u, u)
    alpha = y / tau - u * (u @ y) / (tau * (tau + u @ u))
    assert np.allclose(krr_predict(K, Kc, y, tau), Kc @ alpha, rtol=1e-10)


def test_krr_failure_carries_condition_estimate():
    K = -np.eye(3)  # not positive definite, Cholesky must fail
    y = np.zeros(3)
    with pytest.raises(IllConditionedError) as err:
        krr_predict(K, np.eye(3), y, 0.0)
    assert np.isfinite(err.value.cond_estimate)


def test_krr_validation():
    y = np.zeros(3)
    with pytest.raises(InputDomainError):
        krr_predict(np.zeros((3, 2)), np.eye(3), y, 0.0)
    with pytest.raises(InputDomainError):
        krr_predict(np.eye(3), np.eye(4), y, 0.0)
    with pytest.raises(InputDomainError):
        krr_predict(np.eye(3), np.eye(3), np.zeros(4), 0.0)
    with pytest.raises(ConfigError):
        krr_predict(np.eye(3), np.eye(3), y, -0.1)


def test_ridge_tau_conventions():
    h = hyp(sigma_a=2.0, kappa=0.3)
    assert ridge_tau(h, "main") == pytest.approx(0.09 / 4, rel=1e-15)
    assert ridge_tau(h, "half") == pytest.approx(0.045 / 4, rel=1e-15)
    with pytest.raises(ConfigError):
        ridge_tau(h, "double")
    with pytest.raises(ConfigError):
        ridge_tau(hyp(sigma_a=0.0))


# --------------------------------------------------------- invariances


def test_krr_joint_rescaling_invariance():
    rng = stream(2, "krr")
    A = rng.standard_normal((8, 8))
    K = A @ A.T
    Kc = rng.standard_normal((5, 8))
    y = rng.standard_normal(8)
    base = krr_predict(K, Kc, y, 0.3)
    scaled = krr_predict(4.0 * K, 4.0 * Kc, y, 4.0 * 0.3)
    assert np.allclose(base, scaled, rtol=1e-12)


def test_nngp_run_amplitude_noise_rescaling_invariance():
    # sigma_a -> 2 sigma_a multiplies the kernel by 4; kappa -> 4 kappa then
    # multiplies the ridge by the same 4, leaving predictions unchanged.
    # Powers of two keep every operation an exact rescaling.
    spec = TaskSpec(kind="parity", d=6, S=(0, 1))
    train = gen_parity_dataset(spec, 40, seed=0)
    eval_ = gen_parity_dataset(spec, 64, seed=1)
    base, m0, mse0 = nngp_run(train, eval_, hyp(sigma_a=1.0, kappa=0.005), M=512)
    scaled, m1, mse1 = nngp_run(train, eval_, hyp(sigma_a=2.0, kappa=0.02), M=512)
    assert np.array_equal(base, scaled)
    assert m0 == m1 and mse0 == mse1


# ------------------------------------------------------------ end to end


def test_nngp_run_rejects_generator_seed():
    spec = TaskSpec(kind="parity", d=4, S=(0,))
    data = gen_parity_dataset(spec, 8, seed=0)
    with pytest.raises(ConfigError):
        nngp_run(data, data, hyp(), seed=stream(0, "x"))


def test_nngp_run_requires_matching_dimension():
    a = gen_parity_dataset(TaskSpec(kind="parity", d=4, S=(0,)), 8, seed=0)
    b = gen_parity_dataset(TaskSpec(kind="parity", d=5, S=(0,)), 8, seed=0)
    with pytest.raises(InputDomainError):
        nngp_run(a, b, hyp())


def test_nngp_run_deterministic():
    spec = TaskSpec(kind="parity", d=5, S=(0, 1))
    train = gen_parity_dataset(spec, 30, seed=0)
    eval_ = gen_parity_dataset(spec, 50, seed=1)
    p1, _, _ = nngp_run(train, eval_, hyp(), M=256, seed=7)
    p2, _, _ = nngp_run(train, eval_, hyp(), M=256, seed=7)
    assert np.array_equal(p1, p2)
    assert p1.shape == (50,)


def test_nngp_learns_a_single_coordinate():
    # degree-1 target: kernel regression picks it up from modest data
    spec = TaskSpec(kind="parity", d=6, S=(2,))
    train = gen_parity_dataset(spec, 200, seed=0)
    eval_ = gen_parity_dataset(spec, 400, seed=1)
    _, m_S, mse = nngp_run(train, eval_, hyp(kappa=0.01), M=2048)
    assert 0.5 < m_S < 1.1
    assert mse < 0.25


def test_nngp_support_informed_precisions_help():
    spec = TaskSpec(kind="parity", d=8, S=(0, 1))
    train = gen_parity_dataset(spec, 100, seed=0)
    eval_ = gen_parity_dataset(spec, 512, seed=1)
    _, m_iso, _ = nngp_run(train, eval_, hyp(kappa=0.01), M=2048)
    rho = np.full(8, 1e4)
    rho[:2] = 1.0
    _, m_rho, _ = nngp_run(train, eval_, hyp(kappa=0.01), rho=rho, M=2048)
    assert m_rho > m_iso
    assert m_rho > 0.8

"""Compiled and NumPy kernels must agree bit-for-bit in semantics.

The compiled extension is part of the build; these tests fail loudly if it
is missing rather than skipping, so a broken build cannot pass silently.
"""

import numpy as np
import pytest

from paritylab._core import available_backends, get_backend
from paritylab.errors import ConfigError
from paritylab.rngs import stream


def random_problem(rng, P=37, d=7, N=11, signs=True):
    X = (np.sign(rng.standard_normal((P, d))) if signs
         else rng.standard_normal((P, d)))
    y = rng.standard_normal(P)
    W = rng.standard_normal((N, d)) * 0.5
    a = rng.standard_normal(N)
    b = rng.standard_normal(N) * 0.3
    r = rng.standard_normal(P)
    return X, y, W, a, b, r


def test_compiled_backend_is_built():
    assert available_backends() == ("compiled", "numpy")


def test_unknown_backend_rejected():
    with pytest.raises(ConfigError, match="unknown backend"):
        get_backend("fortran")


def test_env_var_forces_backend(monkeypatch):
    monkeypatch.setenv("PARITYLAB_BACKEND", "numpy")
    assert get_backend().name == "numpy"
    monkeypatch.setenv("PARITYLAB_BACKEND", "compiled")
    assert get_backend().name == "compiled"


@pytest.mark.parametrize("with_bias", [False, True])
def test_reference_kernel_backends_agree(with_bias):
    rng = stream(3, "backend-ref", with_bias)
    for trial in range(6):
        X, y, W, a, b, _ = random_problem(rng, signs=trial % 2 == 0)
        args = (W, a, b if with_bias else None)
        outs = {}
        for name in ("compiled", "numpy"):
            eng = get_backend(name).ReferenceKernel(X, y, 0.37, with_bias)
            outs[name] = eng.grads(*args)
        for got, want in zip(outs["compiled"][:3], outs["numpy"][:3]):
            if want is None:
                assert got is None
            else:
                np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)
        assert outs["compiled"][3] == pytest.approx(outs["numpy"][3], rel=1e-12)


@pytest.mark.parametrize("with_bias", [False, True])
def test_particle_kernel_backends_agree(with_bias):
    rng = stream(4, "backend-par", with_bias)
    for trial in range(6):
        X, _, W, a, b, r = random_problem(rng, signs=trial % 2 == 0)
        args = (W, a, b if with_bias else None, r)
        outs = {}
        for name in ("compiled", "numpy"):
            eng = get_backend(name).ParticleKernel(X, 0.21, with_bias)
            outs[name] = eng.stats(*args)
        for got, want in zip(outs["compiled"], outs["numpy"]):
            if want is None:
                assert got is None
            else:
                np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("name", ["compiled", "numpy"])
class TestHandExamples:
    def test_reference_kernel_single_unit(self, name):
        # f = relu(x) with x=1, y=0: error 1, so d(mse)/da = 2 phi = 2 and
        # d(mse)/dW = 2 a phi' x = 2
        eng = get_backend(name).ReferenceKernel(
            np.array([[1.0]]), np.array([0.0]), 1.0, False
        )
        gW, ga, gb, mse = eng.grads(np.array([[1.0]]), np.array([1.0]), None)
        assert gW.tolist() == [[2.0]]
        assert ga.tolist() == [2.0]
        assert gb is None
        assert mse == 1.0

    def test_reference_kernel_bias_path(self, name):
        eng = get_backend(name).ReferenceKernel(
            np.array([[1.0]]), np.array([0.0]), 1.0, True
        )
        gW, ga, gb, mse = eng.grads(
            np.array([[1.0]]), np.array([1.0]), np.array([0.5])
        )
        assert mse == pytest.approx(2.25)
        assert ga.tolist() == [pytest.approx(4.5)]
        assert gW.tolist() == [[pytest.approx(3.0)]]
        assert gb.tolist() == [pytest.approx(3.0)]

    def test_particle_kernel_single_particle(self, name):
        # z = 2, phi = 2, r = -2: C1 = -4, C2 = 4,
        # G = -(2 s_f a / P)(r - s_f a phi) x = -2(-2 - 2) = 8
        eng = get_backend(name).ParticleKernel(np.array([[1.0]]), 1.0, False)
        C1, C2, G, Gb = eng.stats(
            np.array([[2.0]]), np.array([1.0]), None, np.array([-2.0])
        )
        assert C1.tolist() == [-4.0]
        assert C2.tolist() == [4.0]
        assert G.tolist() == [[8.0]]
        assert Gb is None

    def test_particle_kernel_bias_distinguishes_x(self, name):
        # x = -1, b = 3: z = 1; G carries the x factor, Gb does not
        eng = get_backend(name).ParticleKernel(np.array([[-1.0]]), 1.0, True)
        C1, C2, G, Gb = eng.stats(
            np.array([[2.0]]), np.array([2.0]), np.array([3.0]),
            np.array([1.0]),
        )
        assert C1.tolist() == [1.0]
        assert C2.tolist() == [1.0]
        assert G.tolist() == [[-4.0]]
        assert Gb.tolist() == [4.0]

    def test_inactive_particle_contributes_nothing(self, name):
        eng = get_backend(name).ParticleKernel(np.array([[1.0], [1.0]]), 0.5, False)
        C1, C2, G, _ = eng.stats(
            np.array([[-3.0]]), np.array([1.5]), None, np.array([1.0, -1.0])
        )
        assert C1.tolist() == [0.0]
        assert C2.tolist() == [0.0]
        assert G.tolist() == [[0.0]]

    def test_relu_subgradient_at_zero_is_zero(self, name):
        # w.x = 0 exactly: phi = 0 and phi' = 0, so nothing propagates
        eng = get_backend(name).ReferenceKernel(
            np.array([[1.0, -1.0]]), np.array([1.0]), 1.0, False
        )
        gW, ga, _, mse = eng.grads(
            np.array([[2.0, 2.0]]), np.array([3.0]), None
        )
        assert gW.tolist() == [[0.0, 0.0]]
        assert ga.tolist() == [0.0]
        assert mse == 1.0

    def test_duplicated_rows_average_out(self, name):
        # doubling every sample doubles the raw sums C1, C2 but leaves the
        # 1/P-normalized force G unchanged
        rng = stream(6, "backend-dup")
        X, _, W, a, _, r = random_problem(rng, P=20)
        X2, r2 = np.vstack([X, X]), np.concatenate([r, r])
        eng1 = get_backend(name).ParticleKernel(X, 0.4, False)
        eng2 = get_backend(name).ParticleKernel(X2, 0.4, False)
        C1a, C2a, Ga, _ = eng1.stats(W, a, None, r)
        C1b, C2b, Gb_, _ = eng2.stats(W, a, None, r2)
        np.testing.assert_allclose(C1b, 2.0 * C1a, rtol=1e-12)
        np.testing.assert_allclose(C2b, 2.0 * C2a, rtol=1e-12)
        np.testing.assert_allclose(Gb_, Ga, rtol=1e-12, atol=1e-14)

    def test_read_only_inputs_accepted(self, name):
        # Dataset arrays are frozen; kernels must not require writable buffers
        X = np.array([[1.0, -1.0], [1.0, 1.0]])
        y = np.array([1.0, -1.0])
        X.flags.writeable = False
        y.flags.writeable = False
        eng = get_backend(name).ReferenceKernel(X, y, 1.0, False)
        W = np.array([[0.3, 0.1], [0.2, -0.4]])
        a = np.array([1.0, -1.0])
        W.flags.writeable = False
        a.flags.writeable = False
        gW, ga, _, mse = eng.grads(W, a, None)
        assert np.isfinite(gW).all() and np.isfinite(ga).all()
        assert mse > 0.0

    def test_outputs_are_deterministic(self, name):
        rng = stream(8, "backend-det")
        X, y, W, a, _, _ = random_problem(rng)
        eng = get_backend(name).ReferenceKernel(X, y, 1.0, False)
        first = eng.grads(W, a, None)
        second = eng.grads(W, a, None)
        assert np.array_equal(first[0], second[0])
        assert np.array_equal(first[1], second[1])
        assert first[3] == second[3]

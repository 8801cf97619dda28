import numpy as np
import pytest

from rasec.domain import AcquisitionDomain
from rasec.errors import NumericalError
from rasec.gp import fit, predict, predict_field, predict_many
from rasec.kernels import KernelSpec, cross_covariance

SE = KernelSpec("SE", l=4.0)
DOMAIN = AcquisitionDomain(10.0, 1.0)


def _direct(kernel, X, y, sigma_n2, Xs):
    # textbook formula with an explicit inverse, no factorization
    K = cross_covariance(kernel, X, X) + sigma_n2 * np.eye(len(y))
    Kinv = np.linalg.inv(K)
    Ks = cross_covariance(kernel, Xs, X)
    mean = Ks @ Kinv @ y
    var = kernel.prior_variance() - np.einsum("ij,jk,ik->i", Ks, Kinv, Ks)
    return mean, var


def test_prior_is_constant():
    model = fit(SE, [], [], 1e-4)
    field = predict_field(model, DOMAIN)
    assert np.all(field.mean == 0.0)
    assert np.all(field.variance == 1.0)


@pytest.mark.parametrize("seed", range(20))
def test_matches_direct_formula(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 21))
    X = rng.uniform(-25, 25, size=(n, 2))
    y = rng.normal(size=n)
    Xs = rng.uniform(-25, 25, size=(30, 2))
    model = fit(SE, X, y, 1e-2)
    mean, var = predict_many(model, Xs)
    m0, v0 = _direct(SE, X, y, 1e-2, Xs)
    np.testing.assert_allclose(mean, m0, atol=1e-8, rtol=0)
    np.testing.assert_allclose(var, v0, atol=1e-8, rtol=0)


def test_noiseless_interpolation():
    rng = np.random.default_rng(3)
    X = rng.choice(DOMAIN.candidates(), size=8, replace=False)
    y = rng.normal(size=8)
    model = fit(SE, X, y, 0.0)
    for xi, yi in zip(X, y):
        m, v = predict(model, xi)
        assert m == pytest.approx(yi, abs=1e-6)
        assert v < 1e-6


def test_field_matches_pointwise():
    rng = np.random.default_rng(4)
    X = rng.uniform(-10, 10, size=(6, 2))
    model = fit(SE, X, rng.normal(size=6), 1e-4)
    field = predict_field(model, DOMAIN)
    idx = rng.choice(len(DOMAIN.candidates()), size=100, replace=False)
    for i in idx:
        m, v = predict(model, DOMAIN.candidates()[i])
        assert field.mean[i] == pytest.approx(m, abs=1e-12)
        assert field.variance[i] == pytest.approx(v, abs=1e-12)


def test_far_field_reverts_to_prior():
    model = fit(SE, [(0.0, 0.0)], [5.0], 1e-4)
    m, v = predict(model, (200.0, 0.0))
    assert abs(m) < 1e-12 and v == pytest.approx(1.0)


@pytest.mark.parametrize("kernel", [SE, KernelSpec("OU", l=4.0), KernelSpec("SE_OU")])
def test_adding_points_shrinks_variance(kernel):
    rng = np.random.default_rng(5)
    order = rng.choice(len(DOMAIN.candidates()), size=12, replace=False)
    X = DOMAIN.candidates()[order]
    prev = predict_field(fit(kernel, [], [], 0.0), DOMAIN).variance
    for k in range(1, len(X) + 1):
        cur = predict_field(fit(kernel, X[:k], np.zeros(k), 0.0), DOMAIN).variance
        assert np.all(cur <= prev + 1e-8)
        prev = cur


def test_noise_pulls_mean_to_prior():
    means = [predict(fit(SE, [(0.0, 0.0)], [2.0], s), (0.0, 0.0))[0]
             for s in (0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0)]
    assert all(a > b for a, b in zip(means, means[1:]))
    assert means[-1] > 0


def test_duplicate_points_noiseless_use_jitter():
    model = fit(SE, [(0.0, 0.0), (0.0, 0.0)], [1.0, 1.0], 0.0)
    assert model.jitter > 0
    assert predict(model, (0.0, 0.0))[0] == pytest.approx(1.0, abs=1e-4)


def test_numerical_failure_names_kernel():
    with pytest.raises(NumericalError, match="SE"):
        fit(SE, [(0.0, 0.0)] * 3, [1.0, np.nan, 1.0], 0.0)


def test_length_mismatch():
    with pytest.raises(ValueError):
        fit(SE, [(0.0, 0.0)], [1.0, 2.0], 0.0)

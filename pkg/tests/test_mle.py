import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmtrmld.mle import (
    NotPositiveDefiniteError,
    SampleCovariance,
    fit_at,
    indicator_matrices,
    initial_params,
    newton_fit,
    random_covariance,
    random_model_params,
    read_covariance_csv,
    rloglik,
    rloglik_and_grad,
    rloglik_hessian,
    sigma_of,
    stationarity_residuals,
)
from bmtrmld.trees import enumerate_topologies, star_tree

ALL7 = enumerate_topologies(7)


def test_indicators_partition(tree16):
    e = indicator_matrices(tree16)
    assert e.shape == (7, 5, 5)
    assert np.array_equal(e.sum(axis=0), np.ones((5, 5)))
    assert e[5, 2, 3] == 1  # vertex 6 = lca(3, 4)


def test_identity_covariance(tree16):
    fit = newton_fit(tree16, SampleCovariance.from_array(np.eye(5)))
    assert fit.converged
    assert fit.residual <= 1e-10
    assert fit.t == {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0, 5: 1.0, 6: 0.0, 7: 0.0}


def test_recovers_model_point(tree16):
    rng = np.random.default_rng(3)
    sigma = sigma_of(tree16, random_model_params(tree16, rng))
    fit = newton_fit(tree16, SampleCovariance.from_array(sigma))
    assert np.abs(fit.sigma - sigma).max() <= 1e-10


def test_random_fit(tree16):
    rng = np.random.default_rng(0)
    s = random_covariance(5, rng)
    fit = newton_fit(tree16, s)
    assert fit.converged and fit.residual <= 1e-8
    tr, pair = stationarity_residuals(fit, s)
    assert abs(tr - pair) <= 1e-9
    assert all(b >= a - 1e-12 for a, b in zip(fit.history, fit.history[1:]))
    assert np.allclose(fit.sigma @ fit.k, np.eye(5))


def test_restarts_agree(tree16):
    rng = np.random.default_rng(1)
    s = random_covariance(5, rng)
    base = newton_fit(tree16, s).params
    for _ in range(5):
        init = random_model_params(tree16, rng)
        other = newton_fit(tree16, s, init=init)
        assert other.converged
        assert np.abs(other.params - base).max() <= 1e-8


def test_fd_gradient_and_hessian(tree16):
    rng = np.random.default_rng(2)
    s = random_covariance(5, rng)
    x = random_model_params(tree16, rng)
    _, g = rloglik_and_grad(tree16, x, s)
    h = rloglik_hessian(tree16, x)
    eps = 1e-6
    for k in range(len(x)):
        d = np.zeros_like(x)
        d[k] = eps
        fd = (rloglik(tree16, x + d, s) - rloglik(tree16, x - d, s)) / (2 * eps)
        assert abs(fd - g[k]) <= 1e-5 * max(1.0, abs(g[k]))
        _, gp = rloglik_and_grad(tree16, x + d, s)
        _, gm = rloglik_and_grad(tree16, x - d, s)
        assert np.allclose((gp - gm) / (2 * eps), h[:, k], rtol=1e-4, atol=1e-6)
    assert np.all(np.linalg.eigvalsh(h) < 0)


def test_input_validation(tree16, tmp_path):
    with pytest.raises(ValueError):
        SampleCovariance.from_array([[1, 2], [0, 1]])
    with pytest.raises(NotPositiveDefiniteError):
        SampleCovariance.from_array([[1, 2], [2, 1]])
    with pytest.raises(ValueError):
        newton_fit(tree16, SampleCovariance.from_array(np.eye(3)))
    with pytest.raises(ValueError):
        newton_fit(tree16, SampleCovariance.from_array(np.eye(5)), tol=0)
    f = tmp_path / "s.csv"
    f.write_text("a,b\n2,1\n1,2\n")
    assert np.array_equal(read_covariance_csv(f).s, [[2, 1], [1, 2]])


def test_fit_at_residual_forms_agree(tree16):
    rng = np.random.default_rng(4)
    s = random_covariance(5, rng)
    fit = fit_at(tree16, random_model_params(tree16, rng), s)
    tr, pair = stationarity_residuals(fit, s)
    assert tr > 1e-3 and abs(tr - pair) <= 1e-9 * tr


def test_non_convergence_reported():
    t = star_tree(4)
    s = random_covariance(4, np.random.default_rng(5))
    fit = newton_fit(t, s, max_iter=1, tol=1e-300)
    assert not fit.converged and fit.iterations <= 1


def test_initial_params_pd(tree16):
    rng = np.random.default_rng(6)
    for _ in range(20):
        s = random_covariance(5, rng, dof=5)
        x = initial_params(tree16, s)
        np.linalg.cholesky(sigma_of(tree16, x))


trees = st.sampled_from(ALL7)


@given(trees, st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_concavity_midpoint(t, seed):
    rng = np.random.default_rng(seed)
    s = random_covariance(t.n, rng)
    a, b = random_model_params(t, rng), random_model_params(t, rng)
    mid = rloglik(t, (a + b) / 2, s)
    assert mid >= (rloglik(t, a, s) + rloglik(t, b, s)) / 2 - 1e-10


@given(trees, st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_fit_properties(t, seed):
    rng = np.random.default_rng(seed)
    s = random_covariance(t.n, rng)
    fit = newton_fit(t, s)
    assert fit.converged and fit.residual <= 1e-8
    # the optimum beats random feasible points
    for _ in range(3):
        assert fit.objective >= rloglik(t, random_model_params(t, rng), s) - 1e-9

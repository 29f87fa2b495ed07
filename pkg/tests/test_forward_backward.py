import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_posterior
from oracles import enumerate_marginals, tilde_weights
from vbhmm.forward_backward import e_step, forward_backward, initial_pi_hat


@pytest.mark.parametrize("seed", range(5))
def test_e_step_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    J, N, D = 3, 6, 2
    post = random_posterior(rng, J, D)
    X = rng.normal(scale=2.0, size=(N, D))
    res = e_step(post, X)
    gamma, xi, total = enumerate_marginals(*tilde_weights(post, X))
    np.testing.assert_allclose(res.gamma, gamma, atol=1e-12)
    np.testing.assert_allclose(res.xi, xi, atol=1e-12)
    assert res.log_z_tilde == pytest.approx(np.log(total), abs=1e-10)


def test_transition_factor_matters():
    # a chain that cannot switch state: all mass stays on the first state's path
    log_pi = np.log([0.5, 0.5])
    log_a = np.log([[1.0, 1e-300], [1e-300, 1.0]])
    lb = np.log([[0.9, 0.1], [0.1, 0.9], [0.9, 0.1]])
    res = forward_backward(log_pi, log_a, lb)
    gamma, xi, total = enumerate_marginals(np.exp(log_pi), np.exp(log_a), np.exp(lb))
    np.testing.assert_allclose(res.gamma, gamma, atol=1e-12)
    assert res.gamma[1, 0] > 0.5


def test_single_step():
    res = forward_backward(np.log([0.2, 0.8]), np.zeros((2, 2)), np.log([[1.0, 0.5]]))
    np.testing.assert_allclose(res.gamma, [[0.2 / 0.6, 0.4 / 0.6]])
    assert res.xi.shape == (0, 2, 2)
    assert res.log_z_tilde == pytest.approx(np.log(0.6))


def test_extreme_emissions_do_not_underflow():
    rng = np.random.default_rng(0)
    lb = rng.normal(size=(50, 2)) - 5000.0
    res = forward_backward(np.log([0.5, 0.5]), np.log([[0.9, 0.1], [0.1, 0.9]]), lb)
    assert np.all(np.isfinite(res.gamma))
    assert res.log_z_tilde < -5000 * 50 + 500
    assert res.n_degenerate == 0


def test_zero_mass_step_counts_degenerate():
    # start weights vanish entirely, so the first forward step has no mass
    lb = np.zeros((3, 2))
    log_a = np.array([[0.0, -np.inf], [-np.inf, 0.0]])
    log_pi = np.array([-np.inf, -np.inf])
    res = forward_backward(log_pi, log_a, lb)
    assert res.n_degenerate == 1
    assert np.all(np.isfinite(res.gamma))


def test_shape_validation():
    with pytest.raises(ValueError):
        forward_backward(np.zeros(2), np.zeros((2, 2)), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        forward_backward(np.zeros(3), np.zeros((2, 2)), np.zeros((4, 2)))


def test_initial_pi_hat():
    res = forward_backward(np.log([0.3, 0.7]), np.zeros((2, 2)), np.zeros((2, 2)))
    np.testing.assert_allclose(initial_pi_hat(res), [0.3, 0.7])


@given(st.integers(1, 3), st.integers(1, 12), st.integers(1, 2), st.integers(0, 2**31))
def test_marginal_invariants(J, N, D, seed):
    rng = np.random.default_rng(seed)
    post = random_posterior(rng, J, D)
    X = rng.normal(scale=3.0, size=(N, D))
    res = e_step(post, X)
    np.testing.assert_allclose(res.gamma.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(res.gamma >= 0) and np.all(res.xi >= 0)
    if N > 1:
        np.testing.assert_allclose(res.xi.sum(axis=(1, 2)), 1.0, atol=1e-12)
        np.testing.assert_allclose(res.xi.sum(axis=2), res.gamma[:-1], atol=1e-10)
        np.testing.assert_allclose(res.xi.sum(axis=1), res.gamma[1:], atol=1e-10)


@given(st.integers(2, 3), st.integers(2, 8), st.integers(0, 2**31))
def test_permutation_equivariance(J, N, seed):
    rng = np.random.default_rng(seed)
    post = random_posterior(rng, J, 1)
    X = rng.normal(size=(N, 1))
    perm = rng.permutation(J)
    a = e_step(post, X)
    b = e_step(post.permuted(perm), X)
    np.testing.assert_allclose(b.gamma, a.gamma[:, perm], atol=1e-12)
    np.testing.assert_allclose(b.xi, a.xi[:, perm][:, :, perm], atol=1e-12)
    assert b.log_z_tilde == pytest.approx(a.log_z_tilde, abs=1e-10)


def test_log_z_tilde_below_plugin_likelihood(rng):
    # the tilde weights are sub-normalised, so log Z~ is below the log-likelihood
    # of the Dirichlet-mean parameters with the same emissions
    post = random_posterior(rng, 2, 1)
    X = rng.normal(size=(10, 1))
    res = e_step(post, X)
    pi, A, B = tilde_weights(post, X)
    pi_bar = post.initial / post.initial.sum()
    A_bar = post.transitions / post.transitions.sum(axis=1, keepdims=True)
    assert res.log_z_tilde <= np.log(enumerate_marginals(pi_bar, A_bar, B)[2])

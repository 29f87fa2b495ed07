"""Variational lower bound, term by term, plus the equivalent KL form.

The term-by-term evaluation follows the usual variational mixture-of-Gaussians
bookkeeping with the mixing-weight terms replaced by the Markov chain terms.
``E[ln q(Z)]`` is computed from the chain entropy of the E-step marginals, so
the KL form ``log Z~ - KL(q(theta) || p(theta))`` is an independent cross-check.
"""

import math
from dataclasses import dataclass

import numpy as np

from .posteriors import (
    expected_log_det_lambda,
    expected_log_pi,
)
from .special import (
    ln_dirichlet_norm,
    ln_wishart_norm,
    wishart_entropy,
)

__all__ = [
    "ElboBreakdown",
    "elbo",
    "elbo_kl_form",
    "dirichlet_kl",
    "gauss_wishart_kl",
    "has_converged",
]

_LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ElboBreakdown:
    e_ln_p_x: float
    e_ln_p_z: float
    e_ln_p_pi: float
    e_ln_p_mu_lambda: float
    e_ln_q_z: float
    e_ln_q_pi: float
    e_ln_q_mu_lambda: float

    @property
    def total(self):
        return (
            self.e_ln_p_x
            + self.e_ln_p_z
            + self.e_ln_p_pi
            + self.e_ln_p_mu_lambda
            - self.e_ln_q_z
            - self.e_ln_q_pi
            - self.e_ln_q_mu_lambda
        )


def _xlogy(x, y):
    x = np.asarray(x)
    out = np.zeros_like(x, dtype=float)
    mask = x > 0
    out[mask] = x[mask] * np.log(y[mask])
    return out


def _chain_neg_entropy(result):
    """E[ln q(Z)] for the Markov chain with marginals gamma and pairwise xi."""
    g = result.gamma
    value = _xlogy(g[0], g[0]).sum()
    if result.xi.shape[0]:
        cond = result.xi / np.where(g[:-1, :, None] > 0, g[:-1, :, None], 1.0)
        value += _xlogy(result.xi, cond).sum()
    return float(value)


def _dirichlet_expectation(alpha, e_log):
    """sum over rows of ln C(alpha_j) + sum_s (alpha_js - 1) E[ln pi_js]."""
    alpha = np.atleast_2d(alpha)
    e_log = np.atleast_2d(e_log)
    return float(
        sum(ln_dirichlet_norm(row) for row in alpha) + np.sum((alpha - 1.0) * e_log)
    )


def elbo(post, priors, stats, esteps):
    """Evaluate the lower bound for a consistent (posterior, E-step) pair.

    ``stats`` must be computed from ``esteps``; ``esteps`` is one
    :class:`EStepResult` or a list with one per sequence.
    """
    if not isinstance(esteps, (list, tuple)):
        esteps = [esteps]
    J, D = post.J, post.D
    if priors.J != J or priors.D != D or stats.J != J:
        raise ValueError("posterior, priors and statistics disagree on shape")

    e_log_init = expected_log_pi(post.initial)
    e_log_trans = expected_log_pi(post.transitions)
    e_ln_det = np.array([expected_log_det_lambda(gw) for gw in post.emissions])

    e_ln_p_x = 0.0
    for j, gw in enumerate(post.emissions):
        dev = stats.xbar[j] - gw.m
        inner = (
            e_ln_det[j]
            - D / gw.beta
            - gw.nu * np.trace(stats.S[j] @ gw.W)
            - gw.nu * dev @ gw.W @ dev
            - D * _LN_2PI
        )
        e_ln_p_x += 0.5 * stats.N_j[j] * inner

    e_ln_p_z = float(stats.gamma1 @ e_log_init + np.sum(stats.xi_sums * e_log_trans))
    e_ln_q_z = sum(_chain_neg_entropy(r) for r in esteps)

    e_ln_p_pi = _dirichlet_expectation(priors.initial_alpha0, e_log_init) + _dirichlet_expectation(
        priors.transition_alpha0, e_log_trans
    )
    e_ln_q_pi = _dirichlet_expectation(post.initial, e_log_init) + _dirichlet_expectation(
        post.transitions, e_log_trans
    )

    p0 = priors.emission0
    W0_inv = np.linalg.inv(p0.W)
    e_ln_p_ml = J * ln_wishart_norm(p0.W, p0.nu)
    e_ln_q_ml = 0.0
    for j, gw in enumerate(post.emissions):
        dev = gw.m - p0.m
        e_ln_p_ml += 0.5 * (
            D * math.log(p0.beta / (2.0 * math.pi))
            + e_ln_det[j]
            - D * p0.beta / gw.beta
            - p0.beta * gw.nu * dev @ gw.W @ dev
        )
        e_ln_p_ml += 0.5 * (p0.nu - D - 1) * e_ln_det[j]
        e_ln_p_ml -= 0.5 * gw.nu * np.trace(W0_inv @ gw.W)

        entropy = wishart_entropy(gw.W, gw.nu, e_ln_det[j])
        e_ln_q_ml += (
            0.5 * e_ln_det[j]
            + 0.5 * D * math.log(gw.beta / (2.0 * math.pi))
            - 0.5 * D
            - entropy
        )

    return ElboBreakdown(
        e_ln_p_x=float(e_ln_p_x),
        e_ln_p_z=e_ln_p_z,
        e_ln_p_pi=e_ln_p_pi,
        e_ln_p_mu_lambda=float(e_ln_p_ml),
        e_ln_q_z=e_ln_q_z,
        e_ln_q_pi=e_ln_q_pi,
        e_ln_q_mu_lambda=float(e_ln_q_ml),
    )


def dirichlet_kl(q, p):
    """KL(Dir(q) || Dir(p))."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape or q.ndim != 1:
        raise ValueError("Dirichlet parameter vectors must have the same length")
    e_log = expected_log_pi(q)
    value = ln_dirichlet_norm(q) - ln_dirichlet_norm(p) + np.sum((q - p) * e_log)
    return float(value)


def gauss_wishart_kl(q, p):
    """KL between two Gaussian-Wishart distributions.

    Split into the Wishart KL and the expected KL between the conditional
    Gaussians over the mean.
    """
    if q.D != p.D:
        raise ValueError("Gaussian-Wishart dimensions differ")
    D = q.D
    e_ln_det = expected_log_det_lambda(q)
    p_W_inv = np.linalg.inv(p.W)
    wishart = (
        ln_wishart_norm(q.W, q.nu)
        - ln_wishart_norm(p.W, p.nu)
        + 0.5 * (q.nu - p.nu) * e_ln_det
        - 0.5 * q.nu * D
        + 0.5 * q.nu * np.trace(p_W_inv @ q.W)
    )
    dev = q.m - p.m
    gaussian = 0.5 * (
        D * p.beta / q.beta
        - D
        + D * math.log(q.beta / p.beta)
        + p.beta * q.nu * dev @ q.W @ dev
    )
    return float(wishart + gaussian)


def elbo_kl_form(post, priors, esteps):
    """log Z~ minus the KL of every parameter posterior from its prior."""
    if not isinstance(esteps, (list, tuple)):
        esteps = [esteps]
    value = sum(r.log_z_tilde for r in esteps)
    value -= dirichlet_kl(post.initial, priors.initial_alpha0)
    for row, row0 in zip(post.transitions, priors.transition_alpha0):
        value -= dirichlet_kl(row, row0)
    for gw in post.emissions:
        value -= gauss_wishart_kl(gw, priors.emission0)
    return value


def has_converged(previous, current, tol):
    return abs(current - previous) / (1.0 + abs(current)) < tol

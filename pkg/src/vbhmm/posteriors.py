"""Variational posterior families and their expectations.

Transition and initial-state distributions are Dirichlet rows, stored as plain
arrays of pseudo-counts.  Each emission component carries a Gaussian-Wishart
posterior over its mean and precision matrix.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import cho_solve

from .special import DomainError, check_spd, digamma

__all__ = [
    "GaussWishart",
    "HmmPriors",
    "HmmPosterior",
    "expected_log_pi",
    "expected_log_det_lambda",
    "expected_quadratic",
    "log_b",
    "from_stats",
    "EMPTY_STATE_THRESHOLD",
]

EMPTY_STATE_THRESHOLD = 1e-12
_LN_2PI = math.log(2.0 * math.pi)
_MAX_JITTER_DOUBLINGS = 3


def _check_row(alpha, J=None, name="alpha"):
    alpha = np.array(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise DomainError(f"{name} must be a non-empty vector")
    if J is not None and alpha.size != J:
        raise DomainError(f"{name} must have length {J}, got {alpha.size}")
    if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
        raise DomainError(f"{name} entries must be finite and positive")
    alpha.setflags(write=False)
    return alpha


@dataclass(frozen=True, eq=False)
class GaussWishart:
    """N(mu | m, (beta Lambda)^-1) W(Lambda | W, nu)."""

    m: np.ndarray
    beta: float
    W: np.ndarray
    nu: float

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(-1)
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape != (m.size, m.size):
            raise DomainError(f"W must be {m.size}x{m.size}, got shape {W.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("m must be finite")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise DomainError("beta must be positive")
        if not (np.isfinite(self.nu) and self.nu > m.size - 1):
            raise DomainError(f"nu must exceed D - 1 = {m.size - 1}")
        check_spd(W)
        m.setflags(write=False)
        W.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "nu", float(self.nu))

    @property
    def D(self):
        return self.m.size

    @cached_property
    def ln_det_W(self):
        chol = np.linalg.cholesky(self.W)
        return 2.0 * float(np.sum(np.log(np.diag(chol))))

    def allclose(self, other, rtol=0.0, atol=0.0):
        return (
            np.allclose(self.m, other.m, rtol=rtol, atol=atol)
            and np.allclose(self.W, other.W, rtol=rtol, atol=atol)
            and np.isclose(self.beta, other.beta, rtol=rtol, atol=atol)
            and np.isclose(self.nu, other.nu, rtol=rtol, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class HmmPriors:
    """Prior hyperparameters: start-state and transition Dirichlets plus a
    Gaussian-Wishart shared by all emission components."""

    initial_alpha0: np.ndarray
    transition_alpha0: np.ndarray
    emission0: GaussWishart

    def __post_init__(self):
        initial = _check_row(self.initial_alpha0, name="initial_alpha0")
        J = initial.size
        trans = np.array(self.transition_alpha0, dtype=float)
        if trans.shape != (J, J):
            raise DomainError(f"transition_alpha0 must be {J}x{J}")
        for row in trans:
            _check_row(row, J, "transition_alpha0 row")
        trans.setflags(write=False)
        object.__setattr__(self, "initial_alpha0", initial)
        object.__setattr__(self, "transition_alpha0", trans)

    @property
    def J(self):
        return self.initial_alpha0.size

    @property
    def D(self):
        return self.emission0.D


@dataclass(frozen=True, eq=False)
class HmmPosterior:
    initial: np.ndarray
    transitions: np.ndarray
    emissions: tuple = field(default=())

    def __post_init__(self):
        initial = _check_row(self.initial, name="initial")
        J = initial.size
        trans = np.array(self.transitions, dtype=float)
        if trans.shape != (J, J):
            raise DomainError(f"transitions must be {J}x{J}")
        for row in trans:
            _check_row(row, J, "transition row")
        trans.setflags(write=False)
        emissions = tuple(self.emissions)
        if len(emissions) != J:
            raise DomainError(f"expected {J} emission posteriors, got {len(emissions)}")
        if len({gw.D for gw in emissions}) != 1:
            raise DomainError("emission posteriors disagree on dimension")
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "emissions", emissions)

    @property
    def J(self):
        return self.initial.size

    @property
    def D(self):
        return self.emissions[0].D

    def permuted(self, perm):
        """Relabel states so that new state k is old state perm[k]."""
        perm = np.asarray(perm)
        return HmmPosterior(
            initial=self.initial[perm],
            transitions=self.transitions[np.ix_(perm, perm)],
            emissions=tuple(self.emissions[k] for k in perm),
        )


def expected_log_pi(alpha):
    """E[ln pi_k] = psi(alpha_k) - psi(sum alpha) under Dir(alpha).

    Works row-wise when ``alpha`` is a matrix.
    """
    alpha = np.asarray(alpha, dtype=float)
    return digamma(alpha) - digamma(alpha.sum(axis=-1, keepdims=True))


def expected_log_det_lambda(gw):
    """E[ln |Lambda|] under the Wishart factor of ``gw``."""
    d = np.arange(1, gw.D + 1)
    return float(np.sum(digamma(0.5 * (gw.nu + 1 - d))) + gw.D * math.log(2.0) + gw.ln_det_W)


def expected_quadratic(x, gw):
    """E[(x - mu)^T Lambda (x - mu)] = D / beta + nu (x - m)^T W (x - m).

    ``x`` may be a single vector or an (N, D) array of rows.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != gw.D:
        raise ValueError(f"expected dimension {gw.D}, got {x.shape[-1]}")
    diff = x - gw.m
    maha = np.einsum("...i,ij,...j->...", diff, gw.W, diff)
    out = gw.D / gw.beta + gw.nu * maha
    return float(out) if out.ndim == 0 else out


def log_b(x, gw):
    """ln b = E[ln N(x | mu, Lambda^-1)] under ``gw``."""
    return (
        0.5 * expected_log_det_lambda(gw)
        - 0.5 * gw.D * _LN_2PI
        - 0.5 * expected_quadratic(x, gw)
    )


def _spd_inverse(precision_like, events=None):
    """Invert an SPD matrix through its Cholesky factor, adding diagonal
    jitter (1e-12 * trace, doubled at most three times) when the factorisation
    fails."""
    A = 0.5 * (precision_like + precision_like.T)
    eye = np.eye(A.shape[0])
    jitter = 1e-12 * np.trace(A)
    for attempt in range(_MAX_JITTER_DOUBLINGS + 2):
        try:
            chol = np.linalg.cholesky(A if attempt == 0 else A + jitter * eye)
        except np.linalg.LinAlgError:
            if attempt > 0:
                jitter *= 2.0
            continue
        if attempt > 0 and events is not None:
            events.append(f"jitter {jitter:.3g} added to scale matrix")
        inv = cho_solve((chol, True), eye)
        return 0.5 * (inv + inv.T)
    raise np.linalg.LinAlgError("scale matrix is not positive definite after jitter")


def from_stats(prior, N_j, xbar, S, events=None):
    """Conjugate Gaussian-Wishart update from weighted statistics.

    ``xbar`` and ``S`` are the responsibility-weighted mean and biased
    covariance of the points assigned to the component.  Occupancies below
    ``EMPTY_STATE_THRESHOLD`` return ``prior`` unchanged.
    """
    N_j = float(N_j)
    if N_j < 0:
        raise ValueError("occupancy must be non-negative")
    if N_j < EMPTY_STATE_THRESHOLD:
        return prior
    xbar = np.asarray(xbar, dtype=float)
    S = np.asarray(S, dtype=float)
    beta = prior.beta + N_j
    nu = prior.nu + N_j
    m = (prior.beta * prior.m + N_j * xbar) / beta
    dev = xbar - prior.m
    W0_inv = _spd_inverse(prior.W)
    W_inv = W0_inv + N_j * S + (prior.beta * N_j / beta) * np.outer(dev, dev)
    W = _spd_inverse(W_inv, events)
    return GaussWishart(m=m, beta=beta, W=W, nu=nu)

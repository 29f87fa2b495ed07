"""Concrete Gaussian HMM parameters shared by the sampler, the ML baseline and
the VB point estimate."""

import math
from dataclasses import dataclass

import numpy as np

from .forward_backward import forward_backward
from .special import DomainError, check_spd

__all__ = ["HmmParams", "gaussian_log_density", "log_likelihood", "posterior_marginals"]

_LN_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class HmmParams:
    """Start distribution ``pi`` (J,), transition matrix ``A`` (J, J), state
    means (J, D) and covariances (J, D, D)."""

    pi: np.ndarray
    A: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float).reshape(-1)
        J = pi.size
        A = np.array(self.A, dtype=float)
        means = np.array(self.means, dtype=float)
        covs = np.array(self.covariances, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        D = means.shape[1]
        if covs.ndim == 1:
            covs = covs[:, None, None]
        if A.shape != (J, J) or means.shape != (J, D) or covs.shape != (J, D, D):
            raise DomainError("inconsistent HMM parameter shapes")
        for vec in (pi, *A):
            if np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-10:
                raise DomainError("pi and the rows of A must be probability vectors")
        for cov in covs:
            check_spd(cov, "covariance")
        for arr in (pi, A, means, covs):
            arr.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)

    @property
    def J(self):
        return self.pi.size

    @property
    def D(self):
        return self.means.shape[1]


def gaussian_log_density(X, means, covariances):
    """(N, J) matrix of ln N(x_n | mean_j, cov_j)."""
    X = np.asarray(X, dtype=float)
    out = np.empty((X.shape[0], len(means)))
    D = X.shape[1]
    for j, (mean, cov) in enumerate(zip(means, covariances)):
        chol = np.linalg.cholesky(cov)
        z = np.linalg.solve(chol, (X - mean).T)
        out[:, j] = (
            -0.5 * np.sum(z * z, axis=0)
            - np.sum(np.log(np.diag(chol)))
            - 0.5 * D * _LN_2PI
        )
    return out


def _log(p):
    with np.errstate(divide="ignore"):
        return np.log(p)


def posterior_marginals(params, X):
    lb = gaussian_log_density(X, params.means, params.covariances)
    return forward_backward(_log(params.pi), _log(params.A), lb)


def log_likelihood(params, X):
    """Exact ln p(X) of one sequence under ``params``."""
    return posterior_marginals(params, X).log_z_tilde

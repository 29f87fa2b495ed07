"""Maximum-likelihood Baum-Welch for Gaussian HMMs.

No priors are involved, so a state that collapses onto repeated observations
drives its covariance towards singularity.  The only protection is the
eigenvalue floor ``cov_floor``; with ``cov_floor=0`` such a collapse raises
:class:`NumericError`.
"""

import numpy as np

from .elbo import has_converged
from .errors import DomainError, NumericError
from .forward_backward import forward_backward
from .initialization import as_estep, init_responsibilities
from .params import HmmParams, gaussian_log_density
from .vb_updates import data_summary, sufficient_stats

__all__ = ["MlHmm", "baum_welch_fit", "ml_m_step"]

MlHmm = HmmParams


def _floor_covariance(S, cov_floor, events):
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    low = w < cov_floor
    if np.any(low):
        if events is not None and cov_floor > 0:
            events.append(f"{int(low.sum())} covariance eigenvalue(s) floored at {cov_floor:.3g}")
        w = np.where(low, cov_floor, w)
    if not np.all(w > 0):
        raise NumericError("covariance became singular")
    cov = (V * w) @ V.T
    return 0.5 * (cov + cov.T)


def ml_m_step(stats, previous=None, cov_floor=1e-6, events=None):
    J = stats.J
    pi = stats.gamma1 / stats.gamma1.sum()
    rows = stats.xi_sums.sum(axis=1, keepdims=True)
    A = np.where(rows > 0, stats.xi_sums / np.where(rows > 0, rows, 1.0), 1.0 / J)
    means = stats.xbar.copy()
    covs = np.empty_like(stats.S)
    for j in range(J):
        if stats.N_j[j] < 1e-12:
            if previous is None:
                raise NumericError(f"state {j} received no responsibility")
            means[j] = previous.means[j]
            covs[j] = previous.covariances[j]
            continue
        covs[j] = _floor_covariance(stats.S[j], cov_floor, events)
    return HmmParams(pi=pi, A=A, means=means, covariances=covs)


def _e_step(params, X):
    lb = gaussian_log_density(X, params.means, params.covariances)
    with np.errstate(divide="ignore"):
        return forward_backward(np.log(params.pi), np.log(params.A), lb)


def baum_welch_fit(data, J, seed=0, max_iters=200, tol=1e-6, cov_floor=None, init="kmeans",
                   events=None):
    """Fit a Gaussian HMM by maximum likelihood.

    Parameters
    ----------
    data : list of ndarray of shape (N_i, D)
    cov_floor : float or None
        Lower bound on covariance eigenvalues; ``None`` uses 1e-6 times the
        mean per-dimension data variance.

    Returns
    -------
    model : MlHmm
    loglik_trace : list of float
        Total log-likelihood after each E-step.
    """
    data = [np.asarray(X, dtype=float) for X in data]
    if not data or any(len(X) == 0 for X in data):
        raise ValueError("need at least one non-empty sequence")
    if cov_floor is None:
        cov_floor = 1e-6 * data_summary(data)[1]
    if cov_floor < 0:
        raise ValueError("cov_floor must be non-negative")

    resp = init_responsibilities(data, J, init, seed)
    stats = sufficient_stats([as_estep(g) for g in resp], data)
    trace = []
    params = None
    try:
        params = ml_m_step(stats, cov_floor=cov_floor, events=events)
        for it in range(max_iters):
            results = [_e_step(params, X) for X in data]
            total = sum(r.log_z_tilde for r in results)
            if not np.isfinite(total):
                raise NumericError("log-likelihood is not finite")
            trace.append(total)
            if len(trace) > 1 and has_converged(trace[-2], trace[-1], tol):
                break
            if it == max_iters - 1:
                break
            stats = sufficient_stats(results, data)
            params = ml_m_step(stats, params, cov_floor, events)
    except (NumericError, DomainError, np.linalg.LinAlgError) as exc:
        raise NumericError(f"Baum-Welch diverged: {exc}", trace) from exc
    return params, trace


"""VB-EM training loop."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .elbo import elbo, has_converged
from .errors import NumericError
from .forward_backward import e_step
from .initialization import INIT_METHODS, as_estep
from .initialization import init_responsibilities as _init_responsibilities
from .params import HmmParams
from .posteriors import HmmPriors
from .vb_updates import INITIAL_UPDATE_MODES, data_summary, default_priors, m_step, sufficient_stats

__all__ = [
    "TrainConfig",
    "TrainReport",
    "fit",
    "init_responsibilities",
    "point_estimate",
    "worker_count",
]

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    J: int
    tol: float = 1e-6
    max_iters: int = 200
    seed: int = 0
    init: str = "kmeans"
    initial_update_mode: str = "first-step"
    restarts: int = 1

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.init not in INIT_METHODS:
            raise ValueError(f"init must be one of {INIT_METHODS}")
        if self.initial_update_mode not in INITIAL_UPDATE_MODES:
            raise ValueError(f"initial_update_mode must be one of {INITIAL_UPDATE_MODES}")


@dataclass(frozen=True, eq=False)
class TrainReport:
    """Outcome of one fit.

    ``elbo_trace[k]`` and ``breakdowns[k]`` are evaluated after the k-th
    E-step; ``log_z_trace[k]`` holds the per-sequence log Z~ values of that
    E-step.  ``posterior`` is the posterior the last E-step was run with.
    """

    posterior: object
    priors: HmmPriors
    elbo_trace: list
    iterations: int
    converged: bool
    warnings: list = field(default_factory=list)
    breakdowns: list = field(default_factory=list)
    log_z_trace: list = field(default_factory=list)
    restart: int = 0

    @property
    def final_elbo(self):
        return self.elbo_trace[-1]


def _check_data(data):
    if isinstance(data, np.ndarray) and data.ndim == 2:
        data = [data]
    seqs = [np.asarray(X, dtype=float) for X in data]
    if not seqs:
        raise ValueError("no sequences given")
    for X in seqs:
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("every sequence must be a non-empty (N, D) array")
        if not np.all(np.isfinite(X)):
            raise ValueError("observations must be finite")
    if len({X.shape[1] for X in seqs}) != 1:
        raise ValueError("sequences have inconsistent dimensions")
    return seqs


def init_responsibilities(data, cfg, seed=None):
    return _init_responsibilities(
        _check_data(data), cfg.J, cfg.init, cfg.seed if seed is None else seed
    )


def worker_count():
    """Thread cap from ``VBHMM_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("VBHMM_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _restart_seeds(seed, restarts):
    if restarts == 1:
        return [seed]
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> 1) for c in children]


def _run(seqs, cfg, priors, resp, restart=0):
    events = []
    stats = sufficient_stats([as_estep(g) for g in resp], seqs)
    post = m_step(priors, stats, cfg.initial_update_mode, events)
    trace, breakdowns, log_z_trace = [], [], []
    converged = False
    for it in range(cfg.max_iters):
        results = [e_step(post, X) for X in seqs]
        degenerate = sum(r.n_degenerate for r in results)
        if degenerate:
            events.append(f"iteration {it}: {degenerate} degenerate forward step(s)")
        stats = sufficient_stats(results, seqs)
        breakdown = elbo(post, priors, stats, results)
        if not np.isfinite(breakdown.total):
            raise NumericError("lower bound is not finite", trace)
        trace.append(breakdown.total)
        breakdowns.append(breakdown)
        log_z_trace.append([r.log_z_tilde for r in results])
        if len(trace) > 1 and has_converged(trace[-2], trace[-1], cfg.tol):
            converged = True
            break
        if it == cfg.max_iters - 1:
            break
        step_events = []
        post = m_step(priors, stats, cfg.initial_update_mode, step_events)
        events.extend(f"iteration {it}: {e}" for e in step_events)
    return TrainReport(
        posterior=post,
        priors=priors,
        elbo_trace=trace,
        iterations=len(trace),
        converged=converged,
        warnings=events,
        breakdowns=breakdowns,
        log_z_trace=log_z_trace,
        restart=restart,
    )


def fit(data, cfg, priors=None, resp_init=None):
    """Train a variational Gaussian HMM.

    Parameters
    ----------
    data : list of ndarray of shape (N_i, D)
        Observation sequences.
    cfg : TrainConfig
    priors : HmmPriors, optional
        Defaults to :func:`default_priors` built from the pooled data.
    resp_init : list of ndarray, optional
        Initial responsibilities, one (N_i, J) matrix per sequence.  Overrides
        ``cfg.init`` and disables restarts.

    Returns
    -------
    TrainReport
        The restart with the highest final lower bound (earliest on ties).
    """
    seqs = _check_data(data)
    D = seqs[0].shape[1]
    if priors is None:
        priors = default_priors(cfg.J, D, data_summary(seqs))
    if priors.J != cfg.J or priors.D != D:
        raise ValueError(f"priors are for J={priors.J}, D={priors.D}; data needs J={cfg.J}, D={D}")

    if resp_init is not None:
        resp = [np.asarray(g, dtype=float) for g in resp_init]
        if [g.shape for g in resp] != [(len(X), cfg.J) for X in seqs]:
            raise ValueError("resp_init shapes do not match the data")
        return _run(seqs, cfg, priors, resp)

    seeds = _restart_seeds(cfg.seed, cfg.restarts)

    def one(k):
        resp = _init_responsibilities(seqs, cfg.J, cfg.init, seeds[k])
        return _run(seqs, cfg, priors, resp, restart=k)

    workers = min(worker_count(), cfg.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, range(cfg.restarts)))
    else:
        reports = [one(k) for k in range(cfg.restarts)]

    best = reports[0]
    for rep in reports[1:]:
        if rep.final_elbo > best.final_elbo:
            best = rep
    _log.debug("selected restart %d with lower bound %.6f", best.restart, best.final_elbo)
    return best


def point_estimate(post):
    """Posterior-mean parameters: Dirichlet means for pi and A, m_j for the
    state means and (nu_j W_j)^-1 for the covariances."""
    pi = post.initial / post.initial.sum()
    A = post.transitions / post.transitions.sum(axis=1, keepdims=True)
    means = np.array([gw.m for gw in post.emissions])
    covs = np.array([np.linalg.inv(gw.nu * gw.W) for gw in post.emissions])
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    return HmmParams(pi=pi, A=A, means=means, covariances=covs)

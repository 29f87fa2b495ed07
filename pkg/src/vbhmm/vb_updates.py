"""Variational M-step: weighted statistics and conjugate parameter updates."""

from dataclasses import dataclass

import numpy as np

from .posteriors import (
    EMPTY_STATE_THRESHOLD,
    GaussWishart,
    HmmPosterior,
    HmmPriors,
    from_stats,
)

__all__ = [
    "SufficientStats",
    "INITIAL_UPDATE_MODES",
    "sufficient_stats",
    "update_transitions",
    "update_initial",
    "update_emissions",
    "default_priors",
    "m_step",
]

INITIAL_UPDATE_MODES = ("occupancy", "first-step")


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """Responsibility-weighted statistics pooled over one or more sequences.

    ``S`` uses the biased 1/N_j normalisation.  States with occupancy below
    the empty-state threshold carry zero ``xbar`` and ``S`` and are listed in
    ``empty``.
    """

    N_j: np.ndarray
    xbar: np.ndarray
    S: np.ndarray
    xi_sums: np.ndarray
    gamma1: np.ndarray
    n_sequences: int = 1

    @property
    def empty(self):
        return np.flatnonzero(self.N_j < EMPTY_STATE_THRESHOLD)

    @property
    def J(self):
        return self.N_j.size


def _as_lists(results, sequences):
    if not isinstance(results, (list, tuple)):
        results, sequences = [results], [sequences]
    if len(results) != len(sequences):
        raise ValueError("need one E-step result per sequence")
    return list(results), [np.asarray(X, dtype=float) for X in sequences]


def sufficient_stats(results, sequences):
    """Accumulate statistics from E-step results; accepts a single
    (result, sequence) pair or parallel lists of them."""
    results, sequences = _as_lists(results, sequences)
    for r, X in zip(results, sequences):
        if r.gamma.shape[0] != X.shape[0]:
            raise ValueError(
                f"E-step covers {r.gamma.shape[0]} steps but sequence has {X.shape[0]}"
            )
    gamma = np.concatenate([r.gamma for r in results])
    X = np.concatenate(sequences)
    J, D = gamma.shape[1], X.shape[1]

    N_j = gamma.sum(axis=0)
    xbar = np.zeros((J, D))
    S = np.zeros((J, D, D))
    for j in range(J):
        if N_j[j] < EMPTY_STATE_THRESHOLD:
            continue
        xbar[j] = gamma[:, j] @ X / N_j[j]
        diff = X - xbar[j]
        S[j] = (gamma[:, j, None] * diff).T @ diff / N_j[j]
        S[j] = 0.5 * (S[j] + S[j].T)

    xi_sums = np.zeros((J, J))
    for r in results:
        xi_sums += r.xi.sum(axis=0)
    gamma1 = np.sum([r.gamma[0] for r in results], axis=0)
    return SufficientStats(
        N_j=N_j, xbar=xbar, S=S, xi_sums=xi_sums, gamma1=gamma1, n_sequences=len(results)
    )


def update_transitions(prior, stats):
    return prior.transition_alpha0 + stats.xi_sums


def update_initial(prior, stats, mode="first-step"):
    """Start-state Dirichlet update.

    ``"occupancy"`` adds total occupancy N_j (mixing-weight style); ``"first-step"``
    adds the first-step responsibilities summed over sequences.
    """
    if mode == "occupancy":
        return prior.initial_alpha0 + stats.N_j
    if mode == "first-step":
        return prior.initial_alpha0 + stats.gamma1
    raise ValueError(f"unknown initial update mode {mode!r}; expected one of {INITIAL_UPDATE_MODES}")


def update_emissions(prior, stats, events=None):
    out = []
    for j in range(stats.J):
        if stats.N_j[j] < EMPTY_STATE_THRESHOLD and events is not None:
            events.append(f"state {j} is empty; emission posterior reset to prior")
        out.append(from_stats(prior.emission0, stats.N_j[j], stats.xbar[j], stats.S[j], events))
    return out


def m_step(prior, stats, mode="first-step", events=None):
    return HmmPosterior(
        initial=update_initial(prior, stats, mode),
        transitions=update_transitions(prior, stats),
        emissions=update_emissions(prior, stats, events),
    )


def default_priors(J, D, data_summary, initial_alpha0=1.0):
    """Weakly informative priors.

    Transitions favour self-loops (0.5 on the diagonal, 1/(2J) elsewhere);
    the emission prior is centred on the data mean with beta0 = 1, nu0 = D and
    W0 = I / (D * scale) so that nu0 * W0 matches the empirical precision.

    Parameters
    ----------
    data_summary : tuple (mean, scale)
        Data mean vector and mean per-dimension variance.
    """
    if J < 1 or D < 1:
        raise ValueError("J and D must both be at least 1")
    mean, scale = data_summary
    mean = np.broadcast_to(np.asarray(mean, dtype=float), (D,))
    scale = float(scale)
    if not (np.isfinite(scale) and scale > 0):
        scale = 1.0
    trans = np.full((J, J), 1.0 / (2 * J))
    np.fill_diagonal(trans, 0.5)
    return HmmPriors(
        initial_alpha0=np.full(J, float(initial_alpha0)),
        transition_alpha0=trans,
        emission0=GaussWishart(m=mean, beta=1.0, W=np.eye(D) / (D * scale), nu=float(D)),
    )


def data_summary(sequences):
    X = np.concatenate([np.asarray(s, dtype=float) for s in sequences])
    var = X.var(axis=0) if X.shape[0] > 1 else np.ones(X.shape[1])
    return X.mean(axis=0), float(np.mean(var))

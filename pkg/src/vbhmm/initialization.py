"""Initial responsibilities for the VB and ML trainers."""

import warnings

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .datagen import make_rng
from .forward_backward import EStepResult

__all__ = ["INIT_METHODS", "kmeans_labels", "init_responsibilities", "as_estep"]

INIT_METHODS = ("random", "kmeans")
_KMEANS_ITERS = 10
_HARD_WEIGHT = 0.9


def kmeans_labels(X, J, seed):
    """Hard labels from a short k-means run on the pooled observations."""
    if J == 1:
        return np.zeros(X.shape[0], dtype=int)
    km = KMeans(n_clusters=J, n_init=1, max_iter=_KMEANS_ITERS, random_state=seed % 2**32)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return km.fit_predict(X)


def init_responsibilities(sequences, J, method="kmeans", seed=0):
    """One (N_i, J) responsibility matrix per sequence.

    ``random`` draws every row from a symmetric Dirichlet(1); ``kmeans`` softens
    hard k-means labels to 0.9 on the assigned state and 0.1 / (J - 1)
    elsewhere.
    """
    lengths = [len(X) for X in sequences]
    total = sum(lengths)
    if method == "random":
        resp = make_rng(seed).dirichlet(np.ones(J), size=total)
    elif method == "kmeans":
        if J == 1:
            resp = np.ones((total, 1))
        else:
            labels = kmeans_labels(np.concatenate(sequences), J, seed)
            resp = np.full((total, J), (1.0 - _HARD_WEIGHT) / (J - 1))
            resp[np.arange(total), labels] = _HARD_WEIGHT
    else:
        raise ValueError(f"unknown init method {method!r}; expected one of {INIT_METHODS}")
    return np.split(resp, np.cumsum(lengths)[:-1])


def as_estep(gamma):
    """Wrap initial responsibilities as an E-step result.

    Pairwise terms assume neighbouring states are independent, which keeps
    them consistent with both marginals.
    """
    gamma = np.asarray(gamma, dtype=float)
    xi = gamma[:-1, :, None] * gamma[1:, None, :]
    return EStepResult(gamma=gamma, xi=xi, log_c=np.zeros(len(gamma)))

"""Sampling labelled sequences from a known Gaussian HMM."""

import numpy as np

from .params import HmmParams

__all__ = ["GroundTruthHmm", "sample", "benchmark_model", "make_rng"]

GroundTruthHmm = HmmParams


def make_rng(seed):
    """Counter-based generator so that equal seeds give equal streams on
    every platform."""
    return np.random.Generator(np.random.Philox(seed))


def sample(model, N, seed):
    """Draw one sequence of length ``N``.

    Returns
    -------
    X : ndarray of shape (N, D)
    states : ndarray of shape (N,), zero-based state indices
    """
    if N < 1:
        raise ValueError("sequence length must be at least 1")
    rng = make_rng(seed)
    J, D = model.J, model.D
    chol = np.linalg.cholesky(model.covariances)
    states = np.empty(N, dtype=int)
    states[0] = rng.choice(J, p=model.pi)
    uniforms = rng.random(N - 1)
    cum_A = np.cumsum(model.A, axis=1)
    for n in range(1, N):
        row = cum_A[states[n - 1]]
        states[n] = min(int(np.searchsorted(row, uniforms[n - 1] * row[-1], side="right")), J - 1)
    noise = rng.standard_normal((N, D))
    X = model.means[states] + np.einsum("nij,nj->ni", chol[states], noise)
    return X, states


def benchmark_model():
    """Two well separated 2-D states with sticky dynamics."""
    return HmmParams(
        pi=[0.5, 0.5],
        A=[[0.9, 0.1], [0.1, 0.9]],
        means=[[0.0, 0.0], [10.0, 10.0]],
        covariances=[np.eye(2), np.eye(2)],
    )

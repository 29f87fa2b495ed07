"""Scaled forward-backward recursions for the variational E-step.

The recursions run on sub-normalised quantities: ``exp(E[ln pi])`` for the
start state, ``exp(E[ln A])`` for transitions and ``exp(E[ln N(x|mu,Lambda)])``
for emissions.  Each forward step is renormalised by its sum ``c_n`` and the
backward pass reuses the same constants, so ``sum(log c_n)`` is the log of the
sub-normalised sequence likelihood.
"""

from dataclasses import dataclass

import numpy as np

from .posteriors import expected_log_pi, log_b

__all__ = [
    "EStepResult",
    "forward_backward",
    "tilde_params",
    "log_emission_matrix",
    "e_step",
    "initial_pi_hat",
]


@dataclass(frozen=True, eq=False)
class EStepResult:
    """Posterior state marginals for one sequence.

    Attributes
    ----------
    gamma : ndarray of shape (N, J)
        Single-step responsibilities.
    xi : ndarray of shape (N - 1, J, J)
        ``xi[n, j, s]`` is the probability of the transition j -> s between
        steps n and n + 1.
    log_c : ndarray of shape (N,)
        Logs of the forward normalisers.
    n_degenerate : int
        Forward steps whose mass vanished and were replaced by a uniform step.
    """

    gamma: np.ndarray
    xi: np.ndarray
    log_c: np.ndarray
    n_degenerate: int = 0

    @property
    def log_z_tilde(self):
        return float(np.sum(self.log_c))

    @property
    def N(self):
        return self.gamma.shape[0]


def forward_backward(log_pi, log_a, log_b_matrix):
    """Run the scaled recursions given log start weights (J,), log transition
    weights (J, J) and log emission weights (N, J)."""
    log_pi = np.asarray(log_pi, dtype=float)
    log_a = np.asarray(log_a, dtype=float)
    lb = np.asarray(log_b_matrix, dtype=float)
    if lb.ndim != 2 or lb.shape[0] == 0:
        raise ValueError("log emission matrix must be a non-empty (N, J) array")
    N, J = lb.shape
    if log_pi.shape != (J,) or log_a.shape != (J, J):
        raise ValueError("parameter shapes do not match the emission matrix")

    # rescale each row so the largest emission weight is 1; the shift is added back into log_c
    shift = lb.max(axis=1)
    b = np.exp(lb - shift[:, None])
    pi = np.exp(log_pi)
    a = np.exp(log_a)

    fwd = np.empty((N, J))
    c = np.empty(N)
    n_degenerate = 0
    prev = pi
    for n in range(N):
        step = b[n] * prev if n == 0 else b[n] * (prev @ a)
        total = step.sum()
        if not total > 0.0:
            n_degenerate += 1
            step = np.full(J, 1.0)
            total = float(J)
        c[n] = total
        fwd[n] = step / total
        prev = fwd[n]

    bwd = np.empty((N, J))
    bwd[-1] = 1.0
    for n in range(N - 2, -1, -1):
        bwd[n] = a @ (b[n + 1] * bwd[n + 1]) / c[n + 1]

    gamma = fwd * bwd
    gamma /= gamma.sum(axis=1, keepdims=True)

    if N > 1:
        xi = fwd[:-1, :, None] * a[None, :, :] * (b[1:] * bwd[1:])[:, None, :]
        xi /= xi.sum(axis=(1, 2), keepdims=True)
    else:
        xi = np.zeros((0, J, J))

    log_c = np.log(c) + shift
    return EStepResult(gamma=gamma, xi=xi, log_c=log_c, n_degenerate=n_degenerate)


def tilde_params(post):
    """Return (log_pi_tilde, log_a_tilde): expected log start and transition
    probabilities under the Dirichlet posteriors."""
    return expected_log_pi(post.initial), expected_log_pi(post.transitions)


def log_emission_matrix(post, X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != post.D:
        raise ValueError(f"observations must have shape (N, {post.D}), got {X.shape}")
    return np.column_stack([log_b(X, gw) for gw in post.emissions])


def e_step(post, X):
    """Variational E-step for one observation sequence ``X`` of shape (N, D)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("observation sequence must be a non-empty (N, D) array")
    log_pi, log_a = tilde_params(post)
    return forward_backward(log_pi, log_a, log_emission_matrix(post, X))


def initial_pi_hat(result):
    g1 = result.gamma[0]
    return g1 / g1.sum()

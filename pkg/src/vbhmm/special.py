"""Special functions used by the Dirichlet and Wishart expectations.

``digamma`` and ``ln_gamma`` are evaluated by shifting the argument upward with
the recurrence relations until it exceeds ``_ASYMPTOTIC_CUTOFF`` and then
summing the asymptotic (Stirling / de Moivre) series.  Both accept scalars or
arrays; scalar input gives a Python float back.
"""

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "DomainError",
    "digamma",
    "ln_gamma",
    "ln_dirichlet_norm",
    "dirichlet_entropy",
    "ln_wishart_norm",
    "wishart_entropy",
    "check_spd",
]

_ASYMPTOTIC_CUTOFF = 10.0
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)

# B_{2k} / (2k) for the digamma series, k = 1..7
_DIGAMMA_COEFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# B_{2k} / (2k (2k - 1)) for the log-gamma series, k = 1..7
_LNGAMMA_COEFS = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def _as_positive(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr <= 0.0):
        raise DomainError(f"{name} must be strictly positive")
    return arr


def _shift_up(x):
    """Shift x up to the asymptotic region.

    Returns (y, terms, active): y = x + k >= cutoff, terms[i] = x + i and
    active[i] marks the terms that belong to the shift.
    """
    n_shift = np.maximum(np.ceil(_ASYMPTOTIC_CUTOFF - x), 0.0)
    max_shift = int(n_shift.max()) if n_shift.size else 0
    offsets = np.arange(max_shift, dtype=float).reshape((-1,) + (1,) * x.ndim)
    terms = x + offsets
    active = offsets < n_shift
    return x + n_shift, terms, active


def _return(out, scalar):
    return float(out) if scalar else out


def digamma(x):
    """Logarithmic derivative of the gamma function, psi(x) for x > 0."""
    arr = _as_positive(x)
    y, terms, active = _shift_up(arr)
    # smallest reciprocals first so 1/x (the dominant term for tiny x) is added last
    recip = np.where(active, 1.0 / terms, 0.0)
    shift_sum = np.zeros_like(arr)
    for k in range(recip.shape[0] - 1, -1, -1):
        shift_sum = shift_sum + recip[k]

    inv2 = 1.0 / (y * y)
    series = np.zeros_like(y)
    for c in reversed(_DIGAMMA_COEFS):
        series = (series + c) * inv2
    out = (np.log(y) - 0.5 / y - series) - shift_sum
    return _return(out, np.ndim(x) == 0)


def ln_gamma(x):
    """Natural log of the gamma function for x > 0."""
    arr = _as_positive(x)
    y, terms, active = _shift_up(arr)
    prod = np.prod(np.where(active, terms, 1.0), axis=0)

    inv = 1.0 / y
    inv2 = inv * inv
    series = np.zeros_like(y)
    for c in reversed(_LNGAMMA_COEFS):
        series = series * inv2 + c
    stirling = (y - 0.5) * np.log(y) - y + _HALF_LN_2PI + series * inv
    out = stirling - np.log(prod)
    return _return(out, np.ndim(x) == 0)


def ln_dirichlet_norm(alpha):
    """ln C(alpha) = ln Gamma(sum alpha) - sum ln Gamma(alpha_k)."""
    alpha = _dirichlet_vector(alpha)
    return float(ln_gamma(alpha.sum()) - np.sum(ln_gamma(alpha)))


def dirichlet_entropy(alpha):
    alpha = _dirichlet_vector(alpha)
    e_log = digamma(alpha) - digamma(alpha.sum())
    return float(-np.sum((alpha - 1.0) * e_log) - ln_dirichlet_norm(alpha))


def _dirichlet_vector(alpha):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise DomainError("alpha must be a non-empty vector")
    return _as_positive(alpha, "alpha")


def check_spd(W, name="W"):
    """Validate a symmetric positive definite matrix and return its Cholesky factor.

    Symmetry is accepted when ``max|W - W.T| <= 1e-10 * max|W|``.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
        raise DomainError(f"{name} must be a non-empty square matrix")
    if not np.all(np.isfinite(W)):
        raise DomainError(f"{name} must be finite")
    scale = np.max(np.abs(W))
    if np.max(np.abs(W - W.T)) > 1e-10 * scale:
        raise DomainError(f"{name} is not symmetric")
    try:
        return np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        raise DomainError(f"{name} is not positive definite") from None


def _check_dof(nu, D):
    if not np.isfinite(nu) or nu <= D - 1:
        raise DomainError(f"degrees of freedom must exceed D - 1 = {D - 1}, got {nu}")


def ln_wishart_norm(W, nu):
    """Log normaliser ln B(W, nu) of the Wishart density."""
    chol = check_spd(W)
    D = chol.shape[0]
    _check_dof(nu, D)
    ln_det = 2.0 * np.sum(np.log(np.diag(chol)))
    dims = np.arange(1, D + 1)
    return float(
        -0.5 * nu * ln_det
        - 0.5 * nu * D * math.log(2.0)
        - 0.25 * D * (D - 1) * math.log(math.pi)
        - np.sum(ln_gamma(0.5 * (nu + 1 - dims)))
    )


def wishart_entropy(W, nu, expected_ln_det):
    """Differential entropy of W(W, nu).

    ``expected_ln_det`` must be E[ln|Lambda|] for the same (W, nu).
    """
    D = np.shape(W)[0]
    return float(
        -ln_wishart_norm(W, nu)
        - 0.5 * (nu - D - 1) * expected_ln_det
        + 0.5 * nu * D
    )

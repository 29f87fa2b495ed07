"""Input validation shared by the estimators."""

import numpy as np
from sklearn.utils import check_array

__all__ = ["check_sequences", "split_lengths"]


def split_lengths(X, lengths):
    """Split a stacked (n_samples, n_features) array into sequences."""
    if lengths is None:
        return [X]
    lengths = np.asarray(lengths, dtype=int)
    if lengths.ndim != 1 or np.any(lengths < 1):
        raise ValueError("lengths must be a 1-D array of positive integers")
    if lengths.sum() != X.shape[0]:
        raise ValueError(
            f"lengths sum to {lengths.sum()} but X has {X.shape[0]} samples"
        )
    return np.split(X, np.cumsum(lengths)[:-1])


def check_sequences(X, lengths=None, n_features=None):
    """Validate observations and return a list of float64 sequences.

    ``X`` is either a stacked 2-D array (optionally with ``lengths``, as in
    hmmlearn) or a list of 2-D arrays.  Non-finite values are rejected.
    """
    if isinstance(X, (list, tuple)) and len(X) and np.ndim(X[0]) == 2:
        if lengths is not None:
            raise ValueError("lengths must not be given together with a list of sequences")
        seqs = [check_array(x, dtype=np.float64, ensure_all_finite=True) for x in X]
    else:
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        seqs = split_lengths(X, lengths)
    dims = {s.shape[1] for s in seqs}
    if len(dims) != 1:
        raise ValueError("sequences have inconsistent numbers of features")
    if n_features is not None and dims != {n_features}:
        raise ValueError(
            f"X has {dims.pop()} features, but the model was fitted with {n_features}"
        )
    return seqs

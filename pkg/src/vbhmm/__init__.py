"""Variational Bayesian training of hidden Markov models with multivariate
Gaussian emissions."""

__version__ = "0.1.0"

from .errors import DataError, DomainError, NumericError  # noqa: E402
from .estimator import GaussianHMM, VariationalGaussianHMM  # noqa: E402
from .posteriors import GaussWishart, HmmPosterior, HmmPriors  # noqa: E402
from .trainer import TrainConfig, TrainReport, fit, point_estimate  # noqa: E402

__all__ = [
    "__version__",
    "DataError",
    "DomainError",
    "NumericError",
    "GaussianHMM",
    "VariationalGaussianHMM",
    "GaussWishart",
    "HmmPosterior",
    "HmmPriors",
    "TrainConfig",
    "TrainReport",
    "fit",
    "point_estimate",
]

"""scikit-learn style estimators.

Both estimators take observations hmmlearn-style: a stacked
``(n_samples, n_features)`` array plus an optional ``lengths`` vector, or a
list of per-sequence arrays.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .baseline_em import baum_welch_fit
from .datagen import sample as _sample
from .forward_backward import e_step
from .params import log_likelihood, posterior_marginals
from .posteriors import GaussWishart, HmmPriors
from .trainer import TrainConfig, fit as _fit, point_estimate
from .validation import check_sequences
from .vb_updates import data_summary, default_priors

__all__ = ["VariationalGaussianHMM", "GaussianHMM"]


def _seed(random_state):
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    return int(check_random_state(random_state).randint(2**31 - 1))


class _HmmMixin:
    def predict(self, X, lengths=None):
        """Most probable state at each step (posterior decoding)."""
        return np.argmax(self.predict_proba(X, lengths), axis=1)

    def sample(self, n_samples=1, random_state=None):
        """Draw one sequence from the fitted (point-estimate) model.

        Returns
        -------
        X : ndarray of shape (n_samples, n_features)
        states : ndarray of shape (n_samples,)
        """
        check_is_fitted(self)
        return _sample(self._params(), n_samples, _seed(random_state))

    def _params(self):
        raise NotImplementedError


class VariationalGaussianHMM(_HmmMixin, BaseEstimator):
    """Hidden Markov model with Gaussian emissions trained by variational Bayes.

    Start and transition probabilities get Dirichlet posteriors, each state's
    mean and precision a Gaussian-Wishart posterior.  Training alternates a
    forward-backward E-step with conjugate updates and stops when the relative
    change of the lower bound drops below ``tol``.

    Parameters
    ----------
    n_components : int, default=2
        Number of hidden states.
    tol : float, default=1e-6
        Convergence threshold on ``|delta L| / (1 + |L|)``.
    max_iter : int, default=200
    init : {'kmeans', 'random'}, default='kmeans'
        How the initial responsibilities are produced.
    initial_update : {'first-step', 'occupancy'}, default='first-step'
        ``'first-step'`` updates the start-state Dirichlet with the first-step
        responsibilities; ``'occupancy'`` adds the total state occupancy instead.
        Only ``'first-step'`` guarantees a non-decreasing lower bound.
    n_init : int, default=1
        Number of restarts; the one with the highest lower bound is kept.
    random_state : int, RandomState instance or None, default=0
    startprob_prior : float or array of shape (n_components,), default=1.0
        Dirichlet pseudo-counts for the start state.
    transmat_prior : array of shape (n_components, n_components), default=None
        Dirichlet pseudo-counts per transition row.  ``None`` uses 0.5 on the
        diagonal and ``1 / (2 n_components)`` elsewhere.
    mean_prior : array of shape (n_features,), default=None
        Prior location of the state means; defaults to the data mean.
    mean_precision_prior : float, default=1.0
        Scale ``beta0`` of the mean prior precision.
    dof_prior : float, default=None
        Wishart degrees of freedom; defaults to ``n_features``.
    scale_prior : array of shape (n_features, n_features), default=None
        Wishart scale matrix; defaults to ``I / (n_features * v)`` with ``v``
        the mean per-feature data variance.

    Attributes
    ----------
    posterior_ : HmmPosterior
    priors_ : HmmPriors
    report_ : TrainReport
    lower_bound_ : float
    elbo_trace_ : list of float
    n_iter_ : int
    converged_ : bool
    startprob_, transmat_, means_, covars_ : ndarray
        Posterior-mean parameters.
    n_features_in_ : int
    """

    def __init__(
        self,
        n_components=2,
        *,
        tol=1e-6,
        max_iter=200,
        init="kmeans",
        initial_update="first-step",
        n_init=1,
        random_state=0,
        startprob_prior=1.0,
        transmat_prior=None,
        mean_prior=None,
        mean_precision_prior=1.0,
        dof_prior=None,
        scale_prior=None,
    ):
        self.n_components = n_components
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.initial_update = initial_update
        self.n_init = n_init
        self.random_state = random_state
        self.startprob_prior = startprob_prior
        self.transmat_prior = transmat_prior
        self.mean_prior = mean_prior
        self.mean_precision_prior = mean_precision_prior
        self.dof_prior = dof_prior
        self.scale_prior = scale_prior

    def _build_priors(self, seqs):
        J, D = self.n_components, seqs[0].shape[1]
        base = default_priors(J, D, data_summary(seqs))
        e0 = base.emission0
        return HmmPriors(
            initial_alpha0=np.broadcast_to(np.asarray(self.startprob_prior, dtype=float), (J,)),
            transition_alpha0=(
                base.transition_alpha0 if self.transmat_prior is None else self.transmat_prior
            ),
            emission0=GaussWishart(
                m=e0.m if self.mean_prior is None else self.mean_prior,
                beta=self.mean_precision_prior,
                W=e0.W if self.scale_prior is None else self.scale_prior,
                nu=e0.nu if self.dof_prior is None else self.dof_prior,
            ),
        )

    def fit(self, X, lengths=None):
        seqs = check_sequences(X, lengths)
        cfg = TrainConfig(
            J=self.n_components,
            tol=self.tol,
            max_iters=self.max_iter,
            seed=_seed(self.random_state),
            init=self.init,
            initial_update_mode=self.initial_update,
            restarts=self.n_init,
        )
        priors = self._build_priors(seqs)
        report = _fit(seqs, cfg, priors)

        self.report_ = report
        self.priors_ = priors
        self.posterior_ = report.posterior
        self.elbo_trace_ = list(report.elbo_trace)
        self.lower_bound_ = report.final_elbo
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        est = point_estimate(report.posterior)
        self.startprob_ = est.pi
        self.transmat_ = est.A
        self.means_ = est.means
        self.covars_ = est.covariances
        self.n_features_in_ = seqs[0].shape[1]
        return self

    def _params(self):
        return point_estimate(self.posterior_)

    def predict_proba(self, X, lengths=None):
        """State responsibilities under the variational posterior, (n_samples, n_components)."""
        check_is_fitted(self)
        seqs = check_sequences(X, lengths, self.n_features_in_)
        return np.concatenate([e_step(self.posterior_, s).gamma for s in seqs])

    def score(self, X, lengths=None):
        """Sum over sequences of the log normaliser ``log Z~`` of the E-step."""
        check_is_fitted(self)
        seqs = check_sequences(X, lengths, self.n_features_in_)
        return float(sum(e_step(self.posterior_, s).log_z_tilde for s in seqs))


class GaussianHMM(_HmmMixin, BaseEstimator):
    """Maximum-likelihood Gaussian HMM trained with Baum-Welch.

    Parameters
    ----------
    n_components : int, default=2
    cov_floor : float or None, default=None
        Floor on covariance eigenvalues; ``None`` means 1e-6 times the mean
        per-feature variance of the training data.
    tol : float, default=1e-6
    max_iter : int, default=200
    init : {'kmeans', 'random'}, default='kmeans'
    random_state : int, RandomState instance or None, default=0
    """

    def __init__(self, n_components=2, *, cov_floor=None, tol=1e-6, max_iter=200,
                 init="kmeans", random_state=0):
        self.n_components = n_components
        self.cov_floor = cov_floor
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.random_state = random_state

    def fit(self, X, lengths=None):
        seqs = check_sequences(X, lengths)
        model, trace = baum_welch_fit(
            seqs,
            self.n_components,
            seed=_seed(self.random_state),
            max_iters=self.max_iter,
            tol=self.tol,
            cov_floor=self.cov_floor,
            init=self.init,
        )
        self.model_ = model
        self.loglik_trace_ = trace
        self.n_iter_ = len(trace)
        self.startprob_ = model.pi
        self.transmat_ = model.A
        self.means_ = model.means
        self.covars_ = model.covariances
        self.n_features_in_ = seqs[0].shape[1]
        return self

    def _params(self):
        return self.model_

    def predict_proba(self, X, lengths=None):
        check_is_fitted(self)
        seqs = check_sequences(X, lengths, self.n_features_in_)
        return np.concatenate([posterior_marginals(self.model_, s).gamma for s in seqs])

    def score(self, X, lengths=None):
        """Log-likelihood of ``X`` under the fitted model."""
        check_is_fitted(self)
        seqs = check_sequences(X, lengths, self.n_features_in_)
        return float(sum(log_likelihood(self.model_, s) for s in seqs))

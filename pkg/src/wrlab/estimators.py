"""scikit-learn style wrappers around the core modules.

These are conveniences for pipelines and parameter searches; the module
functions remain the primary interface.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dobrushin import cij_hardcore_bruteforce, cij_softcore
from .dynamics import flip_probability
from .lattice import Box
from .model import ModelParams
from .sampler import ChainSpec, run_chains


class DobrushinUniquenessClassifier(ClassifierMixin, BaseEstimator):
    """Labels a priori measures (rows ``alpha(-1), alpha(0), alpha(1)``) by the Dobrushin verdict.

    Nothing is learned; ``fit`` only records the label set.
    """

    def __init__(self, B=4, beta=math.inf):
        self.B = B
        self.beta = beta

    def fit(self, X=None, y=None):
        self.classes_ = np.array([False, True])
        return self

    def _c(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != 3:
            raise ValueError("each row must be (alpha(-1), alpha(0), alpha(1))")
        if self.beta == math.inf:
            return np.array([self.B * cij_hardcore_bruteforce(tuple(row), self.B) for row in X])
        return np.array([self.B * cij_softcore(tuple(row), self.beta, self.B)[0] for row in X])

    def decision_function(self, X):
        """``1 - c``; positive means unique."""
        check_is_fitted(self, "classes_")
        return 1.0 - self._c(X)

    def predict(self, X):
        return self.decision_function(X) > 0


class HeatBathSampler(BaseEstimator):
    """Runs heat-bath chains on a centred cube; results land in ``*_`` attributes."""

    def __init__(self, side=16, d=2, lam=1.0, h=0.0, beta=math.inf, boundary="AllPlus",
                 sweeps=10_000, burn_in=1_000, seed=0, chains=1, n_jobs=1,
                 track_percolation=True):
        self.side = side
        self.d = d
        self.lam = lam
        self.h = h
        self.beta = beta
        self.boundary = boundary
        self.sweeps = sweeps
        self.burn_in = burn_in
        self.seed = seed
        self.chains = chains
        self.n_jobs = n_jobs
        self.track_percolation = track_percolation

    def _params(self):
        if self.beta == math.inf:
            return ModelParams.hard_core(self.lam, self.h)
        return ModelParams.soft_core(self.beta, self.lam, self.h)

    def fit(self, X=None, y=None):
        spec = ChainSpec(Box.cube(self.side, self.d), self._params(), self.boundary,
                         self.sweeps, self.burn_in, self.seed, self.chains,
                         track_percolation=self.track_percolation)
        run = run_chains(spec, self.n_jobs)
        self.run_ = run
        self.origin_estimate_ = run.origin_estimate()
        if self.track_percolation:
            self.percolation_probability_ = run.percolation_estimate()
        self.final_configs_ = [tr.final for tr in run.traces]
        return self


class SpinFlipEvolution(TransformerMixin, BaseEstimator):
    """Applies the independent spin-flip dynamics for time `t` to rows of spins."""

    def __init__(self, t=1.0, random_state=None):
        self.t = t
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.t < 0:
            raise ValueError("t must be >= 0")
        self.rng_ = np.random.default_rng(self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "rng_")
        X = np.asarray(X)
        if not np.isin(X, (-1, 0, 1)).all():
            raise ValueError("spins must be in {-1, 0, 1}")
        out = X.copy()
        if self.t == 0:
            return out
        flips = self.rng_.random(X.shape) < flip_probability(self.t)
        out[flips] = -out[flips]
        return out

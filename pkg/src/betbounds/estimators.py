"""scikit-learn style wrappers around the functional interval builders.

``fit`` takes a one-dimensional sample (or a single-column 2-D array) of
values in [0, 1] and stores the resulting interval in trailing-underscore
attributes. Hyperparameters are plain constructor arguments so the usual
``get_params`` / ``set_params`` / ``clone`` machinery applies.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .betting import CsState, Fixed, GridConfig, Mixture, PrPlLambda, betting_ci
from .classical import bernstein_ci, hoeffding_ci, mp_eb_ci, prpl_eb_ci
from .core import validate_sample
from .exceptions import ParameterError
from .wor import bernstein_serfling_ci, wor_betting_ci, wor_prpl_eb_ci

__all__ = ["MeanCIEstimator", "WorMeanCIEstimator", "BettingCSEstimator", "check_sample"]

CI_METHODS = ("hoeffding", "bernstein", "mp-eb", "prpl-eb", "betting-mixture", "betting-prpl")
WOR_CI_METHODS = ("bernstein-serfling", "wor-prpl-eb", "wor-betting")


def check_sample(X) -> np.ndarray:
    """Flatten ``X`` of shape (n,) or (n, 1) and check it lies in [0, 1]."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ParameterError(f"expected a single column, got shape {arr.shape}")
        arr = arr[:, 0]
    arr = check_array(arr, ensure_2d=False, ensure_all_finite=False, dtype=np.float64)
    return validate_sample(arr, require_nonempty=True).values


def _grid(est) -> GridConfig:
    return GridConfig(est.grid_points, est.refine_tol)


def _store(est, iv):
    if est.clip:
        iv = iv.clipped()
    est.interval_ = iv
    est.lower_ = iv.lower
    est.upper_ = iv.upper
    est.width_ = iv.width
    est.n_samples_ = iv.n
    return est


class _IntervalMixin:

    def contains(self, m: float) -> bool:
        check_is_fitted(self, "interval_")
        return self.interval_.contains(m)

    def get_interval(self):
        check_is_fitted(self, "interval_")
        return self.lower_, self.upper_


class MeanCIEstimator(_IntervalMixin, BaseEstimator):
    """Level ``1 - alpha`` confidence interval for the mean of i.i.d. data."""

    def __init__(self, method: str = "betting-mixture", alpha: float = 0.05,
                 sigma: Optional[float] = None, n_nodes: int = 64,
                 grid_points: int = 2048, refine_tol: float = 1e-6,
                 lambda_cap: float = 0.5, clip: bool = True):
        self.method = method
        self.alpha = alpha
        self.sigma = sigma
        self.n_nodes = n_nodes
        self.grid_points = grid_points
        self.refine_tol = refine_tol
        self.lambda_cap = lambda_cap
        self.clip = clip

    def fit(self, X, y=None):
        x = check_sample(X)
        m = self.method
        if m == "hoeffding":
            iv = hoeffding_ci(x, self.alpha)
        elif m == "bernstein":
            if self.sigma is None:
                raise ParameterError("the bernstein method needs sigma")
            iv = bernstein_ci(x, self.alpha, self.sigma)
        elif m == "mp-eb":
            iv = mp_eb_ci(x, self.alpha)
        elif m == "prpl-eb":
            iv = prpl_eb_ci(x, self.alpha, self.lambda_cap)
        elif m == "betting-mixture":
            iv = betting_ci(x, self.alpha, Mixture(self.n_nodes), _grid(self))
        elif m == "betting-prpl":
            iv = betting_ci(x, self.alpha, PrPlLambda(cap=self.lambda_cap), _grid(self))
        else:
            raise ParameterError(f"unknown method {m!r}; choose from {CI_METHODS}")
        return _store(self, iv)


class WorMeanCIEstimator(_IntervalMixin, BaseEstimator):
    """Confidence interval for the mean of a finite population of size ``M``."""

    def __init__(self, M: int, method: str = "wor-betting", alpha: float = 0.05,
                 sigma: Optional[float] = None, grid_points: int = 2048,
                 refine_tol: float = 1e-6, lambda_cap: float = 0.5, clip: bool = True):
        self.M = M
        self.method = method
        self.alpha = alpha
        self.sigma = sigma
        self.grid_points = grid_points
        self.refine_tol = refine_tol
        self.lambda_cap = lambda_cap
        self.clip = clip

    def fit(self, X, y=None):
        x = check_sample(X)
        m = self.method
        if m == "bernstein-serfling":
            if self.sigma is None:
                raise ParameterError("the bernstein-serfling method needs sigma")
            iv = bernstein_serfling_ci(x, self.M, self.alpha, self.sigma)
        elif m == "wor-prpl-eb":
            iv = wor_prpl_eb_ci(x, self.M, self.alpha, self.lambda_cap)
        elif m == "wor-betting":
            iv = wor_betting_ci(x, self.M, self.alpha, PrPlLambda(cap=self.lambda_cap),
                                _grid(self))
        else:
            raise ParameterError(f"unknown method {m!r}; choose from {WOR_CI_METHODS}")
        return _store(self, iv)


class BettingCSEstimator(_IntervalMixin, BaseEstimator):
    """Anytime-valid confidence sequence that can absorb data in batches.

    ``fit`` restarts from scratch; ``partial_fit`` continues the running
    sequence. ``lower_path_`` / ``upper_path_`` hold the bounds after every
    observation seen so far.
    """

    def __init__(self, alpha: float = 0.05, strategy: str = "mixture", n_nodes: int = 64,
                 lam: float = 0.5, grid_points: int = 512, refine_tol: float = 1e-6,
                 keep_history: bool = False):
        self.alpha = alpha
        self.strategy = strategy
        self.n_nodes = n_nodes
        self.lam = lam
        self.grid_points = grid_points
        self.refine_tol = refine_tol
        self.keep_history = keep_history

    def _strategy(self):
        if self.strategy == "mixture":
            return Mixture(self.n_nodes)
        if self.strategy == "fixed":
            return Fixed(self.lam)
        raise ParameterError(f"unknown strategy {self.strategy!r}; choose 'mixture' or 'fixed'")

    def fit(self, X, y=None):
        for attr in ("state_", "lower_path_", "upper_path_", "interval_"):
            if hasattr(self, attr):
                delattr(self, attr)
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        x = check_sample(X)
        if not hasattr(self, "state_"):
            self.state_ = CsState(self.alpha, self._strategy(), _grid(self),
                                  keep_history=self.keep_history)
            self.lower_path_ = np.empty(0)
            self.upper_path_ = np.empty(0)
        lo, hi = self.state_.run(x)
        self.lower_path_ = np.concatenate([self.lower_path_, lo])
        self.upper_path_ = np.concatenate([self.upper_path_, hi])
        iv = self.state_.running_interval
        self.interval_ = iv
        self.lower_ = iv.lower
        self.upper_ = iv.upper
        self.width_ = iv.width
        self.n_samples_ = self.state_.t
        return self

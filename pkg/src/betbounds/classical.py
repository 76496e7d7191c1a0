"""Closed-form concentration CIs for the mean of [0, 1]-valued data."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .core import Interval, Sample, check_alpha, validate_sample
from .exceptions import DomainError, EmptySampleError, ParameterError

__all__ = [
    "psi_e",
    "hoeffding_ci",
    "bernstein_ci",
    "mp_eb_ci",
    "prpl_eb_ci",
    "prpl_lambdas",
    "PrPlState",
]


def psi_e(lam):
    """(-log(1 - lam) - lam) / 4 for lam in [0, 1); works elementwise on arrays."""
    arr = np.asarray(lam, dtype=np.float64)
    if ((arr < 0) | (arr >= 1) | np.isnan(arr)).any():
        raise DomainError(f"psi_e needs 0 <= lambda < 1, got {lam!r}")
    out = (-np.log1p(-arr) - arr) / 4.0
    return float(out) if out.ndim == 0 else out


def _nonempty(sample) -> Sample:
    s = validate_sample(sample)
    if s.n == 0:
        raise EmptySampleError("a CI needs at least one observation")
    return s


def hoeffding_ci(sample, alpha: float) -> Interval:
    s = _nonempty(sample)
    alpha = check_alpha(alpha)
    half = math.sqrt(math.log(2.0 / alpha) / (2.0 * s.n))
    mu = s.mean()
    return Interval(mu - half, mu + half, alpha, s.n, "hoeffding")


def bernstein_ci(sample, alpha: float, sigma: float) -> Interval:
    """Bernstein CI with a known standard deviation ``sigma`` in (0, 1/2]."""
    s = _nonempty(sample)
    alpha = check_alpha(alpha)
    if not 0.0 < sigma <= 0.5:
        raise ParameterError(f"sigma must lie in (0, 0.5], got {sigma!r}")
    L = math.log(2.0 / alpha)
    width = 2.0 * sigma * math.sqrt(2.0 * L / s.n) + 4.0 * L / (3.0 * s.n)
    mu = s.mean()
    return Interval(mu - width / 2, mu + width / 2, alpha, s.n, "bernstein")


def mp_eb_ci(sample, alpha: float) -> Interval:
    """Empirical Bernstein CI with the unbiased variance and a union bound."""
    s = validate_sample(sample)
    if s.n < 2:
        raise EmptySampleError("the empirical Bernstein CI needs n >= 2")
    alpha = check_alpha(alpha)
    n = s.n
    L = math.log(4.0 / alpha)
    sd = float(np.std(s.values, ddof=1))
    width = 2.0 * sd * math.sqrt(2.0 * L / n) + 14.0 * L / (3.0 * (n - 1))
    mu = s.mean()
    return Interval(mu - width / 2, mu + width / 2, alpha, n, "mp-eb")


def _check_cap(cap: float) -> float:
    if not 0.0 < cap < 1.0:
        raise ParameterError(f"lambda_cap must lie in (0, 1), got {cap!r}")
    return float(cap)


class PrPlState:
    """Streaming predictable plug-in state.

    Feeding values one at a time through :meth:`update` gives bit-identical
    results to :func:`prpl_eb_ci` on the whole sample: both paths use the
    same sequential additions and numpy elementary functions.

    Parameters
    ----------
    n_target : int
        Planned sample size; the bets scale like 1/sqrt(n_target).
    alpha : float
    lambda_cap : float
        Upper clip on every bet, default 0.5. Keeps psi_e finite.
    """

    def __init__(self, n_target: int, alpha: float, lambda_cap: float = 0.5):
        if n_target < 1:
            raise ParameterError("n_target must be >= 1")
        self.n_target = int(n_target)
        self.alpha = check_alpha(alpha)
        self.lambda_cap = _check_cap(lambda_cap)
        self._log_term = math.log(2.0 / self.alpha)
        self._scale = np.float64(2.0 * self._log_term / self.n_target)
        self.t = 0
        self.sum_x = np.float64(0.0)
        self.mu_hat = np.float64(0.0)
        self.sum_d2 = np.float64(0.0)
        self.V = np.float64(0.25)
        self.sum_lambda = np.float64(0.0)
        self.sum_lambda_x = np.float64(0.0)
        self.sum_psi_term = np.float64(0.0)

    def next_lambda(self) -> float:
        return float(min(np.float64(self.lambda_cap), np.sqrt(self._scale / self.V)))

    def update(self, x: float) -> float:
        """Absorb one observation; returns the bet that was applied to it."""
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"observation {x!r} outside [0, 1]")
        x = np.float64(x)
        lam = np.minimum(np.float64(self.lambda_cap), np.sqrt(self._scale / self.V))
        d2 = (x - self.mu_hat) ** 2
        self.sum_lambda = self.sum_lambda + lam
        self.sum_lambda_x = self.sum_lambda_x + lam * x
        self.sum_psi_term = self.sum_psi_term + 4.0 * ((-np.log1p(-lam) - lam) / 4.0) * d2
        self.t += 1
        self.sum_x = self.sum_x + x
        self.mu_hat = self.sum_x / self.t
        self.sum_d2 = self.sum_d2 + d2
        self.V = (0.25 + self.sum_d2) / self.t
        return float(lam)

    def interval(self) -> Interval:
        if self.t == 0:
            raise EmptySampleError("no observations absorbed yet")
        center = self.sum_lambda_x / self.sum_lambda
        half = (self._log_term + self.sum_psi_term) / self.sum_lambda
        return Interval(float(center - half), float(center + half), self.alpha, self.t, "prpl-eb")


def _prpl_pieces(x: np.ndarray, alpha: float, n_target: int, cap: float):
    """Bets, squared plug-in residuals and psi terms, vectorized."""
    n = x.size
    t = np.arange(1, n + 1, dtype=np.float64)
    csum = np.cumsum(x)
    mu_prev = np.empty(n)
    mu_prev[0] = 0.0
    mu_prev[1:] = csum[:-1] / t[:-1]
    d2 = (x - mu_prev) ** 2
    V_prev = np.empty(n)
    V_prev[0] = 0.25
    V_prev[1:] = (0.25 + np.cumsum(d2)[:-1]) / t[:-1]
    scale = np.float64(2.0 * math.log(2.0 / alpha) / n_target)
    lam = np.minimum(np.float64(cap), np.sqrt(scale / V_prev))
    psi4 = 4.0 * ((-np.log1p(-lam) - lam) / 4.0)
    return lam, d2, mu_prev, psi4


def prpl_lambdas(sample, alpha: float, n_target: Optional[int] = None,
                 lambda_cap: float = 0.5) -> np.ndarray:
    """The predictable bet sequence; ``n_target`` defaults to the sample size."""
    s = validate_sample(sample)
    alpha = check_alpha(alpha)
    cap = _check_cap(lambda_cap)
    if s.n == 0:
        return np.empty(0)
    return _prpl_pieces(s.values, alpha, n_target or s.n, cap)[0]


def prpl_eb_ci(sample, alpha: float, lambda_cap: float = 0.5) -> Interval:
    """Predictable plug-in empirical Bernstein CI tuned to the sample size."""
    s = _nonempty(sample)
    alpha = check_alpha(alpha)
    cap = _check_cap(lambda_cap)
    x = s.values
    lam, d2, _, psi4 = _prpl_pieces(x, alpha, s.n, cap)
    # sequential cumulative sums reproduce the streaming order exactly
    sum_lam = np.cumsum(lam)[-1]
    center = np.cumsum(lam * x)[-1] / sum_lam
    half = (math.log(2.0 / alpha) + np.cumsum(psi4 * d2)[-1]) / sum_lam
    return Interval(float(center - half), float(center + half), alpha, s.n, "prpl-eb")

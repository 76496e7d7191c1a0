"""Mean estimation for a finite population sampled without replacement.

After ``t - 1`` draws with running sum ``S``, a candidate population mean
``m`` forces the remaining items to average ``m_t = (M m - S) / (M - t + 1)``;
the wealth bets on ``X_t - m_t`` instead of ``X_t - m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .betting import (
    GridConfig,
    Mixture,
    PrPlLambda,
    Fixed,
    _invert,
    bet_range,
)
from .classical import _check_cap, _prpl_pieces
from .core import Interval, Sample, Seed, check_alpha, validate_sample
from .exceptions import EmptySampleError, InfeasibleCenterError, ParameterError, TooManyError

__all__ = [
    "FinitePopulation",
    "draw_wor",
    "bernstein_serfling_ci",
    "wor_prpl_eb_ci",
    "wor_betting_ci",
    "wor_log_wealth_grid",
    "feasible_range",
    "conditional_centers",
]

FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class FinitePopulation:
    items: np.ndarray

    def __post_init__(self):
        s = validate_sample(self.items, require_nonempty=True)
        object.__setattr__(self, "items", s.values)

    @property
    def M(self) -> int:
        return int(self.items.size)

    @property
    def mu_M(self) -> float:
        return math.fsum(self.items) / self.M

    @property
    def sigma2_M(self) -> float:
        mu = self.mu_M
        return math.fsum((self.items - mu) ** 2) / self.M


def draw_wor(pop: FinitePopulation, n: int, seed) -> Sample:
    """First ``n`` items of a uniformly random permutation."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if n > pop.M:
        raise TooManyError(f"cannot draw {n} items from a population of {pop.M}")
    if not isinstance(seed, Seed):
        seed = Seed(int(seed))
    order = seed.generator().permutation(pop.M)[:n]
    vals = pop.items[order].copy()
    vals.setflags(write=False)
    return Sample(vals, f"wor M={pop.M} seed={seed.seed} rep={seed.replicate_index}")


def _check_sizes(s: Sample, M: int):
    if s.n == 0:
        raise EmptySampleError("need at least one draw")
    if M < s.n:
        raise TooManyError(f"sample of {s.n} exceeds population size {M}")


def bernstein_serfling_ci(sample, M: int, alpha: float, sigma: float) -> Interval:
    s = validate_sample(sample)
    _check_sizes(s, M)
    alpha = check_alpha(alpha)
    if sigma < 0:
        raise ParameterError("sigma must be nonnegative")
    n = s.n
    L = math.log(2.0 / alpha)
    frac = 1.0 - n / M
    half = (sigma * math.sqrt(2.0 * frac * (1.0 + 1.0 / n) * L / n)
            + (4.0 / 3.0 + math.sqrt(max(0.0, (M / (n + 1) - 1.0) * frac))) * L / n)
    mu = s.mean()
    return Interval(mu - half, mu + half, alpha, n, "bernstein-serfling")


def _wor_weights(n: int, M: int) -> np.ndarray:
    """``1 + (i - 1)/(M - i + 1) = M / (M - i + 1)`` for i = 1..n."""
    i = np.arange(1, n + 1, dtype=np.float64)
    return 1.0 + (i - 1.0) / (M - i + 1.0)


def wor_prpl_eb_ci(sample, M: int, alpha: float, lambda_cap: float = 0.5) -> Interval:
    s = validate_sample(sample)
    _check_sizes(s, M)
    alpha = check_alpha(alpha)
    cap = _check_cap(lambda_cap)
    x = s.values
    n = s.n
    lam, d2, _, psi4 = _prpl_pieces(x, alpha, n, cap)
    i = np.arange(1, n + 1, dtype=np.float64)
    prev_sum = np.concatenate([[0.0], np.cumsum(x)[:-1]])
    num = np.sum(lam * (x + prev_sum / (M - i + 1.0)))
    den = np.sum(lam * _wor_weights(n, M))
    center = num / den
    half = (math.log(2.0 / alpha) + np.sum(psi4 * d2)) / den
    return Interval(float(center - half), float(center + half), alpha, n, "wor-prpl-eb")


def feasible_range(sample, M: int):
    """Population means compatible with the draws: remaining items lie in [0, 1]."""
    s = validate_sample(sample)
    S = math.fsum(s.values)
    return S / M, (S + M - s.n) / M


def _conditional_centers(x: np.ndarray, M: int, ms: np.ndarray) -> np.ndarray:
    """``m_t`` for all t (columns) and all m (rows)."""
    n = x.size
    t = np.arange(1, n + 1, dtype=np.float64)
    prev_sum = np.concatenate([[0.0], np.cumsum(x)[:-1]])
    return (M * ms[:, None] - prev_sum[None, :]) / (M - t + 1.0)[None, :]


def conditional_centers(sample, M: int, m: float) -> np.ndarray:
    """``m_t`` for t = 1..n at a single candidate mean, checked for feasibility.

    Raises when ``m`` is already contradicted by the draws, i.e. when some
    ``m_t`` falls outside what the remaining items could average.
    """
    s = validate_sample(sample)
    _check_sizes(s, M)
    m = float(m)
    lo_f, hi_f = feasible_range(s, M)
    if not (lo_f - FEASIBILITY_TOL <= m <= hi_f + FEASIBILITY_TOL):
        raise InfeasibleCenterError(
            f"m={m!r} is incompatible with the draws; feasible means are [{lo_f!r}, {hi_f!r}]")
    return _conditional_centers(s.values, M, np.array([m]))[0]


def wor_log_wealth_grid(sample, M: int, ms, strategy, alpha: Optional[float] = None) -> np.ndarray:
    """Terminal log-wealth of the conditionally centred bets; ``+inf`` where infeasible."""
    s = validate_sample(sample)
    x = s.values
    ms = np.atleast_1d(np.asarray(ms, dtype=np.float64))
    out = np.full(ms.size, np.inf)
    lo_f, hi_f = feasible_range(s, M)
    ok = (ms >= lo_f - FEASIBILITY_TOL) & (ms <= hi_f + FEASIBILITY_TOL)
    if not ok.any() or x.size == 0:
        out[ok] = 0.0
        return out
    idx = np.flatnonzero(ok)
    per = max(1, 1_000_000 // x.size)
    eps = strategy.clip_eps
    if isinstance(strategy, PrPlLambda):
        a = strategy.alpha if strategy.alpha is not None else alpha
        lam = _prpl_pieces(x, a, strategy.n_target or x.size, strategy.cap)[0]
    for a0 in range(0, idx.size, per):
        sel = idx[a0:a0 + per]
        mt = np.clip(_conditional_centers(x, M, ms[sel]), 0.0, 1.0)
        d = x[None, :] - mt
        lo, hi = bet_range(mt, eps)
        if isinstance(strategy, PrPlLambda):
            if strategy.mode == "plus_minus":
                b = np.minimum(lam[None, :], np.minimum(hi, -lo))
                lp = np.log1p(b * d).sum(axis=1)
                lm = np.log1p(-b * d).sum(axis=1)
                out[sel] = np.logaddexp(lp, lm) - math.log(2.0)
            else:
                b = np.minimum(np.maximum(lam[None, :], lo), hi)
                out[sel] = np.log1p(b * d).sum(axis=1)
        elif isinstance(strategy, Fixed):
            b = np.minimum(np.maximum(strategy.lam, lo), hi)
            out[sel] = np.log1p(b * d).sum(axis=1)
        elif isinstance(strategy, Mixture):
            out[sel] = _wor_mixture(d, lo, hi, strategy.n_nodes)
        else:
            raise ParameterError(f"{type(strategy).__name__} is not supported without replacement")
    return out


def _wor_mixture(d: np.ndarray, lo: np.ndarray, hi: np.ndarray, K: int) -> np.ndarray:
    """Mixture bets whose nodes sit at fixed relative positions of each step's range.

    The wealth-weighted node average reproduces the mixture of node wealths
    at every step; the zero first bet is divided out as in the i.i.d. case.
    """
    u = np.linspace(0.0, 1.0, K)
    w = np.ones(K)
    w[0] = w[-1] = 0.5
    w /= w.sum()
    log_w = np.log(w)
    L = np.zeros((d.shape[0], K))
    for t in range(d.shape[1]):
        lam_t = lo[:, t, None] + (hi[:, t] - lo[:, t])[:, None] * u[None, :]
        L += np.log1p(lam_t * d[:, t, None])
    a = L + log_w
    mx = a.max(axis=1)
    lse = mx + np.log(np.exp(a - mx[:, None]).sum(axis=1))
    first_mean = ((lo[:, 0, None] + (hi[:, 0] - lo[:, 0])[:, None] * u[None, :]) * w).sum(axis=1)
    return lse - np.log1p(first_mean * d[:, 0])


def wor_betting_ci(sample, M: int, alpha: float, strategy=None,
                   grid: Optional[GridConfig] = None) -> Interval:
    s = validate_sample(sample)
    _check_sizes(s, M)
    alpha = check_alpha(alpha)
    strategy = strategy if strategy is not None else PrPlLambda()
    grid = grid or GridConfig()
    x = s.values
    n = s.n
    log_thr = math.log(1.0 / alpha)
    lo_f, hi_f = feasible_range(s, M)
    extra = [float(np.mean(x)), min(max(lo_f, 0.0), 1.0), min(max(hi_f, 0.0), 1.0)]
    if isinstance(strategy, PrPlLambda) and strategy.mode == "plus_minus":
        a = strategy.alpha if strategy.alpha is not None else alpha
        lam = _prpl_pieces(x, a, strategy.n_target or n, strategy.cap)[0]
        i = np.arange(1, n + 1, dtype=np.float64)
        prev_sum = np.concatenate([[0.0], np.cumsum(x)[:-1]])
        den = float(np.sum(lam * _wor_weights(n, M)))
        center = float(np.sum(lam * (x + prev_sum / (M - i + 1.0)))) / den
        # Fan's inequality with |X_t - m_t| <= 1 on the feasible set
        slack = (log_thr + math.log(2.0) + float(np.sum(-np.log1p(-lam) - lam))) / den
        tol = 1e-9 * (1.0 + log_thr) / den + 1e-12
        extra.append(center)

        def prefilter(ms):
            infeasible = (ms < lo_f - FEASIBILITY_TOL) | (ms > hi_f + FEASIBILITY_TOL)
            return infeasible | (ms <= center - slack - tol) | (ms >= center + slack + tol)
    else:
        def prefilter(ms):
            return (ms < lo_f - FEASIBILITY_TOL) | (ms > hi_f + FEASIBILITY_TOL)

    lo, hi, flags = _invert(lambda ms: wor_log_wealth_grid(x, M, ms, strategy, alpha),
                            log_thr, grid, extra, prefilter)
    return Interval(lo, hi, alpha, n, "wor-betting", flags)

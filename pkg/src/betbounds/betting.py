"""Testing by betting: wealth processes, bet strategies, CI and CS inversion.

The wealth against a candidate mean ``m`` is ``prod_t (1 + lam_t(m) (X_t - m))``.
It is a nonnegative martingale at the true mean, so the set of ``m`` whose
wealth stays below ``1/alpha`` is a level ``1 - alpha`` confidence set.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np

from . import _kernels
from ._dual import fan_lower_bound, maximize_sum_log
from .classical import PrPlState, prpl_lambdas
from .core import DiscreteDistribution, Interval, check_alpha, validate_sample
from .exceptions import (
    DomainError,
    EmptySampleError,
    HorizonDependentStrategyError,
    OutOfRangeError,
    ParameterError,
)

__all__ = [
    "Mixture",
    "PrPlLambda",
    "Fixed",
    "LogOptimalOracle",
    "BetStrategy",
    "GridConfig",
    "WealthState",
    "CsState",
    "bet_range",
    "mixture_nodes",
    "new_wealth_state",
    "next_bet",
    "update_wealth",
    "log_wealth_grid",
    "sup_log_wealth",
    "betting_ci",
    "betting_cs",
    "betting_cs_step",
    "regret_corrected_cs",
    "realized_regret",
]

# floor on m and 1 - m inside 1/m and 1/(1 - m), keeps the bet range finite
ENDPOINT_FLOOR = 1e-6


def _check_eps(eps):
    if not 0.0 < eps <= 1e-2:
        raise ParameterError(f"clip_eps must lie in (0, 1e-2], got {eps!r}")


@dataclass(frozen=True)
class Mixture:
    """Wealth-weighted average of constant bets on a trapezoid grid of K nodes."""

    n_nodes: int = 64
    clip_eps: float = 1e-6
    regret_constant: float = 2.0
    mode: str = "signed"

    def __post_init__(self):
        if self.n_nodes < 8:
            raise ParameterError("Mixture needs at least 8 nodes")
        _check_eps(self.clip_eps)
        if self.mode != "signed":
            raise ParameterError("Mixture bets are two-sided already; use mode='signed'")


@dataclass(frozen=True)
class PrPlLambda:
    """Predictable plug-in bets tuned to a horizon ``n_target``.

    ``n_target`` and ``alpha`` default to the sample size and the CI level.
    """

    n_target: Optional[int] = None
    cap: float = 0.5
    alpha: Optional[float] = None
    clip_eps: float = 1e-6
    regret_constant: float = 2.0
    mode: str = "plus_minus"

    def __post_init__(self):
        if not 0.0 < self.cap < 1.0:
            raise ParameterError(f"cap must lie in (0, 1), got {self.cap!r}")
        _check_eps(self.clip_eps)
        if self.mode not in ("signed", "plus_minus"):
            raise ParameterError(f"unknown wealth mode {self.mode!r}")


@dataclass(frozen=True)
class Fixed:
    lam: float
    clip_eps: float = 1e-6
    regret_constant: float = 2.0
    mode: str = "signed"

    def __post_init__(self):
        _check_eps(self.clip_eps)
        if self.mode not in ("signed", "plus_minus"):
            raise ParameterError(f"unknown wealth mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class LogOptimalOracle:
    """Constant bet maximizing E log(1 + lam (X - m)) under a known distribution."""

    dist: DiscreteDistribution
    clip_eps: float = 1e-6
    regret_constant: float = 2.0
    mode: str = "signed"

    def __post_init__(self):
        _check_eps(self.clip_eps)
        if not self.dist.in_unit_interval():
            raise ParameterError("oracle distribution must live on [0, 1]")

    def bets(self, ms) -> np.ndarray:
        lo, hi = bet_range(ms, self.clip_eps)
        lam, _, _ = maximize_sum_log(self.dist.support, self.dist.probs, ms, lo, hi)
        return lam


BetStrategy = Union[Mixture, PrPlLambda, Fixed, LogOptimalOracle]


@dataclass(frozen=True)
class GridConfig:
    """Uniform m-grid on [0, 1] plus bisection tolerance for the boundaries."""

    grid_points: int = 2048
    refine_tol: float = 1e-6

    def __post_init__(self):
        if self.grid_points < 2:
            raise ParameterError("grid_points must be >= 2")
        if not self.refine_tol > 0:
            raise ParameterError("refine_tol must be positive")

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_points)

    @staticmethod
    def threshold(alpha: float) -> float:
        return 1.0 / alpha


def bet_range(m, clip_eps: float = 1e-6):
    """Clipped admissible bets ``[-(1-eps)/(1-m), (1-eps)/m]``."""
    m = np.asarray(m, dtype=np.float64)
    lo = -(1.0 - clip_eps) / np.maximum(1.0 - m, ENDPOINT_FLOOR)
    hi = (1.0 - clip_eps) / np.maximum(m, ENDPOINT_FLOOR)
    return lo, hi


def mixture_nodes(m, n_nodes: int, clip_eps: float = 1e-6):
    """Node bets ``(M, K)`` and normalized log trapezoid weights ``(K,)``."""
    lo, hi = bet_range(np.atleast_1d(m), clip_eps)
    u = np.linspace(0.0, 1.0, n_nodes)
    lam = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    w = np.ones(n_nodes)
    w[0] = w[-1] = 0.5
    w /= w.sum()
    return lam, np.log(w)


def _clip_bet(lam, m, eps):
    lo, hi = bet_range(m, eps)
    return np.minimum(np.maximum(lam, lo), hi)


# ---------------------------------------------------------------------------
# single-m wealth recursion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WealthState:
    """Wealth against one candidate mean ``m`` after ``t`` observations.

    ``log_wealth`` is a float in signed mode and a ``(log W+, log W-)`` pair
    in plus_minus mode, where the reported wealth is ``(W+ + W-) / 2``.
    """

    m: float
    t: int = 0
    mode: str = "signed"
    log_wealth: Union[float, Tuple[float, float]] = 0.0
    node_log_wealths: Optional[np.ndarray] = None
    last_bet: float = 0.0
    prpl: Optional[PrPlState] = field(default=None, repr=False)
    oracle_bet: Optional[float] = None

    @property
    def total_log_wealth(self) -> float:
        if self.mode == "signed":
            return float(self.log_wealth)
        lp, lm = self.log_wealth
        return float(np.logaddexp(lp, lm) - math.log(2.0))

    @property
    def wealth(self) -> float:
        return math.exp(self.total_log_wealth)


def new_wealth_state(m: float, strategy: BetStrategy, alpha: Optional[float] = None,
                     n_target: Optional[int] = None) -> WealthState:
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"candidate mean {m!r} outside [0, 1]")
    mode = strategy.mode
    log_w = (0.0, 0.0) if mode == "plus_minus" else 0.0
    nodes = prpl = oracle = None
    if isinstance(strategy, Mixture):
        nodes = np.zeros(strategy.n_nodes)
    elif isinstance(strategy, PrPlLambda):
        a = strategy.alpha if strategy.alpha is not None else alpha
        nt = strategy.n_target if strategy.n_target is not None else n_target
        if a is None or nt is None:
            raise ParameterError("PrPlLambda needs alpha and n_target")
        prpl = PrPlState(nt, a, strategy.cap)
    elif isinstance(strategy, LogOptimalOracle):
        oracle = float(strategy.bets(np.array([m]))[0])
    return WealthState(m=float(m), mode=mode, log_wealth=log_w, node_log_wealths=nodes,
                       prpl=prpl, oracle_bet=oracle)


def next_bet(state: WealthState, strategy: BetStrategy) -> float:
    """Bet for the next observation, clipped into the admissible range."""
    m, eps = state.m, strategy.clip_eps
    if isinstance(strategy, Mixture):
        if state.t == 0:
            return 0.0
        lam, log_w = mixture_nodes(m, strategy.n_nodes, eps)
        a = state.node_log_wealths + log_w
        e = np.exp(a - a.max())
        bet = float(np.dot(e, lam[0]) / e.sum())
    elif isinstance(strategy, PrPlLambda):
        bet = state.prpl.next_lambda()
    elif isinstance(strategy, Fixed):
        bet = float(strategy.lam)
    elif isinstance(strategy, LogOptimalOracle):
        bet = state.oracle_bet
    else:
        raise ParameterError(f"unknown strategy {strategy!r}")
    if state.mode == "plus_minus":
        # both signs are played, so the bet must be admissible either way
        lo, hi = bet_range(m, eps)
        return float(min(abs(bet), hi, -lo))
    return float(_clip_bet(bet, m, eps))


def update_wealth(state: WealthState, x: float, strategy: BetStrategy) -> WealthState:
    if not 0.0 <= x <= 1.0:
        raise OutOfRangeError(state.t, x)
    bet = next_bet(state, strategy)
    d = x - state.m
    if state.mode == "plus_minus":
        lp, lm = state.log_wealth
        log_w = (lp + float(np.log1p(bet * d)), lm + float(np.log1p(-bet * d)))
    else:
        log_w = float(state.log_wealth) + float(np.log1p(bet * d))
    nodes = state.node_log_wealths
    if isinstance(strategy, Mixture):
        lam, _ = mixture_nodes(state.m, strategy.n_nodes, strategy.clip_eps)
        nodes = nodes + np.log1p(lam[0] * d)
    prpl = state.prpl
    if prpl is not None:
        prpl = copy.copy(prpl)
        prpl.update(x)
    return replace(state, t=state.t + 1, log_wealth=log_w, node_log_wealths=nodes,
                   last_bet=bet, prpl=prpl)


# ---------------------------------------------------------------------------
# vectorized terminal wealth over many m
# ---------------------------------------------------------------------------


def _atoms(x: np.ndarray):
    return np.unique(x, return_counts=True)


def _chunks(total: int, per: int):
    step = max(1, per)
    for a in range(0, total, step):
        yield slice(a, min(total, a + step))


def _mixture_log_wealth(x: np.ndarray, ms: np.ndarray, strategy: Mixture) -> np.ndarray:
    """Terminal log-wealth of the Mixture bets; order enters only via X_1.

    The node-weighted average bet reproduces the mixture of constant-bet
    wealths step by step, except that the first bet is zero instead of the
    prior mean of the nodes; dividing out that one factor gives the
    recursion's wealth exactly.
    """
    vals, counts = _atoms(x)
    out = np.empty(ms.size)
    K = strategy.n_nodes
    per = max(1, 2_000_000 // (K * vals.size))
    for sl in _chunks(ms.size, per):
        m = ms[sl]
        lam, log_w = mixture_nodes(m, K, strategy.clip_eps)
        d = vals[None, :] - m[:, None]
        L = np.log1p(lam[:, :, None] * d[:, None, :]) @ counts.astype(np.float64)
        a = L + log_w
        mx = a.max(axis=1)
        lse = mx + np.log(np.exp(a - mx[:, None]).sum(axis=1))
        prior_mean = (np.exp(log_w) * lam).sum(axis=1)
        out[sl] = lse - np.log1p(prior_mean * (x[0] - m))
    return out


def _prpl_bets(x: np.ndarray, strategy: PrPlLambda, alpha: Optional[float]) -> np.ndarray:
    a = strategy.alpha if strategy.alpha is not None else alpha
    if a is None:
        raise ParameterError("PrPlLambda needs alpha")
    return prpl_lambdas(x, a, strategy.n_target or x.size, strategy.cap)


def _signed_sum(x, bets_tm, ms):
    """``sum_t log1p(bet[t] (x_t - m))`` for every m; ``bets_tm`` is (T,) or (M, T)."""
    out_p = np.empty(ms.size)
    out_m = np.empty(ms.size)
    per = max(1, 2_000_000 // max(1, x.size))
    for sl in _chunks(ms.size, per):
        d = x[None, :] - ms[sl, None]
        b = bets_tm if bets_tm.ndim == 1 else bets_tm[sl]
        out_p[sl] = np.log1p(b * d).sum(axis=1)
        out_m[sl] = np.log1p(-b * d).sum(axis=1)
    return out_p, out_m


def log_wealth_grid(sample, ms, strategy: BetStrategy, alpha: Optional[float] = None,
                    mode: Optional[str] = None) -> np.ndarray:
    """Terminal log-wealth ``log W_n(m)`` for every ``m`` in ``ms``."""
    x = validate_sample(sample).values
    ms = np.atleast_1d(np.asarray(ms, dtype=np.float64))
    mode = mode or strategy.mode
    if x.size == 0:
        return np.zeros(ms.size)
    if isinstance(strategy, Mixture):
        return _mixture_log_wealth(x, ms, strategy)
    eps = strategy.clip_eps
    if isinstance(strategy, PrPlLambda):
        lam = _prpl_bets(x, strategy, alpha)
        if mode == "plus_minus":
            lo, hi = bet_range(ms, eps)
            bets = np.minimum(lam[None, :], np.minimum(hi, -lo)[:, None])
        else:
            bets = _clip_bet(lam[None, :], ms[:, None], eps)
    else:
        if isinstance(strategy, Fixed):
            const = np.full(ms.size, float(strategy.lam))
        else:
            const = strategy.bets(ms)
        if mode == "plus_minus":
            lo, hi = bet_range(ms, eps)
            const = np.minimum(np.abs(const), np.minimum(hi, -lo))
        else:
            const = _clip_bet(const, ms, eps)
        # constant bets: order does not matter, sum over atoms
        vals, counts = _atoms(x)
        d = vals[None, :] - ms[:, None]
        lp = (np.log1p(const[:, None] * d) * counts).sum(axis=1)
        if mode != "plus_minus":
            return lp
        lm = (np.log1p(-const[:, None] * d) * counts).sum(axis=1)
        return np.logaddexp(lp, lm) - math.log(2.0)
    lp, lm = _signed_sum(x, bets, ms)
    if mode == "plus_minus":
        return np.logaddexp(lp, lm) - math.log(2.0)
    return lp


def _moment_sums(x: np.ndarray, ms: np.ndarray):
    """``sum (x - m)`` and ``sum (x - m)^2`` for every m, from power sums."""
    n = x.size
    s = math.fsum(x)
    mu = s / n
    ss = math.fsum((x - mu) ** 2)
    s1 = n * (mu - ms)
    s2 = ss + n * (mu - ms) ** 2
    return s1, s2


_SAFETY = 1e-9


def _reject_prefilter(x: np.ndarray, strategy: BetStrategy, alpha: Optional[float],
                      thr: float) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    """A cheap test that only ever flags m whose exact log-wealth is >= thr.

    It rests on Fan's inequality, so it needs bets below 1 in magnitude.
    """
    margin = _SAFETY * (1.0 + abs(thr))
    if isinstance(strategy, PrPlLambda) and strategy.mode == "plus_minus":
        lam = _prpl_bets(x, strategy, alpha)
        sl = float(np.sum(lam))
        center = float(np.dot(lam, x)) / sl
        # W >= W+/2 >= exp(sum lam (x - m) - 4 sum psi(lam))/2 and the mirror for W-
        slack = (thr + math.log(2.0) + float(np.sum(-np.log1p(-lam) - lam))) / sl
        tol = margin / sl + 1e-12

        def reject(ms):
            return (ms <= center - slack - tol) | (ms >= center + slack + tol)

        return reject
    if isinstance(strategy, Mixture):
        K = strategy.n_nodes

        def reject(ms):
            lam, log_w = mixture_nodes(ms, K, strategy.clip_eps)
            s1, s2 = _moment_sums(x, ms)
            usable = np.abs(lam) < 1.0
            lb = fan_lower_bound(np.where(usable, lam, 0.0), s1[:, None], s2[:, None]) + log_w
            lb = np.where(usable, lb, -np.inf).max(axis=1)
            prior_mean = (np.exp(log_w) * lam).sum(axis=1)
            lb = lb - np.log1p(prior_mean * (x[0] - ms))
            return lb >= thr + margin

        return reject
    if isinstance(strategy, Fixed) and strategy.mode == "signed" and abs(strategy.lam) < 1.0:
        lam = float(strategy.lam)

        def reject(ms):
            b = _clip_bet(np.full(ms.size, lam), ms, strategy.clip_eps)
            s1, s2 = _moment_sums(x, ms)
            return fan_lower_bound(b, s1, s2) >= thr + margin

        return reject
    return None


# ---------------------------------------------------------------------------
# grid inversion
# ---------------------------------------------------------------------------


def _invert(log_wealth_fn, log_thr: float, grid: GridConfig, extra_points=(),
            prefilter=None):
    """Hull of ``{m : log_wealth_fn(m) < log_thr}`` with bisected boundaries.

    Each boundary is narrowed between the extreme accepted grid point and its
    rejected neighbour until they are ``refine_tol`` apart; the rejected end
    is reported, so the hull never shrinks below the exact acceptance set
    on that cell. Returns ``(lower, upper, flags)``.
    """
    ms = grid.grid()
    extra = [float(e) for e in extra_points if 0.0 <= e <= 1.0]
    if extra:
        ms = np.unique(np.concatenate([ms, extra]))

    def evaluate(pts):
        lw = np.full(pts.size, np.inf)
        keep = np.ones(pts.size, dtype=bool)
        if prefilter is not None:
            keep = ~prefilter(pts)
        if keep.any():
            lw[keep] = log_wealth_fn(pts[keep])
        return lw

    lw = evaluate(ms)
    acc = lw < log_thr
    if not acc.any():
        if not np.isfinite(lw).any():
            lw = log_wealth_fn(ms)
        j = int(np.argmin(lw))
        return float(ms[j]), float(ms[j]), ("empty_acceptance",)
    idx = np.flatnonzero(acc)
    i0, i1 = int(idx[0]), int(idx[-1])

    def bisect(good, bad):
        while abs(bad - good) > grid.refine_tol:
            mid = 0.5 * (good + bad)
            if evaluate(np.array([mid]))[0] < log_thr:
                good = mid
            else:
                bad = mid
        return bad

    lower = float(ms[0]) if i0 == 0 else float(bisect(ms[i0], ms[i0 - 1]))
    upper = float(ms[-1]) if i1 == ms.size - 1 else float(bisect(ms[i1], ms[i1 + 1]))
    return lower, upper, ()


def _method_tag(strategy: BetStrategy) -> str:
    return {
        Mixture: "betting-mixture",
        PrPlLambda: "betting-prpl",
        Fixed: "betting-fixed",
        LogOptimalOracle: "betting-oracle",
    }[type(strategy)]


def betting_ci(sample, alpha: float, strategy: Optional[BetStrategy] = None,
               grid: Optional[GridConfig] = None) -> Interval:
    """Hull of the m whose terminal wealth stays below 1/alpha."""
    s = validate_sample(sample)
    alpha = check_alpha(alpha)
    strategy = strategy if strategy is not None else Mixture()
    grid = grid or GridConfig()
    tag = _method_tag(strategy)
    if s.n == 0:
        return Interval(0.0, 1.0, alpha, 0, tag)
    x = s.values
    log_thr = math.log(1.0 / alpha)
    extra = [float(np.mean(x))]
    if isinstance(strategy, PrPlLambda):
        lam = _prpl_bets(x, strategy, alpha)
        extra.append(float(np.dot(lam, x) / np.sum(lam)))
    lo, hi, flags = _invert(
        lambda ms: log_wealth_grid(x, ms, strategy, alpha),
        log_thr, grid, extra, _reject_prefilter(x, strategy, alpha, log_thr))
    return Interval(lo, hi, alpha, s.n, tag, flags)


def sup_log_wealth(sample, m, clip_eps: float = 1e-6):
    """Best constant bet in hindsight and its log-wealth.

    ``m`` may be a scalar or an array; the return matches.
    """
    s = validate_sample(sample)
    if s.n == 0:
        raise EmptySampleError("sup_log_wealth needs at least one observation")
    m_arr = np.atleast_1d(np.asarray(m, dtype=np.float64))
    if ((m_arr < 0) | (m_arr > 1) | np.isnan(m_arr)).any():
        raise DomainError(f"candidate mean {m!r} outside [0, 1]")
    vals, counts = _atoms(s.values)
    lo, hi = bet_range(m_arr, clip_eps)
    lam, value, _ = maximize_sum_log(vals, counts.astype(np.float64), m_arr, lo, hi)
    if np.ndim(m) == 0:
        return float(lam[0]), float(value[0])
    return lam, value


def regret_corrected_cs(sample, alpha: float, r_n: float,
                        grid: Optional[GridConfig] = None, clip_eps: float = 1e-6) -> Interval:
    """Hull of ``{m : sup_lam log W_n^lam(m) < log(1/alpha) + r_n}``."""
    s = validate_sample(sample)
    if s.n == 0:
        raise EmptySampleError("regret_corrected_cs needs at least one observation")
    alpha = check_alpha(alpha)
    if r_n < 0:
        raise ParameterError("r_n must be nonnegative")
    grid = grid or GridConfig()
    log_thr = math.log(1.0 / alpha) + r_n
    if not math.isfinite(log_thr):
        return Interval(0.0, 1.0, alpha, s.n, "regret-corrected")
    x = s.values
    probe = np.linspace(-0.99, 0.99, 45)
    margin = _SAFETY * (1.0 + abs(log_thr))

    def prefilter(ms):
        s1, s2 = _moment_sums(x, ms)
        lb = fan_lower_bound(probe[None, :], s1[:, None], s2[:, None]).max(axis=1)
        return lb >= log_thr + margin

    lo, hi, flags = _invert(lambda ms: sup_log_wealth(x, ms, clip_eps)[1], log_thr, grid,
                            [float(np.mean(x))], prefilter)
    return Interval(lo, hi, alpha, s.n, "regret-corrected", flags)


def realized_regret(sample, m: float, strategy: BetStrategy,
                    alpha: Optional[float] = None) -> float:
    """Shortfall of the signed wealth of ``strategy`` against the best constant bet."""
    s = validate_sample(sample, require_nonempty=True)
    _, best = sup_log_wealth(s, m, strategy.clip_eps)
    own = log_wealth_grid(s, [m], strategy, alpha, mode="signed")[0]
    return float(best - own)


# ---------------------------------------------------------------------------
# confidence sequence
# ---------------------------------------------------------------------------


class CsState:
    """Running betting CS over a fixed m-grid.

    Points are rejected for good once their wealth reaches 1/alpha; the
    reported interval is the grid hull of the surviving points (widened to
    the rejected neighbours) intersected with every earlier interval.
    """

    def __init__(self, alpha: float, strategy: Optional[BetStrategy] = None,
                 grid: Optional[GridConfig] = None, keep_history: bool = True,
                 points=None):
        self.alpha = check_alpha(alpha)
        self.strategy = strategy if strategy is not None else Mixture()
        if isinstance(self.strategy, PrPlLambda):
            raise HorizonDependentStrategyError(
                "PrPlLambda bets depend on the horizon; a CS needs Mixture or Fixed bets")
        if self.strategy.mode != "signed":
            raise ParameterError("the CS uses signed wealth")
        self.grid = grid or GridConfig()
        self.ms = self.grid.grid() if points is None else np.asarray(points, dtype=np.float64)
        self.log_thr = math.log(1.0 / self.alpha)
        self._init_arrays()
        self.t = 0
        self.running_interval = Interval(0.0, 1.0, self.alpha, 0, "betting-cs")
        self.keep_history = keep_history
        self.history = [] if keep_history else None

    def step(self, x: float) -> Interval:
        if not 0.0 <= x <= 1.0 or x != x:
            raise OutOfRangeError(self.t, x)
        self.t += 1
        if isinstance(self.strategy, Mixture):
            _kernels.mixture_step(self._L, self._lam, self._log_w, self.log_wealth,
                                  self.active, self.ms, float(x), self.t, self.log_thr)
        else:
            _kernels.constant_step(self._bets, self.log_wealth, self.active, self.ms,
                                   float(x), self.log_thr)
        if self.history is not None:
            self.history.append(float(x))
        lo, hi, empty = _kernels.outer_hull(self.active, self.ms, self.log_wealth)
        inst = Interval(float(lo), float(hi), self.alpha, self.t, "betting-cs",
                        ("empty_acceptance",) if empty else ())
        prev = self.running_interval
        self.running_interval = replace(prev.intersect(inst), n=self.t)
        return self.running_interval

    def run(self, xs) -> Tuple[np.ndarray, np.ndarray]:
        """Absorb a whole stream in compiled code; returns running (lower, upper)."""
        xs = validate_sample(xs).values
        out_lo = np.empty(xs.size)
        out_hi = np.empty(xs.size)
        if xs.size == 0:
            return out_lo, out_hi
        if self.t != 0:
            # resume from the current running interval through the step path
            for i, x in enumerate(xs):
                iv = self.step(x)
                out_lo[i], out_hi[i] = iv.lower, iv.upper
            return out_lo, out_hi
        if isinstance(self.strategy, Mixture):
            _kernels.mixture_path(np.ascontiguousarray(xs), self._L, self._lam, self._log_w,
                                  self.log_wealth, self.active, self.ms, self.log_thr,
                                  out_lo, out_hi)
        else:
            _kernels.constant_path(np.ascontiguousarray(xs), self._bets, self.log_wealth,
                                   self.active, self.ms, self.log_thr, out_lo, out_hi)
        self.t = xs.size
        if self.history is not None:
            self.history.extend(xs.tolist())
        self.running_interval = Interval(float(out_lo[-1]), float(out_hi[-1]), self.alpha,
                                         self.t, "betting-cs")
        return out_lo, out_hi

    def refined_interval(self) -> Interval:
        """Sharpen the current boundaries by replaying the stored history.

        Bisection between the outermost surviving grid point and its rejected
        neighbour, applying the same permanent-rejection rule along the path.
        """
        if self.history is None:
            raise ParameterError("history was not retained")
        if self.t == 0:
            return self.running_interval
        xs = np.asarray(self.history)
        idx = np.flatnonzero(self.active)
        if idx.size == 0:
            return self.running_interval

        def ever_rejected(m):
            st = CsState(self.alpha, self.strategy, keep_history=False, points=[m])
            st.run(xs)
            return not st.active[0]

        def bisect(good, bad):
            while abs(bad - good) > self.grid.refine_tol:
                mid = 0.5 * (good + bad)
                if ever_rejected(mid):
                    bad = mid
                else:
                    good = mid
            return bad

        i0, i1 = int(idx[0]), int(idx[-1])
        lo = self.ms[0] if i0 == 0 else bisect(self.ms[i0], self.ms[i0 - 1])
        hi = self.ms[-1] if i1 == self.ms.size - 1 else bisect(self.ms[i1], self.ms[i1 + 1])
        run = self.running_interval
        return Interval(max(run.lower, float(lo)), min(run.upper, float(hi)), self.alpha,
                        self.t, "betting-cs", run.flags)

    def _init_arrays(self):
        G = self.ms.size
        self.log_wealth = np.zeros(G)
        self.active = np.ones(G, dtype=bool)
        eps = self.strategy.clip_eps
        if isinstance(self.strategy, Mixture):
            lam, log_w = mixture_nodes(self.ms, self.strategy.n_nodes, eps)
            self._lam = np.ascontiguousarray(lam)
            self._log_w = log_w
            self._L = np.zeros_like(self._lam)
        else:
            if isinstance(self.strategy, Fixed):
                bets = np.full(G, float(self.strategy.lam))
            else:
                bets = self.strategy.bets(self.ms)
            self._bets = _clip_bet(bets, self.ms, eps)


def betting_cs_step(cs: CsState, x: float, alpha: Optional[float] = None,
                    strategy: Optional[BetStrategy] = None) -> Tuple[CsState, Interval]:
    """Functional wrapper around :meth:`CsState.step` (the state is updated in place)."""
    if alpha is not None and alpha != cs.alpha:
        raise ParameterError("alpha differs from the one the CS was built with")
    if strategy is not None and strategy != cs.strategy:
        if isinstance(strategy, PrPlLambda):
            raise HorizonDependentStrategyError("PrPlLambda cannot drive a CS")
        raise ParameterError("strategy differs from the one the CS was built with")
    iv = cs.step(x)
    return cs, iv


def betting_cs(sample, alpha: float, strategy: Optional[BetStrategy] = None,
               grid: Optional[GridConfig] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Running CS bounds after each observation of ``sample``."""
    cs = CsState(alpha, strategy, grid, keep_history=False)
    return cs.run(sample)

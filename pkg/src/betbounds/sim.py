"""Seeded Monte Carlo experiments: coverage, widths, bounds and stopping times.

Replicate ``r`` always draws from the stream ``Seed(seed, r)``, so results do
not depend on how replicates are split across worker processes. Workers are
capped by the ``BETBOUNDS_THREADS`` environment variable (default 1).
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .betting import CsState, GridConfig, Mixture, PrPlLambda, betting_ci
from .classical import bernstein_ci, hoeffding_ci, mp_eb_ci, prpl_eb_ci
from .core import (
    Bernoulli,
    GaussianFamily,
    Seed,
    draw_sample,
    format_float,
)
from .exceptions import AllCensoredError, ParameterError, UnsupportedDistributionError
from .klinf import (
    a_n_alpha,
    ci_width_lower_bound,
    gaussian_lower_bound,
    kl_inf_inverse,
    oracle_ci_width,
)
from .wor import FinitePopulation, bernstein_serfling_ci, draw_wor, wor_betting_ci, wor_prpl_eb_ci

__all__ = [
    "ExperimentSpec",
    "MethodSummary",
    "EffectiveWidthReport",
    "SecondOrderReport",
    "LimitingWidthResult",
    "METHODS",
    "coverage_experiment",
    "width_curve",
    "lower_vs_oracle_curve",
    "effective_width_estimate",
    "cs_width_bound",
    "fit_cs_constant",
    "cs_miscoverage",
    "limiting_width_target",
    "limiting_width_check",
    "second_order_statistic",
    "rows_to_csv",
    "worker_count",
]

IID_METHODS = ("hoeffding", "bernstein", "mp-eb", "prpl-eb", "betting-mixture", "betting-prpl")
WOR_METHODS = ("bernstein-serfling", "wor-prpl-eb", "wor-betting")
METHODS = IID_METHODS + WOR_METHODS


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("BETBOUNDS_THREADS", "1")))
    except ValueError:
        return 1


def _true_mean(dist) -> float:
    return dist.mu_M if isinstance(dist, FinitePopulation) else dist.mean


def _true_sd(dist) -> float:
    if isinstance(dist, FinitePopulation):
        return math.sqrt(dist.sigma2_M)
    return math.sqrt(dist.variance)


@dataclass(frozen=True)
class ExperimentSpec:
    dist: object
    methods: Sequence[str]
    n_grid: Sequence[int]
    alpha: float = 0.05
    replicates: int = 200
    seed: Union[Seed, int] = 0
    n_max: int = 100_000
    grid: GridConfig = field(default_factory=GridConfig)
    mixture_nodes: int = 64

    def __post_init__(self):
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        ns = list(self.n_grid)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
            raise ParameterError("n_grid must be a strictly increasing list of positive counts")
        if isinstance(self.dist, GaussianFamily):
            raise UnsupportedDistributionError("Monte Carlo experiments need [0, 1] data")
        wor = isinstance(self.dist, FinitePopulation)
        for m in self.methods:
            allowed = WOR_METHODS if wor else IID_METHODS
            if m not in allowed:
                raise ParameterError(f"method {m!r} is not available here; choose from {allowed}")
        if wor and ns[-1] > self.dist.M:
            raise ParameterError("n_grid exceeds the population size")
        if not isinstance(self.seed, Seed):
            object.__setattr__(self, "seed", Seed(int(self.seed)))


def build_interval(method: str, sample, spec: ExperimentSpec):
    a = spec.alpha
    d = spec.dist
    if method == "hoeffding":
        return hoeffding_ci(sample, a)
    if method == "bernstein":
        return bernstein_ci(sample, a, min(0.5, max(_true_sd(d), 1e-300)))
    if method == "mp-eb":
        return mp_eb_ci(sample, a)
    if method == "prpl-eb":
        return prpl_eb_ci(sample, a)
    if method == "betting-mixture":
        return betting_ci(sample, a, Mixture(spec.mixture_nodes), spec.grid)
    if method == "betting-prpl":
        return betting_ci(sample, a, PrPlLambda(), spec.grid)
    if method == "bernstein-serfling":
        return bernstein_serfling_ci(sample, d.M, a, _true_sd(d))
    if method == "wor-prpl-eb":
        return wor_prpl_eb_ci(sample, d.M, a)
    if method == "wor-betting":
        return wor_betting_ci(sample, d.M, a, PrPlLambda(), spec.grid)
    raise ParameterError(f"unknown method {method!r}")


def _draw(spec: ExperimentSpec, n: int, r: int):
    seed = spec.seed.child(r)
    if isinstance(spec.dist, FinitePopulation):
        return draw_wor(spec.dist, n, seed)
    return draw_sample(spec.dist, n, seed)


def _replicate_block(spec: ExperimentSpec, n: int, start: int, stop: int):
    """Containment flags and widths for replicates ``start..stop-1``."""
    mu = _true_mean(spec.dist)
    k = len(spec.methods)
    cover = np.zeros((stop - start, k), dtype=bool)
    width = np.zeros((stop - start, k))
    for i, r in enumerate(range(start, stop)):
        sample = _draw(spec, n, r)
        for j, m in enumerate(spec.methods):
            iv = build_interval(m, sample, spec)
            cover[i, j] = iv.contains(mu)
            width[i, j] = iv.clipped().width
    return cover, width


def _map_blocks(fn, spec, n, reps):
    workers = worker_count()
    if workers == 1 or reps < 2:
        return [fn(spec, n, 0, reps)]
    bounds = np.linspace(0, reps, min(workers, reps) * 4 + 1).astype(int)
    jobs = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(fn, spec, n, a, b) for a, b in jobs]
        # merge strictly in replicate order
        return [f.result() for f in futs]


@dataclass(frozen=True)
class MethodSummary:
    method: str
    n: int
    replicates: int
    covered: int
    coverage: float
    width_q25: float
    width_median: float
    width_q75: float
    width_mean: float

    def min_coverage(self, alpha: float) -> float:
        """``1 - alpha`` minus three Monte Carlo standard errors."""
        return 1 - alpha - 3 * math.sqrt(alpha * (1 - alpha) / self.replicates)


def coverage_experiment(spec: ExperimentSpec) -> List[MethodSummary]:
    out = []
    for n in spec.n_grid:
        parts = _map_blocks(_replicate_block, spec, n, spec.replicates)
        cover = np.concatenate([p[0] for p in parts])
        width = np.concatenate([p[1] for p in parts])
        for j, m in enumerate(spec.methods):
            w = width[:, j]
            q25, q50, q75 = np.quantile(w, [0.25, 0.5, 0.75])
            c = int(cover[:, j].sum())
            out.append(MethodSummary(m, n, spec.replicates, c, c / spec.replicates,
                                     float(q25), float(q50), float(q75), float(w.mean())))
    return out


def width_curve(spec: ExperimentSpec) -> List[dict]:
    """One row per (n, method): median width with quartiles."""
    return [
        {"n": s.n, "method": s.method, "median_width": s.width_median,
         "q25": s.width_q25, "q75": s.width_q75}
        for s in coverage_experiment(spec)
    ]


def lower_vs_oracle_curve(family, n_grid: Sequence[int], alpha: float) -> List[dict]:
    """Lower bound, oracle width and their ratios (direct and doubled)."""
    a_n_alpha(1, alpha)  # fail early on levels where the bound is undefined
    rows = []
    for n in n_grid:
        if isinstance(family, GaussianFamily):
            lower = gaussian_lower_bound(family.sigma, n, alpha)
        elif isinstance(family, Bernoulli):
            lower = ci_width_lower_bound(family, n, alpha).w_star
        else:
            raise UnsupportedDistributionError("family must be Bernoulli or Gaussian")
        oracle = oracle_ci_width(family, n, alpha)
        ratio = oracle / lower
        rows.append({"n": n, "lower": lower, "oracle": oracle, "ratio": ratio,
                     "ratio_factor2": 2.0 * ratio})
    return rows


# ---------------------------------------------------------------------------
# confidence sequences
# ---------------------------------------------------------------------------


def _cs_widths(dist, n: int, seed: Seed, alpha, strategy, grid):
    x = draw_sample(dist, n, seed).values
    cs = CsState(alpha, strategy, grid, keep_history=False)
    lo, hi = cs.run(x)
    return lo, hi


def _miscoverage_block(args, n, start, stop):
    dist, alpha, strategy, grid, seed = args
    mu = dist.mean
    out = np.zeros(stop - start, dtype=bool)
    for i, r in enumerate(range(start, stop)):
        lo, hi = _cs_widths(dist, n, seed.child(r), alpha, strategy, grid)
        out[i] = bool(((lo > mu) | (hi < mu)).any())
    return out


def cs_miscoverage(dist, alpha: float, horizon: int, replicates: int, seed=0,
                   strategy=None, grid: Optional[GridConfig] = None) -> dict:
    """Fraction of streams whose running CS ever excludes the true mean."""
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    strategy = strategy or Mixture()
    grid = grid or GridConfig(512)
    parts = _map_blocks(_miscoverage_block, (dist, alpha, strategy, grid, seed), horizon,
                        replicates)
    miss = np.concatenate(parts)
    rate = float(miss.mean())
    se = math.sqrt(alpha * (1 - alpha) / replicates)
    return {"replicates": replicates, "misses": int(miss.sum()), "miscoverage": rate,
            "limit": alpha + 3 * se}


@dataclass
class EffectiveWidthReport:
    w_grid: np.ndarray
    mean_T_w: np.ndarray
    censored: np.ndarray  # True where some replicate never reached the width
    reached: np.ndarray   # replicates that did reach it
    w_e: Dict[int, float]
    monotone_paths: bool

    def rows(self) -> List[dict]:
        return [{"w": float(w), "mean_T_w": float(t), "censored": bool(c), "reached": int(k)}
                for w, t, c, k in zip(self.w_grid, self.mean_T_w, self.censored, self.reached)]


def _stopping_block(args, n_max, start, stop):
    dist, alpha, strategy, grid, seed, w_grid = args
    T = np.zeros((stop - start, w_grid.size))
    hit = np.zeros((stop - start, w_grid.size), dtype=bool)
    mono = True
    for i, r in enumerate(range(start, stop)):
        lo, hi = _cs_widths(dist, n_max, seed.child(r), alpha, strategy, grid)
        width = hi - lo
        mono &= bool(np.all(np.diff(width) <= 0.0))
        for j, w in enumerate(w_grid):
            idx = np.flatnonzero(width <= w)
            if idx.size:
                T[i, j] = idx[0] + 1
                hit[i, j] = True
            else:
                T[i, j] = n_max
    return T, hit, mono


def effective_width_estimate(dist, strategy=None, alpha: float = 0.05, w_grid=None,
                             replicates: int = 500, n_max: int = 100_000, seed=0,
                             grid: Optional[GridConfig] = None,
                             n_query: Sequence[int] = (), allow_censored: bool = False
                             ) -> EffectiveWidthReport:
    """Mean first time the running CS width drops to ``w``, for each ``w``.

    Stopping times are censored at ``n_max``; the mean for a censored ``w`` is
    only a lower bound and never counts towards ``w_e(n)``.
    """
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    strategy = strategy or Mixture()
    grid = grid or GridConfig(512)
    if w_grid is None:
        w_grid = np.geomspace(1.0, 1e-3, 20)
    w_grid = np.asarray(w_grid, dtype=np.float64)
    if np.any(np.diff(w_grid) >= 0):
        raise ParameterError("w_grid must be strictly decreasing")
    parts = _map_blocks(_stopping_block, (dist, alpha, strategy, grid, seed, w_grid), n_max,
                        replicates)
    T = np.concatenate([p[0] for p in parts])
    hit = np.concatenate([p[1] for p in parts])
    mono = all(p[2] for p in parts)
    reached = hit.sum(axis=0)
    if not allow_censored and (reached == 0).any():
        raise AllCensoredError(float(w_grid[int(np.argmax(reached == 0))]))
    mean_T = T.mean(axis=0)
    censored = reached < T.shape[0]
    w_e = {}
    for n in n_query:
        ok = (mean_T <= n) & ~censored
        w_e[int(n)] = float(w_grid[ok].min()) if ok.any() else float("nan")
    return EffectiveWidthReport(w_grid, mean_T, censored, reached, w_e, mono)


def cs_width_bound(dist, n: int, alpha: float, C: float) -> float:
    """``2 max(KL+inv(b) - mu, mu - KL-inv(b))`` at ``b = (2 log(n^2/alpha) + 2C)/n``."""
    level = (2.0 * math.log(n * n / alpha) + 2.0 * C) / n
    mu = dist.mean
    up = kl_inf_inverse(dist, level, "plus") - mu
    down = mu - kl_inf_inverse(dist, level, "minus")
    return 2.0 * max(up, down)


def fit_cs_constant(dist, n: int, alpha: float, w_e: float, tol: float = 1e-6) -> float:
    """Smallest ``C >= 0`` with ``cs_width_bound(n, C) >= w_e``."""
    if cs_width_bound(dist, n, alpha, 0.0) >= w_e:
        return 0.0
    lo, hi = 0.0, 1.0
    while cs_width_bound(dist, n, alpha, hi) < w_e:
        hi *= 2.0
        if hi > 1e9:
            raise ParameterError("no finite constant reaches the observed width")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if cs_width_bound(dist, n, alpha, mid) >= w_e:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# limiting widths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitingWidthResult:
    method: str
    n: int
    empirical: float
    target: float
    rel_error: float
    tolerance: float
    passed: bool


def limiting_width_target(method: str, sigma: float, alpha: float) -> float:
    if method == "hoeffding":
        return 2.0 * math.sqrt(math.log(2.0 / alpha) / 2.0)
    if method in ("bernstein", "prpl-eb", "betting-prpl", "betting-mixture"):
        return 2.0 * sigma * math.sqrt(2.0 * math.log(2.0 / alpha))
    if method == "mp-eb":
        return 2.0 * sigma * math.sqrt(2.0 * math.log(4.0 / alpha))
    raise ParameterError(f"no limiting width known for {method!r}")


def _root_n_block(args, n, start, stop):
    spec, method = args
    out = np.zeros(stop - start)
    for i, r in enumerate(range(start, stop)):
        iv = build_interval(method, _draw(spec, n, r), spec)
        out[i] = math.sqrt(n) * iv.width
    return out


def limiting_width_check(dist, method: str, alpha: float, n: int, replicates: int,
                         seed=0, tol: float = 0.15,
                         grid: Optional[GridConfig] = None) -> LimitingWidthResult:
    """Median of ``sqrt(n) * width`` against the first-order limit.

    Two-sided tolerance for the closed-form CIs; betting CIs only need to stay
    below the target times ``1 + tol``.
    """
    spec = ExperimentSpec(dist, [method], [n], alpha, replicates, seed,
                          grid=grid or GridConfig())
    vals = np.concatenate(_map_blocks(_root_n_block, (spec, method), n, replicates))
    emp = float(np.median(vals))
    target = limiting_width_target(method, _true_sd(dist), alpha)
    rel = (emp - target) / target
    if method.startswith("betting"):
        passed = rel <= tol
    else:
        passed = abs(rel) <= tol
    return LimitingWidthResult(method, n, emp, target, rel, tol, passed)


@dataclass(frozen=True)
class SecondOrderReport:
    samples: np.ndarray
    mean: float
    target: float
    variance: float
    target_variance: float
    delta_method_variance: float


def _second_order_block(args, n, start, stop):
    dist, alpha, seed = args
    L = math.log(4.0 / alpha)
    sigma = math.sqrt(dist.variance)
    gamma1 = 2.0 * sigma * math.sqrt(2.0 * L)
    out = np.zeros(stop - start)
    for i, r in enumerate(range(start, stop)):
        w = mp_eb_ci(draw_sample(dist, n, seed.child(r)), alpha).width
        out[i] = n * (w - gamma1 / math.sqrt(n))
    return out


def second_order_statistic(dist, alpha: float, n: int, replicates: int,
                           seed=0) -> SecondOrderReport:
    """``S_n = n (w_n - gamma_1 / sqrt(n))`` for the empirical Bernstein CI.

    ``target_variance`` is ``2 log(4/alpha) (mu4 - sigma^4)``;
    ``delta_method_variance`` divides that by ``sigma^2``, which is what the
    delta method gives for ``sqrt(n) (sigma_hat - sigma)`` scaled by
    ``2 sqrt(2 log(4/alpha))``.
    """
    seed = seed if isinstance(seed, Seed) else Seed(int(seed))
    vals = np.concatenate(_map_blocks(_second_order_block, (dist, alpha, seed), n, replicates))
    L = math.log(4.0 / alpha)
    excess = dist.mu4 - dist.variance ** 2
    var = float(np.var(vals, ddof=1)) if vals.size > 1 else float("nan")
    dm = 2.0 * L * excess / dist.variance if dist.variance > 0 else float("nan")
    return SecondOrderReport(vals, float(vals.mean()), 14.0 * L / 3.0, var, 2.0 * L * excess, dm)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def rows_to_csv(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    columns = list(columns or rows[0].keys())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()

"""Information projections onto mean constraints and the width bounds built on them.

``KL+inf(P, m)`` is the smallest KL divergence from ``P`` to a distribution on
[0, 1] with mean at least ``m``; ``KL-inf`` is the mirror image. Both are
evaluated through their one-dimensional dual

    KL+inf(P, m) = sup_{lam in [-1/(1-m), 0]} E_P log(1 + lam (X - m)),
    KL-inf(P, m) = sup_{lam in [0, 1/m]}      E_P log(1 + lam (X - m)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._dual import maximize_sum_log
from .core import (
    Bernoulli,
    DiscreteDistribution,
    GaussianFamily,
    Sample,
    check_alpha,
    empirical_distribution,
    validate_sample,
)
from .exceptions import (
    DomainError,
    LevelError,
    ParameterError,
    UnsupportedDistributionError,
    ZeroVarianceError,
)
from .quantiles import binomial_quantile, normal_quantile

__all__ = [
    "KlInfResult",
    "LowerBoundResult",
    "kl_inf",
    "kl_inf_inverse",
    "bernoulli_kl",
    "a_n_alpha",
    "b_n_alpha",
    "ci_width_lower_bound",
    "gaussian_lower_bound",
    "oracle_ci_width",
    "betting_ci_width_upper_bound",
]

DOMAIN_SHRINK = 1e-9
INVERSE_TOL = 1e-9


@dataclass(frozen=True)
class KlInfResult:
    value: float
    lambda_star: float
    side: str
    at_boundary: bool = False


@dataclass(frozen=True)
class LowerBoundResult:
    a: float
    upper_dev: float
    lower_dev: float
    w_star: float


def _as_discrete(dist) -> DiscreteDistribution:
    if isinstance(dist, DiscreteDistribution):
        d = dist
    elif hasattr(dist, "to_discrete"):
        d = dist.to_discrete()
    elif isinstance(dist, Sample):
        d = empirical_distribution(dist)
    else:
        raise UnsupportedDistributionError(f"need a finitely supported distribution, got {dist!r}")
    if not d.in_unit_interval():
        raise UnsupportedDistributionError("atoms must lie in [0, 1]")
    return d


def _check_side(side: str) -> str:
    if side not in ("plus", "minus"):
        raise ParameterError(f"side must be 'plus' or 'minus', got {side!r}")
    return side


def kl_inf(dist, m: float, side: str) -> KlInfResult:
    d = _as_discrete(dist)
    _check_side(side)
    m = float(m)
    if not 0.0 <= m <= 1.0 or m != m:
        raise DomainError(f"m must lie in [0, 1], got {m!r}")
    mu = d.mean
    if side == "plus":
        if m <= mu:
            return KlInfResult(0.0, 0.0, side)
        if m >= 1.0:
            raise DomainError("KL+inf needs m < 1")
        lo, hi = -(1.0 - DOMAIN_SHRINK) / (1.0 - m), 0.0
    else:
        if m >= mu:
            return KlInfResult(0.0, 0.0, side)
        if m <= 0.0:
            raise DomainError("KL-inf needs m > 0")
        lo, hi = 0.0, (1.0 - DOMAIN_SHRINK) / m
    lam, val, edge = maximize_sum_log(d.support, d.probs, np.array([m]), lo, hi)
    return KlInfResult(max(0.0, float(val[0])), float(lam[0]), side, bool(edge[0]))


def bernoulli_kl(mu: float, m: float) -> float:
    """KL(Bernoulli(mu) || Bernoulli(m)); equals both projections on the right side."""
    out = 0.0
    if mu > 0:
        out += mu * math.log(mu / m)
    if mu < 1:
        out += (1 - mu) * math.log((1 - mu) / (1 - m))
    return out


def kl_inf_inverse(dist, x: float, side: str) -> float:
    """Nearest m on the given side of the mean where the projection reaches ``x``.

    Clamps to 1 (plus) or 0 (minus) when the level is out of reach. The
    bisection stops once the bracket is below 1e-9 and below 1e-6 times the
    distance from the mean.
    """
    d = _as_discrete(dist)
    _check_side(side)
    if x != x or x < 0:
        raise LevelError(f"level must be nonnegative, got {x!r}")
    mu = d.mean
    if x == 0:
        return mu
    if side == "plus":
        a, b = mu, 1.0
        edge = 1.0 - INVERSE_TOL
        if mu >= edge or kl_inf(d, edge, "plus").value < x:
            return 1.0
    else:
        a, b = mu, 0.0
        edge = INVERSE_TOL
        if mu <= edge or kl_inf(d, edge, "minus").value < x:
            return 0.0
    # a: projection below x, b: projection at or above x; near a steep edge the
    # tolerance also shrinks with the distance from the mean
    while abs(b - a) > max(1e-15, min(INVERSE_TOL, 1e-6 * abs(b - mu))):
        mid = 0.5 * (a + b)
        if kl_inf(d, mid, side).value >= x:
            b = mid
        else:
            a = mid
    return b


def a_n_alpha(n: int, alpha: float) -> float:
    """Level ``((1-alpha) log(1-alpha) + (2 alpha - 1) log alpha) / n``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    alpha = check_alpha(alpha)
    num = (1 - alpha) * math.log1p(-alpha) + (2 * alpha - 1) * math.log(alpha)
    if not num > 0:
        raise LevelError(f"a(n, alpha) is not positive at alpha={alpha!r}")
    return num / n


def b_n_alpha(n: int, alpha: float, sigma: float) -> float:
    if sigma <= 0:
        raise ZeroVarianceError("b(n, alpha) needs a positive standard deviation")
    L = math.log(3.0 * n * n / alpha)
    return L / n + 9.0 * L / (n * sigma ** 2)


def _deviations(d: DiscreteDistribution, level: float, center: float = None):
    mu = d.mean if center is None else center
    up = kl_inf_inverse(d, level, "plus") - mu
    down = mu - kl_inf_inverse(d, level, "minus")
    return max(0.0, up), max(0.0, down)


def ci_width_lower_bound(dist, n: int, alpha: float) -> LowerBoundResult:
    """Method-agnostic lower bound on the width of any level-(1 - alpha) CI.

    The same expression bounds the effective width of any CS.
    """
    d = _as_discrete(dist)
    a = a_n_alpha(n, alpha)
    up, down = _deviations(d, a)
    return LowerBoundResult(a, up, down, max(up, down))


def gaussian_lower_bound(sigma: float, n: int, alpha: float) -> float:
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    return sigma * math.sqrt(2.0 * a_n_alpha(n, alpha))


def oracle_ci_width(dist, n: int, alpha: float) -> float:
    """Width of the exact quantile interval for Bernoulli or Gaussian data.

    Bernoulli: ``(z_{1-alpha/2} - z_{alpha/2}) / n`` with Binomial quantiles of
    the count. Gaussian: ``sigma (z_{1-alpha/2} - z_{alpha/2}) / sqrt(n)``.
    """
    alpha = check_alpha(alpha)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if isinstance(dist, Bernoulli):
        hi = binomial_quantile(n, dist.p, 1 - alpha / 2)
        lo = binomial_quantile(n, dist.p, alpha / 2)
        return (hi - lo) / n
    if isinstance(dist, GaussianFamily):
        z = normal_quantile(1 - alpha / 2) - normal_quantile(alpha / 2)
        return dist.sigma * z / math.sqrt(n)
    raise UnsupportedDistributionError("oracle widths exist for Bernoulli and Gaussian only")


def betting_ci_width_upper_bound(sample_or_dist, n: int, alpha: float,
                                 sigma: float = None, mode: str = "empirical",
                                 center: float = None) -> float:
    """Upper bounds on the width of a mixture-bet betting CI.

    ``empirical``: twice the larger inverse-projection deviation of the
    empirical distribution at level ``log(3 n^2 / alpha) / n``, measured from
    the sample mean (or from ``center`` when given).
    ``deterministic``: the same deviation for the true distribution at level
    ``b(n, alpha)``, plus ``1 / n^2``.
    """
    alpha = check_alpha(alpha)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if mode == "empirical":
        s = sample_or_dist
        if not isinstance(s, (Sample, DiscreteDistribution)):
            s = validate_sample(s, require_nonempty=True)
        d = _as_discrete(s)
        level = math.log(3.0 * n * n / alpha) / n
        up, down = _deviations(d, level, center)
        return 2.0 * max(up, down)
    if mode == "deterministic":
        d = _as_discrete(sample_or_dist)
        sd = math.sqrt(d.variance) if sigma is None else float(sigma)
        if sd <= 0:
            raise ZeroVarianceError("deterministic bound needs sigma > 0")
        up, down = _deviations(d, b_n_alpha(n, alpha, sd))
        return max(up, down) + 1.0 / n ** 2
    raise ParameterError(f"unknown mode {mode!r}")

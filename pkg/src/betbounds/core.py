"""Shared data model: samples, intervals, distributions and seeded streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .exceptions import (
    EmptySampleError,
    OutOfRangeError,
    ParameterError,
    UnsupportedDistributionError,
)

__all__ = [
    "Sample",
    "Interval",
    "DiscreteDistribution",
    "Bernoulli",
    "Beta",
    "DiscreteUniform",
    "PointMass",
    "GaussianFamily",
    "Seed",
    "validate_sample",
    "interval_width",
    "draw_sample",
    "empirical_distribution",
    "parse_distribution",
    "read_values",
    "format_float",
    "check_alpha",
]

_MERGE_RTOL = 1e-15


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Sample:
    """Ordered observations in [0, 1].

    Build through :func:`validate_sample` or :func:`draw_sample`; the
    constructor itself does no checking.
    """

    values: np.ndarray
    source: Optional[str] = None

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.n

    def mean(self) -> float:
        if self.n == 0:
            raise EmptySampleError("empty sample has no mean")
        return float(np.mean(self.values))


def validate_sample(values: Union[Sample, Iterable[float]], require_nonempty: bool = False,
                    source: Optional[str] = None) -> Sample:
    """Check that every value lies in [0, 1] and wrap the values in a Sample.

    Order is preserved. Raises :class:`OutOfRangeError` naming the first
    offending position; NaN counts as out of range.
    """
    if isinstance(values, Sample):
        if require_nonempty and values.n == 0:
            raise EmptySampleError("at least one observation is required")
        return values
    arr = np.array(list(values) if not isinstance(values, np.ndarray) else values,
                   dtype=np.float64).reshape(-1)
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if bad.any():
        i = int(np.argmax(bad))
        raise OutOfRangeError(i, float(arr[i]))
    if require_nonempty and arr.size == 0:
        raise EmptySampleError("at least one observation is required")
    return Sample(_frozen_array(arr), source)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lower, upper], stored unclipped.

    ``flags`` carries construction notes such as ``"empty_acceptance"`` when
    a betting CI accepted no grid point.
    """

    lower: float
    upper: float
    alpha: float
    n: int
    method: str
    flags: tuple = ()

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ParameterError(f"interval lower {self.lower!r} exceeds upper {self.upper!r}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def clipped(self, low: float = 0.0, high: float = 1.0) -> "Interval":
        lo = min(max(self.lower, low), high)
        hi = max(min(self.upper, high), low)
        return Interval(lo, hi, self.alpha, self.n, self.method, self.flags)

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lower, other.lower)
        hi = min(self.upper, other.upper)
        if hi < lo:
            # keep a degenerate interval at the crossing point instead of failing
            lo = hi = 0.5 * (lo + hi)
        return Interval(lo, hi, self.alpha, max(self.n, other.n), self.method,
                        tuple(sorted(set(self.flags) | set(other.flags))))


def interval_width(iv: Interval) -> float:
    return iv.upper - iv.lower


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution; support points need not be sorted."""

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=np.float64).reshape(-1)
        p = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if s.shape != p.shape or s.size == 0:
            raise ParameterError("support and probs must be non-empty and of equal length")
        if (p < 0).any() or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ParameterError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "support", _frozen_array(s))
        object.__setattr__(self, "probs", _frozen_array(p))

    @classmethod
    def from_pairs(cls, atoms: Sequence[tuple]) -> "DiscreteDistribution":
        xs, ps = zip(*atoms)
        return cls(np.array(xs), np.array(ps))

    @property
    def atoms(self):
        return list(zip(self.support.tolist(), self.probs.tolist()))

    @property
    def mean(self) -> float:
        return math.fsum(self.support * self.probs)

    @property
    def variance(self) -> float:
        mu = self.mean
        return math.fsum(self.probs * (self.support - mu) ** 2)

    @property
    def mu4(self) -> float:
        mu = self.mean
        return math.fsum(self.probs * (self.support - mu) ** 4)

    def in_unit_interval(self) -> bool:
        return bool(((self.support >= 0.0) & (self.support <= 1.0)).all())


def empirical_distribution(sample: Union[Sample, Iterable[float]]) -> DiscreteDistribution:
    """Distinct sample values weighted by multiplicity / n.

    Values within a relative distance of 1e-15 are merged into one atom.
    """
    sample = validate_sample(sample, require_nonempty=True)
    xs = np.sort(sample.values)
    keep = np.ones(xs.size, dtype=bool)
    keep[1:] = np.abs(np.diff(xs)) > _MERGE_RTOL * np.maximum(np.abs(xs[1:]), np.abs(xs[:-1]))
    starts = np.flatnonzero(keep)
    counts = np.diff(np.append(starts, xs.size))
    return DiscreteDistribution(xs[starts], counts / xs.size)


# -- named distributions -----------------------------------------------------


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"Bernoulli p must lie in [0, 1], got {self.p!r}")

    @property
    def mean(self) -> float:
        return float(self.p)

    @property
    def variance(self) -> float:
        return self.p * (1.0 - self.p)

    @property
    def mu4(self) -> float:
        p, q = self.p, 1.0 - self.p
        return p * q * (q ** 3 + p ** 3)

    def to_discrete(self) -> DiscreteDistribution:
        return DiscreteDistribution(np.array([0.0, 1.0]), np.array([1.0 - self.p, self.p]))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return (rng.random(n) < self.p).astype(np.float64)


@dataclass(frozen=True)
class Beta:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ParameterError("Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)

    @property
    def variance(self) -> float:
        a, b = self.a, self.b
        return a * b / ((a + b) ** 2 * (a + b + 1))

    @property
    def mu4(self) -> float:
        a, b = self.a, self.b
        s = a + b
        excess = 6 * ((a - b) ** 2 * (s + 1) - a * b * (s + 2)) / (a * b * (s + 2) * (s + 3))
        return self.variance ** 2 * (3 + excess)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # numpy draws Beta via Gamma ratios (Marsaglia-Tsang), exact to rounding
        return rng.beta(self.a, self.b, size=n)


@dataclass(frozen=True)
class DiscreteUniform:
    points: tuple

    def __post_init__(self):
        pts = tuple(float(x) for x in self.points)
        if not pts:
            raise ParameterError("DiscreteUniform needs at least one point")
        object.__setattr__(self, "points", pts)

    def to_discrete(self) -> DiscreteDistribution:
        k = len(self.points)
        return DiscreteDistribution(np.array(self.points), np.full(k, 1.0 / k))

    @property
    def mean(self) -> float:
        return self.to_discrete().mean

    @property
    def variance(self) -> float:
        return self.to_discrete().variance

    @property
    def mu4(self) -> float:
        return self.to_discrete().mu4

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.points)[rng.integers(0, len(self.points), size=n)]


@dataclass(frozen=True)
class PointMass:
    c: float

    @property
    def mean(self) -> float:
        return float(self.c)

    variance = 0.0
    mu4 = 0.0

    def to_discrete(self) -> DiscreteDistribution:
        return DiscreteDistribution(np.array([self.c]), np.array([1.0]))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, float(self.c))


@dataclass(frozen=True)
class GaussianFamily:
    """Gaussian with known standard deviation; closed-form bounds only."""

    sigma: float
    mu: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError("GaussianFamily sigma must be positive")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.sigma ** 2


NamedDistribution = Union[Bernoulli, Beta, DiscreteUniform, PointMass, GaussianFamily]


def parse_distribution(text: str) -> NamedDistribution:
    """Parse ``bernoulli:p``, ``beta:a,b``, ``pointmass:c``, ``uniform:x1,x2,...``
    or ``gaussian:sigma``."""
    name, _, args = text.strip().partition(":")
    name = name.lower()
    try:
        nums = [float(a) for a in args.split(",")] if args else []
    except ValueError:
        raise ParameterError(f"cannot parse distribution parameters in {text!r}") from None
    arity = {"bernoulli": 1, "beta": 2, "pointmass": 1, "gaussian": 1}
    if name in arity and len(nums) != arity[name]:
        raise ParameterError(f"{name} takes {arity[name]} parameter(s), got {text!r}")
    if name == "bernoulli":
        return Bernoulli(nums[0])
    if name == "beta":
        return Beta(*nums)
    if name == "pointmass":
        return PointMass(nums[0])
    if name == "gaussian":
        return GaussianFamily(nums[0])
    if name == "uniform" and nums:
        return DiscreteUniform(tuple(nums))
    raise ParameterError(f"unknown distribution spec {text!r}")


# -- seeding -------------------------------------------------------------------


@dataclass(frozen=True)
class Seed:
    """(seed, replicate_index) names one independent Philox stream."""

    seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.replicate_index < 0:
            raise ParameterError("replicate_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.replicate_index,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, replicate_index: int) -> "Seed":
        return Seed(self.seed, replicate_index)


def draw_sample(dist: NamedDistribution, n: int, seed: Union[Seed, int]) -> Sample:
    if isinstance(dist, GaussianFamily):
        raise UnsupportedDistributionError("Gaussian draws are not [0, 1]-bounded")
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if not isinstance(seed, Seed):
        seed = Seed(int(seed))
    values = dist.sample(seed.generator(), int(n))
    return Sample(_frozen_array(values), f"{dist!r} seed={seed.seed} rep={seed.replicate_index}")


# -- text I/O --------------------------------------------------------------------


def read_values(lines: Iterable[str]) -> list:
    """Parse newline-delimited decimal floats, skipping blanks and ``#`` comments."""
    out = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(float(line))
        except ValueError:
            raise ParameterError(f"line {lineno}: not a number: {line!r}") from None
    return out


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")

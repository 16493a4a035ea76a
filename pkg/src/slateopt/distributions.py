"""Conditional item-value distributions.

Each distribution models the value of a single item of the user's
preferred type.  Downstream code needs three things from a distribution:

* its mean,
* expected order statistics ``mu(i, a)`` (the expected i-th smallest of
  ``a`` draws), in closed form where one exists,
* a sampler that draws whole sets of ``a`` values at once, for Monte
  Carlo estimation of ``mu`` where no closed form exists.

Closed forms implemented here:

* uniform on [0, 1]:   ``mu(i, a) = i / (a + 1)``
* exponential(rate):   ``mu(i, a) = (H_a - H_{a-i}) / rate`` with ``H_j``
  the j-th harmonic number, so the expected maximum is ``H_a / rate``
* finite discrete:     exact summation over the support via the binomial
  tail ``P[at least i of a draws <= x]``

Beta and Pareto order statistics are estimated by sampling (an
asymptotic reference for the Pareto maximum is provided separately and
must not be used as an exact value).  Bernoulli order statistics are
deliberately not tabulated: every objective that needs them has a direct
product or binomial form in :mod:`slateopt.values`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom as _binom

__all__ = [
    "Distribution",
    "FiniteDiscrete",
    "Beta",
    "Uniform",
    "Exponential",
    "Pareto",
    "Bernoulli",
    "DecayingBernoulli",
    "order_stat_mean_analytic",
    "pareto_max_asymptote",
]

_PROB_TOL = 1e-12

# Growing cache of harmonic numbers, _HARMONIC[j] = 1 + 1/2 + ... + 1/j.
_HARMONIC: list[float] = [0.0]


def harmonic(j: int) -> float:
    """Return the j-th harmonic number (j >= 0)."""
    if j < 0:
        raise ValueError("harmonic number index must be non-negative")
    while len(_HARMONIC) <= j:
        _HARMONIC.append(_HARMONIC[-1] + 1.0 / len(_HARMONIC))
    return _HARMONIC[j]


class Distribution:
    """Base class for conditional item-value models."""

    #: draws within a set are i.i.d. (False only for rank-dependent models)
    iid: bool = True
    label: str = "distribution"

    def mean(self) -> float:
        raise NotImplementedError

    def set_mean_sum(self, a: int) -> float:
        """Expected sum of all ``a`` values in one sampled set."""
        return a * self.mean()

    def sample_sets(self, rng: np.random.Generator, count: int, a: int) -> np.ndarray:
        """Draw ``count`` independent sets of ``a`` values, shape (count, a)."""
        raise NotImplementedError

    def order_stat_mean(self, i: int, a: int) -> float | None:
        """Closed-form ``mu(i, a)`` or None when no closed form exists."""
        return None

    @property
    def has_analytic_order_stats(self) -> bool:
        return False

    def params(self) -> str:
        return ""

    def key(self) -> str:
        """Canonical identity string, stable across processes."""
        return f"{self.label}({self.params()})"

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return self.key()


@dataclass(frozen=True, repr=False)
class FiniteDiscrete(Distribution):
    """Finitely supported distribution, canonicalized to strictly
    decreasing values with merged duplicates and zero-mass points dropped."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    label = "discrete"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        ps = tuple(float(p) for p in self.probs)
        if len(vals) != len(ps) or not vals:
            raise ValueError("values and probs must be equal-length and non-empty")
        if any(p < 0 for p in ps):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(ps) - 1.0) > _PROB_TOL:
            raise ValueError(f"probabilities must sum to 1 within {_PROB_TOL}")
        merged: dict[float, float] = {}
        for v, p in zip(vals, ps):
            merged[v] = merged.get(v, 0.0) + p
        items = sorted(((v, p) for v, p in merged.items() if p > 0.0), reverse=True)
        if not items:
            raise ValueError("all probability mass is zero")
        object.__setattr__(self, "values", tuple(v for v, _ in items))
        object.__setattr__(self, "probs", tuple(p for _, p in items))

    def mean(self) -> float:
        return float(sum(v * p for v, p in zip(self.values, self.probs)))

    def sample_sets(self, rng, count, a):
        vals = np.asarray(self.values)
        p = np.asarray(self.probs)
        idx = rng.choice(len(vals), size=(count, a), p=p / p.sum())
        return vals[idx]

    @property
    def has_analytic_order_stats(self) -> bool:
        return True

    def order_stat_mean(self, i, a):
        # ascending support; P[X_(i) <= x] = P[Binom(a, F(x)) >= i]
        vals = np.asarray(self.values[::-1])
        cdf = np.minimum(np.cumsum(np.asarray(self.probs[::-1])), 1.0)
        at_most = _binom.sf(i - 1, a, cdf)
        pmf = np.diff(at_most, prepend=0.0)
        return float(np.dot(vals, pmf))

    def params(self) -> str:
        pairs = ",".join(f"{v:.17g}@{p:.17g}" for v, p in zip(self.values, self.probs))
        return pairs


@dataclass(frozen=True, repr=False)
class Beta(Distribution):
    """Beta distribution on [0, 1]; order statistics are sampled."""

    alpha: float
    beta: float

    label = "beta"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("beta distribution requires alpha > 0 and beta > 0")

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def sample_sets(self, rng, count, a):
        return rng.beta(self.alpha, self.beta, size=(count, a))

    def params(self) -> str:
        return f"alpha={self.alpha:.17g},beta={self.beta:.17g}"


@dataclass(frozen=True, repr=False)
class Uniform(Distribution):
    """Uniform distribution on [0, 1]."""

    label = "uniform"

    def mean(self) -> float:
        return 0.5

    def sample_sets(self, rng, count, a):
        return rng.random(size=(count, a))

    @property
    def has_analytic_order_stats(self) -> bool:
        return True

    def order_stat_mean(self, i, a):
        return i / (a + 1.0)


@dataclass(frozen=True, repr=False)
class Exponential(Distribution):
    """Exponential distribution with the given rate."""

    rate: float

    label = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("exponential distribution requires rate > 0")

    def mean(self) -> float:
        return 1.0 / self.rate

    def sample_sets(self, rng, count, a):
        return rng.exponential(scale=1.0 / self.rate, size=(count, a))

    @property
    def has_analytic_order_stats(self) -> bool:
        return True

    def order_stat_mean(self, i, a):
        return (harmonic(a) - harmonic(a - i)) / self.rate

    def params(self) -> str:
        return f"rate={self.rate:.17g}"


@dataclass(frozen=True, repr=False)
class Pareto(Distribution):
    """Pareto distribution with minimum 1 and shape ``alpha``, normalized
    pdf ``alpha * x**(-alpha - 1)`` on [1, inf).  Requires ``alpha > 1``
    so the mean is finite."""

    alpha: float

    label = "pareto"

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("pareto distribution requires alpha > 1 (finite mean)")

    def mean(self) -> float:
        return self.alpha / (self.alpha - 1.0)

    def sample_sets(self, rng, count, a):
        return 1.0 + rng.pareto(self.alpha, size=(count, a))

    def params(self) -> str:
        return f"alpha={self.alpha:.17g}"


@dataclass(frozen=True, repr=False)
class Bernoulli(Distribution):
    """Bernoulli item value (satisfied / not satisfied).

    Order statistics are intentionally left without a tabulated closed
    form here; objectives on Bernoulli values use the direct product and
    binomial formulas in :mod:`slateopt.values` instead.
    """

    q: float

    label = "bernoulli"

    def __post_init__(self):
        if not (0 < self.q <= 1):
            raise ValueError("bernoulli distribution requires q in (0, 1]")

    def mean(self) -> float:
        return self.q

    def sample_sets(self, rng, count, a):
        return (rng.random(size=(count, a)) < self.q).astype(np.float64)

    def params(self) -> str:
        return f"q={self.q:.17g}"


@dataclass(frozen=True, repr=False)
class DecayingBernoulli(Distribution):
    """Rank-dependent Bernoulli values: item ``i`` of a type succeeds with
    probability ``min(1, c * (i + d) ** -alpha)``.

    Not an i.i.d. model: the i-th item drawn for a set has its own
    success probability, decaying in i.
    """

    c: float
    d: float
    alpha: float

    label = "decaying_bernoulli"
    iid = False

    def __post_init__(self):
        if self.c < 0 or self.d < 0 or self.alpha < 0:
            raise ValueError("decaying bernoulli requires c, d, alpha >= 0")
        if self.c * (1.0 + self.d) ** (-self.alpha) > 1.0:
            warnings.warn(
                "leading success probabilities exceed 1 and are clamped",
                RuntimeWarning,
                stacklevel=2,
            )

    def success_probability(self, i: int) -> float:
        """Success probability of the i-th item (1-based), clamped to <= 1."""
        if i < 1:
            raise ValueError("item index must be >= 1")
        return min(1.0, self.c * (i + self.d) ** (-self.alpha))

    def success_probabilities(self, a: int) -> np.ndarray:
        idx = np.arange(1, a + 1, dtype=np.float64)
        return np.minimum(1.0, self.c * (idx + self.d) ** (-self.alpha))

    def mean(self) -> float:
        raise NotImplementedError("rank-dependent model has no per-item mean")

    def set_mean_sum(self, a: int) -> float:
        return float(self.success_probabilities(a).sum())

    def sample_sets(self, rng, count, a):
        qs = self.success_probabilities(a)
        return (rng.random(size=(count, a)) < qs).astype(np.float64)

    def params(self) -> str:
        return f"c={self.c:.17g},d={self.d:.17g},alpha={self.alpha:.17g}"


def order_stat_mean_analytic(dist: Distribution, i: int, a: int) -> float | None:
    """Closed-form expected i-th smallest of ``a`` draws, or None.

    Returns None for distributions whose order statistics this package
    estimates by sampling (beta, Pareto) or handles through direct
    objective formulas (Bernoulli models).
    """
    if not (1 <= i <= a):
        raise IndexError(f"order statistic index {i} out of range for a={a}")
    return dist.order_stat_mean(i, a)


def pareto_max_asymptote(alpha: float, a: int) -> float:
    """Large-``a`` asymptote of the expected maximum of ``a`` Pareto draws,
    ``Gamma((alpha - 1) / alpha) * a ** (1 / alpha)``.

    Asymptotic reference only; not exact at finite ``a`` and never used
    as a table entry.
    """
    if not alpha > 1:
        raise ValueError("asymptote requires alpha > 1")
    return math.gamma((alpha - 1.0) / alpha) * a ** (1.0 / alpha)

"""Per-type value curves and the slate objective.

Conditional on the user preferring type ``t``, the expected payoff of
showing ``a`` items of that type under a consumption cap ``k`` is the
expected sum of the ``k`` largest of the ``a`` item values:

    value(a) = sum_{i=1..min(k, a)} mu(a - i + 1, a)

with ``mu`` the expected order statistics of the type's value model.
The full objective of an allocation ``(a_1, ..., a_m)`` is the
likelihood-weighted sum over types, ``sum_t p_t * value_t(a_t)``.

Curves come in two flavours:

* closed-form families (uniform, exponential, Bernoulli, rank-decaying
  Bernoulli, finite discrete) with O(1) marginals, which make very large
  slate sizes cheap, and
* table-backed curves driven by an :class:`~slateopt.order_stats.OrderStatTable`
  for distributions without closed forms.

Closed forms used (k the consumption cap, ``H_j`` harmonic numbers):

* uniform:       value(a) = a/2 for a <= k, else k - k(k+1) / (2(a+1))
* exponential:   value(a) = a/rate for a <= k, else k(1 + H_a - H_k)/rate
* Bernoulli(q):  value(a) = E[min(k, Binomial(a, q))]; for k = 1 this is
                 1 - (1-q)**a, the probability of at least one success
* decaying q_i:  k = 1 gives 1 - prod(1 - q_i), evaluated via
                 sum log1p(-q_i); k = n gives sum q_i
* k = n, i.i.d.: value(a) = a * mean (every item counts)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom as _binom

from .distributions import (
    Bernoulli,
    DecayingBernoulli,
    Distribution,
    Exponential,
    FiniteDiscrete,
    Uniform,
    harmonic,
)
from .errors import CoverageError, NoClosedFormError
from .order_stats import OrderStatTable, build_order_stat_table

__all__ = [
    "TypeProfile",
    "ObjectiveSpec",
    "MultiPrefSpec",
    "ValueCurve",
    "expected_top_k_sum",
    "eval_objective",
    "prob_any_success",
    "expected_success_count",
    "prob_any_success_decaying",
    "miss_probability",
    "best_dual_pref_split",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class TypeProfile:
    """Type likelihoods plus one value model per type."""

    p: tuple[float, ...]
    models: tuple[Distribution, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "models", tuple(self.models))
        if not p:
            raise ValueError("profile needs at least one type")
        if any(x < 0 for x in p):
            raise ValueError("type likelihoods must be non-negative")
        if abs(sum(p) - 1.0) > _PROB_TOL:
            raise ValueError(f"type likelihoods must sum to 1 within {_PROB_TOL}")
        if len(self.models) != len(p):
            raise ValueError("need exactly one value model per type")

    @classmethod
    def shared(cls, p, dist: Distribution) -> "TypeProfile":
        """All types draw values from the same distribution."""
        p = tuple(p)
        return cls(p, (dist,) * len(p))

    @property
    def m(self) -> int:
        return len(self.p)


class ValueCurve:
    """Expected payoff of one type as a function of its item count."""

    def value(self, a: int) -> float:
        raise NotImplementedError

    def marginal(self, a: int) -> float:
        """value(a + 1) - value(a)."""
        return self.value(a + 1) - self.value(a)

    def values_upto(self, n: int) -> np.ndarray:
        """[value(0), ..., value(n)]."""
        return np.array([self.value(a) for a in range(n + 1)])

    def marginals_upto(self, n: int) -> np.ndarray:
        """[marginal(0), ..., marginal(n - 1)]."""
        return np.array([self.marginal(a) for a in range(n)])


class LinearValue(ValueCurve):
    """value(a) = slope * a; the no-cap case where every item counts."""

    def __init__(self, slope: float):
        self.slope = slope

    def value(self, a):
        return self.slope * a

    def marginal(self, a):
        return self.slope

    def marginals_upto(self, n):
        return np.full(n, self.slope)


class UniformTopK(ValueCurve):
    def __init__(self, k: int):
        self.k = k

    def value(self, a):
        k = self.k
        if a <= k:
            return a / 2.0
        return k - (k * k + k) / (2.0 * (a + 1.0))

    def marginal(self, a):
        k = self.k
        if a + 1 <= k:
            return 0.5
        return (k * k + k) / (2.0 * (a + 1.0) * (a + 2.0))

    def marginals_upto(self, n):
        a = np.arange(n, dtype=np.float64)
        k = self.k
        return np.where(a + 1 <= k, 0.5, (k * k + k) / (2.0 * (a + 1.0) * (a + 2.0)))


class ExponentialTopK(ValueCurve):
    def __init__(self, rate: float, k: int):
        self.rate = rate
        self.k = k

    def value(self, a):
        if a <= self.k:
            return a / self.rate
        return self.k * (1.0 + harmonic(a) - harmonic(self.k)) / self.rate

    def marginal(self, a):
        if a + 1 <= self.k:
            return 1.0 / self.rate
        return self.k / (self.rate * (a + 1.0))

    def marginals_upto(self, n):
        a = np.arange(n, dtype=np.float64)
        return np.where(a + 1 <= self.k, 1.0 / self.rate, self.k / (self.rate * (a + 1.0)))


class BernoulliTopK(ValueCurve):
    """E[min(k, number of successes among a draws)] for i.i.d. Bernoulli(q)."""

    def __init__(self, q: float, k: int):
        self.q = q
        self.k = k
        self._log_fail = math.log1p(-q) if q < 1.0 else None

    def value(self, a):
        if a <= 0:
            return 0.0
        if self.q >= 1.0:
            return float(min(self.k, a))
        if self.k == 1:
            return -math.expm1(a * self._log_fail)
        top = min(self.k, a)
        return float(np.sum(_binom.sf(np.arange(top), a, self.q)))

    def marginal(self, a):
        # the cap binds only below k successes: gain = q * P[successes <= k-1]
        if self.q >= 1.0:
            return 1.0 if a + 1 <= self.k else 0.0
        if self.k == 1:
            return self.q * math.exp(a * self._log_fail)
        if a == 0:
            return self.q
        return self.q * float(_binom.cdf(self.k - 1, a, self.q))

    def marginals_upto(self, n):
        a = np.arange(n, dtype=np.float64)
        if self.q >= 1.0:
            return np.where(a + 1 <= self.k, 1.0, 0.0)
        if self.k == 1:
            return self.q * np.exp(a * self._log_fail)
        out = self.q * _binom.cdf(self.k - 1, np.arange(n), self.q)
        return np.asarray(out, dtype=np.float64)


class DecayingAnyHit(ValueCurve):
    """Probability of at least one success when item i succeeds w.p. q_i.

    Survival products are accumulated as sums of log1p(-q_i) so very
    long slates stay numerically stable.
    """

    def __init__(self, dist: DecayingBernoulli):
        self.dist = dist
        self._logsurv = [0.0]

    def _extend(self, a: int) -> None:
        while len(self._logsurv) <= a:
            q = self.dist.success_probability(len(self._logsurv))
            if q >= 1.0:
                self._logsurv.append(float("-inf"))
            else:
                self._logsurv.append(self._logsurv[-1] + math.log1p(-q))

    def value(self, a):
        self._extend(a)
        return -math.expm1(self._logsurv[a])

    def marginal(self, a):
        self._extend(a + 1)
        return math.exp(self._logsurv[a]) * self.dist.success_probability(a + 1)


class DecayingSum(ValueCurve):
    """Expected number of successes: prefix sums of the q_i."""

    def __init__(self, dist: DecayingBernoulli):
        self.dist = dist
        self._prefix = [0.0]

    def _extend(self, a: int) -> None:
        while len(self._prefix) <= a:
            self._prefix.append(self._prefix[-1] + self.dist.success_probability(len(self._prefix)))

    def value(self, a):
        self._extend(a)
        return self._prefix[a]

    def marginal(self, a):
        return self.dist.success_probability(a + 1)

    def marginals_upto(self, n):
        return self.dist.success_probabilities(n)


class TableTopK(ValueCurve):
    """Top-k sums read off an order-statistic table."""

    def __init__(self, table: OrderStatTable, k: int):
        self.table = table
        self.k = k
        h = np.zeros(table.max_a + 1)
        for a in range(1, table.max_a + 1):
            top = min(k, a)
            h[a] = float(np.sum(table.row(a)[a - top :]))
        self._h = h

    def value(self, a):
        if a > self.table.max_a:
            raise CoverageError(
                f"count {a} exceeds table coverage max_a={self.table.max_a}"
            )
        return float(self._h[a])

    def values_upto(self, n):
        if n > self.table.max_a:
            raise CoverageError(f"count {n} exceeds table coverage max_a={self.table.max_a}")
        return self._h[: n + 1].copy()

    def marginals_upto(self, n):
        return np.diff(self.values_upto(n))


def _analytic_curve(dist: Distribution, n: int, k: int) -> ValueCurve:
    if k == n and dist.iid:
        return LinearValue(dist.mean())
    if isinstance(dist, Uniform):
        return UniformTopK(k)
    if isinstance(dist, Exponential):
        return ExponentialTopK(dist.rate, k)
    if isinstance(dist, Bernoulli):
        return BernoulliTopK(dist.q, k)
    if isinstance(dist, DecayingBernoulli):
        if k == 1:
            return DecayingAnyHit(dist)
        if k == n:
            return DecayingSum(dist)
        raise NoClosedFormError(
            "rank-decaying Bernoulli values support only k=1 or k=n in closed form"
        )
    if isinstance(dist, FiniteDiscrete):
        return TableTopK(build_order_stat_table(dist, max_a=n), k)
    raise NoClosedFormError(
        f"no closed-form value curve for {dist.key()}; supply an order-stat table"
    )


@dataclass
class ObjectiveSpec:
    """A slate problem: profile, slate size n, consumption cap k.

    With ``tables=None`` the per-type curves use closed forms (and fail
    with :class:`NoClosedFormError` for beta or Pareto models).  Passing
    one :class:`OrderStatTable` per type switches every curve to table
    lookups; each table must cover ``n``.
    """

    profile: TypeProfile
    n: int
    k: int
    tables: tuple[OrderStatTable, ...] | None = None
    _curves: list[ValueCurve] | None = field(default=None, repr=False, compare=False, init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("slate size n must be >= 1")
        if not (1 <= self.k <= self.n):
            raise ValueError("consumption cap k must satisfy 1 <= k <= n")
        if self.tables is not None:
            self.tables = tuple(self.tables)
            if len(self.tables) != self.profile.m:
                raise ValueError("need one order-stat table per type")
            for table in self.tables:
                if table.max_a < self.n:
                    raise CoverageError(
                        f"table max_a={table.max_a} does not cover slate size n={self.n}"
                    )

    @property
    def h_source(self) -> str:
        return "order_stat_table" if self.tables is not None else "analytic"

    def curve(self, t: int) -> ValueCurve:
        if self._curves is None:
            if self.tables is not None:
                self._curves = [TableTopK(tab, self.k) for tab in self.tables]
            else:
                self._curves = [
                    _analytic_curve(dist, self.n, self.k) for dist in self.profile.models
                ]
        return self._curves[t]

    def value_array(self, t: int) -> np.ndarray:
        """[value_t(0), ..., value_t(n)], unweighted."""
        return self.curve(t).values_upto(self.n)


def expected_top_k_sum(spec: ObjectiveSpec, t: int, a: int) -> float:
    """Expected sum of the top min(k, a) values among a items of type t."""
    if not (0 <= a <= spec.n):
        raise ValueError(f"count {a} outside 0..{spec.n}")
    if a == 0:
        return 0.0
    return spec.curve(t).value(a)


def eval_objective(spec: ObjectiveSpec, counts) -> float:
    """Likelihood-weighted objective of an allocation summing to n."""
    counts = tuple(int(c) for c in counts)
    if len(counts) != spec.profile.m:
        raise ValueError(
            f"allocation has {len(counts)} entries for {spec.profile.m} types"
        )
    if any(c < 0 for c in counts) or sum(counts) != spec.n:
        raise ValueError(f"allocation {counts} must be non-negative and sum to n={spec.n}")
    total = 0.0
    for t, a in enumerate(counts):
        total += spec.profile.p[t] * spec.curve(t).value(a)
    return total


def prob_any_success(q: float, a: int) -> float:
    """1 - (1 - q)**a, the chance at least one of a Bernoulli(q) items hits."""
    if a < 0:
        raise ValueError("count must be >= 0")
    if a == 0:
        return 0.0
    if q >= 1.0:
        return 1.0
    return -math.expm1(a * math.log1p(-q))


def expected_success_count(q, a: int) -> float:
    """Expected number of successes among the best a items.

    ``q`` is either a single probability (i.i.d. items) or a sequence of
    per-item probabilities, in which case the a largest are used.
    """
    if a < 0:
        raise ValueError("count must be >= 0")
    if np.isscalar(q):
        return float(q) * a
    qs = sorted((float(x) for x in q), reverse=True)
    if a > len(qs):
        raise ValueError(f"only {len(qs)} success probabilities given for count {a}")
    return float(math.fsum(qs[:a]))


def prob_any_success_decaying(c: float, d: float, alpha: float, a: int) -> float:
    """Probability of at least one success under q_i = min(1, c (i+d)^-alpha)."""
    if a < 0:
        raise ValueError("count must be >= 0")
    curve = DecayingAnyHit(DecayingBernoulli(c, d, alpha))
    return curve.value(a)


@dataclass(frozen=True)
class MultiPrefSpec:
    """Two-type setting where the user may prefer both types at once.

    The user prefers only type 1 with probability p1, only type 2 with
    probability p2, and both with probability p12; any preferred item
    satisfies independently with probability q.  With a consumption cap
    of one, quality is the probability that no shown item satisfies.
    """

    p1: float
    p2: float
    p12: float
    q: float
    n: int

    def __post_init__(self):
        for name, val in (("p1", self.p1), ("p2", self.p2), ("p12", self.p12)):
            if val < 0:
                raise ValueError(f"{name} must be non-negative")
        if abs(self.p1 + self.p2 + self.p12 - 1.0) > _PROB_TOL:
            raise ValueError(f"p1 + p2 + p12 must sum to 1 within {_PROB_TOL}")
        if not (0 < self.q <= 1):
            raise ValueError("q must lie in (0, 1]")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def miss_probability(spec: MultiPrefSpec, a1: int) -> float:
    """Probability that no recommended item satisfies, with a2 = n - a1.

    This is the quantity to minimize over the split a1.
    """
    if not (0 <= a1 <= spec.n):
        raise ValueError(f"a1 must lie in 0..{spec.n}")
    fail = 1.0 - spec.q
    a2 = spec.n - a1
    return spec.p1 * fail**a1 + spec.p2 * fail**a2 + spec.p12 * fail**spec.n


def best_dual_pref_split(spec: MultiPrefSpec) -> tuple[int, int, float]:
    """Minimizing split (a1, a2) with its miss probability, smallest a1 on ties.

    Evaluated in log space so the comparison stays informative even when
    the miss probabilities underflow a direct product evaluation.
    """
    n = spec.n
    a1 = np.arange(n + 1, dtype=np.float64)
    if spec.q >= 1.0:
        miss = np.where(a1 == 0, spec.p1, 0.0) + np.where(a1 == n, spec.p2, 0.0)
        best = int(np.argmin(miss))
        return best, n - best, float(miss[best])
    logfail = math.log1p(-spec.q)
    terms = []
    if spec.p1 > 0:
        terms.append(math.log(spec.p1) + a1 * logfail)
    if spec.p2 > 0:
        terms.append(math.log(spec.p2) + (n - a1) * logfail)
    if spec.p12 > 0:
        terms.append(np.full(n + 1, math.log(spec.p12) + n * logfail))
    if not terms:
        return 0, n, 0.0
    log_miss = terms[0]
    for extra in terms[1:]:
        log_miss = np.logaddexp(log_miss, extra)
    best = int(np.argmin(log_miss))
    return best, n - best, miss_probability(spec, best)

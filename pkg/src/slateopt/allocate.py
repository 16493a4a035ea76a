"""Solvers for the integer slate-composition problem.

Maximize ``sum_t p_t * value_t(a_t)`` over non-negative integer
allocations summing to n.  Three interchangeable solvers:

* brute force enumeration (exact; the test oracle),
* greedy marginal allocation (the production solver; exact whenever
  every per-type curve has non-increasing marginals, which is certified
  explicitly),
* continuous relaxation plus local rounding for families with a
  closed-form relaxed optimum.

All tie-breaks are deterministic: brute force reports the
lexicographically smallest optimal allocation, greedy gives a tied step
to the lowest type index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Bernoulli, Exponential, Uniform
from .errors import BudgetExceededError, CrossCheckError, NoClosedFormError
from .values import ObjectiveSpec, eval_objective

__all__ = [
    "Allocation",
    "SolveReport",
    "solve_brute_force",
    "solve_greedy",
    "solve_relaxed_rounded",
    "cross_check",
    "certify_concavity",
    "composition_count",
]

DEFAULT_COMPOSITION_BUDGET = 10**7

_ROUNDING_CANDIDATE_CAP = 10**6


@dataclass(frozen=True)
class Allocation:
    counts: tuple[int, ...]
    objective_value: float
    solver: str


@dataclass(frozen=True)
class SolveReport:
    allocation: Allocation
    concavity_certified: bool
    ties: int | None = None
    relaxed_optimum: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "counts": list(self.allocation.counts),
            "objective_value": self.allocation.objective_value,
            "solver": self.allocation.solver,
            "concavity_certified": self.concavity_certified,
            "ties": self.ties,
            "relaxed_optimum": None
            if self.relaxed_optimum is None
            else list(self.relaxed_optimum),
        }


def composition_count(n: int, m: int) -> int:
    """Number of m-part non-negative compositions of n."""
    return math.comb(n + m - 1, m - 1)


def certify_concavity(spec: ObjectiveSpec, rel_tol: float = 1e-12) -> bool:
    """True when every per-type curve has non-increasing marginals on [0, n].

    This is the premise under which greedy marginal allocation is exact.
    """
    for t in range(spec.profile.m):
        d = spec.curve(t).marginals_upto(spec.n)
        if d.size < 2:
            continue
        if not np.all(d[1:] <= d[:-1] + rel_tol * (1.0 + np.abs(d[:-1]))):
            return False
    return True


def solve_brute_force(
    spec: ObjectiveSpec, budget: int = DEFAULT_COMPOSITION_BUDGET
) -> SolveReport:
    """Exact optimum by enumerating every composition of n.

    Reports the number of exactly-tied optima and returns the
    lexicographically smallest one.
    """
    n, m = spec.n, spec.profile.m
    total = composition_count(n, m)
    if total > budget:
        raise BudgetExceededError(
            f"{total} compositions exceed budget {budget}; use solve_greedy"
        )
    weighted = [spec.profile.p[t] * spec.value_array(t) for t in range(m)]
    if m == 1:
        alloc = Allocation((n,), eval_objective(spec, (n,)), "brute_force")
        return SolveReport(alloc, certify_concavity(spec), ties=1)

    state = {"val": -math.inf, "counts": None, "ties": 0}

    def scan_pair(prefix: tuple[int, ...], partial: float, remaining: int) -> None:
        vals = (partial + weighted[m - 2][: remaining + 1]) + weighted[m - 1][remaining::-1]
        top = float(vals.max())
        ties_here = int(np.count_nonzero(vals == top))
        if top > state["val"]:
            a = int(np.argmax(vals))
            state["val"] = top
            state["counts"] = prefix + (a, remaining - a)
            state["ties"] = ties_here
        elif top == state["val"]:
            state["ties"] += ties_here

    def recurse(t: int, prefix: tuple[int, ...], partial: float, remaining: int) -> None:
        if t == m - 2:
            scan_pair(prefix, partial, remaining)
            return
        for a in range(remaining + 1):
            recurse(t + 1, prefix + (a,), partial + weighted[t][a], remaining - a)

    recurse(0, (), 0.0, n)
    counts = state["counts"]
    alloc = Allocation(counts, eval_objective(spec, counts), "brute_force")
    return SolveReport(alloc, certify_concavity(spec), ties=state["ties"])


def solve_greedy(spec: ObjectiveSpec) -> SolveReport:
    """Marginal allocation: n steps, each granting one item to the type
    with the largest likelihood-weighted marginal gain (lowest index on
    ties).  Exact when concavity certification passes; otherwise the
    result is flagged heuristic via ``concavity_certified=False``."""
    n, m = spec.n, spec.profile.m
    p = spec.profile.p
    counts = [0] * m
    curves = [spec.curve(t) for t in range(m)]
    gains = [p[t] * curves[t].marginal(0) for t in range(m)]
    for step in range(n):
        best = 0
        for t in range(1, m):
            if gains[t] > gains[best]:
                best = t
        counts[best] += 1
        if step + 1 < n:
            # the final step needs no refreshed gain (and a table that
            # covers exactly n has no marginal at n)
            gains[best] = p[best] * curves[best].marginal(counts[best])
    counts = tuple(counts)
    alloc = Allocation(counts, eval_objective(spec, counts), "greedy")
    return SolveReport(alloc, certify_concavity(spec))


def _water_fill(p: np.ndarray, solve_active) -> np.ndarray:
    """Clamp-and-resolve loop: drop types forced to zero, re-solve the rest."""
    m = len(p)
    active = [t for t in range(m) if p[t] > 0]
    x = np.zeros(m)
    while active:
        sol = solve_active(active)
        if np.all(sol >= 0):
            for t, v in zip(active, sol):
                x[t] = v
            return x
        worst = int(np.argmin(sol))
        active.pop(worst)
    return x


def _relaxed_optimum(spec: ObjectiveSpec) -> np.ndarray:
    models = spec.profile.models
    p = np.asarray(spec.profile.p, dtype=np.float64)
    n, m, k = spec.n, spec.profile.m, spec.k

    if all(isinstance(d, Uniform) for d in models):
        s = np.sqrt(p)

        def solve(active):
            sa = s[active]
            return sa / sa.sum() * (n + len(active)) - 1.0

        x = _water_fill(p, solve)
        if k > 1 and np.any(x[p > 0] <= k):
            raise NoClosedFormError(
                "uniform closed form needs every positive-likelihood share above k"
            )
        return x

    if all(isinstance(d, Exponential) for d in models) and k == 1:
        w = p / np.array([d.rate for d in models])
        return w / w.sum() * n

    if all(isinstance(d, Bernoulli) for d in models) and k == 1:
        if any(d.q >= 1.0 for d in models):
            raise NoClosedFormError("relaxed form needs success probabilities below 1")
        b = -np.log1p(-np.array([d.q for d in models]))

        def solve(active):
            ba = b[active]
            ca = np.log(p[active] * ba)
            lam = (np.sum(ca / ba) - n) / np.sum(1.0 / ba)
            return (ca - lam) / ba

        return _water_fill(p, solve)

    raise NoClosedFormError(
        "relaxed solver supports uniform (any k), exponential (k=1) and "
        "per-type Bernoulli (k=1) models"
    )


def solve_relaxed_rounded(spec: ObjectiveSpec) -> SolveReport:
    """Closed-form continuous optimum plus exhaustive local rounding.

    The returned integer allocation lies within L-infinity distance m of
    the continuous optimum; for a concave objective that window is
    guaranteed to contain the exact integer optimum.
    """
    x = _relaxed_optimum(spec)
    n, m = spec.n, spec.profile.m
    lo = [max(0, math.ceil(x[t] - m)) for t in range(m)]
    hi = [min(n, math.floor(x[t] + m)) for t in range(m)]
    span = 1
    for t in range(m):
        span *= max(0, hi[t] - lo[t] + 1)
    if span > _ROUNDING_CANDIDATE_CAP:
        raise BudgetExceededError(f"{span} rounding candidates exceed the enumeration cap")
    suffix_lo = [0] * (m + 1)
    suffix_hi = [0] * (m + 1)
    for t in range(m - 1, -1, -1):
        suffix_lo[t] = suffix_lo[t + 1] + lo[t]
        suffix_hi[t] = suffix_hi[t + 1] + hi[t]

    best: dict = {"val": -math.inf, "counts": None}

    def recurse(t: int, prefix: list[int], remaining: int) -> None:
        if t == m:
            if remaining == 0:
                val = eval_objective(spec, prefix)
                if val > best["val"]:
                    best["val"] = val
                    best["counts"] = tuple(prefix)
            return
        lo_t = max(lo[t], remaining - suffix_hi[t + 1])
        hi_t = min(hi[t], remaining - suffix_lo[t + 1])
        for a in range(lo_t, hi_t + 1):
            recurse(t + 1, prefix + [a], remaining - a)

    recurse(0, [], n)
    if best["counts"] is None:
        raise NoClosedFormError("no integer allocation within the rounding window")
    counts = best["counts"]
    alloc = Allocation(counts, eval_objective(spec, counts), "relaxed_rounded")
    return SolveReport(
        alloc,
        certify_concavity(spec),
        relaxed_optimum=tuple(float(v) for v in x),
    )


@dataclass(frozen=True)
class CrossCheckReport:
    reports: dict[str, SolveReport]
    max_value_spread: float


def cross_check(
    spec: ObjectiveSpec,
    budget: int = DEFAULT_COMPOSITION_BUDGET,
    value_tol: float = 1e-9,
) -> CrossCheckReport:
    """Run every applicable solver and require agreement.

    Objective values must agree within ``value_tol``; greedy counts must
    equal brute-force counts whenever concavity was certified.
    """
    reports: dict[str, SolveReport] = {"greedy": solve_greedy(spec)}
    try:
        reports["brute_force"] = solve_brute_force(spec, budget=budget)
    except BudgetExceededError:
        pass
    try:
        reports["relaxed_rounded"] = solve_relaxed_rounded(spec)
    except NoClosedFormError:
        pass
    values = [r.allocation.objective_value for r in reports.values()]
    spread = max(values) - min(values)
    if spread > value_tol:
        raise CrossCheckError(
            f"solver objective values disagree by {spread:.3e}: "
            + ", ".join(f"{k}={v.allocation.objective_value!r}" for k, v in reports.items())
        )
    if "brute_force" in reports and reports["greedy"].concavity_certified:
        if reports["greedy"].allocation.counts != reports["brute_force"].allocation.counts:
            raise CrossCheckError(
                f"greedy counts {reports['greedy'].allocation.counts} differ from "
                f"brute-force counts {reports['brute_force'].allocation.counts} "
                "despite certified concavity"
            )
    return CrossCheckReport(reports, spread)

"""Solver correctness: enumeration oracle, greedy exactness under
certified concavity, relaxation bounds, and cross-checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slateopt import (
    Bernoulli,
    Beta,
    BudgetExceededError,
    DecayingBernoulli,
    Exponential,
    NoClosedFormError,
    ObjectiveSpec,
    OrderStatTable,
    TypeProfile,
    Uniform,
    composition_count,
    cross_check,
    solve_brute_force,
    solve_greedy,
    solve_relaxed_rounded,
)


def shared_spec(dist, n, k, p=(0.7, 0.3)):
    return ObjectiveSpec(TypeProfile.shared(p, dist), n, k)


def normalized(weights):
    w = np.asarray(weights, dtype=np.float64)
    return tuple(w / w.sum())


class TestBruteForce:
    def test_bernoulli_example(self):
        report = solve_brute_force(shared_spec(Bernoulli(0.5), 4, 1))
        assert report.allocation.counts == (3, 1)
        assert report.allocation.objective_value == pytest.approx(0.7625, abs=1e-15)
        assert report.ties == 1
        assert report.concavity_certified

    def test_single_type(self):
        spec = ObjectiveSpec(TypeProfile((1.0,), (Uniform(),)), 7, 2)
        report = solve_brute_force(spec)
        assert report.allocation.counts == (7,)

    def test_full_cap_concentrates_on_likeliest_type(self):
        report = solve_brute_force(shared_spec(Exponential(1.0), 9, 9, p=(0.6, 0.4)))
        assert report.allocation.counts == (9, 0)

    def test_ties_reported_with_lex_smallest_winner(self):
        # symmetric likelihoods and an odd slate: two mirror optima
        report = solve_brute_force(shared_spec(Uniform(), 5, 1, p=(0.5, 0.5)))
        assert report.ties == 2
        assert report.allocation.counts == (2, 3)

    def test_budget_error_mentions_greedy(self):
        spec = ObjectiveSpec(TypeProfile.shared((0.5, 0.3, 0.2), Uniform()), 30, 1)
        with pytest.raises(BudgetExceededError, match="greedy"):
            solve_brute_force(spec, budget=10)

    def test_composition_count(self):
        assert composition_count(4, 2) == 5
        assert composition_count(30, 3) == math.comb(32, 2)

    def test_type_permutation_permutes_optimum(self):
        spec = ObjectiveSpec(TypeProfile((0.6, 0.4), (Exponential(1.0), Uniform())), 11, 2)
        flipped = ObjectiveSpec(TypeProfile((0.4, 0.6), (Uniform(), Exponential(1.0))), 11, 2)
        a = solve_brute_force(spec).allocation.counts
        b = solve_brute_force(flipped).allocation.counts
        assert a == tuple(reversed(b))


class TestGreedy:
    def test_matches_brute_on_example(self):
        spec = shared_spec(Bernoulli(0.5), 4, 1)
        greedy = solve_greedy(spec)
        brute = solve_brute_force(spec)
        assert greedy.allocation.counts == brute.allocation.counts
        assert greedy.allocation.objective_value == brute.allocation.objective_value

    def test_degenerate_likelihood_takes_everything(self):
        report = solve_greedy(shared_spec(Exponential(1.0), 12, 3, p=(1.0, 0.0)))
        assert report.allocation.counts == (12, 0)

    def test_uniform_square_root_profile(self):
        report = solve_greedy(shared_spec(Uniform(), 200, 1))
        a1, a2 = report.allocation.counts
        assert abs(a1 - 120.9) <= 3
        assert abs(a2 - 79.1) <= 3
        assert report.concavity_certified

    def test_flags_heuristic_on_non_concave_curve(self):
        # hand-built table whose top-1 curve is convex (accelerating gains)
        dist = Uniform()
        max_a = 6
        mu = np.zeros((max_a + 1, max_a + 1))
        for a in range(1, max_a + 1):
            for i in range(1, a + 1):
                mu[a, i] = 0.0
            mu[a, a] = a * a / 36.0
        table = OrderStatTable(dist, max_a, mu, np.zeros_like(mu), source="analytic")
        spec = ObjectiveSpec(TypeProfile.shared((0.7, 0.3), dist), 6, 1, tables=(table, table))
        greedy = solve_greedy(spec)
        assert not greedy.concavity_certified
        brute = solve_brute_force(spec)
        assert greedy.allocation.objective_value <= brute.allocation.objective_value + 1e-15


def _instance(rng):
    m = int(rng.integers(2, 4))
    n = int(rng.integers(2, 26))
    p = normalized(rng.uniform(0.1, 1.0, size=m))
    family = int(rng.integers(0, 4))
    if family == 0:
        dist = Bernoulli(float(rng.uniform(0.05, 0.95)))
        k = int(rng.integers(1, n + 1))
    elif family == 1:
        dist = DecayingBernoulli(float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.0, 2.0)), float(rng.uniform(0.0, 2.0)))
        k = 1 if rng.random() < 0.5 else n
    elif family == 2:
        dist = Uniform()
        k = int(rng.integers(1, n + 1))
    else:
        dist = Exponential(float(rng.uniform(0.5, 2.0)))
        k = int(rng.integers(1, n + 1))
    return ObjectiveSpec(TypeProfile.shared(p, dist), n, k)


class TestOracleEquivalence:
    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_greedy_value_equals_enumeration(self, seed):
        spec = _instance(np.random.default_rng(seed))
        greedy = solve_greedy(spec)
        brute = solve_brute_force(spec)
        assert greedy.allocation.objective_value == brute.allocation.objective_value
        if greedy.concavity_certified:
            assert greedy.allocation.counts == brute.allocation.counts


class TestRelaxedRounded:
    def test_uniform_example(self):
        report = solve_relaxed_rounded(shared_spec(Uniform(), 10, 1))
        x = np.asarray(report.relaxed_optimum)
        s = np.sqrt([0.7, 0.3])
        expect = s / s.sum() * 12.0 - 1.0
        assert np.allclose(x, expect, atol=1e-12)
        assert x.sum() == pytest.approx(10.0, abs=1e-9)
        counts = np.asarray(report.allocation.counts)
        assert np.all(np.abs(counts - x) <= 2.0)

    def test_single_type(self):
        spec = ObjectiveSpec(TypeProfile((1.0,), (Uniform(),)), 9, 1)
        report = solve_relaxed_rounded(spec)
        assert report.allocation.counts == (9,)

    def test_matches_enumeration_for_uniform(self):
        for n in (6, 17, 40):
            spec = shared_spec(Uniform(), n, 1)
            relaxed = solve_relaxed_rounded(spec)
            brute = solve_brute_force(spec)
            assert relaxed.allocation.counts == brute.allocation.counts

    def test_matches_enumeration_for_exponential(self):
        for n in (5, 12, 30):
            spec = shared_spec(Exponential(1.0), n, 1)
            relaxed = solve_relaxed_rounded(spec)
            brute = solve_brute_force(spec)
            assert relaxed.allocation.objective_value == pytest.approx(
                brute.allocation.objective_value, abs=1e-12
            )

    def test_bernoulli_low_success_gets_more_shelf_space(self):
        models = (Bernoulli(0.5), Bernoulli(0.1))
        spec = ObjectiveSpec(TypeProfile((0.7, 0.3), models), 500, 1)
        report = solve_relaxed_rounded(spec)
        counts = np.asarray(report.allocation.counts, dtype=float)
        x = np.asarray(report.relaxed_optimum)
        assert np.all(np.abs(counts - x) <= 2.0)
        # rarely-satisfying type 2 dominates the slate
        assert counts[1] > counts[0]
        limit = (1 / math.log(2)) / (1 / math.log(2) + 1 / math.log(10 / 9))
        assert counts[0] / 500 == pytest.approx(limit, abs=0.03)

    def test_within_window_of_continuous_optimum(self):
        spec = shared_spec(Uniform(), 33, 2, p=(0.55, 0.45))
        report = solve_relaxed_rounded(spec)
        gap = np.abs(np.asarray(report.allocation.counts) - np.asarray(report.relaxed_optimum))
        assert np.all(gap <= 2.0)

    def test_unsupported_models_raise(self):
        with pytest.raises(NoClosedFormError):
            solve_relaxed_rounded(shared_spec(Bernoulli(0.5), 10, 2))
        spec = ObjectiveSpec(
            TypeProfile.shared((0.7, 0.3), Beta(2.0, 2.0)), 4, 1
        )
        with pytest.raises(NoClosedFormError):
            solve_relaxed_rounded(spec)

    def test_uniform_large_cap_out_of_regime(self):
        with pytest.raises(NoClosedFormError):
            solve_relaxed_rounded(shared_spec(Uniform(), 12, 10))


class TestCrossCheck:
    def test_agreement_on_concave_instances(self):
        for spec in (
            shared_spec(Uniform(), 20, 1),
            shared_spec(Exponential(1.0), 18, 1),
            ObjectiveSpec(TypeProfile((0.7, 0.3), (Bernoulli(0.5), Bernoulli(0.1))), 25, 1),
        ):
            check = cross_check(spec)
            assert check.max_value_spread <= 1e-9
            assert set(check.reports) >= {"greedy", "brute_force"}

    def test_skips_enumeration_over_budget(self):
        spec = shared_spec(Exponential(1.0), 2000, 1)
        check = cross_check(spec, budget=100)
        assert "brute_force" not in check.reports
        assert "relaxed_rounded" in check.reports

"""Expected order-statistic tables.

A table holds ``mu(i, a)`` for all ``1 <= i <= a <= max_a``: the expected
i-th smallest of a set of ``a`` values.  Tables are filled analytically
whenever the distribution has closed-form order statistics, and by Monte
Carlo otherwise: draw ``samples`` sets of ``a`` values, sort each set,
and average per rank.  A per-cell standard error (sample standard
deviation / sqrt(samples)) is recorded for Monte Carlo cells so that
downstream tolerances can be principled.

Determinism: Monte Carlo work is split into ``workers`` chunks whose
sub-seeds derive from ``(seed, chunk index)``; chunk results are merged
in chunk order.  The resulting table is a pure function of
``(dist, max_a, samples, seed, workers)`` regardless of whether chunks
actually ran in parallel.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution
from .errors import BudgetExceededError, CoverageError

__all__ = [
    "OrderStatTable",
    "build_order_stat_table",
    "monte_carlo_order_stat_table",
    "table_to_csv",
]

#: ceiling on max_a * samples for one table
DEFAULT_SAMPLE_BUDGET = 10**9

_BLOCK_ROWS = 1 << 17

_CACHE_ENV = "SLATEOPT_CACHE_DIR"


@dataclass(frozen=True)
class OrderStatTable:
    """Dense table of expected order statistics for one distribution.

    ``mu[a, i]`` and ``se[a, i]`` are valid for ``1 <= i <= a <= max_a``;
    other entries are zero padding.  ``source`` is ``"analytic"`` or
    ``"monte_carlo"``; sampling metadata is None for analytic tables.
    """

    dist: Distribution
    max_a: int
    mu: np.ndarray
    se: np.ndarray
    source: str
    samples: int | None = None
    seed: int | None = None
    workers: int | None = None

    def mu_at(self, i: int, a: int) -> float:
        self._check(i, a)
        return float(self.mu[a, i])

    def se_at(self, i: int, a: int) -> float:
        self._check(i, a)
        return float(self.se[a, i])

    def row(self, a: int) -> np.ndarray:
        """mu(1, a) .. mu(a, a) as a length-a view."""
        self._check(1, a)
        return self.mu[a, 1 : a + 1]

    def se_row(self, a: int) -> np.ndarray:
        self._check(1, a)
        return self.se[a, 1 : a + 1]

    def _check(self, i: int, a: int) -> None:
        if not (1 <= a <= self.max_a):
            raise CoverageError(f"a={a} outside table range 1..{self.max_a}")
        if not (1 <= i <= a):
            raise IndexError(f"order statistic index {i} out of range for a={a}")


def _chunk_sizes(samples: int, workers: int) -> list[int]:
    base, extra = divmod(samples, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _mc_chunk(dist: Distribution, max_a: int, size: int, seed: int, worker: int):
    """Accumulate per-rank sums and squared sums for one seed-derived chunk."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(worker,)))
    sums = np.zeros((max_a + 1, max_a + 1))
    sqs = np.zeros((max_a + 1, max_a + 1))
    for a in range(1, max_a + 1):
        done = 0
        while done < size:
            rows = min(_BLOCK_ROWS, size - done)
            x = dist.sample_sets(rng, rows, a)
            x.sort(axis=1)
            sums[a, 1 : a + 1] += x.sum(axis=0)
            sqs[a, 1 : a + 1] += np.square(x).sum(axis=0)
            done += rows
    return sums, sqs


def _analytic_table(dist: Distribution, max_a: int) -> OrderStatTable:
    mu = np.zeros((max_a + 1, max_a + 1))
    for a in range(1, max_a + 1):
        for i in range(1, a + 1):
            mu[a, i] = dist.order_stat_mean(i, a)
    return OrderStatTable(dist, max_a, mu, np.zeros_like(mu), source="analytic")


def monte_carlo_order_stat_table(
    dist: Distribution,
    max_a: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = True,
) -> OrderStatTable:
    """Estimate the full table by sampling, ignoring any closed forms."""
    if max_a < 1 or samples < 1 or workers < 1:
        raise ValueError("max_a, samples and workers must all be >= 1")
    sizes = _chunk_sizes(samples, workers)
    sums = np.zeros((max_a + 1, max_a + 1))
    sqs = np.zeros((max_a + 1, max_a + 1))
    results = None
    if parallel and workers > 1 and min(sizes) > 0:
        try:
            with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
                futures = [
                    pool.submit(_mc_chunk, dist, max_a, sz, seed, w)
                    for w, sz in enumerate(sizes)
                ]
                results = [f.result() for f in futures]
        except OSError:
            results = None
    if results is None:
        results = [_mc_chunk(dist, max_a, sz, seed, w) for w, sz in enumerate(sizes) if sz > 0]
    for s, q in results:
        sums += s
        sqs += q
    mu = sums / samples
    var = np.maximum(sqs - samples * np.square(mu), 0.0)
    if samples > 1:
        var /= samples - 1
    se = np.sqrt(var / samples)
    mask = np.tril(np.ones_like(mu, dtype=bool), k=0)
    mask[:, 0] = False
    mask[0, :] = False
    mu[~mask] = 0.0
    se[~mask] = 0.0
    return OrderStatTable(
        dist, max_a, mu, se, source="monte_carlo", samples=samples, seed=seed, workers=workers
    )


def _cache_file(cache_dir: str, dist, max_a, samples, seed, workers) -> str:
    raw = f"{dist.key()}|max_a={max_a}|samples={samples}|seed={seed}|workers={workers}|v1"
    digest = hashlib.sha256(raw.encode()).hexdigest()
    return os.path.join(cache_dir, f"orderstats-{digest}.npz")


def build_order_stat_table(
    dist: Distribution,
    max_a: int,
    samples: int = 10**6,
    seed: int = 0,
    workers: int = 1,
    prefer_analytic: bool = True,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
    cache_dir: str | None = None,
    parallel: bool = True,
) -> OrderStatTable:
    """Build a table, analytically when possible and by Monte Carlo otherwise.

    ``cache_dir`` (or the ``SLATEOPT_CACHE_DIR`` environment variable)
    enables a binary cache of Monte Carlo tables keyed on
    ``(dist, max_a, samples, seed, workers)``.
    """
    if max_a < 1:
        raise ValueError("max_a must be >= 1")
    if prefer_analytic and dist.has_analytic_order_stats:
        return _analytic_table(dist, max_a)
    if max_a * samples > sample_budget:
        raise BudgetExceededError(
            f"max_a * samples = {max_a * samples} exceeds sampling budget {sample_budget}"
        )
    cache_dir = cache_dir if cache_dir is not None else os.environ.get(_CACHE_ENV)
    path = None
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        path = _cache_file(cache_dir, dist, max_a, samples, seed, workers)
        if os.path.exists(path):
            with np.load(path) as data:
                return OrderStatTable(
                    dist, max_a, data["mu"], data["se"],
                    source="monte_carlo", samples=samples, seed=seed, workers=workers,
                )
    table = monte_carlo_order_stat_table(dist, max_a, samples, seed, workers, parallel=parallel)
    if path:
        np.savez(path, mu=table.mu, se=table.se)
    return table


def table_to_csv(table: OrderStatTable, path: str) -> None:
    """Write the table as ``dist,params,i,a,mu,se,source`` rows."""
    lines = ["dist,params,i,a,mu,se,source"]
    quoted_params = f'"{table.dist.params()}"'
    for a in range(1, table.max_a + 1):
        for i in range(1, a + 1):
            lines.append(
                f"{table.dist.label},{quoted_params},{i},{a},"
                f"{table.mu[a, i]:.10g},{table.se[a, i]:.10g},{table.source}"
            )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


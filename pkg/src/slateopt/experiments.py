"""Experiment runner: sweeps, reports, and their file formats.

Every run writes a delimited report (CSV by default, JSON on request)
with a fixed column order and floats printed at 10 significant digits,
so reruns with the same configuration, seed and worker count produce
byte-identical files.  When plotting is enabled a rendered figure is
written next to the report with the same stem.

Report schemas (documented in the README):

* heatmap:  dist,param,k,a1,a2,r1,gamma_fit,value
* chart:    p1,p2,q,n,a1,a2,r1,value
* converge: n,r_1..r_m,gap,gamma_fit
* solve:    a JSON solver report
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from . import plotting
from .allocate import (
    DEFAULT_COMPOSITION_BUDGET,
    cross_check,
    solve_brute_force,
    solve_greedy,
    solve_relaxed_rounded,
)
from .distributions import (
    Bernoulli,
    Beta,
    DecayingBernoulli,
    Distribution,
    Exponential,
    FiniteDiscrete,
    Pareto,
    Uniform,
)
from .diversity import convergence_probe, fit_gamma, predict_limit, representation
from .errors import ConfigError, SlateoptError, UnidentifiableError
from .order_stats import build_order_stat_table, table_to_csv
from .values import (
    MultiPrefSpec,
    ObjectiveSpec,
    TypeProfile,
    best_dual_pref_split,
)

__all__ = [
    "ExperimentConfig",
    "RunResult",
    "parse_distribution",
    "run_heatmap",
    "run_bernoulli_chart",
    "run_convergence",
    "run_solve_once",
    "run_orderstats",
    "objective_fragment",
]

_DEFAULT_BETA_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
_DEFAULT_PARETO_GRID = (1.5, 2.0, 3.0, 5.0)
_DEFAULT_P_PAIRS = ((0.9, 0.1), (0.7, 0.3), (0.5, 0.5))
_DEFAULT_N_GRID = (2, 5, 10, 20, 50, 100, 200, 500)


def parse_distribution(text: str) -> Distribution:
    """Parse a distribution string.

    Accepted forms: ``uniform``, ``exponential:RATE`` (or ``exp:``),
    ``beta:ALPHA,BETA``, ``pareto:ALPHA``, ``bernoulli:Q``,
    ``decaying:C,D,ALPHA``, ``discrete:V@P,V@P,...``.
    """
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    try:
        if name == "uniform":
            return Uniform()
        if name in ("exponential", "exp"):
            return Exponential(float(arg or 1.0))
        if name == "beta":
            a, b = (float(x) for x in arg.split(","))
            return Beta(a, b)
        if name == "pareto":
            return Pareto(float(arg))
        if name in ("bernoulli", "ber"):
            return Bernoulli(float(arg))
        if name == "decaying":
            c, d, alpha = (float(x) for x in arg.split(","))
            return DecayingBernoulli(c, d, alpha)
        if name == "discrete":
            pairs = [item.split("@") for item in arg.split(",")]
            return FiniteDiscrete(
                tuple(float(v) for v, _ in pairs), tuple(float(p) for _, p in pairs)
            )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse distribution {text!r}: {exc}") from exc
    raise ConfigError(f"unknown distribution {text!r}")


@dataclass
class ExperimentConfig:
    """Configuration shared by every experiment subcommand.

    Extra fields are simply unused by experiments that do not need them;
    validation of the used subset happens inside each runner.
    """

    experiment: str = "solve_once"
    n: int = 30
    p: tuple[float, ...] = (0.7, 0.3)
    k: int | str = 1
    k_range: tuple[int, ...] | None = None
    beta_grid: tuple[float, ...] = _DEFAULT_BETA_GRID
    pareto_grid: tuple[float, ...] = _DEFAULT_PARETO_GRID
    q: float = 0.4
    p_pairs: tuple[tuple[float, float], ...] = _DEFAULT_P_PAIRS
    n_grid: tuple[int, ...] = _DEFAULT_N_GRID
    dists: tuple[str, ...] = ()
    setting: str | None = None
    solver: str = "greedy"
    samples: int = 10**6
    seed: int = 0
    workers: int = 1
    out: str | None = None
    fmt: str = "csv"
    plot: bool = True
    cache_dir: str | None = None
    budget: int = DEFAULT_COMPOSITION_BUDGET

    def __post_init__(self):
        self.p = tuple(float(x) for x in self.p)
        self.n_grid = tuple(int(x) for x in self.n_grid)
        self.beta_grid = tuple(float(x) for x in self.beta_grid)
        self.pareto_grid = tuple(float(x) for x in self.pareto_grid)
        self.p_pairs = tuple(tuple(float(x) for x in pair) for pair in self.p_pairs)
        self.dists = tuple(self.dists)
        if self.k_range is not None:
            self.k_range = tuple(int(x) for x in self.k_range)
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.samples < 1 or self.workers < 1:
            raise ConfigError("samples and workers must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.fmt!r}")

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def resolve_k(self, n: int) -> int:
        if self.k == "n":
            return n
        k = int(self.k)
        if not 1 <= k <= n:
            raise ConfigError(f"k={k} outside 1..{n}")
        return k


@dataclass
class RunResult:
    rows: list[dict]
    report_path: str | None = None
    figure_path: str | None = None
    extra: dict = field(default_factory=dict)


def _fmt_cell(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _write_rows(path: str, columns: list[str], rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        payload = [{c: row[c] for c in columns} for row in rows]
        text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
    else:
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt_cell(row[c]) for c in columns))
        text = "\n".join(lines) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _figure_path(out: str) -> str:
    stem, _ = os.path.splitext(out)
    return stem + ".png"


def _heatmap_grid(cfg: ExperimentConfig) -> list[tuple[str, float, Distribution]]:
    cells: list[tuple[str, float, Distribution]] = []
    for b in cfg.beta_grid:
        # Beta(1, 1) is the uniform law; use the exact table for that cell
        dist = Uniform() if b == 1.0 else Beta(1.0, b)
        cells.append(("beta", b, dist))
    for alpha in cfg.pareto_grid:
        cells.append(("pareto", alpha, Pareto(alpha)))
    return cells


def run_heatmap(cfg: ExperimentConfig) -> RunResult:
    """Sweep distributions and caps at fixed n; brute-force each cell.

    The default configuration is the two-type study: n=30, p=(0.7, 0.3),
    one million Monte Carlo sets per sampled distribution.
    """
    if len(cfg.p) != 2:
        raise ConfigError("heatmap runs on exactly two types")
    if not cfg.beta_grid and not cfg.pareto_grid:
        raise ConfigError("heatmap needs a non-empty distribution grid")
    ks = cfg.k_range or tuple(range(1, cfg.n + 1))
    if any(not 1 <= k <= cfg.n for k in ks):
        raise ConfigError("every k must lie in 1..n")
    rows: list[dict] = []
    for family, param, dist in _heatmap_grid(cfg):
        table = build_order_stat_table(
            dist,
            max_a=cfg.n,
            samples=cfg.samples,
            seed=cfg.seed,
            workers=cfg.workers,
            cache_dir=cfg.cache_dir,
        )
        profile = TypeProfile.shared(cfg.p, dist)
        for k in ks:
            spec = ObjectiveSpec(profile, cfg.n, int(k), tables=(table, table))
            report = solve_brute_force(spec, budget=cfg.budget)
            a1, a2 = report.allocation.counts
            r = representation(report.allocation.counts)
            try:
                gamma = fit_gamma(r, cfg.p).gamma
            except UnidentifiableError:
                gamma = math.nan
            rows.append(
                {
                    "dist": family,
                    "param": param,
                    "k": int(k),
                    "a1": a1,
                    "a2": a2,
                    "r1": float(r[0]),
                    "gamma_fit": gamma,
                    "value": report.allocation.objective_value,
                }
            )
    result = RunResult(rows)
    if cfg.out:
        _write_rows(cfg.out, ["dist", "param", "k", "a1", "a2", "r1", "gamma_fit", "value"], rows, cfg.fmt)
        result.report_path = cfg.out
        if cfg.plot:
            result.figure_path = plotting.save_heatmap_figure(rows, _figure_path(cfg.out))
    return result


def run_bernoulli_chart(cfg: ExperimentConfig) -> RunResult:
    """Representation of type 1 versus slate size for i.i.d. Bernoulli values.

    Uses the greedy solver: its marginal comparisons stay well scaled at
    slate sizes where total objective differences fall below double
    precision.  Sanity-checks that the leading representation moves
    toward one half as n grows.
    """
    if not (0 < cfg.q <= 1):
        raise ConfigError("q must lie in (0, 1]")
    if not cfg.p_pairs or not cfg.n_grid:
        raise ConfigError("chart needs non-empty p_pairs and n_grid")
    rows: list[dict] = []
    for p1, p2 in cfg.p_pairs:
        gaps: dict[int, float] = {}
        for n in cfg.n_grid:
            spec = ObjectiveSpec(TypeProfile.shared((p1, p2), Bernoulli(cfg.q)), n, 1)
            report = solve_greedy(spec)
            a1, a2 = report.allocation.counts
            r1 = a1 / n
            gaps[int(n)] = abs(r1 - 0.5)
            rows.append(
                {
                    "p1": p1,
                    "p2": p2,
                    "q": cfg.q,
                    "n": int(n),
                    "a1": a1,
                    "a2": a2,
                    "r1": r1,
                    "value": report.allocation.objective_value,
                }
            )
        if len(gaps) > 1:
            n_lo, n_hi = min(gaps), max(gaps)
            # integer splits can sit at best half a count away from even
            if gaps[n_hi] > gaps[n_lo] + 0.5 / n_hi + 1e-9:
                raise SlateoptError(
                    f"representation moved away from 1/2 for p=({p1}, {p2}): "
                    f"gap {gaps[n_lo]:.4f} at n={n_lo} -> {gaps[n_hi]:.4f} at n={n_hi}"
                )
    result = RunResult(rows)
    if cfg.out:
        _write_rows(cfg.out, ["p1", "p2", "q", "n", "a1", "a2", "r1", "value"], rows, cfg.fmt)
        result.report_path = cfg.out
        if cfg.plot:
            result.figure_path = plotting.save_chart_figure(rows, _figure_path(cfg.out))
    return result


def _prediction_params(setting: str, cfg: ExperimentConfig, models: tuple[Distribution, ...]) -> dict:
    first = models[0] if models else None
    if setting == "bounded_tail":
        if not isinstance(first, Beta):
            raise ConfigError("bounded_tail convergence expects a beta distribution")
        return {"beta": first.beta}
    if setting == "heavy_tail":
        if not isinstance(first, Pareto):
            raise ConfigError("heavy_tail convergence expects a pareto distribution")
        return {"alpha": first.alpha}
    if setting == "iid_bernoulli_top1":
        if not isinstance(first, Bernoulli):
            raise ConfigError("iid_bernoulli_top1 convergence expects a bernoulli distribution")
        return {"q": first.q}
    if setting in ("decaying_top1", "decaying_use_all"):
        if not isinstance(first, DecayingBernoulli):
            raise ConfigError(f"{setting} convergence expects a decaying distribution")
        return {"c": first.c, "d": first.d, "alpha": first.alpha}
    if setting in ("varying_success_top1", "varying_success_use_all"):
        if not all(isinstance(d, Bernoulli) for d in models):
            raise ConfigError(f"{setting} convergence expects per-type bernoulli distributions")
        return {"q": tuple(d.q for d in models)}
    return {}


def _models_for(cfg: ExperimentConfig, m: int) -> tuple[Distribution, ...]:
    if not cfg.dists:
        raise ConfigError("this experiment needs --dist")
    parsed = tuple(parse_distribution(text) for text in cfg.dists)
    if len(parsed) == 1:
        return parsed * m
    if len(parsed) != m:
        raise ConfigError(f"{len(parsed)} distributions given for {m} types")
    return parsed


def run_convergence(cfg: ExperimentConfig) -> RunResult:
    """Gap to a predicted representation limit along a schedule of n."""
    if cfg.setting is None:
        raise ConfigError("convergence needs --setting")
    if not cfg.n_grid:
        raise ConfigError("convergence needs a non-empty n_grid")
    m = len(cfg.p)
    if cfg.setting == "dual_preference_top1":
        if m != 3:
            raise ConfigError("dual_preference_top1 takes p = (p1, p2, p12)")
        prediction = predict_limit(cfg.setting, (0.5, 0.5))
        rows = []
        for n in cfg.n_grid:
            spec = MultiPrefSpec(*cfg.p, q=cfg.q, n=int(n))
            a1, a2, _ = best_dual_pref_split(spec)
            r = representation((a1, a2))
            gap = float(np.max(np.abs(r - np.asarray(prediction.r_inf))))
            rows.append({"n": int(n), "r_1": float(r[0]), "r_2": float(r[1]), "gap": gap, "gamma_fit": math.nan})
        columns = ["n", "r_1", "r_2", "gap", "gamma_fit"]
    else:
        models = _models_for(cfg, m)
        params = _prediction_params(cfg.setting, cfg, models)
        prediction = predict_limit(cfg.setting, cfg.p, **params)

        def spec_factory(n: int) -> ObjectiveSpec:
            profile = TypeProfile(cfg.p, models)
            k = cfg.resolve_k(n)
            if any(isinstance(d, (Beta, Pareto)) for d in models):
                tables = tuple(
                    build_order_stat_table(
                        d, max_a=n, samples=cfg.samples, seed=cfg.seed,
                        workers=cfg.workers, cache_dir=cfg.cache_dir,
                    )
                    for d in models
                )
                return ObjectiveSpec(profile, n, k, tables=tables)
            return ObjectiveSpec(profile, n, k)

        probe = convergence_probe(spec_factory, prediction, cfg.n_grid)
        rows = []
        for row in probe:
            rec: dict = {"n": row.n}
            for t, rt in enumerate(row.r, start=1):
                rec[f"r_{t}"] = rt
            rec["gap"] = row.gap
            rec["gamma_fit"] = row.gamma_fit
            rows.append(rec)
        columns = ["n"] + [f"r_{t}" for t in range(1, m + 1)] + ["gap", "gamma_fit"]
    result = RunResult(rows, extra={"prediction": prediction})
    if cfg.out:
        _write_rows(cfg.out, columns, rows, cfg.fmt)
        result.report_path = cfg.out
        if cfg.plot:
            result.figure_path = plotting.save_convergence_figure(rows, _figure_path(cfg.out))
    return result


def run_solve_once(cfg: ExperimentConfig) -> RunResult:
    """Solve a single instance and emit the solver report as JSON."""
    m = len(cfg.p)
    models = _models_for(cfg, m)
    k = cfg.resolve_k(cfg.n)
    profile = TypeProfile(cfg.p, models)
    if any(isinstance(d, (Beta, Pareto)) for d in models):
        tables = tuple(
            build_order_stat_table(
                d, max_a=cfg.n, samples=cfg.samples, seed=cfg.seed,
                workers=cfg.workers, cache_dir=cfg.cache_dir,
            )
            for d in models
        )
        spec = ObjectiveSpec(profile, cfg.n, k, tables=tables)
    else:
        spec = ObjectiveSpec(profile, cfg.n, k)
    if cfg.solver == "greedy":
        payload = solve_greedy(spec).to_dict()
    elif cfg.solver in ("brute", "brute_force"):
        payload = solve_brute_force(spec, budget=cfg.budget).to_dict()
    elif cfg.solver in ("relaxed", "relaxed_rounded"):
        payload = solve_relaxed_rounded(spec).to_dict()
    elif cfg.solver == "cross_check":
        check = cross_check(spec, budget=cfg.budget)
        payload = {name: rep.to_dict() for name, rep in check.reports.items()}
        payload["max_value_spread"] = check.max_value_spread
    else:
        raise ConfigError(f"unknown solver {cfg.solver!r}")
    payload["spec"] = objective_fragment(spec)
    result = RunResult([payload], extra={"spec": spec})
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        result.report_path = cfg.out
    return result


def run_orderstats(cfg: ExperimentConfig, force_mc: bool = False) -> RunResult:
    """Build one order-statistic table and export it as CSV."""
    models = _models_for(cfg, 1)
    table = build_order_stat_table(
        models[0],
        max_a=cfg.n,
        samples=cfg.samples,
        seed=cfg.seed,
        workers=cfg.workers,
        prefer_analytic=not force_mc,
        cache_dir=cfg.cache_dir,
    )
    result = RunResult([], extra={"table": table})
    if cfg.out:
        table_to_csv(table, cfg.out)
        result.report_path = cfg.out
    return result


def objective_fragment(spec: ObjectiveSpec) -> dict:
    """JSON-ready description of an objective spec (config fragment)."""
    return {
        "n": spec.n,
        "k": spec.k,
        "p": list(spec.profile.p),
        "models": [d.key() for d in spec.profile.models],
        "h_source": spec.h_source,
    }

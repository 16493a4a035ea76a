"""Command-line interface.

Subcommands: solve, heatmap, chart, converge, orderstats, predict,
fit-gamma.  Experiment flags mirror the fields of
:class:`~slateopt.experiments.ExperimentConfig`; a JSON config file can
seed any experiment via --config, with explicit flags taking precedence.

Exit codes: 0 success, 2 configuration error, 3 budget exceeded,
4 prediction requested outside its preconditions.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields

from .diversity import PREDICTION_SETTINGS, fit_gamma, predict_limit
from .errors import (
    BudgetExceededError,
    ConfigError,
    HypothesisViolated,
    SlateoptError,
)
from .experiments import (
    ExperimentConfig,
    run_bernoulli_chart,
    run_convergence,
    run_heatmap,
    run_orderstats,
    run_solve_once,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_HYPOTHESIS = 4


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _float_pairs(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_floats(part) for part in text.split(";") if part.strip())


def _add_experiment_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with ExperimentConfig fields")
    sub.add_argument("--n", type=int, help="slate size")
    sub.add_argument("--k", help="consumption cap (integer or the literal 'n')")
    sub.add_argument("--p", type=_floats, help="type likelihoods, e.g. 0.7,0.3")
    sub.add_argument(
        "--dist",
        action="append",
        dest="dists",
        metavar="DIST",
        help="value model, e.g. uniform, exponential:1, beta:1,2, pareto:1.5, "
        "bernoulli:0.4, decaying:1,1,2 (repeat for per-type models)",
    )
    sub.add_argument("--samples", type=int, help="Monte Carlo sets per table")
    sub.add_argument("--seed", type=int, help="Monte Carlo seed")
    sub.add_argument("--workers", type=int, help="Monte Carlo partition count")
    sub.add_argument("--out", help="report output path")
    sub.add_argument("--format", dest="fmt", choices=("csv", "json"), help="report format")
    sub.add_argument("--cache-dir", dest="cache_dir", help="order-stat table cache directory")
    sub.add_argument("--budget", type=int, help="enumeration budget for exact solving")
    sub.add_argument(
        "--plot",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="render a figure next to the report (default on)",
    )


def _config_from_args(args: argparse.Namespace, experiment: str) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    cfg.experiment = experiment
    editable = {f.name for f in fields(ExperimentConfig)}
    for name in editable:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.__post_init__()
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slateopt",
        description="Optimal slate composition under a consumption cap.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="solve one slate instance")
    _add_experiment_flags(solve)
    solve.add_argument(
        "--solver",
        choices=("greedy", "brute_force", "relaxed_rounded", "cross_check"),
        help="solver to run (default greedy)",
    )

    heatmap = subs.add_parser("heatmap", help="distribution-by-cap sweep at fixed n")
    _add_experiment_flags(heatmap)
    heatmap.add_argument("--beta-grid", type=_floats, dest="beta_grid")
    heatmap.add_argument("--pareto-grid", type=_floats, dest="pareto_grid")
    heatmap.add_argument("--k-range", type=_ints, dest="k_range")

    chart = subs.add_parser("chart", help="Bernoulli representation versus slate size")
    _add_experiment_flags(chart)
    chart.add_argument("--q", type=float, help="success probability")
    chart.add_argument("--n-grid", type=_ints, dest="n_grid")
    chart.add_argument(
        "--p-pairs", type=_float_pairs, dest="p_pairs",
        help="semicolon-separated likelihood pairs, e.g. 0.9,0.1;0.7,0.3",
    )

    conv = subs.add_parser("converge", help="gap to a predicted limit along n")
    _add_experiment_flags(conv)
    conv.add_argument("--setting", choices=sorted(PREDICTION_SETTINGS), help="prediction setting")
    conv.add_argument("--n-grid", type=_ints, dest="n_grid")
    conv.add_argument("--q", type=float, help="success probability (dual-preference setting)")

    stats = subs.add_parser("orderstats", help="export an order-statistic table")
    _add_experiment_flags(stats)
    stats.add_argument(
        "--force-mc",
        action="store_true",
        help="estimate by sampling even when a closed form exists",
    )

    pred = subs.add_parser("predict", help="closed-form representation limit")
    pred.add_argument("--setting", required=True, choices=sorted(PREDICTION_SETTINGS))
    pred.add_argument("--p", type=_floats, required=True)
    pred.add_argument("--alpha", type=float)
    pred.add_argument("--beta", type=float)
    pred.add_argument("--c", type=float)
    pred.add_argument("--d", type=float)
    pred.add_argument("--q", type=_floats, help="success probability (scalar or per-type list)")

    fit = subs.add_parser("fit-gamma", help="fit the homogeneity exponent to a representation")
    fit.add_argument("--r", type=_floats, required=True, help="observed representation")
    fit.add_argument("--p", type=_floats, required=True, help="type likelihoods")

    return parser


def _cmd_predict(args: argparse.Namespace) -> int:
    params = {}
    for name in ("alpha", "beta", "c", "d"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    if args.q is not None:
        params["q"] = args.q[0] if len(args.q) == 1 else tuple(args.q)
    limit = predict_limit(args.setting, args.p, **params)
    gamma = limit.gamma_inf
    print(
        json.dumps(
            {
                "setting": limit.setting,
                "r_inf": list(limit.r_inf),
                "gamma_inf": None if gamma is None else ("inf" if math.isinf(gamma) else gamma),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _cmd_fit_gamma(args: argparse.Namespace) -> int:
    fit = fit_gamma(args.r, args.p)
    gamma = "inf" if math.isinf(fit.gamma) else fit.gamma
    print(json.dumps({"gamma": gamma, "residual": fit.residual, "method": fit.method}, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "fit-gamma":
            return _cmd_fit_gamma(args)
        cfg = _config_from_args(args, args.command)
        if args.command == "solve":
            result = run_solve_once(cfg)
            payload = result.rows[0]
            print(json.dumps(payload, indent=2, sort_keys=True))
        elif args.command == "heatmap":
            result = run_heatmap(cfg)
        elif args.command == "chart":
            result = run_bernoulli_chart(cfg)
        elif args.command == "converge":
            result = run_convergence(cfg)
        elif args.command == "orderstats":
            result = run_orderstats(cfg, force_mc=getattr(args, "force_mc", False))
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
        if result.report_path:
            print(f"wrote {result.report_path}", file=sys.stderr)
        if result.figure_path:
            print(f"wrote {result.figure_path}", file=sys.stderr)
        return EXIT_OK
    except HypothesisViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SlateoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

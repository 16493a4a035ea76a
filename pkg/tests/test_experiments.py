"""Experiment runners: schemas, small-scale values, determinism, figures."""

import json
import math
import os

import pytest

from slateopt import (
    Bernoulli,
    Beta,
    ConfigError,
    DecayingBernoulli,
    Exponential,
    ExperimentConfig,
    ObjectiveSpec,
    Pareto,
    TypeProfile,
    Uniform,
    build_order_stat_table,
    eval_objective,
    objective_fragment,
    parse_distribution,
    run_bernoulli_chart,
    run_convergence,
    run_heatmap,
    run_orderstats,
    run_solve_once,
)


class TestParsing:
    @pytest.mark.parametrize(
        "text,expect",
        [
            ("uniform", Uniform()),
            ("exponential:2", Exponential(2.0)),
            ("exp:0.5", Exponential(0.5)),
            ("beta:1,2", Beta(1.0, 2.0)),
            ("pareto:1.5", Pareto(1.5)),
            ("bernoulli:0.4", Bernoulli(0.4)),
            ("decaying:1,1,2", DecayingBernoulli(1.0, 1.0, 2.0)),
        ],
    )
    def test_round_trip(self, text, expect):
        assert parse_distribution(text) == expect

    def test_discrete_form(self):
        dist = parse_distribution("discrete:1@0.4,0@0.6")
        assert dist.values == (1.0, 0.0)
        assert dist.probs == (0.4, 0.6)

    def test_bad_strings(self):
        for text in ("nosuch", "beta:1", "pareto:abc"):
            with pytest.raises(ConfigError):
                parse_distribution(text)


class TestConfig:
    def test_from_json_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"experiment": "heatmap", "wrong": 1}))
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json(str(path))

    def test_from_json_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"n": 12, "p": [0.6, 0.4], "k": "n"}))
        cfg = ExperimentConfig.from_json(str(path))
        assert cfg.n == 12
        assert cfg.resolve_k(12) == 12

    def test_k_bounds(self):
        cfg = ExperimentConfig(k=7)
        with pytest.raises(ConfigError):
            cfg.resolve_k(5)

    def test_format_validated(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(fmt="xml")


class TestHeatmap:
    def test_small_analytic_grid(self, tmp_path):
        out = str(tmp_path / "hm.csv")
        cfg = ExperimentConfig(
            experiment="heatmap", n=12, beta_grid=(1.0,), pareto_grid=(),
            out=out, plot=True,
        )
        res = run_heatmap(cfg)
        assert len(res.rows) == 12
        lines = open(out).read().splitlines()
        assert lines[0] == "dist,param,k,a1,a2,r1,gamma_fit,value"
        assert res.figure_path and os.path.getsize(res.figure_path) > 0
        # full-cap cell concentrates on the likelier type
        full = [r for r in res.rows if r["k"] == 12][0]
        assert (full["a1"], full["a2"]) == (12, 0)
        assert math.isinf(full["gamma_fit"])

    def test_rows_revalidate_objective(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="heatmap", n=8, beta_grid=(2.0,), pareto_grid=(1.5,),
            samples=5000, seed=11, out=str(tmp_path / "hm.csv"), plot=False,
        )
        res = run_heatmap(cfg)
        for family, param in (("beta", 2.0), ("pareto", 1.5)):
            dist = Beta(1.0, param) if family == "beta" else Pareto(param)
            table = build_order_stat_table(dist, max_a=8, samples=5000, seed=11)
            for row in res.rows:
                if row["dist"] != family:
                    continue
                spec = ObjectiveSpec(
                    TypeProfile.shared((0.7, 0.3), dist), 8, row["k"], tables=(table, table)
                )
                expect = eval_objective(spec, (row["a1"], row["a2"]))
                assert row["value"] == pytest.approx(expect, abs=1e-12)

    def test_reruns_are_byte_identical(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            out = str(tmp_path / f"hm_{tag}.csv")
            cfg = ExperimentConfig(
                experiment="heatmap", n=6, beta_grid=(0.5,), pareto_grid=(2.0,),
                samples=4000, seed=5, workers=2, out=out, plot=False,
            )
            run_heatmap(cfg)
            paths.append(out)
        assert open(paths[0], "rb").read() == open(paths[1], "rb").read()

    def test_json_format(self, tmp_path):
        out = str(tmp_path / "hm.json")
        cfg = ExperimentConfig(
            experiment="heatmap", n=4, beta_grid=(1.0,), pareto_grid=(),
            out=out, fmt="json", plot=False,
        )
        run_heatmap(cfg)
        rows = json.load(open(out))
        assert rows[0]["dist"] == "beta"

    def test_requires_two_types(self):
        with pytest.raises(ConfigError):
            run_heatmap(ExperimentConfig(experiment="heatmap", p=(0.5, 0.3, 0.2)))

    def test_heavy_tail_cell_is_less_than_proportional(self):
        # fitted exponent above 1 for a barely-integrable tail, cap 1
        cfg = ExperimentConfig(
            experiment="heatmap", n=30, beta_grid=(), pareto_grid=(1.1,),
            k_range=(1,), samples=100_000, seed=2, plot=False,
        )
        res = run_heatmap(cfg)
        assert res.rows[0]["gamma_fit"] > 1.0


class TestChart:
    def test_skewed_small_slate_is_homogeneous(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="bernoulli_chart", q=0.4, n_grid=(2, 10, 60),
            out=str(tmp_path / "chart.csv"), plot=True,
        )
        res = run_bernoulli_chart(cfg)
        by_key = {(r["p1"], r["n"]): r for r in res.rows}
        assert by_key[(0.9, 2)]["r1"] == 1.0
        assert by_key[(0.5, 2)]["r1"] == 0.5
        assert by_key[(0.5, 10)]["r1"] == 0.5
        # equal representation is approached as the slate grows
        assert abs(by_key[(0.9, 60)]["r1"] - 0.5) < abs(by_key[(0.9, 2)]["r1"] - 0.5)
        assert res.figure_path and os.path.getsize(res.figure_path) > 0

    def test_small_slate_matches_enumeration(self):
        from slateopt import solve_brute_force

        cfg = ExperimentConfig(experiment="bernoulli_chart", q=0.4, n_grid=(2, 5, 9))
        res = run_bernoulli_chart(cfg)
        for row in res.rows:
            spec = ObjectiveSpec(
                TypeProfile.shared((row["p1"], row["p2"]), Bernoulli(0.4)), row["n"], 1
            )
            brute = solve_brute_force(spec)
            assert row["value"] == brute.allocation.objective_value
            if brute.ties == 1:
                assert (row["a1"], row["a2"]) == brute.allocation.counts

    def test_rows_revalidate_objective(self):
        cfg = ExperimentConfig(experiment="bernoulli_chart", q=0.3, n_grid=(4, 16))
        res = run_bernoulli_chart(cfg)
        for row in res.rows:
            spec = ObjectiveSpec(
                TypeProfile.shared((row["p1"], row["p2"]), Bernoulli(0.3)), row["n"], 1
            )
            assert row["value"] == pytest.approx(
                eval_objective(spec, (row["a1"], row["a2"])), abs=1e-12
            )

    def test_default_grid_reaches_near_even_split(self):
        res = run_bernoulli_chart(ExperimentConfig(experiment="bernoulli_chart"))
        row = [r for r in res.rows if r["p1"] == 0.7 and r["n"] == 500][0]
        assert abs(row["r1"] - 0.5) <= 0.05


class TestConvergence:
    def test_calibration_target(self, tmp_path):
        out = str(tmp_path / "conv.csv")
        cfg = ExperimentConfig(
            experiment="convergence", setting="exponential_tail",
            dists=("exponential:1",), p=(0.7, 0.3), k=1,
            n_grid=(10, 100, 1000), out=out, plot=True,
        )
        res = run_convergence(cfg)
        header = open(out).read().splitlines()[0]
        assert header == "n,r_1,r_2,gap,gamma_fit"
        assert res.rows[-1]["gap"] <= 0.01
        assert res.figure_path and os.path.getsize(res.figure_path) > 0

    def test_varying_success_setting(self):
        cfg = ExperimentConfig(
            experiment="convergence", setting="varying_success_top1",
            dists=("bernoulli:0.5", "bernoulli:0.1"), p=(0.7, 0.3), k=1,
            n_grid=(50, 400),
        )
        res = run_convergence(cfg)
        assert res.rows[-1]["gap"] < res.rows[0]["gap"]

    def test_dual_preference_setting(self):
        cfg = ExperimentConfig(
            experiment="convergence", setting="dual_preference_top1",
            p=(0.2, 0.1, 0.7), q=0.4, n_grid=(4, 40, 400),
        )
        res = run_convergence(cfg)
        assert res.rows[-1]["gap"] <= 0.01
        assert math.isnan(res.rows[-1]["gamma_fit"])

    def test_full_cap_setting(self):
        cfg = ExperimentConfig(
            experiment="convergence", setting="use_all_iid",
            dists=("exponential:1",), p=(0.6, 0.4), k="n", n_grid=(3, 30),
        )
        res = run_convergence(cfg)
        assert res.rows[-1]["gap"] == 0.0  # one-hot is exact at every n

    def test_needs_setting(self):
        with pytest.raises(ConfigError):
            run_convergence(ExperimentConfig(experiment="convergence"))


class TestSolveOnce:
    def test_json_report(self, tmp_path):
        out = str(tmp_path / "solve.json")
        cfg = ExperimentConfig(
            experiment="solve_once", dists=("uniform",), p=(0.7, 0.3),
            n=10, k=1, solver="brute_force", out=out,
        )
        res = run_solve_once(cfg)
        data = json.load(open(out))
        assert data["counts"] == [6, 4]
        assert data["spec"]["h_source"] == "analytic"
        assert data["ties"] == 1

    def test_unknown_solver(self):
        cfg = ExperimentConfig(experiment="solve_once", dists=("uniform",), solver="magic")
        with pytest.raises(ConfigError):
            run_solve_once(cfg)

    def test_objective_fragment(self):
        spec = ObjectiveSpec(TypeProfile.shared((0.7, 0.3), Exponential(1.0)), 5, 2)
        frag = objective_fragment(spec)
        assert frag == {
            "n": 5,
            "k": 2,
            "p": [0.7, 0.3],
            "models": ["exponential(rate=1)", "exponential(rate=1)"],
            "h_source": "analytic",
        }


class TestOrderStats:
    def test_export_analytic(self, tmp_path):
        out = str(tmp_path / "os.csv")
        cfg = ExperimentConfig(experiment="orderstats", dists=("uniform",), n=4, out=out)
        res = run_orderstats(cfg)
        assert res.extra["table"].source == "analytic"
        assert open(out).read().splitlines()[0] == "dist,params,i,a,mu,se,source"

    def test_force_monte_carlo(self, tmp_path):
        out = str(tmp_path / "os.csv")
        cfg = ExperimentConfig(
            experiment="orderstats", dists=("uniform",), n=3, samples=5000, out=out
        )
        res = run_orderstats(cfg, force_mc=True)
        assert res.extra["table"].source == "monte_carlo"

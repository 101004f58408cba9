import math
from pathlib import Path

import pytest

from dpecdf import (
    ConfigError,
    ExperimentConfig,
    ScenarioSpec,
    builtin_scenarios,
    default_config,
    load_config,
    make_model,
    run_power_study,
    rows_to_csv,
)
from dpecdf.power import CSV_HEADER, get_scenario

CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"


def tiny_config(**overrides):
    settings = dict(
        scenarios=(ScenarioSpec("ts-demo", "two-sample", "normal:0,1",
                                ("normal:0,1", "normal:1,1"), ("ks", "mann-whitney")),),
        n_grid=(25,),
        epsilon_grid=(1.0,),
        alpha=0.05,
        trials=40,
        mc_samples=80,
        master_seed=99,
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


class TestScenarioSpec:
    def test_builtins_complete(self):
        names = {s.name for s in builtin_scenarios()}
        assert names == {
            "gof-location", "gof-cauchy", "gof-laplace",
            "ts-location", "ts-cauchy", "ts-shape",
            "paired-normal", "paired-cauchy", "paired-exp",
        }

    def test_gof_laplace_generators(self):
        scenario = get_scenario("gof-laplace")
        assert scenario.null == "normal:0,1"
        assert scenario.alternative == ("laplace:0,1",)

    def test_ts_shape_generators(self):
        scenario = get_scenario("ts-shape")
        assert scenario.alternative == ("normal:0,1", "cauchy:0,1")

    def test_paired_exp_has_median_zero(self):
        scenario = get_scenario("paired-exp")
        model = make_model(*_split(scenario.alternative[0]))
        assert float(model.quantile(0.5)) == pytest.approx(0.0, abs=1e-15)

    def test_rosters(self):
        assert get_scenario("gof-cauchy").tests == (
            "ks", "kuiper", "cvm", "ks-family", "kuiper-family")
        assert get_scenario("gof-location").tests == ("ks", "kuiper", "cvm")
        assert get_scenario("ts-location").tests == (
            "ks", "kuiper", "mann-whitney", "kruskal-wallis", "median")
        assert get_scenario("paired-normal").tests == ("ks", "kuiper", "sign", "wilcoxon")

    def test_validation(self):
        with pytest.raises(ConfigError):
            ScenarioSpec("Bad Name", "gof", "normal:0,1", ("normal:0,1",), ("ks",))
        with pytest.raises(ConfigError):
            ScenarioSpec("x", "gof", "normal:0,1", ("normal:0,1",), ("sign",))
        with pytest.raises(ConfigError):
            ScenarioSpec("x", "two-sample", "normal:0,1", ("normal:0,1",), ("ks",))
        with pytest.raises(ConfigError):
            ScenarioSpec("x", "gof", "normal:0,1", ("normal:0,1",), ())
        with pytest.raises(ConfigError):
            ScenarioSpec("x", "gof", "nope:0,1", ("normal:0,1",), ("ks",))


def _split(spec):
    name, _, tail = spec.partition(":")
    return name, [float(v) for v in tail.split(",")]


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            tiny_config(n_grid=())
        with pytest.raises(ConfigError):
            tiny_config(epsilon_grid=(0.0,))
        with pytest.raises(ConfigError):
            tiny_config(alpha=1.5)
        with pytest.raises(ConfigError):
            tiny_config(trials=0)
        with pytest.raises(ConfigError):
            tiny_config(scenarios=())

    def test_default_config_is_desk_scale(self):
        config = default_config()
        assert config.trials == 500
        assert config.mc_samples == 1000
        assert config.n_grid == (50, 100, 200, 400)
        assert len(config.scenarios) == 9

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "study.toml"
        path.write_text(
            """
            master_seed = 7
            trials = 10
            mc_samples = 20
            n_grid = [10, 20]
            epsilon_grid = [1.0]
            scenarios = ["ts-shape"]

            [[scenario]]
            name = "extra"
            kind = "paired"
            null = "normal:0,1"
            alternative = "normal:0.5,1"
            tests = ["sign"]
            """
        )
        config = load_config(path)
        assert config.master_seed == 7
        assert [s.name for s in config.scenarios] == ["ts-shape", "extra"]
        assert config.scenarios[1].alternative == ("normal:0.5,1",)

    def test_load_config_rejects_unknowns(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("trials = 10\nn_grid = [10]\nbogus = 1\nscenarios = ['ts-shape']\n")
        with pytest.raises(ConfigError, match="bogus"):
            load_config(bad)
        bad.write_text("scenarios = ['not-a-scenario']\n")
        with pytest.raises(ConfigError, match="not-a-scenario"):
            load_config(bad)
        bad.write_text("[[scenario]]\nname='x'\nkind='gof'\nnull='normal:0,1'\n"
                       "alternative=['normal:0,1']\ntests=['nope']\n")
        with pytest.raises(ConfigError, match="nope"):
            load_config(bad)
        bad.write_text("this is not toml [")
        with pytest.raises(ConfigError, match="TOML"):
            load_config(bad)

    @pytest.mark.parametrize("name", ["example.toml", "desk.toml", "paper-full.toml"])
    def test_shipped_configs_parse(self, name):
        config = load_config(CONFIGS_DIR / name)
        assert config.scenarios


class TestRunPowerStudy:
    def test_single_trial_power_is_zero_or_one(self):
        rows = run_power_study(tiny_config(trials=1))
        assert all(row.power in (0.0, 1.0) for row in rows)

    def test_rows_sorted_and_complete(self):
        config = tiny_config(n_grid=(10, 20), epsilon_grid=(0.5, 1.0))
        rows = run_power_study(config)
        assert len(rows) == 2 * 2 * 2  # tests x eps x n
        keys = [(r.scenario, r.test, r.epsilon, r.n) for r in rows]
        assert keys == sorted(keys)
        assert all(r.se == pytest.approx(
            math.sqrt(r.power * (1 - r.power) / r.trials)) for r in rows)

    def test_thread_count_does_not_change_results(self):
        config = tiny_config()
        serial = run_power_study(config, threads=1)
        parallel = run_power_study(config, threads=3)
        assert serial == parallel
        assert rows_to_csv(serial) == rows_to_csv(parallel)

    def test_csv_format(self):
        rows = run_power_study(tiny_config(trials=5))
        text = rows_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(rows)
        assert lines[1].startswith("ts-demo,ks,ks,1,25,")

    def test_null_coincidence_matches_alpha(self):
        # power against the null generator itself is the type I error
        scenario = ScenarioSpec("null-check", "gof", "normal:0,1", ("normal:0,1",),
                                ("ks",))
        config = ExperimentConfig(
            scenarios=(scenario,), n_grid=(50,), epsilon_grid=(1.0,),
            trials=2000, mc_samples=1000, master_seed=31415,
        )
        (row,) = run_power_study(config)
        assert 0.03 <= row.power <= 0.07

    def test_location_power_grows_with_n(self):
        scenario = ScenarioSpec("ts-loc", "two-sample", "normal:0,1",
                                ("normal:0,1", "normal:1,1"), ("ks",))
        config = ExperimentConfig(
            scenarios=(scenario,), n_grid=(50, 200), epsilon_grid=(1.0,),
            trials=300, mc_samples=600, master_seed=8,
        )
        rows = run_power_study(config)
        by_n = {row.n: row for row in rows}
        pooled = math.sqrt(by_n[50].se**2 + by_n[200].se**2)
        assert by_n[200].power >= by_n[50].power - 2 * pooled

    def test_family_tests_run(self):
        scenario = ScenarioSpec("gof-fam", "gof", "normal:0,1", ("cauchy:0,1",),
                                ("ks-family",))
        config = ExperimentConfig(
            scenarios=(scenario,), n_grid=(20,), epsilon_grid=(1.0,),
            trials=10, mc_samples=30, master_seed=5,
        )
        (row,) = run_power_study(config)
        assert row.metric == "ks"
        assert 0.0 <= row.power <= 1.0

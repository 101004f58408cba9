"""Deterministic Monte Carlo power and type-I-error studies.

A study is a grid over (scenario, test, epsilon, n).  Each grid cell
calibrates one null table (seeded from (master_seed, cell index)) and reuses
it for every trial in the cell; trial t draws alternative data and noise from
the substream (master_seed, cell index, t).  Because every cell is a pure
function of the configuration, the emitted CSV is byte-identical no matter
how many worker processes run the cells.

Scenario generators are declarative model specs like ``"normal:0,1"`` (see
:func:`.models.parse_model_spec`); for two-sample scenarios the alternative is
a pair of specs and the two groups have equal size n, for paired scenarios the
alternative is the law of the differences z = y - x.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import ConfigError, ParameterError
from .metrics import SortedSample
from .models import get_family, parse_model_spec
from .hypotests import conservative_p_value
from .procedures import FAMILY_METHODS, METHODS_BY_KIND, Procedure, build_procedure
from .rng import RngStream, derive_seed

CSV_HEADER = "scenario,test,metric,epsilon,n,power,trials,se"

_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789-_")


@dataclass(frozen=True)
class ScenarioSpec:
    """One named study scenario: a null, an alternative, and a test roster."""

    name: str
    kind: str
    null: str
    alternative: tuple[str, ...]
    tests: tuple[str, ...]
    caption: str = ""

    def __post_init__(self):
        if not self.name or not set(self.name) <= _NAME_CHARS:
            raise ConfigError(
                f"scenario name {self.name!r} must be lowercase [a-z0-9-_]"
            )
        if self.kind not in METHODS_BY_KIND:
            raise ConfigError(
                f"scenario {self.name}: unknown kind {self.kind!r} "
                f"(choose from {', '.join(METHODS_BY_KIND)})"
            )
        object.__setattr__(self, "alternative", tuple(self.alternative))
        object.__setattr__(self, "tests", tuple(self.tests))
        wanted = 2 if self.kind == "two-sample" else 1
        if len(self.alternative) != wanted:
            raise ConfigError(
                f"scenario {self.name}: {self.kind} needs {wanted} alternative "
                f"generator(s), got {len(self.alternative)}"
            )
        if not self.tests:
            raise ConfigError(f"scenario {self.name}: empty test list")
        for test in self.tests:
            if test not in METHODS_BY_KIND[self.kind]:
                raise ConfigError(
                    f"scenario {self.name}: test {test!r} is not available for "
                    f"{self.kind} (choose from {', '.join(METHODS_BY_KIND[self.kind])})"
                )
        for spec in (self.null, *self.alternative):
            try:
                parse_model_spec(spec)
            except ParameterError as exc:
                raise ConfigError(f"scenario {self.name}: {exc}") from None


@dataclass(frozen=True)
class PowerRow:
    """One grid cell's estimated rejection rate."""

    scenario: str
    test: str
    metric: str
    epsilon: float
    n: int
    power: float
    trials: int
    se: float


@dataclass(frozen=True)
class ExperimentConfig:
    scenarios: tuple[ScenarioSpec, ...]
    n_grid: tuple[int, ...]
    epsilon_grid: tuple[float, ...]
    alpha: float = 0.05
    trials: int = 500
    mc_samples: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "epsilon_grid",
                           tuple(float(e) for e in self.epsilon_grid))
        if not self.scenarios:
            raise ConfigError("configuration needs at least one scenario")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ConfigError(f"n_grid must be nonempty positive integers, got {self.n_grid}")
        if not self.epsilon_grid or any(not e > 0 for e in self.epsilon_grid):
            raise ConfigError(
                f"epsilon_grid must be nonempty positive reals, got {self.epsilon_grid}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.trials < 1 or self.mc_samples < 1:
            raise ConfigError("trials and mc_samples must be at least 1")
        names = [s.name for s in self.scenarios]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate scenario names in {names}")


def builtin_scenarios() -> list[ScenarioSpec]:
    """The nine stock scenarios: three goodness-of-fit, three two-sample,
    three paired, with the test roster each design is usually compared on."""
    gof_tests = ("ks", "kuiper", "cvm", "ks-family", "kuiper-family")
    ts_tests = ("ks", "kuiper", "mann-whitney", "kruskal-wallis", "median")
    paired_tests = ("ks", "kuiper", "sign", "wilcoxon")
    shifted_exp = f"exponential:1,{-math.log(2.0)!r}"
    return [
        ScenarioSpec("gof-location", "gof", "normal:0,1", ("normal:0.1,1",),
                     ("ks", "kuiper", "cvm"),
                     "null normal(0,1), data normal(0.1,1): pure location shift"),
        ScenarioSpec("gof-cauchy", "gof", "normal:0,1", ("cauchy:0,1",), gof_tests,
                     "null normal(0,1), data cauchy(0,1): heavy tails"),
        ScenarioSpec("gof-laplace", "gof", "normal:0,1", ("laplace:0,1",), gof_tests,
                     "null normal(0,1), data laplace(0,1): sharper center, fatter tails"),
        ScenarioSpec("ts-location", "two-sample", "normal:0,1",
                     ("normal:0,1", "normal:1,1"), ts_tests,
                     "normal(0,1) vs normal(1,1): location shift"),
        ScenarioSpec("ts-cauchy", "two-sample", "cauchy:0,1",
                     ("cauchy:0,1", "cauchy:1,1"), ts_tests,
                     "cauchy(0,1) vs cauchy(1,1): heavy-tailed location shift"),
        ScenarioSpec("ts-shape", "two-sample", "normal:0,1",
                     ("normal:0,1", "cauchy:0,1"), ts_tests,
                     "normal(0,1) vs cauchy(0,1): scale/shape difference, equal medians"),
        ScenarioSpec("paired-normal", "paired", "normal:0,1", ("normal:0.2,1",),
                     paired_tests, "differences from normal(0.2,1)"),
        ScenarioSpec("paired-cauchy", "paired", "normal:0,1", ("cauchy:0.2,1",),
                     paired_tests, "differences from cauchy(0.2,1)"),
        ScenarioSpec("paired-exp", "paired", "normal:0,1", (shifted_exp,),
                     paired_tests,
                     "differences from exponential(1) shifted to median zero"),
    ]


def get_scenario(name: str) -> ScenarioSpec:
    for scenario in builtin_scenarios():
        if scenario.name == name:
            return scenario
    raise ConfigError(
        f"unknown scenario {name!r}; builtins are "
        + ", ".join(s.name for s in builtin_scenarios())
    )


def default_config(master_seed: int = 20240601) -> ExperimentConfig:
    """Desk-scale study over every builtin scenario."""
    return ExperimentConfig(
        scenarios=tuple(builtin_scenarios()),
        n_grid=(50, 100, 200, 400),
        epsilon_grid=(0.1, 1.0),
        alpha=0.05,
        trials=500,
        mc_samples=1000,
        master_seed=master_seed,
    )


_TOP_LEVEL_KEYS = {
    "scenarios", "scenario", "n_grid", "epsilon_grid", "alpha", "trials",
    "mc_samples", "master_seed",
}


def load_config(path) -> ExperimentConfig:
    """Read a study configuration from a TOML file.

    Top-level keys: ``n_grid``, ``epsilon_grid``, ``alpha``, ``trials``,
    ``mc_samples``, ``master_seed``, ``scenarios`` (builtin names), and any
    number of ``[[scenario]]`` blocks with fields name/kind/null/alternative/
    tests.  See configs/example.toml for an annotated template.
    """
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc

    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"config {path}: unknown keys {sorted(unknown)}")

    scenarios: list[ScenarioSpec] = []
    for name in raw.get("scenarios", []):
        scenarios.append(get_scenario(str(name)))
    for block in raw.get("scenario", []):
        if not isinstance(block, dict):
            raise ConfigError(f"config {path}: [[scenario]] entries must be tables")
        unknown = set(block) - {"name", "kind", "null", "alternative", "tests", "caption"}
        if unknown:
            raise ConfigError(
                f"config {path}: scenario {block.get('name', '?')}: unknown fields "
                f"{sorted(unknown)}"
            )
        alternative = block.get("alternative", ())
        if isinstance(alternative, str):
            alternative = (alternative,)
        try:
            scenarios.append(ScenarioSpec(
                name=str(block.get("name", "")),
                kind=str(block.get("kind", "")),
                null=str(block.get("null", "")),
                alternative=tuple(str(a) for a in alternative),
                tests=tuple(str(t) for t in block.get("tests", ())),
                caption=str(block.get("caption", "")),
            ))
        except ConfigError as exc:
            raise ConfigError(f"config {path}: {exc}") from None

    try:
        return ExperimentConfig(
            scenarios=tuple(scenarios),
            n_grid=tuple(raw.get("n_grid", (50, 100, 200, 400))),
            epsilon_grid=tuple(raw.get("epsilon_grid", (0.1, 1.0))),
            alpha=float(raw.get("alpha", 0.05)),
            trials=int(raw.get("trials", 500)),
            mc_samples=int(raw.get("mc_samples", 1000)),
            master_seed=int(raw.get("master_seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config {path}: {exc}") from None


def _procedure_for(scenario: ScenarioSpec, test: str, epsilon: float) -> Procedure:
    if scenario.kind == "gof":
        null_model = parse_model_spec(scenario.null)
        family = None
        if test in FAMILY_METHODS:
            family = get_family(scenario.null.partition(":")[0])
        return build_procedure("gof", test, epsilon, null_model=null_model,
                               family=family)
    return build_procedure(scenario.kind, test, epsilon)


def _draw_alternative(scenario: ScenarioSpec, models, n: int, rng: RngStream):
    if scenario.kind == "two-sample":
        x = SortedSample.from_data(models[0].sample(n, rng))
        y = SortedSample.from_data(models[1].sample(n, rng))
        return (x, y)
    if scenario.kind == "paired":
        return models[0].sample(n, rng)
    return SortedSample.from_data(models[0].sample(n, rng))


def _run_cell(args) -> PowerRow:
    config, index, scenario, test, epsilon, n = args
    procedure = _procedure_for(scenario, test, epsilon)
    models = tuple(parse_model_spec(spec) for spec in scenario.alternative)
    m = n if scenario.kind == "two-sample" else None

    table_rng = RngStream(derive_seed(config.master_seed, index))
    table = procedure.calibrate(n, m, mc_samples=config.mc_samples, rng=table_rng)

    rejections = 0
    for trial in range(config.trials):
        stream = RngStream(derive_seed(config.master_seed, index, trial))
        data = _draw_alternative(scenario, models, n, stream)
        evidence = procedure.release(data, stream)[1]
        if conservative_p_value(table.values, evidence) <= config.alpha:
            rejections += 1
    power = rejections / config.trials
    se = math.sqrt(power * (1.0 - power) / config.trials)
    metric = procedure.metric.value if procedure.metric is not None else "-"
    return PowerRow(scenario.name, test, metric, float(epsilon), int(n),
                    power, config.trials, se)


def _enumerate_cells(config: ExperimentConfig):
    index = 0
    for scenario in config.scenarios:
        for test in scenario.tests:
            for epsilon in config.epsilon_grid:
                for n in config.n_grid:
                    yield (config, index, scenario, test, epsilon, n)
                    index += 1


def run_power_study(config: ExperimentConfig, threads: int = 1) -> list[PowerRow]:
    """Run every grid cell and return rows sorted by (scenario, test, eps, n).

    ``threads`` > 1 runs cells in that many worker processes; the result is
    identical to the serial run.
    """
    cells = list(_enumerate_cells(config))
    if threads <= 1:
        rows = [_run_cell(cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=int(threads)) as pool:
            rows = list(pool.map(_run_cell, cells, chunksize=1))
    rows.sort(key=lambda r: (r.scenario, r.test, r.epsilon, r.n))
    return rows


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.scenario},{row.test},{row.metric},{format(row.epsilon, '.6g')},"
            f"{row.n},{format(row.power, '.6g')},{row.trials},{format(row.se, '.6g')}"
        )
    return "\n".join(lines) + "\n"


def write_rows_csv(rows, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as handle:
        handle.write(rows_to_csv(rows))

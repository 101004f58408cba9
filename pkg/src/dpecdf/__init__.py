"""Differentially private nonparametric hypothesis tests on empirical cdfs.

The pieces, bottom to top: :mod:`.rng` (deterministic SplitMix64 streams),
:mod:`.metrics` (exact ecdf pseudo-metrics and their 1/n base sensitivity),
:mod:`.noise` (Laplace/Tulap additive mechanisms), :mod:`.models` (continuous
cdf families and minimum-distance fitting), :mod:`.hypotests` (test designs,
sensitivities, Monte Carlo calibration, p-values), :mod:`.baselines`
(competing private rank/count tests), :mod:`.power` (deterministic power
studies) and :mod:`.cli` (the ``dpecdf`` command).
"""

from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    EstimationError,
    ParameterError,
)
from .rng import RngStream, derive_seed
from .metrics import (
    BASE_FREE_METRICS,
    MetricKind,
    SortedSample,
    base_sensitivity,
    cvm_to_cdf,
    distance_between_samples,
    distance_to_cdf,
    ks_to_cdf,
    ks_two_sample,
    kuiper_to_cdf,
    kuiper_two_sample,
    wasserstein_to_cdf,
)
from .noise import NoiseKind, default_noise, privatize, sample_laplace, sample_tulap
from .models import (
    ContinuousCdf,
    FittedParams,
    LocationScaleFamily,
    FAMILY_NAMES,
    fit_min_distance,
    get_family,
    make_model,
    parse_model_spec,
    standard_normal,
)
from .hypotests import (
    Adjacency,
    NullDistributionTable,
    TestKind,
    TestResult,
    TestSpec,
    calibrate_null,
    conservative_p_value,
    gof_statistic_family,
    gof_statistic_known,
    paired_statistic,
    run_private_test,
    sensitivity_for,
    symmetry_statistic,
    two_sample_statistic,
)
from .baselines import (
    private_cvm,
    private_kruskal_wallis,
    private_mann_whitney,
    private_median_test,
    private_sign_test,
    private_wilcoxon,
)
from .procedures import Procedure, build_procedure
from .power import (
    ExperimentConfig,
    PowerRow,
    ScenarioSpec,
    builtin_scenarios,
    default_config,
    load_config,
    run_power_study,
    rows_to_csv,
    write_rows_csv,
)

__version__ = "0.1.0"

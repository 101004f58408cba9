import math

import numpy as np
import pytest

from dpecdf import (
    MetricKind,
    ParameterError,
    SortedSample,
    base_sensitivity,
    cvm_to_cdf,
    distance_between_samples,
    distance_to_cdf,
    ks_to_cdf,
    ks_two_sample,
    kuiper_to_cdf,
    kuiper_two_sample,
    make_model,
    wasserstein_to_cdf,
)

import oracles

U01 = make_model("uniform", [0, 1])
N01 = make_model("normal", [0, 1])


def random_sample(rng, n, with_ties=False):
    values = rng.standard_normal(n) * rng.uniform(0.5, 3.0) + rng.uniform(-2, 2)
    if with_ties and n >= 4:
        values[1] = values[0]
        values[3] = values[2]
    return SortedSample.from_data(values)


class TestSortedSample:
    def test_from_data_sorts(self):
        s = SortedSample.from_data([3.0, 1.0, 2.0])
        assert s.values.tolist() == [1.0, 2.0, 3.0]
        assert s.n == 3

    def test_ties_allowed(self):
        s = SortedSample.from_data([1.0, 1.0, 1.0, 2.0])
        assert s.n == 4

    @pytest.mark.parametrize("bad", [[], [np.nan], [1.0, np.inf], [[1.0, 2.0]]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ParameterError):
            SortedSample.from_data(bad)

    def test_rejects_unsorted_direct(self):
        with pytest.raises(ParameterError):
            SortedSample(np.array([2.0, 1.0]))

    def test_values_immutable(self):
        s = SortedSample.from_data([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0


class TestKnownValues:
    def test_ks_single_midpoint(self):
        x = SortedSample.from_data([0.5])
        assert ks_to_cdf(x, U01) == 0.5
        assert oracles.grid_ks_gof(x.values, U01) == pytest.approx(0.5, abs=1e-12)

    def test_ks_two_quartile_points(self):
        x = SortedSample.from_data([0.25, 0.75])
        assert ks_to_cdf(x, U01) == 0.25
        assert oracles.grid_ks_gof(x.values, U01) == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 4, 17])
    def test_ks_floor_at_quantile_points(self, n):
        # points at F((2i-1)/(2n)) quantiles make every jump symmetric
        x = SortedSample.from_data(N01.quantile((2 * np.arange(1, n + 1) - 1) / (2 * n)))
        assert ks_to_cdf(x, N01) == pytest.approx(1 / (2 * n), abs=1e-12)

    def test_kuiper_single_midpoint(self):
        x = SortedSample.from_data([0.5])
        assert kuiper_to_cdf(x, U01) == 1.0

    def test_kuiper_identity_two_sample(self):
        x = SortedSample.from_data([0.3, 0.6, 0.9])
        assert kuiper_two_sample(x, x) == 0.0

    def test_cvm_single_midpoint(self):
        x = SortedSample.from_data([0.5])
        assert cvm_to_cdf(x, U01) == pytest.approx(math.sqrt(1 / 12), abs=1e-15)
        assert oracles.quad_cvm_gof(x.values, U01) == pytest.approx(
            math.sqrt(1 / 12), abs=1e-9
        )

    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_cvm_at_quantile_points(self, n):
        x = SortedSample.from_data(N01.quantile((2 * np.arange(1, n + 1) - 1) / (2 * n)))
        assert cvm_to_cdf(x, N01) == pytest.approx(math.sqrt(1 / (12 * n**2)), abs=1e-12)

    def test_wasserstein_single_midpoint(self):
        x = SortedSample.from_data([0.5])
        assert wasserstein_to_cdf(x, U01) == 0.25
        assert oracles.quad_wasserstein_gof(x.values, U01) == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_wasserstein_at_quantile_points(self, n):
        x = SortedSample.from_data(N01.quantile((2 * np.arange(1, n + 1) - 1) / (2 * n)))
        assert wasserstein_to_cdf(x, N01) == pytest.approx(1 / (4 * n), abs=1e-12)

    def test_two_sample_interleaved(self):
        x = SortedSample.from_data([1.0, 2.0])
        y = SortedSample.from_data([1.5, 2.5])
        assert ks_two_sample(x, y) == 0.5
        assert kuiper_two_sample(x, y) == 0.5  # D+ = 0.5, D- = 0

    def test_two_sample_identity_and_separation(self):
        x = SortedSample.from_data([0.1, 0.2, 0.7])
        assert ks_two_sample(x, x) == 0.0
        y = SortedSample.from_data([5.0, 6.0, 7.0])
        assert ks_two_sample(x, y) == 1.0

    def test_kuiper_sign_flip_case(self):
        z = np.array([1.0, 2.0, -3.0])
        x = SortedSample.from_data(z)
        y = SortedSample.from_data(-z)
        assert kuiper_two_sample(x, y) == pytest.approx(2 / 3, abs=1e-15)
        assert ks_two_sample(x, y) == pytest.approx(1 / 3, abs=1e-15)
        d_plus, d_minus = oracles.breakpoint_sups_two_sample(z, -z)
        assert d_plus == pytest.approx(1 / 3, abs=1e-15)
        assert d_minus == pytest.approx(1 / 3, abs=1e-15)


class TestBaseSensitivityConstant:
    @pytest.mark.parametrize(
        "metric,n,expected",
        [(MetricKind.KS, 100, 0.01), (MetricKind.KUIPER, 50, 0.02),
         (MetricKind.CVM, 1, 1.0), (MetricKind.WASSERSTEIN, 8, 0.125)],
    )
    def test_values(self, metric, n, expected):
        assert base_sensitivity(metric, n) == expected

    def test_bad_n(self):
        with pytest.raises(ParameterError):
            base_sensitivity(MetricKind.KS, 0)


class TestOracleAgreement:
    def test_sup_metrics_match_grid(self):
        rng = np.random.default_rng(2024)
        for trial in range(60):
            x = random_sample(rng, rng.integers(1, 21), with_ties=trial % 3 == 0)
            model = N01 if trial % 2 else make_model("laplace", [0.3, 1.4])
            assert ks_to_cdf(x, model) == pytest.approx(
                oracles.grid_ks_gof(x.values, model, 20_000), abs=1e-12
            )
            assert kuiper_to_cdf(x, model) == pytest.approx(
                oracles.grid_kuiper_gof(x.values, model, 20_000), abs=1e-12
            )

    def test_integral_metrics_match_quadrature(self):
        rng = np.random.default_rng(77)
        for trial in range(30):
            x = random_sample(rng, rng.integers(1, 21), with_ties=trial % 4 == 0)
            model = N01 if trial % 2 else make_model("cauchy", [-0.2, 0.8])
            assert cvm_to_cdf(x, model) == pytest.approx(
                oracles.quad_cvm_gof(x.values, model), abs=1e-6
            )
            assert wasserstein_to_cdf(x, model) == pytest.approx(
                oracles.quad_wasserstein_gof(x.values, model), abs=1e-6
            )

    def test_two_sample_matches_breakpoints(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            x = random_sample(rng, rng.integers(1, 25))
            y = random_sample(rng, rng.integers(1, 25))
            d_plus, d_minus = oracles.breakpoint_sups_two_sample(x.values, y.values)
            assert ks_two_sample(x, y) == pytest.approx(max(d_plus, d_minus), abs=1e-12)
            assert kuiper_two_sample(x, y) == pytest.approx(d_plus + d_minus, abs=1e-12)


class TestMetricProperties:
    def test_symmetry_two_sample(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            x = random_sample(rng, rng.integers(1, 30))
            y = random_sample(rng, rng.integers(1, 30))
            assert ks_two_sample(x, y) == ks_two_sample(y, x)
            assert kuiper_two_sample(x, y) == kuiper_two_sample(y, x)

    def test_ordering_and_bounds(self):
        rng = np.random.default_rng(8)
        for _ in range(300):
            x = random_sample(rng, rng.integers(1, 30))
            y = random_sample(rng, rng.integers(1, 30))
            ks = ks_two_sample(x, y)
            kp = kuiper_two_sample(x, y)
            assert kp >= ks
            assert 0.0 <= ks <= 1.0
            assert kp <= 2.0
        for _ in range(100):
            x = random_sample(rng, rng.integers(1, 30))
            assert kuiper_to_cdf(x, N01) >= ks_to_cdf(x, N01)
            assert ks_to_cdf(x, N01) <= 1.0
            assert kuiper_to_cdf(x, N01) <= 2.0

    def test_integral_metric_identity_axiom(self):
        # d(F, F) = 0 exactly for the underlying pseudo-metrics under any H
        rng = np.random.default_rng(44)
        for _ in range(50):
            values = rng.standard_normal(rng.integers(1, 25))
            assert oracles.cvm_between_ecdfs(values, values, N01) == 0.0
            assert oracles.wasserstein_between_ecdfs(values, values, N01) == 0.0

    def test_kuiper_triangle_inequality(self):
        # the kuiper distance is a true metric on cdfs
        rng = np.random.default_rng(99)
        for _ in range(1000):
            a = random_sample(rng, rng.integers(1, 31))
            b = random_sample(rng, rng.integers(1, 31))
            c = random_sample(rng, rng.integers(1, 31))
            assert kuiper_two_sample(a, c) <= (
                kuiper_two_sample(a, b) + kuiper_two_sample(b, c) + 1e-12
            )

    def test_base_sensitivity_bound_all_metrics(self):
        # one replaced entry moves every distance by at most 1/n
        rng = np.random.default_rng(1234)
        base_measure = N01
        for _ in range(1000):
            n = int(rng.integers(2, 51))
            values = rng.standard_normal(n) * rng.uniform(0.2, 4.0)
            replaced = values.copy()
            replaced[rng.integers(0, n)] = rng.standard_normal() * rng.uniform(0.2, 8.0)
            x = SortedSample.from_data(values)
            y = SortedSample.from_data(replaced)
            bound = 1.0 / n + 1e-12
            assert ks_two_sample(x, y) <= bound
            assert kuiper_two_sample(x, y) <= bound
            assert oracles.cvm_between_ecdfs(values, replaced, base_measure) <= bound
            assert oracles.wasserstein_between_ecdfs(values, replaced, base_measure) <= bound

    def test_base_sensitivity_tightness(self):
        rng = np.random.default_rng(4321)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            values = rng.standard_normal(n)
            values[0] = -60.0  # beyond the left tail of the base measure
            replaced = values.copy()
            replaced[0] = 60.0  # beyond the right tail
            # a straddling replacement approaches the 1/n bound for the
            # integral metrics and attains it exactly for the sup metrics
            assert oracles.cvm_between_ecdfs(values, replaced, N01) >= (1 - 1e-3) / n
            assert oracles.wasserstein_between_ecdfs(values, replaced, N01) >= (1 - 1e-3) / n
            x = SortedSample.from_data(values)
            y = SortedSample.from_data(replaced)
            assert ks_two_sample(x, y) == pytest.approx(1.0 / n, abs=1e-15)
            assert kuiper_two_sample(x, y) == pytest.approx(1.0 / n, abs=1e-15)

    def test_any_distinct_single_change_is_exactly_one_over_n(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(1, 40))
            values = rng.standard_normal(n)
            j = int(rng.integers(0, n))
            replaced = values.copy()
            replaced[j] = values[j] + rng.uniform(0.1, 3.0) * rng.choice([-1, 1])
            x = SortedSample.from_data(values)
            y = SortedSample.from_data(replaced)
            assert ks_two_sample(x, y) == pytest.approx(1.0 / n, abs=1e-15)
            assert kuiper_two_sample(x, y) == pytest.approx(1.0 / n, abs=1e-15)


class TestDispatch:
    def test_distance_to_cdf_covers_all(self):
        x = SortedSample.from_data([0.5])
        assert distance_to_cdf(x, U01, "ks") == 0.5
        assert distance_to_cdf(x, U01, MetricKind.WASSERSTEIN) == 0.25

    def test_two_sample_rejects_base_measure_metrics(self):
        x = SortedSample.from_data([1.0, 2.0])
        for metric in ("cvm", "wasserstein"):
            with pytest.raises(ParameterError, match="base"):
                distance_between_samples(x, x, metric)

"""Private hypothesis tests: statistics, sensitivities, Monte Carlo calibration.

Every test design here scores data with an ecdf pseudo-metric:

* goodness-of-fit, known null: distance from the ecdf to the null cdf;
* goodness-of-fit, unknown location/scale: the minimum distance over the
  family (any of its members could be the null, so the infimum is the natural
  score, and its null law depends on the family but not on the parameters);
* two-sample: distance between the two ecdfs;
* paired/symmetry: distance between the ecdf of the differences z = y - x and
  the ecdf of -z, which is zero exactly when the differences look symmetric.

Each statistic changes by a known multiple of 1/n when one record changes
(:func:`sensitivity_for`), so adding noise at that scale gives an epsilon-DP
release.  The statistics are distribution-free under their nulls, so p-values
come from a simulated table of privatized null statistics
(:func:`calibrate_null`) via the conservative Monte Carlo rule
(1 + #{table >= observed}) / (M + 1), which is valid at any table size.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CalibrationError, ParameterError
from .metrics import (
    BASE_FREE_METRICS,
    MetricKind,
    SortedSample,
    as_sorted_sample,
    distance_between_samples,
    distance_to_cdf,
)
from .models import (
    ContinuousCdf,
    LocationScaleFamily,
    fit_min_distance,
    standard_normal,
)
from .noise import NoiseKind, privatize
from .rng import RngStream


class TestKind(str, Enum):
    GOF_KNOWN = "gof-known"
    GOF_FAMILY = "gof-family"
    TWO_SAMPLE = "two-sample"
    PAIRED = "paired"


class Adjacency(str, Enum):
    """When do two split datasets count as neighbors?

    ``fixed-groups``: one record changes its value but stays in its group.
    ``swap-groups``: one record may change in each group, so two people can
    trade groups; stronger privacy, larger sensitivity.
    """

    FIXED_GROUPS = "fixed-groups"
    SWAP_GROUPS = "swap-groups"


@dataclass(frozen=True)
class TestSpec:
    """A test design: what is tested, with which metric, noise and budget."""

    kind: TestKind
    metric: MetricKind
    epsilon: float
    noise: NoiseKind
    null: ContinuousCdf | None = None
    family: LocationScaleFamily | None = None
    adjacency: Adjacency = Adjacency.FIXED_GROUPS

    def __post_init__(self):
        object.__setattr__(self, "kind", TestKind(self.kind))
        object.__setattr__(self, "metric", MetricKind(self.metric))
        object.__setattr__(self, "noise", NoiseKind(self.noise))
        object.__setattr__(self, "adjacency", Adjacency(self.adjacency))
        if not (self.epsilon > 0.0 and np.isfinite(self.epsilon)):
            raise ParameterError(f"epsilon must be positive and finite, got {self.epsilon}")
        if self.kind is TestKind.GOF_KNOWN:
            if self.null is None:
                raise ParameterError("goodness-of-fit with known null needs a null cdf")
        elif self.kind is TestKind.GOF_FAMILY:
            if self.family is None:
                raise ParameterError("goodness-of-fit over a family needs the family")
        if self.kind is not TestKind.GOF_KNOWN and self.metric not in BASE_FREE_METRICS:
            raise ParameterError(
                f"the {self.metric.value} metric needs a base measure and is only "
                "available for goodness-of-fit against a known null cdf"
            )

    @property
    def kind_label(self) -> str:
        """Fingerprint string identifying the null law and noise scale rule."""
        if self.kind is TestKind.GOF_FAMILY:
            return f"gof-family:{self.family.name}"
        if self.kind is TestKind.TWO_SAMPLE:
            return f"two-sample:{self.adjacency.value}"
        return self.kind.value


@dataclass(frozen=True)
class TestResult:
    raw_statistic: float
    privatized_statistic: float
    sensitivity: float
    p_value: float
    mc_samples: int
    seed: int


def gof_statistic_known(x, null_cdf: ContinuousCdf, metric: MetricKind | str) -> float:
    """Distance from the ecdf of ``x`` to a fully specified null cdf."""
    return distance_to_cdf(as_sorted_sample(x), null_cdf, metric)


def gof_statistic_family(x, family: LocationScaleFamily,
                         metric: MetricKind | str) -> float:
    """Minimum ks/kuiper distance from the ecdf of ``x`` over a family."""
    return fit_min_distance(family, as_sorted_sample(x), metric).achieved_distance


def two_sample_statistic(x, y, metric: MetricKind | str) -> float:
    """ks/kuiper distance between the ecdfs of two samples."""
    return distance_between_samples(as_sorted_sample(x), as_sorted_sample(y), metric)


def symmetry_statistic(z, metric: MetricKind | str) -> float:
    """ks/kuiper distance between the ecdf of z and the ecdf of -z."""
    z = np.asarray(z, dtype=np.float64)
    return distance_between_samples(
        SortedSample.from_data(z), SortedSample.from_data(-z), metric
    )


def paired_statistic(x, y, metric: MetricKind | str) -> float:
    """Symmetry statistic of the paired differences z = y - x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ParameterError(
            f"paired samples must be equal-length vectors, got {x.shape} and {y.shape}"
        )
    return symmetry_statistic(y - x, metric)


def sensitivity_for(spec: TestSpec, n: int, m: int | None = None) -> float:
    """Worst-case statistic change between adjacent datasets.

    1/n for goodness-of-fit (known or family), max(1/n, 1/m) for two samples
    under fixed groups, 1/n + 1/m under swap groups, and 2/n for paired data
    (one changed pair moves both the z and the -z ecdf).
    """
    n = int(n)
    if n < 1:
        raise ParameterError(f"sample size must be at least 1, got {n}")
    if spec.kind is TestKind.TWO_SAMPLE:
        if m is None:
            raise ParameterError("two-sample sensitivity needs both sample sizes")
        m = int(m)
        if m < 1:
            raise ParameterError(f"second sample size must be at least 1, got {m}")
        if spec.adjacency is Adjacency.FIXED_GROUPS:
            return max(1.0 / n, 1.0 / m)
        return 1.0 / n + 1.0 / m
    if spec.kind is TestKind.PAIRED:
        return 2.0 / n
    return 1.0 / n


def conservative_p_value(null_values, observed: float) -> float:
    """(1 + #{null >= observed}) / (M + 1); a valid p-value at any finite M."""
    null_values = np.asarray(null_values)
    count = int(np.count_nonzero(null_values >= observed))
    return (1 + count) / (null_values.size + 1)


@dataclass(frozen=True)
class NullDistributionTable:
    """Sorted Monte Carlo sample of privatized null statistics.

    ``kind`` is the fingerprint label of the test design (it embeds the family
    name and the adjacency mode, both of which change the null law or the
    noise scale); a table may only be used for a test whose fingerprint
    matches exactly.  ``metric`` is None for the rank/count baseline tests.
    """

    values: np.ndarray
    kind: str
    metric: MetricKind | None
    noise: NoiseKind
    epsilon: float
    n: int
    m: int | None
    mc_samples: int
    seed: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ParameterError("a null table needs at least one value")
        if values.size != self.mc_samples:
            raise ParameterError(
                f"table length {values.size} does not match mc_samples={self.mc_samples}"
            )
        if values.size > 1 and np.any(np.diff(values) < 0):
            raise ParameterError("null table values must be sorted ascending")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if self.metric is not None:
            object.__setattr__(self, "metric", MetricKind(self.metric))
        object.__setattr__(self, "noise", NoiseKind(self.noise))

    def header_line(self) -> str:
        metric = self.metric.value if self.metric is not None else "-"
        m = "-" if self.m is None else str(int(self.m))
        return (
            f"# kind={self.kind} metric={metric} noise={self.noise.value} "
            f"eps={format(self.epsilon, '.17g')} n={int(self.n)} m={m} "
            f"M={int(self.mc_samples)} seed={int(self.seed)}"
        )

    def save(self, path) -> None:
        """Write the one-line fingerprint header and one value per line."""
        with open(path, "w", encoding="ascii") as handle:
            handle.write(self.header_line() + "\n")
            for value in self.values:
                handle.write(format(value, ".17g") + "\n")

    @classmethod
    def load(cls, path) -> "NullDistributionTable":
        try:
            with open(path, "r", encoding="ascii") as handle:
                lines = handle.read().splitlines()
        except OSError as exc:
            raise CalibrationError(f"cannot read null table {path}: {exc}") from exc
        if not lines or not lines[0].startswith("# "):
            raise CalibrationError(f"{path} is not a null table (missing header line)")
        fields = {}
        for token in lines[0][2:].split():
            key, sep, value = token.partition("=")
            if not sep:
                raise CalibrationError(f"malformed header token {token!r} in {path}")
            fields[key] = value
        try:
            metric = None if fields["metric"] == "-" else MetricKind(fields["metric"])
            table = cls(
                values=np.array([float(line) for line in lines[1:] if line.strip()]),
                kind=fields["kind"],
                metric=metric,
                noise=NoiseKind(fields["noise"]),
                epsilon=float(fields["eps"]),
                n=int(fields["n"]),
                m=None if fields["m"] == "-" else int(fields["m"]),
                mc_samples=int(fields["M"]),
                seed=int(fields["seed"]),
            )
        except (KeyError, ValueError, ParameterError) as exc:
            raise CalibrationError(f"malformed null table {path}: {exc}") from exc
        return table

    def require_match(self, kind: str, metric: MetricKind | None,
                      noise: NoiseKind, epsilon: float,
                      n: int, m: int | None) -> None:
        """Raise :class:`CalibrationError` unless the fingerprint matches."""
        wanted = (kind, metric, noise, float(epsilon), int(n),
                  None if m is None else int(m))
        have = (self.kind, self.metric, self.noise, float(self.epsilon),
                int(self.n), None if self.m is None else int(self.m))
        if wanted != have:
            names = ("kind", "metric", "noise", "epsilon", "n", "m")
            diffs = [
                f"{name}: table has {h!r}, test needs {w!r}"
                for name, h, w in zip(names, have, wanted)
                if h != w
            ]
            raise CalibrationError("null table does not match the test: " + "; ".join(diffs))


def simulate_null_values(mc_samples: int, rng: RngStream, replicate) -> np.ndarray:
    """Sorted values of ``replicate(stream)`` over independent substreams.

    Replicate r uses the substream derived from (rng.seed, r), so the table is
    bit-identical however the replicates are scheduled.
    """
    if mc_samples < 1:
        raise ParameterError(f"need at least one calibration replicate, got {mc_samples}")
    values = np.empty(int(mc_samples), dtype=np.float64)
    for r in range(int(mc_samples)):
        values[r] = replicate(rng.substream(r))
    values.sort()
    return values


def _null_replicate_raw(spec: TestSpec, n: int, m: int | None,
                        stream: RngStream) -> float:
    """One raw statistic under the canonical null generator.

    Known-null gof draws from the null cdf itself (by the probability integral
    transform this matches any other continuous choice in law); family gof
    draws from the base member and refits; two-sample and paired designs draw
    standard normal data, which is equivalent for any continuous generator
    because the statistics are distribution-free.
    """
    normal = standard_normal()
    if spec.kind is TestKind.GOF_KNOWN:
        x = SortedSample.from_data(spec.null.sample(n, stream))
        return gof_statistic_known(x, spec.null, spec.metric)
    if spec.kind is TestKind.GOF_FAMILY:
        x = SortedSample.from_data(spec.family.base.sample(n, stream))
        return gof_statistic_family(x, spec.family, spec.metric)
    if spec.kind is TestKind.TWO_SAMPLE:
        x = SortedSample.from_data(normal.sample(n, stream))
        y = SortedSample.from_data(normal.sample(m, stream))
        return two_sample_statistic(x, y, spec.metric)
    return symmetry_statistic(normal.sample(n, stream), spec.metric)


def calibrate_null(spec: TestSpec, n: int, m: int | None = None, *,
                   mc_samples: int = 1000, rng: RngStream) -> NullDistributionTable:
    """Simulate the null distribution of the privatized statistic.

    Each replicate draws a fresh null dataset and fresh privacy noise (the
    null law of the release is the convolution of the statistic law and the
    noise law, so noise is never reused).
    """
    if spec.kind is TestKind.TWO_SAMPLE:
        if m is None:
            raise ParameterError("two-sample calibration needs both sample sizes")
    else:
        m = None
    delta = sensitivity_for(spec, n, m if m is not None else None)

    def replicate(stream: RngStream) -> float:
        raw = _null_replicate_raw(spec, n, m, stream)
        return privatize(raw, delta, spec.epsilon, spec.noise, stream)

    values = simulate_null_values(mc_samples, rng, replicate)
    return NullDistributionTable(
        values=values,
        kind=spec.kind_label,
        metric=spec.metric,
        noise=spec.noise,
        epsilon=spec.epsilon,
        n=int(n),
        m=m,
        mc_samples=int(mc_samples),
        seed=rng.seed,
    )


def _observed_raw(spec: TestSpec, data) -> tuple[int, int | None, float]:
    """Coerce the observed data for the design and score it."""
    if spec.kind in (TestKind.GOF_KNOWN, TestKind.GOF_FAMILY):
        x = as_sorted_sample(data)
        if spec.kind is TestKind.GOF_KNOWN:
            return x.n, None, gof_statistic_known(x, spec.null, spec.metric)
        return x.n, None, gof_statistic_family(x, spec.family, spec.metric)
    try:
        first, second = data
    except (TypeError, ValueError):
        raise ParameterError(
            f"{spec.kind.value} data must be a pair of samples"
        ) from None
    if spec.kind is TestKind.TWO_SAMPLE:
        x = as_sorted_sample(first)
        y = as_sorted_sample(second)
        return x.n, y.n, two_sample_statistic(x, y, spec.metric)
    x = np.asarray(first, dtype=np.float64)
    y = np.asarray(second, dtype=np.float64)
    raw = paired_statistic(x, y, spec.metric)
    return x.size, None, raw


def run_private_test(spec: TestSpec, data, table: NullDistributionTable,
                     rng: RngStream) -> TestResult:
    """Score the data, privatize the score, and return a calibrated p-value.

    The observed release must use a stream independent of the calibration
    streams; reusing the table's stream would invalidate the p-value.
    """
    n, m, raw = _observed_raw(spec, data)
    table.require_match(spec.kind_label, spec.metric, spec.noise, spec.epsilon, n, m)
    delta = sensitivity_for(spec, n, m)
    released = privatize(raw, delta, spec.epsilon, spec.noise, rng)
    p_value = conservative_p_value(table.values, released)
    return TestResult(
        raw_statistic=float(raw),
        privatized_statistic=float(released),
        sensitivity=float(delta),
        p_value=float(p_value),
        mc_samples=table.mc_samples,
        seed=rng.seed,
    )

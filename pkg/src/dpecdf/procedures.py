"""A uniform runner over the core ecdf tests and the rank/count baselines.

A :class:`Procedure` knows how to draw its canonical null data, score data,
release the score with noise, and map the release to a larger-is-evidence
value for the shared Monte Carlo p-value machinery.  The power harness and
the command line both run tests through this layer; the core ecdf designs
delegate to :mod:`.hypotests`, so a procedure's calibration table is
bit-identical to :func:`.hypotests.calibrate_null` under the same stream.

Data shapes by design kind: ``gof`` takes one sample, ``two-sample`` a pair of
samples, ``paired`` the vector of differences z = y - x.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import baselines
from .errors import ParameterError
from .metrics import MetricKind, SortedSample, as_sorted_sample
from .models import ContinuousCdf, LocationScaleFamily, standard_normal
from .hypotests import (
    Adjacency,
    NullDistributionTable,
    TestKind,
    TestResult,
    TestSpec,
    conservative_p_value,
    gof_statistic_family,
    gof_statistic_known,
    sensitivity_for,
    simulate_null_values,
    symmetry_statistic,
    two_sample_statistic,
)
from .noise import NoiseKind, default_noise, privatize
from .rng import RngStream

CORE_METRIC_METHODS = ("ks", "kuiper", "cvm", "wasserstein")
FAMILY_METHODS = ("ks-family", "kuiper-family")
BASELINE_METHODS = ("mann-whitney", "kruskal-wallis", "median", "sign", "wilcoxon")

METHODS_BY_KIND = {
    "gof": ("ks", "kuiper", "cvm", "wasserstein") + FAMILY_METHODS,
    "two-sample": ("ks", "kuiper", "mann-whitney", "kruskal-wallis", "median"),
    "paired": ("ks", "kuiper", "sign", "wilcoxon"),
}

def _plain_values(data) -> np.ndarray:
    return data.values if isinstance(data, SortedSample) else np.asarray(data, dtype=np.float64)


#: noise kind is fixed by construction for the baseline releases
_BASELINE_NOISE = {
    "mann-whitney": NoiseKind.LAPLACE,
    "kruskal-wallis": NoiseKind.LAPLACE,
    "median": NoiseKind.TULAP,
    "sign": NoiseKind.TULAP,
    "wilcoxon": NoiseKind.LAPLACE,
}


@dataclass(frozen=True)
class Procedure:
    """One runnable test: statistic, release rule, and canonical null."""

    method: str
    kind: str
    epsilon: float
    noise: NoiseKind
    label: str
    metric: MetricKind | None = None
    spec: TestSpec | None = None
    null_model: ContinuousCdf | None = None
    family: LocationScaleFamily | None = None

    def noise_scale(self, n: int, m: int | None = None) -> float:
        """The sensitivity (noise multiplier) of the released statistic."""
        if self.spec is not None:
            return sensitivity_for(self.spec, n, m)
        if self.method == "kruskal-wallis":
            return 8.0
        if self.method == "mann-whitney":
            return float(max(n, m if m is not None else n))
        if self.method == "wilcoxon":
            return 2.0 * n
        return 1.0  # median and sign counts move by at most one

    def data_sizes(self, data) -> tuple[int, int | None]:
        if self.kind == "two-sample":
            x, y = data
            return as_sorted_sample(x).n, as_sorted_sample(y).n
        if self.kind == "paired":
            return int(np.asarray(data).size), None
        return as_sorted_sample(data).n, None

    def raw_statistic(self, data) -> float:
        if self.spec is not None:
            if self.kind == "gof":
                x = as_sorted_sample(data)
                if self.spec.kind is TestKind.GOF_FAMILY:
                    return gof_statistic_family(x, self.spec.family, self.metric)
                return gof_statistic_known(x, self.spec.null, self.metric)
            if self.kind == "two-sample":
                x, y = data
                return two_sample_statistic(as_sorted_sample(x), as_sorted_sample(y),
                                            self.metric)
            return symmetry_statistic(data, self.metric)
        if self.kind == "two-sample":
            x, y = (_plain_values(part) for part in data)
            if self.method == "kruskal-wallis":
                return baselines.kruskal_wallis_statistic(x, y)
            if self.method == "mann-whitney":
                return baselines.mann_whitney_statistic(x, y)
            return float(baselines.median_statistic(x, y))
        diffs = _plain_values(data)
        if self.method == "sign":
            return float(baselines.sign_statistic_from_diffs(diffs))
        return baselines.wilcoxon_statistic_from_diffs(diffs)

    def release(self, data, rng: RngStream) -> tuple[float, float]:
        """(raw statistic, privatized larger-is-evidence value)."""
        raw = self.raw_statistic(data)
        n, m = self.data_sizes(data)
        released = privatize(raw, self.noise_scale(n, m), self.epsilon,
                             self.noise, rng)
        if self.method == "mann-whitney":
            return raw, -released  # small U is the evidence direction
        if self.method in ("median", "sign"):
            return raw, abs(released - n / 2.0)
        if self.method == "wilcoxon":
            return raw, abs(released)
        return raw, released

    def draw_null(self, n: int, m: int | None, rng: RngStream):
        """Canonical null data: the gof null cdf (or family base member) for
        goodness-of-fit, standard normal samples otherwise."""
        if self.kind == "gof":
            source = self.family.base if self.family is not None else self.null_model
            return SortedSample.from_data(source.sample(n, rng))
        normal = standard_normal()
        if self.kind == "two-sample":
            x = SortedSample.from_data(normal.sample(n, rng))
            y = SortedSample.from_data(normal.sample(m if m is not None else n, rng))
            return (x, y)
        return normal.sample(n, rng)

    def calibrate(self, n: int, m: int | None = None, *, mc_samples: int = 1000,
                  rng: RngStream) -> NullDistributionTable:
        """Null table of the released evidence values, fresh noise per replicate."""
        if self.kind == "two-sample":
            if m is None:
                raise ParameterError("two-sample calibration needs both sample sizes")
        else:
            m = None

        def replicate(stream: RngStream) -> float:
            return self.release(self.draw_null(n, m, stream), stream)[1]

        values = simulate_null_values(mc_samples, rng, replicate)
        return NullDistributionTable(
            values=values, kind=self.label, metric=self.metric, noise=self.noise,
            epsilon=self.epsilon, n=int(n), m=m, mc_samples=int(mc_samples),
            seed=rng.seed,
        )

    def run(self, data, table: NullDistributionTable, rng: RngStream) -> TestResult:
        """Release the observed statistic and return a calibrated result."""
        n, m = self.data_sizes(data)
        if self.kind != "two-sample":
            m = None
        table.require_match(self.label, self.metric, self.noise, self.epsilon, n, m)
        raw, evidence = self.release(data, rng)
        p_value = conservative_p_value(table.values, evidence)
        return TestResult(
            raw_statistic=float(raw),
            privatized_statistic=float(evidence),
            sensitivity=float(self.noise_scale(n, m)),
            p_value=float(p_value),
            mc_samples=table.mc_samples,
            seed=rng.seed,
        )


def build_procedure(kind: str, method: str, epsilon: float, *,
                    null_model: ContinuousCdf | None = None,
                    family: LocationScaleFamily | None = None,
                    adjacency: Adjacency | str = Adjacency.FIXED_GROUPS,
                    noise: NoiseKind | str | None = None) -> Procedure:
    """Resolve a (design kind, method name) pair into a runnable procedure.

    Rejects combinations the statistics do not support (cvm/wasserstein need a
    base measure, so they exist only against a known gof null; the rank and
    count baselines are tied to their own designs).
    """
    if kind not in METHODS_BY_KIND:
        raise ParameterError(f"unknown test kind '{kind}'")
    if method not in METHODS_BY_KIND[kind]:
        raise ParameterError(
            f"method '{method}' is not available for {kind} tests "
            f"(choose from: {', '.join(METHODS_BY_KIND[kind])})"
        )
    adjacency = Adjacency(adjacency)

    if method in BASELINE_METHODS:
        fixed = _BASELINE_NOISE[method]
        if noise is not None and NoiseKind(noise) is not fixed:
            raise ParameterError(
                f"the {method} release always uses {fixed.value} noise"
            )
        return Procedure(method=method, kind=kind, epsilon=float(epsilon),
                         noise=fixed, label=method)

    metric = MetricKind(method.removesuffix("-family"))
    wants_family = method.endswith("-family") or (kind == "gof" and family is not None)
    noise_kind = NoiseKind(noise) if noise is not None else default_noise(metric)

    if kind == "gof":
        if wants_family:
            if family is None:
                raise ParameterError("family goodness-of-fit needs the family")
            spec = TestSpec(kind=TestKind.GOF_FAMILY, metric=metric,
                            epsilon=float(epsilon), noise=noise_kind, family=family)
            return Procedure(method=method, kind=kind, epsilon=float(epsilon),
                             noise=noise_kind, label=spec.kind_label, metric=metric,
                             spec=spec, family=family)
        if null_model is None:
            raise ParameterError("goodness-of-fit against a known null needs the null model")
        spec = TestSpec(kind=TestKind.GOF_KNOWN, metric=metric,
                        epsilon=float(epsilon), noise=noise_kind, null=null_model)
        return Procedure(method=method, kind=kind, epsilon=float(epsilon),
                         noise=noise_kind, label=spec.kind_label, metric=metric,
                         spec=spec, null_model=null_model)
    if kind == "two-sample":
        spec = TestSpec(kind=TestKind.TWO_SAMPLE, metric=metric,
                        epsilon=float(epsilon), noise=noise_kind, adjacency=adjacency)
    else:
        spec = TestSpec(kind=TestKind.PAIRED, metric=metric,
                        epsilon=float(epsilon), noise=noise_kind)
    return Procedure(method=method, kind=kind, epsilon=float(epsilon),
                     noise=noise_kind, label=spec.kind_label, metric=metric, spec=spec)

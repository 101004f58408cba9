"""Pseudo-metrics between empirical and continuous distribution functions.

Four distances on cdfs, each evaluated exactly from the sorted sample:

* ``ks`` -- the sup norm, sup_t |F(t) - G(t)|.
* ``kuiper`` -- the two one-sided suprema added, sup_t (F - G) + sup_s (G - F).
  Sensitive to scale/shape differences and invariant under cyclic shifts of
  circular data, where the sup norm is not.
* ``cvm`` -- an L2 distance weighted by a base probability measure H,
  (integral of (F - G)^2 dH)^(1/2).
* ``wasserstein`` -- a first-order transport cost reweighted by H,
  integral of |F - G| dH.

For goodness-of-fit the base measure is the null cdf itself (H = F), which is
what keeps the null law of the statistic free of F and every value inside
[0, 1] ([0, 2] for kuiper).  All four distances move by at most 1/n when a
single one of the n observations is replaced; that worst case is the constant
returned by :func:`base_sensitivity` and the reason these statistics privatize
with so little noise.

The cvm and wasserstein distances need the base measure, so they are offered
against a continuous cdf only; two-sample variants exist for ks and kuiper.
An Anderson-Darling style tail-weighted distance is deliberately not offered:
its worst-case single-record change is unbounded, so no finite noise scale
privatizes it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .errors import ParameterError

if TYPE_CHECKING:  # pragma: no cover
    from .models import ContinuousCdf


class MetricKind(str, Enum):
    """The supported ecdf pseudo-metrics."""

    KS = "ks"
    KUIPER = "kuiper"
    CVM = "cvm"
    WASSERSTEIN = "wasserstein"


#: Metrics defined without a base measure; only these extend to two-sample
#: and paired statistics.
BASE_FREE_METRICS = (MetricKind.KS, MetricKind.KUIPER)


@dataclass(frozen=True)
class SortedSample:
    """A validated, ascending, finite real-valued dataset.

    Ties are permitted; the jump-based formulas below stay exact with
    repeated values because they index the sorted order.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ParameterError("sample must be a nonempty one-dimensional array")
        if not np.all(np.isfinite(values)):
            raise ParameterError("sample values must be finite (no NaN or infinity)")
        if values.size > 1 and np.any(np.diff(values) < 0):
            raise ParameterError("sample values must be sorted ascending")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_data(cls, values) -> "SortedSample":
        """Sort arbitrary finite data into a sample."""
        return cls(np.sort(np.asarray(values, dtype=np.float64)))

    @property
    def n(self) -> int:
        return int(self.values.size)


def as_sorted_sample(data) -> SortedSample:
    """Coerce raw data (or pass through an existing sample)."""
    if isinstance(data, SortedSample):
        return data
    return SortedSample.from_data(data)


def _null_probs(x: SortedSample, null_cdf: "ContinuousCdf") -> np.ndarray:
    """F evaluated at the sorted sample, clamped to [0, 1] and nondecreasing.

    The clamp and the running max absorb floating-point leakage from the cdf
    model so every metric stays inside its proven range.
    """
    u = np.clip(np.asarray(null_cdf.cdf(x.values), dtype=np.float64), 0.0, 1.0)
    return np.maximum.accumulate(u)


def _sup_deviations(u: np.ndarray) -> tuple[float, float]:
    """Suprema of (ecdf - F) and (F - ecdf), exact at the jump points."""
    n = u.size
    steps = np.arange(1, n + 1, dtype=np.float64)
    d_plus = float(np.max(steps / n - u))
    d_minus = float(np.max(u - (steps - 1.0) / n))
    return d_plus, d_minus


def ks_to_cdf(x: SortedSample, null_cdf: "ContinuousCdf") -> float:
    """Sup-norm distance between the ecdf of ``x`` and a continuous cdf.

    Equals max over i of max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n), which is the
    exact supremum because the difference is monotone between jumps.
    """
    d_plus, d_minus = _sup_deviations(_null_probs(x, null_cdf))
    return max(d_plus, d_minus)


def kuiper_to_cdf(x: SortedSample, null_cdf: "ContinuousCdf") -> float:
    """Kuiper distance D+ + D- between the ecdf of ``x`` and a continuous cdf."""
    d_plus, d_minus = _sup_deviations(_null_probs(x, null_cdf))
    return max(d_plus, 0.0) + max(d_minus, 0.0)


def cvm_to_cdf(x: SortedSample, null_cdf: "ContinuousCdf") -> float:
    """L2 distance (integral of (ecdf - F)^2 dF)^(1/2), base measure H = F.

    Uses the closed form omega^2 = 1/(12n) + sum_i ((2i-1)/(2n) - F(x_(i)))^2
    and returns sqrt(omega^2 / n); the identity is algebraic in the sorted
    probabilities, so it is exact with tied observations too.
    """
    u = _null_probs(x, null_cdf)
    n = x.n
    half_steps = (2.0 * np.arange(1, n + 1, dtype=np.float64) - 1.0) / (2.0 * n)
    omega_sq = 1.0 / (12.0 * n) + float(np.sum((half_steps - u) ** 2))
    return math.sqrt(omega_sq / n)


def wasserstein_to_cdf(x: SortedSample, null_cdf: "ContinuousCdf") -> float:
    """First-order distance integral of |ecdf - F| dF, base measure H = F.

    After mapping through F the ecdf is a step function on [0, 1] with level
    i/n between knots u_i = F(x_(i)); each segment integral has the closed
    form h(hi - c) - h(lo - c) with h(t) = t|t|/2, which splits correctly at
    the level crossing.
    """
    u = _null_probs(x, null_cdf)
    n = x.n
    knots = np.concatenate(([0.0], u, [1.0]))
    levels = np.arange(0, n + 1, dtype=np.float64) / n
    hi = knots[1:] - levels
    lo = knots[:-1] - levels
    return float(np.sum(0.5 * hi * np.abs(hi) - 0.5 * lo * np.abs(lo)))


def _two_sample_sups(x: SortedSample, y: SortedSample) -> tuple[float, float]:
    """One-sided suprema of the ecdf difference over the merged jump points.

    The difference is piecewise constant and right-continuous, so its sup is
    attained at a jump point (or is 0 left of all data).
    """
    grid = np.union1d(x.values, y.values)
    fx = np.searchsorted(x.values, grid, side="right") / x.n
    fy = np.searchsorted(y.values, grid, side="right") / y.n
    diff = fx - fy
    return max(float(np.max(diff)), 0.0), max(float(np.max(-diff)), 0.0)


def ks_two_sample(x: SortedSample, y: SortedSample) -> float:
    """Sup-norm distance between two ecdfs."""
    d_plus, d_minus = _two_sample_sups(x, y)
    return max(d_plus, d_minus)


def kuiper_two_sample(x: SortedSample, y: SortedSample) -> float:
    """Kuiper distance D+ + D- between two ecdfs."""
    d_plus, d_minus = _two_sample_sups(x, y)
    return d_plus + d_minus


def base_sensitivity(metric: MetricKind | str, n: int) -> float:
    """Worst-case distance between ecdfs of datasets differing in one entry.

    1/n for every supported metric: the ecdf difference from one changed
    record is an indicator difference divided by n.
    """
    MetricKind(metric)
    n = int(n)
    if n < 1:
        raise ParameterError(f"sample size must be at least 1, got {n}")
    return 1.0 / n


_GOF_DISPATCH = {
    MetricKind.KS: ks_to_cdf,
    MetricKind.KUIPER: kuiper_to_cdf,
    MetricKind.CVM: cvm_to_cdf,
    MetricKind.WASSERSTEIN: wasserstein_to_cdf,
}

_TWO_SAMPLE_DISPATCH = {
    MetricKind.KS: ks_two_sample,
    MetricKind.KUIPER: kuiper_two_sample,
}


def distance_to_cdf(x: SortedSample, null_cdf: "ContinuousCdf",
                    metric: MetricKind | str) -> float:
    """Evaluate any of the four metrics against a continuous cdf (H = F)."""
    return _GOF_DISPATCH[MetricKind(metric)](x, null_cdf)


def distance_between_samples(x: SortedSample, y: SortedSample,
                             metric: MetricKind | str) -> float:
    """Evaluate a base-measure-free metric between two ecdfs."""
    metric = MetricKind(metric)
    if metric not in BASE_FREE_METRICS:
        raise ParameterError(
            f"the {metric.value} distance needs a base probability measure and is "
            "not defined between two ecdfs; use ks or kuiper"
        )
    return _TWO_SAMPLE_DISPATCH[metric](x, y)

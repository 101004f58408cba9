"""Competitor private tests: rank- and count-based two-sample and paired tests.

These are the classical Kruskal-Wallis (absolute-deviation variant),
Mann-Whitney, median, sign and Wilcoxon signed-rank statistics, each computed
from ranks in the combined sample (midranks for ties) or pair counts, then
released with additive noise scaled to the statistic's worst-case change under
a single-record edit:

* kruskal-wallis: Laplace noise at sensitivity 8;
* mann-whitney:   Laplace noise at sensitivity max(n, m);
* median test:    Tulap noise at sensitivity 1, two-sided score |S~ - n/2|;
* sign test:      Tulap noise at sensitivity 1, two-sided score |T~ - n/2|;
* wilcoxon:       Laplace noise at sensitivity 2n, two-sided score |W~|.

A private Cramér-von Mises release is also provided as a convenience alias of
the goodness-of-fit path (statistic plus Laplace(1/eps)/n noise).

Because ranks and signs are preserved by any strictly increasing map applied
jointly to the inputs, every statistic here is invariant under such maps.
Direction conventions: larger released values mean more evidence against the
null for kruskal-wallis and the two-sided scores; for mann-whitney *smaller*
released values are evidence, and callers negate before any larger-is-evidence
p-value machinery.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import ParameterError
from .metrics import cvm_to_cdf, as_sorted_sample
from .models import ContinuousCdf
from .noise import NoiseKind, privatize, sample_laplace
from .rng import RngStream


def combined_midranks(x, y) -> np.ndarray:
    """Ranks in the concatenated sample, average ranks for ties.

    The first len(x) entries are the x ranks; ranks always sum to
    N(N+1)/2 with N = len(x) + len(y).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return rankdata(np.concatenate([x, y]), method="average")


def private_cvm(x, null_cdf: ContinuousCdf, epsilon: float, rng: RngStream) -> float:
    """Goodness-of-fit L2 statistic plus Laplace(1/epsilon)/n noise."""
    sample = as_sorted_sample(x)
    raw = cvm_to_cdf(sample, null_cdf)
    return raw + (1.0 / sample.n) * sample_laplace(1.0 / epsilon, rng)


def kruskal_wallis_statistic(x, y) -> float:
    """Absolute-deviation rank-sum statistic for two groups.

    Each group's rank sum is centered at (size + 1)/2 and the weighted
    absolute deviations are combined with a factor of 4(N-1)/N^2 when the
    total count N is even and 4/(N+1) when it is odd.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, m = x.size, y.size
    total = n + m
    ranks = combined_midranks(x, y)
    spread = n * abs(float(np.sum(ranks[:n])) - (n + 1) / 2.0)
    spread += m * abs(float(np.sum(ranks[n:])) - (m + 1) / 2.0)
    if total % 2 == 0:
        return 4.0 * (total - 1) / total**2 * spread
    return 4.0 / (total + 1) * spread


def private_kruskal_wallis(x, y, epsilon: float, rng: RngStream) -> float:
    """Released statistic H + 8 * Laplace(1/epsilon); larger values reject."""
    return privatize(kruskal_wallis_statistic(x, y), 8.0, epsilon,
                     NoiseKind.LAPLACE, rng)


def mann_whitney_statistic(x, y) -> float:
    """min(U1, U2) where U1, U2 are the combined-sample rank sums."""
    x = np.asarray(x, dtype=np.float64)
    ranks = combined_midranks(x, y)
    u1 = float(np.sum(ranks[: x.size]))
    u2 = float(np.sum(ranks[x.size:]))
    return min(u1, u2)


def private_mann_whitney(x, y, epsilon: float, rng: RngStream) -> float:
    """Released U + max(n, m) * Laplace(1/epsilon); *smaller* values reject."""
    scale = float(max(len(np.atleast_1d(x)), len(np.atleast_1d(y))))
    return privatize(mann_whitney_statistic(x, y), scale, epsilon,
                     NoiseKind.LAPLACE, rng)


def median_statistic(x, y) -> int:
    """Count of x ranks above n in the combined 2n sample; needs equal sizes."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ParameterError(
            f"the median test needs equally sized groups, got {x.size} and {y.size}"
        )
    ranks = combined_midranks(x, y)
    return int(np.count_nonzero(ranks[: x.size] > x.size))


def private_median_test(x, y, epsilon: float, rng: RngStream) -> float:
    """Two-sided score |S~ - n/2| with S~ = S + Tulap(e^-eps); larger rejects."""
    s = median_statistic(x, y)
    released = privatize(float(s), 1.0, epsilon, NoiseKind.TULAP, rng)
    return abs(released - len(np.atleast_1d(x)) / 2.0)


def sign_statistic(x, y) -> int:
    """Count of pairs with x_i > y_i (ties count as not greater)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError(
            f"sign test needs equal-length vectors, got {x.shape} and {y.shape}"
        )
    return int(np.count_nonzero(x > y))


def sign_statistic_from_diffs(z) -> int:
    """Sign count written on the differences z = y - x: #{z_i < 0}."""
    return int(np.count_nonzero(np.asarray(z, dtype=np.float64) < 0))


def private_sign_test(x, y, epsilon: float, rng: RngStream) -> float:
    """Two-sided score |T~ - n/2| with T~ = T + Tulap(e^-eps); larger rejects."""
    t = sign_statistic(x, y)
    released = privatize(float(t), 1.0, epsilon, NoiseKind.TULAP, rng)
    return abs(released - len(np.atleast_1d(x)) / 2.0)


def wilcoxon_statistic_from_diffs(z) -> float:
    """Signed midrank sum of the differences.

    Zero differences keep their rank weight but contribute sign 0, so they
    stay in the ranking without pushing the sum either way.
    """
    z = np.asarray(z, dtype=np.float64)
    ranks = rankdata(np.abs(z), method="average")
    return float(np.sum(ranks * np.sign(z)))


def wilcoxon_statistic(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError(
            f"wilcoxon needs equal-length vectors, got {x.shape} and {y.shape}"
        )
    return wilcoxon_statistic_from_diffs(y - x)


def private_wilcoxon(x, y, epsilon: float, rng: RngStream) -> float:
    """Two-sided score |W~| with W~ = W + 2n * Laplace(1/eps); larger rejects."""
    w = wilcoxon_statistic(x, y)
    n = len(np.atleast_1d(x))
    released = privatize(w, 2.0 * n, epsilon, NoiseKind.LAPLACE, rng)
    return abs(released)

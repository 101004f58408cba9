"""Privacy-noise sampling: Laplace and Tulap additive mechanisms.

Both samplers are inverse-transform constructions on :class:`.rng.RngStream`,
so draws are deterministic given a seed and scale exactly with their
parameters.  ``privatize`` is the additive release

    T  ->  T + sensitivity * Z,

with Z ~ Tulap(exp(-epsilon), 0) or Z ~ Laplace(1/epsilon); either choice
gives an epsilon-DP release when ``sensitivity`` bounds the worst-case change
of T between adjacent datasets.  Tulap tends to win for integer-valued
statistics (there it coincides with the discrete-Laplace/geometric mechanism),
Laplace for continuous ones.
"""
from __future__ import annotations

import math
from enum import Enum

from .errors import ParameterError
from .rng import RngStream


class NoiseKind(str, Enum):
    TULAP = "tulap"
    LAPLACE = "laplace"


def sample_laplace(scale: float, rng: RngStream) -> float:
    """One Laplace(scale) draw via the inverse cdf of a single uniform.

    A single-uniform construction (rather than a difference of exponentials)
    makes draws at scale 2b exactly twice the draws at scale b under the same
    stream, which the scale-coupling tests rely on.
    """
    if not (scale > 0.0 and math.isfinite(scale)):
        raise ParameterError(f"laplace scale must be positive and finite, got {scale}")
    centered = rng.uniform() - 0.5  # in (-1/2, 1/2)
    magnitude = -math.log1p(-2.0 * abs(centered))
    return scale * math.copysign(magnitude, centered)


def _sample_geometric(b: float, rng: RngStream) -> int:
    # floor(log U / log b) has mass (1 - b) * b**k on k = 0, 1, 2, ...
    return int(math.floor(math.log(rng.uniform()) / math.log(b)))


def sample_tulap(b: float, rng: RngStream) -> float:
    """One Tulap(b, 0) draw: U(-1/2, 1/2) plus a difference of geometrics.

    The geometric counts have mass (1 - b) * b**k, so G1 - G2 is discrete
    Laplace with ratio b and the sum is the staircase-shaped noise exactly
    tailored to an epsilon = -log(b) privacy guarantee.  Draw order is fixed
    (uniform, then G1, then G2) so seeded sequences are reproducible.
    """
    if not (0.0 < b < 1.0):
        raise ParameterError(f"tulap parameter b must lie in (0, 1), got {b}")
    centered = rng.uniform() - 0.5
    g1 = _sample_geometric(b, rng)
    g2 = _sample_geometric(b, rng)
    return centered + (g1 - g2)


def privatize(statistic: float, sensitivity: float, epsilon: float,
              kind: NoiseKind | str, rng: RngStream) -> float:
    """Additive-noise release of a real statistic at the given sensitivity."""
    if not (sensitivity > 0.0 and math.isfinite(sensitivity)):
        raise ParameterError(
            f"sensitivity must be positive and finite, got {sensitivity}"
        )
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise ParameterError(f"epsilon must be positive and finite, got {epsilon}")
    kind = NoiseKind(kind)
    if kind is NoiseKind.TULAP:
        z = sample_tulap(math.exp(-epsilon), rng)
    else:
        z = sample_laplace(1.0 / epsilon, rng)
    return statistic + sensitivity * z


def default_noise(metric) -> NoiseKind:
    """Tulap for the sup-type statistics, Laplace for the integral ones."""
    from .metrics import BASE_FREE_METRICS, MetricKind

    if MetricKind(metric) in BASE_FREE_METRICS:
        return NoiseKind.TULAP
    return NoiseKind.LAPLACE

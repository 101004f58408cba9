"""Deterministic uniform random streams built on SplitMix64.

SplitMix64 (the java.util.SplittableRandom generator) has period 2**64 and
is counter-based: output k is a bijective bit mix of ``seed + k * GAMMA``.
That makes bulk generation vectorizable with uint64 arithmetic and lets us
derive statistically independent substreams by hashing a parent seed with an
index path, which is how calibration replicates and power-study trials stay
bit-identical regardless of scheduling or thread count.

Streams are single-owner: a stream may be handed between threads but must
never be drawn from concurrently.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    """SplitMix64 finalizer on python ints (mod 2**64)."""
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Hash ``(seed, *path)`` into a new 64-bit seed.

    Distinct index paths give (statistically) independent streams; the same
    path always gives the same seed.  Used for calibration replicate
    substreams and for the power harness's (master_seed, cell, trial) plan.
    """
    state = seed & _MASK
    for index in path:
        state = _mix((state + _GAMMA) & _MASK)
        state = _mix(state ^ _mix(index & _MASK))
    return state


class RngStream:
    """Deterministic stream of uniforms in the open interval (0, 1).

    Identical seeds yield identical sequences on every platform, and the
    scalar and vector draw paths produce the same stream.
    """

    __slots__ = ("seed", "_count")

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self._count = 0

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"RngStream(seed={self.seed}, drawn={self._count})"

    def _next_word(self) -> int:
        self._count += 1
        return _mix((self.seed + self._count * _GAMMA) & _MASK)

    def uniform(self) -> float:
        """One draw; never exactly 0 or 1, so logs of it are safe."""
        return ((self._next_word() >> 11) + 0.5) * 2.0**-53

    def uniforms(self, size: int) -> np.ndarray:
        """``size`` draws continuing the stream, as one vectorized batch."""
        if size < 0:
            raise ValueError(f"size must be nonnegative, got {size}")
        counts = np.arange(1, size + 1, dtype=np.uint64) + np.uint64(self._count)
        self._count += int(size)
        z = np.uint64(self.seed) + counts * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def substream(self, *path: int) -> "RngStream":
        """A fresh stream derived from this stream's seed and an index path."""
        return RngStream(derive_seed(self.seed, *path))

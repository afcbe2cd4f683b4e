"""Seeded normal variates via the trigonometric Box-Muller transform.

Uniforms come from numpy's PCG64 bit generator (128-bit state, period
2**128) seeded through ``SeedSequence``. Exact zeros are dropped from the
uniform stream, so every value handed to the transform lies in (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PRNG_ID",
    "GenSpec",
    "UniformStream",
    "box_muller_pair",
    "normal_sample",
]

PRNG_ID = f"numpy-{np.__version__}/PCG64(SeedSequence)/Generator.random"

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: float
    s: float
    seed: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.m) and math.isfinite(self.s)):
            raise ValueError("m and s must be finite")
        if self.s < 0:
            raise ValueError(f"s must be non-negative, got {self.s!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _SEED_MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")


class UniformStream:
    """Deterministic stream of doubles strictly inside (0, 1).

    Single owner: draws advance shared state, so one stream must not be
    consumed from several threads at once.
    """

    algorithm_id = PRNG_ID

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def draw(self, k: int) -> np.ndarray:
        out = self._gen.random(k)
        zeros = out == 0.0
        if not zeros.any():
            return out
        # Redraw semantics: a zero is skipped and the next uniform takes its place.
        kept = out[~zeros]
        while kept.size < k:
            extra = self._gen.random(k - kept.size)
            kept = np.concatenate([kept, extra[extra != 0.0]])
        return kept

    def __iter__(self):
        while True:
            yield float(self.draw(1)[0])


def box_muller_pair(u1: float, u2: float) -> tuple[float, float]:
    """Map ``u1`` in (0, 1] and ``u2`` in [0, 1) to two independent N(0, 1) values."""
    if not 0.0 < u1 <= 1.0:
        raise ValueError(f"u1 must lie in (0, 1], got {u1!r}")
    if not 0.0 <= u2 < 1.0:
        raise ValueError(f"u2 must lie in [0, 1), got {u2!r}")
    radius = math.sqrt(-2.0 * math.log(u1))
    angle = 2.0 * math.pi * u2
    return radius * math.cos(angle), radius * math.sin(angle)


def _box_muller(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    return radius * np.cos(angle), radius * np.sin(angle)


def normal_sample(spec: GenSpec) -> np.ndarray:
    """Return ``spec.n`` N(m, s) variates, fully determined by ``spec.seed``.

    Uniforms are consumed as consecutive (u1, u2) pairs and both normals of
    each pair are used in order; for odd ``n`` the last pair's second normal
    is discarded.
    """
    pairs = (spec.n + 1) // 2
    u = UniformStream(spec.seed).draw(2 * pairs)
    z1, z2 = _box_muller(u[0::2], u[1::2])
    z = np.empty(2 * pairs)
    z[0::2] = z1
    z[1::2] = z2
    return spec.m + spec.s * z[: spec.n]

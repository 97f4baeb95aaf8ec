"""Provide the seedable shift-register generator behind every simulation.

The stream is defined independently of numpy's own generators so that a
``(seed, draws)`` pair names the same numbers on every platform:

* ``LANES`` xorshift64* registers run side by side;
* register ``j`` starts from ``splitmix64(seed + (j + 1) * GOLDEN_GAMMA)``;
* output ``k`` of the stream is step ``k // LANES`` of register ``k % LANES``;
* a 64-bit output ``r`` becomes the uniform ``((r >> 12) + 0.5) / 2**52``,
  which lies in [2**-53, 1 - 2**-53] and never rounds to 0 or 1.

Because the stream is a fixed interleaving, results do not depend on how a
caller chunks its requests.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import NDArray

from ..exceptions import DomainError
from .special_functions import std_normal_quantile

logger = logging.getLogger(__name__)

LANES = 4096
GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SPLITMIX_MUL_1 = np.uint64(0xBF58476D1CE4E5B9)
_SPLITMIX_MUL_2 = np.uint64(0x94D049BB133111EB)
_XORSHIFT_MUL = np.uint64(0x2545F4914F6CDD1D)
_MASK_64 = (1 << 64) - 1
_UNIFORM_SCALE = 2.0**-52


def splitmix64(values: NDArray[np.uint64]) -> NDArray[np.uint64]:
    """Return the splitmix64 finalizer applied elementwise."""
    with np.errstate(over="ignore"):
        z = values + GOLDEN_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _SPLITMIX_MUL_1
        z = (z ^ (z >> np.uint64(27))) * _SPLITMIX_MUL_2
        return z ^ (z >> np.uint64(31))


def bits_to_uniform(bits: NDArray[np.uint64]) -> NDArray[np.float64]:
    """Map 64-bit outputs to the open unit interval using the top 52 bits."""
    return ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * _UNIFORM_SCALE


class ShiftRegisterGenerator:
    """Define a deterministic, lane-interleaved xorshift64* generator."""

    def __init__(self, seed: int):
        if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
            raise DomainError("seed must be an integer", parameter="seed", value=seed)
        self.seed = int(seed)
        lanes = np.arange(1, LANES + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            start = np.uint64(self.seed & _MASK_64) + lanes * GOLDEN_GAMMA
        state = splitmix64(start)
        # xorshift registers must never be all-zero.
        state[state == 0] = GOLDEN_GAMMA
        self._state = state
        self._buffer: NDArray[np.float64] = np.empty(0)

    def _step(self) -> NDArray[np.float64]:
        """Advance every register once and return one row of uniforms."""
        x = self._state
        x ^= x >> np.uint64(12)
        x ^= x << np.uint64(25)
        x ^= x >> np.uint64(27)
        self._state = x
        with np.errstate(over="ignore"):
            out = x * _XORSHIFT_MUL
        return bits_to_uniform(out)

    def uniforms(self, count: int) -> NDArray[np.float64]:
        """Return the next ``count`` uniforms of the stream, all inside (0, 1)."""
        if count < 0:
            raise DomainError(
                "count must be non-negative", parameter="count", value=count
            )
        pieces = [self._buffer[:count]]
        produced = pieces[0].size
        self._buffer = self._buffer[produced:]
        while produced < count:
            row = self._step()
            take = min(LANES, count - produced)
            pieces.append(row[:take])
            produced += take
            if take < LANES:
                self._buffer = row[take:]
        return np.concatenate(pieces) if len(pieces) > 1 else pieces[0].copy()

    def normals(self, count: int) -> NDArray[np.float64]:
        """Return ``count`` standard normal variates by inversion."""
        result = std_normal_quantile(self.uniforms(count))
        return np.asarray(result, dtype=np.float64).reshape(count)


__all__ = ["LANES", "ShiftRegisterGenerator", "bits_to_uniform", "splitmix64"]

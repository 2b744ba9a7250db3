"""Counter-based SplitMix64 streams.

Every run owns a 64-bit seed. Draw ``k`` of a run is a pure function of
``(run_seed, k)``, so a simulator may skip draws it does not need, evaluate
many runs in one vectorized pass, or split runs over threads without
changing a single recommendation.

Seed derivation::

    run_seed(master, r) = mix(master + (r + 1) * GAMMA)
    draw(seed, k)       = mix(seed + (k + 1) * GAMMA)

where ``mix`` is the SplitMix64 finalizer and all arithmetic wraps mod 2**64.
Round ``t`` of a run with ``m`` users uses draws ``t*m .. t*m + m - 1`` in
user order.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1

_GAMMA_U = np.uint64(GAMMA)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0**-53


def _mix_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def run_seed(master_seed: int, run_index: int) -> int:
    """64-bit seed of run ``run_index`` under ``master_seed``."""
    return _mix_int((master_seed & _MASK) + (run_index + 1) * GAMMA)


def run_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Vectorized :func:`run_seed` for run indices ``start..stop-1``."""
    idx = np.arange(start, stop, dtype=np.uint64)
    base = np.uint64(master_seed & _MASK)
    with np.errstate(over="ignore"):
        return _mix(base + (idx + np.uint64(1)) * _GAMMA_U)


def _mix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1_U
        z = (z ^ (z >> _S27)) * _M2_U
    return z ^ (z >> _S31)


def uniforms(seeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Doubles in [0, 1) for draw ``counters[j]`` of stream ``seeds[j]``.

    ``seeds`` may be a scalar array; the two inputs broadcast.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix(seeds + (counters + np.uint64(1)) * _GAMMA_U)
    return (z >> _S11).astype(np.float64) * _TWO_M53


class SplitMixStream:
    """Sequential view of one run's stream.

    ``take(k)`` returns the next ``k`` uniforms; the position only moves
    forward, so a stream shared by two simulators yields identical draws
    when both consume it in the same order.
    """

    def __init__(self, seed: int, position: int = 0):
        self.seed = seed & _MASK
        self.position = position

    def take(self, k: int) -> np.ndarray:
        counters = np.arange(self.position, self.position + k, dtype=np.uint64)
        self.position += k
        return uniforms(np.uint64(self.seed), counters)

    def copy(self) -> "SplitMixStream":
        return SplitMixStream(self.seed, self.position)

    def __repr__(self) -> str:
        return f"SplitMixStream(seed={self.seed:#018x}, position={self.position})"

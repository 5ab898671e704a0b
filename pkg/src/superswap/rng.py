"""Counter-based random streams.

Every variate is a pure function of (master_seed, stream_index, purpose,
counter), so a trajectory's draws do not depend on which worker runs it or
in what order. The mixing function is the SplitMix64 finalizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_M64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)

# purpose tags keep independent uses of one stream apart
WAIT = 0
CHANNEL = 1
DETECT = 2
MEASURE_ALICE = 3
MEASURE_BOB = 4
BOOTSTRAP = 5


def _mix(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _C1
    x = (x ^ (x >> np.uint64(27))) * _C2
    return x ^ (x >> np.uint64(31))


def _u64(x) -> np.ndarray:
    return np.asarray(x).astype(np.uint64)


def uniforms(master_seed: int, stream, purpose: int, counter) -> np.ndarray:
    """Uniform variates in the open interval (0, 1).

    ``stream`` and ``counter`` broadcast against each other.
    """
    seed = np.array([int(master_seed) & _M64], dtype=np.uint64)
    s = np.atleast_1d(_u64(stream))
    c = np.atleast_1d(_u64(counter))
    tag = np.uint64((int(purpose) & 0xFFFF) << 48)
    with np.errstate(over="ignore"):
        h = _mix(seed)
        h = _mix(h ^ s)
        h = _mix(h ^ (c | tag))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


@dataclass
class RngStream:
    """One trajectory's random stream; keeps a separate counter per purpose."""

    master_seed: int
    stream_index: int

    def __post_init__(self):
        self._counters: dict[int, int] = {}

    def uniform(self, purpose: int = WAIT) -> float:
        k = self._counters.get(purpose, 0)
        self._counters[purpose] = k + 1
        return float(uniforms(self.master_seed, self.stream_index, purpose, k)[0])

    def peek_counter(self, purpose: int) -> int:
        return self._counters.get(purpose, 0)

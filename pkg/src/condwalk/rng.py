"""Counter-based random number streams for reproducible parallel sampling.

Every trial of every estimator draws from its own stream, keyed by
``(master_seed, stream_id)``.  A stream is a SplitMix64 sequence whose
initial state is a bijective mix of the key, so trial ``i`` sees the same
numbers no matter how trials are scheduled across workers, and results are
reproducible from the master seed alone.

Two implementations live side by side: :class:`Stream` is the plain-Python
reference used by :mod:`condwalk.walk`, and the ``sm64_*`` / ``stream_init``
functions are the identical arithmetic in a form the compiled kernels in
:mod:`condwalk.engine` can inline.  Tests assert the two produce the same
words bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea, Flood 2014).
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 1 / 2**53, the spacing of the uniform grid produced by next_uniform.
_U53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """Finalizing bijection on 64-bit words."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def stream_state(master_seed: int, stream_id: int) -> int:
    """Initial SplitMix64 state for the given (seed, stream) key."""
    if master_seed < 0 or stream_id < 0:
        raise ValueError("master_seed and stream_id must be nonnegative")
    z = (master_seed + GAMMA * (stream_id + 1)) & _MASK
    return mix64(mix64(z) ^ GAMMA)


class Stream:
    """Reference SplitMix64 stream.

    >>> s = Stream(master_seed=7, stream_id=0)
    >>> 0.0 <= s.next_uniform() < 1.0
    True
    """

    __slots__ = ("master_seed", "stream_id", "state")

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = master_seed
        self.stream_id = stream_id
        self.state = stream_state(master_seed, stream_id)

    def next_word(self) -> int:
        self.state = (self.state + GAMMA) & _MASK
        return mix64(self.state)

    def next_uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_word() >> 11) * _U53


# --- numba-compatible mirror ------------------------------------------------
#
# The engine works on uint64 numpy scalars; keeping these as module-level
# plain functions (no closures) lets numba cache the compiled kernels.

U64_GAMMA = np.uint64(GAMMA)
_U64_MIX1 = np.uint64(_MIX1)
_U64_MIX2 = np.uint64(_MIX2)
_U64_30 = np.uint64(30)
_U64_27 = np.uint64(27)
_U64_31 = np.uint64(31)
_U64_11 = np.uint64(11)


def sm64_mix(z):
    z = (z ^ (z >> _U64_30)) * _U64_MIX1
    z = (z ^ (z >> _U64_27)) * _U64_MIX2
    return z ^ (z >> _U64_31)


def sm64_init(master_seed, stream_id):
    z = master_seed + U64_GAMMA * (stream_id + np.uint64(1))
    return sm64_mix(sm64_mix(z) ^ U64_GAMMA)


def sm64_next(state):
    """Advance and mix; returns (new_state, word)."""
    state = state + U64_GAMMA
    return state, sm64_mix(state)


def sm64_uniform(state):
    """Advance; returns (new_state, uniform double in [0, 1))."""
    state, w = sm64_next(state)
    return state, (w >> _U64_11) * _U53

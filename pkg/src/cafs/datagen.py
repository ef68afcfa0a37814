"""Deterministic low-entropy input generator.

An input of length n with nominal cardinality k is built from a palette of
k distinct 64-bit values (an arithmetic progression with a random start
and a random odd step, so the values are pairwise distinct and carry the
arithmetic structure typical of real key columns), filled by uniform
draws from the palette.  All randomness comes from a SplitMix-style
counter mixer seeded with seed_base + n + k, so a spec generates the same
array every time, on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

DEFAULT_SEED_BASE = 42


def _fmix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_next(state: int) -> tuple[int, int]:
    """Advance the mixer: state += gamma, output = finalizer(state)."""
    state = (state + _GAMMA) & _MASK64
    return state, _fmix(state)


def _fmix_array(z: np.ndarray) -> np.ndarray:
    # vectorized finalizer, identical bit-for-bit to _fmix
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def mix_outputs(state: int, count: int, skip: int = 0) -> np.ndarray:
    """Outputs skip+1 .. skip+count of the mixer stream, vectorized.

    The mixer state after j calls is state + j * gamma, so a whole stretch
    of the stream is one finalizer pass over a counter ramp.
    """
    idx = np.arange(skip + 1, skip + count + 1, dtype=np.uint64)
    states = np.uint64(state) + idx * np.uint64(_GAMMA)
    return _fmix_array(states)


@dataclass(frozen=True)
class GenSpec:
    """One grid point: n elements over a nominal-k palette."""

    n: int
    k: int
    seed_base: int = DEFAULT_SEED_BASE

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.k > self.n:
            raise ValueError("k must not exceed n")
        if self.k >= 1 << 32:
            raise ValueError("k must fit in 32 bits")


def gen_input(spec: GenSpec) -> np.ndarray:
    """Generate the uint64 array for a spec; pure in spec.

    seed = seed_base + n + k; the first two mixer outputs give the palette
    start a and odd step b (palette[i] = a + b*i wrapping, distinct for any
    k because the odd step is injective mod 2^64); the n elements are
    uniform palette draws from subsequent outputs, reduced to [0, k) with
    a multiply-high reduction to avoid modulo bias.
    """
    seed = (spec.seed_base + spec.n + spec.k) & _MASK64
    state, a = mix_next(seed)
    _, b = mix_next(state)
    b |= 1
    palette = np.uint64(a) + np.uint64(b) * np.arange(spec.k, dtype=np.uint64)
    r = mix_outputs(seed, spec.n, skip=2)
    # multiply-high of r * k, exact for k < 2^32
    k = np.uint64(spec.k)
    hi = r >> np.uint64(32)
    lo = r & np.uint64(0xFFFFFFFF)
    idx = (hi * k + ((lo * k) >> np.uint64(32))) >> np.uint64(32)
    return palette[idx]

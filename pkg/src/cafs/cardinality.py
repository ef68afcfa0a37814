"""Strided sampling and the smoothed Chao1 cardinality estimate.

The sorter only needs an order-of-magnitude estimate of the distinct-value
count, fast.  We read up to 1024 strided samples into a fixed 4096-slot
open-addressing frequency set, take the frequency spectrum (distinct u,
singletons f1, doubletons f2), and apply the smoothed Chao1 form

    k_hat = u + f1^2 / (2 * (f2 + 1))

which stays defined when f2 = 0.  The f1^2 numerator (rather than the
bias-corrected f1*(f1-1)) is deliberate: the difference only matters in
the near-saturated regime, where the dispatcher routes to the fallback
anyway.  When the sample saturates (u == 1024) the estimate is the array
length itself: high-entropy input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .buckets import check_hash_mult, fast_hash

SAMPLE_TARGET = 1024          # s: samples per estimate
FREQSET_SLOTS = 4096
_FREQSET_M_LOG2 = 12          # fast_hash output range == slot count


class FreqSet:
    """Fixed-size open-addressing multiset of sampled keys.

    4096 slots, at most 1024 distinct insertions (25% max load), so linear
    probing always terminates and no deletion support is needed.  A slot is
    occupied iff its counter is nonzero.
    """

    __slots__ = ("keys", "counters", "occupied", "hash_mult")

    def __init__(self, hash_mult=None):
        self.keys = np.zeros(FREQSET_SLOTS, dtype=np.uint64)
        self.counters = np.zeros(FREQSET_SLOTS, dtype=np.uint32)
        self.occupied = 0
        self.hash_mult = check_hash_mult(hash_mult)

    def insert(self, key: int) -> None:
        """Linear-probe insert: bump the key's counter or claim a slot."""
        key = int(key)
        j = fast_hash(key, _FREQSET_M_LOG2, self.hash_mult)
        keys, counters = self.keys, self.counters
        while True:
            if counters[j] == 0:
                keys[j] = key
                counters[j] = 1
                self.occupied += 1
                return
            if int(keys[j]) == key:
                counters[j] += np.uint32(1)
                return
            j = (j + 1) & (FREQSET_SLOTS - 1)

    def spectrum(self) -> tuple[int, int, int]:
        """(u, f1, f2): occupied slots, singleton slots, doubleton slots."""
        occ = self.counters > 0
        u = int(np.count_nonzero(occ))
        f1 = int(np.count_nonzero(self.counters == 1))
        f2 = int(np.count_nonzero(self.counters == 2))
        return u, f1, f2

    def distinct_keys(self) -> np.ndarray:
        """Keys of occupied slots, ascending."""
        return np.sort(self.keys[self.counters > 0])


@dataclass(frozen=True)
class CardinalityEstimate:
    k_hat: float
    u: int
    f1: int
    f2: int
    saturated: bool


def chao1(u: int, f1: int, f2: int, n: int, saturated: bool) -> float:
    """Smoothed Chao1 estimate, clamped into [u, n].

    Saturated samples return n directly.  The upper clamp exists because an
    estimate above n is meaningless to the dispatcher's 2*k_hat > n test.
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    if saturated:
        return float(n)
    k_hat = u + (f1 * f1) / (2.0 * (f2 + 1))
    return min(k_hat, float(n))


def _sample(x: np.ndarray, n: int,
            hash_mult=None) -> tuple[CardinalityEstimate, FreqSet]:
    fs = FreqSet(hash_mult)
    stride = max(1, n // SAMPLE_TARGET)
    limit = min(n, SAMPLE_TARGET * stride)
    samples = np.ascontiguousarray(x[0:limit:stride])
    _kernels.freqset_insert_many(fs.keys, fs.counters, samples,
                                 np.uint64(fs.hash_mult))
    u, f1, f2 = fs.spectrum()
    fs.occupied = u
    saturated = u == SAMPLE_TARGET
    return CardinalityEstimate(chao1(u, f1, f2, n, saturated), u, f1, f2, saturated), fs


def sample_and_estimate(x: np.ndarray, n: int | None = None,
                        hash_mult=None) -> CardinalityEstimate:
    """Estimate the distinct-value count of x from <= 1024 strided samples.

    Uses a fresh FreqSet per call; samples x[0], x[stride], ... with
    stride = max(1, floor(n / 1024)) while the index stays below
    min(n, 1024 * stride).
    """
    if n is None:
        n = x.shape[0]
    if n < 1:
        raise ValueError("n must be >= 1")
    return _sample(x, n, hash_mult)[0]

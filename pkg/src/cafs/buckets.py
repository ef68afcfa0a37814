"""Multiplicative hashing and the fixed-capacity counting bucket table.

The counting cell is a bucket sized to one 64-byte cache line: 4 key slots
for 64-bit keys (32 B keys + 16 B counters + 16 B padding) or 8 slots for
32-bit keys (32 B + 32 B, no padding).  A bucket never resolves internal
collisions; once its slots are taken, further distinct keys go to a spill
buffer on the side.

Slot semantics (the scalar reference all optimized paths must match):

* a slot is occupied iff its counter is nonzero; keys are zero-initialized
* update matches the lowest slot whose key equals the value - this lets a
  value of 0 match-and-claim a zero-keyed empty slot, which is correct by
  construction since the claimed slot then genuinely holds key 0
* otherwise the lowest empty slot is claimed
* a full bucket rejects the update and the caller spills the value

Because claims always take the lowest empty slot and counters never
decrease, the occupied slots of a bucket form a prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

HASH_MULT = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, rounded to odd
_MASK64 = (1 << 64) - 1

BUCKET_BYTES = 64
COUNTER_BYTES = 4

#: keys per bucket, by key width in bytes
CAP_BY_ITEMSIZE = {8: 4, 4: 8}


def bucket_cap(dtype) -> int:
    """Slots per bucket for a key dtype (4 for 64-bit, 8 for 32-bit)."""
    itemsize = np.dtype(dtype).itemsize
    if itemsize not in CAP_BY_ITEMSIZE:
        raise ValueError(f"unsupported key width: {itemsize * 8} bits")
    return CAP_BY_ITEMSIZE[itemsize]


def bucket_padding(dtype) -> int:
    """Padding bytes that complete one bucket record to 64 bytes."""
    cap = bucket_cap(dtype)
    return BUCKET_BYTES - cap * (np.dtype(dtype).itemsize + COUNTER_BYTES)


def check_hash_mult(mult) -> int:
    """Validate a hash multiplier override (the seed hook).

    Must be a 64-bit odd integer; even multipliers throw away low key bits
    and degenerate the spread.  Randomized seeding is the caller's business;
    everything defaults to the deterministic golden-ratio constant so runs
    stay reproducible.
    """
    if mult is None:
        return HASH_MULT
    mult = int(mult)
    if not 0 < mult <= _MASK64 or mult % 2 == 0:
        raise ValueError("hash multiplier must be an odd 64-bit integer")
    return mult


def fast_hash(x, m_log2, mult=None):
    """Multiplicative hash into [0, 2^m_log2).

    Multiplies by the inverse golden ratio constant mod 2^64 (or an odd
    override) and keeps the top m_log2 bits, which spreads arithmetic
    progressions that would collide catastrophically under ``x % M``.
    Accepts a Python int or an unsigned ndarray (vectorized).  Total
    function for 1 <= m_log2 <= 63.
    """
    if not 1 <= m_log2 <= 63:
        raise ValueError(f"m_log2 out of range: {m_log2}")
    mult = check_hash_mult(mult)
    if isinstance(x, np.ndarray):
        prod = x.astype(np.uint64, copy=False) * np.uint64(mult)
        return prod >> np.uint64(64 - m_log2)
    return ((int(x) * mult) & _MASK64) >> (64 - m_log2)


def _bit_ceil(v: int) -> int:
    return 1 << (v - 1).bit_length() if v > 1 else 1


def table_size_for(k_hat, n: int, cap: int) -> int:
    """Bucket count M for an expected k_hat distinct keys in n elements.

    Targets a slot load factor of 1/8 (M = bit_ceil(8 * k_hat / cap), i.e.
    half a key per bucket on average), then clamps to [8, bit_ceil(n/cap)].
    The lower clamp wins when tiny n inverts the interval.
    """
    if k_hat < 1 or n < 1:
        raise ValueError("k_hat and n must be >= 1")
    if cap not in (4, 8):
        raise ValueError(f"cap must be 4 or 8, got {cap}")
    m = _bit_ceil(int(np.ceil(8.0 * k_hat / cap)))
    m = min(m, _bit_ceil(int(np.ceil(n / cap))))
    return max(m, 8)


@dataclass
class Bucket:
    """One cache-line counting record: parallel key and counter slots."""

    keys: np.ndarray
    counts: np.ndarray

    @classmethod
    def empty(cls, dtype=np.uint64) -> "Bucket":
        cap = bucket_cap(dtype)
        return cls(np.zeros(cap, dtype=dtype), np.zeros(cap, dtype=np.uint32))

    @property
    def cap(self) -> int:
        return self.keys.shape[0]

    def occupied(self) -> int:
        return int(np.count_nonzero(self.counts))


def bucket_update(bucket: Bucket, val: int, inc: int = 1) -> bool:
    """Scalar reference bucket update.

    Lowest slot whose key equals val gains inc (match, or zero-key claim);
    else the lowest empty slot is claimed with (val, inc); else returns
    False and the bucket is unchanged (caller spills).  A vectorized
    lane-compare implementation must reproduce these slot choices exactly.
    """
    if inc < 1:
        raise ValueError("inc must be >= 1")
    keys, counts = bucket.keys, bucket.counts
    val = int(val)
    for j in range(keys.shape[0]):
        if int(keys[j]) == val:
            counts[j] += np.uint32(inc)
            return True
    for j in range(keys.shape[0]):
        if counts[j] == 0:
            keys[j] = val
            counts[j] = np.uint32(inc)
            return True
    return False


class TableStats:
    """Update counters: named view over the kernel stats array."""

    __slots__ = ("_a",)

    def __init__(self, arr: np.ndarray):
        self._a = arr

    updates = property(lambda self: int(self._a[_kernels.STAT_UPDATES]))
    hits = property(lambda self: int(self._a[_kernels.STAT_HITS]))
    claims = property(lambda self: int(self._a[_kernels.STAT_CLAIMS]))
    spill_pushes = property(lambda self: int(self._a[_kernels.STAT_SPILL_PUSHES]))
    spill_len = property(lambda self: int(self._a[_kernels.STAT_SPILL_LEN]))

    def __repr__(self):
        return (f"TableStats(updates={self.updates}, hits={self.hits}, "
                f"claims={self.claims}, spill_pushes={self.spill_pushes}, "
                f"spill_len={self.spill_len})")


class BucketTable:
    """2^m_log2 buckets plus the spill buffer for overflowing keys.

    Single-threaded per instance.  The spill holds raw replicated keys
    (inc copies per rejected update) so reconstruction can sort spill
    values directly.
    """

    def __init__(self, m_log2: int, dtype=np.uint64, hash_mult=None):
        if m_log2 < 3:
            raise ValueError("table needs at least 8 buckets (m_log2 >= 3)")
        self.m_log2 = int(m_log2)
        self.dtype = np.dtype(dtype)
        self.hash_mult = check_hash_mult(hash_mult)
        cap = bucket_cap(self.dtype)
        m = 1 << self.m_log2
        self.keys = np.zeros((m, cap), dtype=self.dtype)
        self.counts = np.zeros((m, cap), dtype=np.uint32)
        self._stats = np.zeros(_kernels.N_STATS, dtype=np.int64)
        self._spill_chunks: list[np.ndarray] = []
        self.stats = TableStats(self._stats)

    @property
    def n_buckets(self) -> int:
        return self.keys.shape[0]

    @property
    def cap(self) -> int:
        return self.keys.shape[1]

    @property
    def spill_len(self) -> int:
        return self.stats.spill_len

    def bucket(self, i: int) -> Bucket:
        """Mutable view of bucket i."""
        return Bucket(self.keys[i], self.counts[i])

    def update(self, val: int, inc: int = 1) -> None:
        """Route one (val, inc) update: hash, bucket update, spill on full.

        Scalar reference path; the counting kernels must match it exactly.
        """
        h = fast_hash(int(val), self.m_log2, self.hash_mult)
        b = self.bucket(h)
        hit = bool(np.any((b.keys == self.dtype.type(val)) & (b.counts > 0)))
        if bucket_update(b, val, inc):
            which = _kernels.STAT_HITS if hit else _kernels.STAT_CLAIMS
            self._stats[which] += 1
        else:
            self._spill_chunks.append(np.full(inc, val, dtype=self.dtype))
            self._stats[_kernels.STAT_SPILL_PUSHES] += 1
            self._stats[_kernels.STAT_SPILL_LEN] += inc
        self._stats[_kernels.STAT_UPDATES] += 1

    def _run_resumable(self, kernel, *arrays) -> None:
        # grow the spill buffer on demand; the kernel returns the resume index
        # and uses STAT_SPILL_LEN as its write position within this buffer
        n = arrays[0].shape[0]
        total_inc = n if len(arrays) == 1 else int(arrays[1].sum())
        prior = self._stats[_kernels.STAT_SPILL_LEN]
        self._stats[_kernels.STAT_SPILL_LEN] = 0
        spill = np.empty(min(total_inc, 8192), dtype=self.dtype)
        start = 0
        while True:
            start = kernel(*arrays, self.keys, self.counts, self.m_log2,
                           np.uint64(self.hash_mult), spill, start, self._stats)
            if start >= n:
                break
            used = int(self._stats[_kernels.STAT_SPILL_LEN])
            grown = np.empty(total_inc, dtype=self.dtype)
            grown[:used] = spill[:used]
            spill = grown
        used = int(self._stats[_kernels.STAT_SPILL_LEN])
        if used > 0:
            self._spill_chunks.append(spill[:used])
        self._stats[_kernels.STAT_SPILL_LEN] = prior + used

    def count_sequence(self, x: np.ndarray) -> None:
        """Counting pass over x with run-length folding (the main hot loop).

        Each maximal run of equal adjacent values becomes one update call.
        """
        if x.dtype != self.dtype:
            raise ValueError(f"expected {self.dtype} values, got {x.dtype}")
        if x.size:
            self._run_resumable(_kernels.count_sequence, x)

    def update_many(self, vals: np.ndarray, lens: np.ndarray | None = None) -> None:
        """Sequential-equivalent bulk form of update(): one call per pair."""
        if vals.dtype != self.dtype:
            raise ValueError(f"expected {self.dtype} values, got {vals.dtype}")
        if lens is None:
            lens = np.ones(vals.shape[0], dtype=np.int64)
        else:
            lens = np.ascontiguousarray(lens, dtype=np.int64)
            if np.any(lens < 1):
                raise ValueError("inc must be >= 1")
        if vals.size:
            self._run_resumable(_kernels.apply_updates, vals, lens)

    @property
    def spill(self) -> np.ndarray:
        """Spilled raw keys in push order."""
        if not self._spill_chunks:
            return np.empty(0, dtype=self.dtype)
        if len(self._spill_chunks) == 1:
            return self._spill_chunks[0]
        merged = np.concatenate(self._spill_chunks)
        self._spill_chunks = [merged]
        return merged

    def occupied_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(keys, counts) of all occupied slots, keys widened to uint64."""
        mask = self.counts > 0
        return (self.keys[mask].astype(np.uint64, copy=False),
                self.counts[mask].astype(np.int64))

    def counted_total(self) -> int:
        """Sum of all bucket counters (excludes spill)."""
        return int(self.counts.sum(dtype=np.int64))

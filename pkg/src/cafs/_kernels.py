"""Compiled hot loops.

Everything here is an optimization of a scalar reference that lives in the
regular modules (``buckets.bucket_update``, ``BucketTable.update``, the
pure-Python emit in the tests).  The kernels must stay bit-identical to
those references: same slot choices, same spill sequence, same counters.
The test suite enforces the equivalence on randomized inputs.

Counting kernels are resumable: they return the index of the first
unconsumed element when the spill buffer runs out of room, so the caller
can grow the buffer and continue without re-counting.
"""

import numpy as np
from numba import njit

# stats array layout shared by the counting kernels
STAT_UPDATES = 0
STAT_HITS = 1
STAT_CLAIMS = 2
STAT_SPILL_PUSHES = 3
STAT_SPILL_LEN = 4
N_STATS = 5

@njit(cache=True)
def count_sequence(x, keys, counts, m_log2, mult, spill, start, stats):
    """Run-length folded counting pass over x[start:].

    Extends each maximal run of equal adjacent values and applies a single
    bucket update per run.  Returns the index of the first element not yet
    consumed (== x.size when done); a smaller value means the spill buffer
    is full and the caller must grow it and call again.

    The probe is a single fused scan: occupied slots always form a prefix
    (claims take the lowest empty slot and counters never decrease), so the
    first zero counter both terminates the match search and is the claim
    slot.  Empty slots hold key 0, which makes the claim of slot s by
    v == 0 the same write the scalar zero-key match would do.
    """
    n = x.shape[0]
    cap = keys.shape[1]
    shift = np.uint64(64 - m_log2)
    spill_cap = spill.shape[0]
    nspill = stats[STAT_SPILL_LEN]
    updates = hits = claims = pushes = np.int64(0)
    i = start
    while i < n:
        v = x[i]
        j = i + 1
        while j < n and x[j] == v:
            j += 1
        inc = j - i
        h = (np.uint64(v) * mult) >> shift
        placed = False
        for s in range(cap):
            if counts[h, s] == 0:
                keys[h, s] = v
                counts[h, s] = np.uint32(inc)
                claims += 1
                placed = True
                break
            if keys[h, s] == v:
                counts[h, s] += np.uint32(inc)
                hits += 1
                placed = True
                break
        if not placed:
            if nspill + inc > spill_cap:
                break
            for t in range(inc):
                spill[nspill + t] = v
            nspill += inc
            pushes += 1
        updates += 1
        i = j
    stats[STAT_UPDATES] += updates
    stats[STAT_HITS] += hits
    stats[STAT_CLAIMS] += claims
    stats[STAT_SPILL_PUSHES] += pushes
    stats[STAT_SPILL_LEN] = nspill
    return i


@njit(cache=True)
def apply_updates(vals, lens, keys, counts, m_log2, mult, spill, start, stats):
    """One bucket update per (vals[i], lens[i]) pair, no run folding.

    Same resumable contract and fused probe as count_sequence.
    """
    n = vals.shape[0]
    cap = keys.shape[1]
    shift = np.uint64(64 - m_log2)
    spill_cap = spill.shape[0]
    nspill = stats[STAT_SPILL_LEN]
    updates = hits = claims = pushes = np.int64(0)
    i = start
    while i < n:
        v = vals[i]
        inc = lens[i]
        h = (np.uint64(v) * mult) >> shift
        placed = False
        for s in range(cap):
            if counts[h, s] == 0:
                keys[h, s] = v
                counts[h, s] = np.uint32(inc)
                claims += 1
                placed = True
                break
            if keys[h, s] == v:
                counts[h, s] += np.uint32(inc)
                hits += 1
                placed = True
                break
        if not placed:
            if nspill + inc > spill_cap:
                break
            for t in range(inc):
                spill[nspill + t] = v
            nspill += inc
            pushes += 1
        updates += 1
        i += 1
    stats[STAT_UPDATES] += updates
    stats[STAT_HITS] += hits
    stats[STAT_CLAIMS] += claims
    stats[STAT_SPILL_PUSHES] += pushes
    stats[STAT_SPILL_LEN] = nspill
    return i


@njit(cache=True)
def freqset_insert_many(keys, counters, samples, mult):
    """Linear-probe inserts into the 4096-slot frequency set.

    Must stay bit-identical to FreqSet.insert: probe from the 12-bit
    multiplicative hash, bump the matching key's counter or claim the
    first empty slot (counter == 0) with counter 1.
    """
    mask = keys.shape[0] - 1
    shift = np.uint64(52)  # 64 - 12
    for i in range(samples.shape[0]):
        v = np.uint64(samples[i])
        j = np.int64((v * mult) >> shift)
        while True:
            c = counters[j]
            if c == 0:
                keys[j] = v
                counters[j] = np.uint32(1)
                break
            if keys[j] == v:
                counters[j] = c + np.uint32(1)
                break
            j = (j + 1) & mask


@njit(cache=True)
def tiny_counts(x, keys):
    """Per-key occurrence counts in one pass with no data-dependent branch.

    Every element is compared against every key; the comparison result is
    added as 0/1, so the loop body is identical for all inputs.
    """
    nk = keys.shape[0]
    out = np.zeros(nk, dtype=np.int64)
    for i in range(x.shape[0]):
        v = x[i]
        for j in range(nk):
            out[j] += np.int64(v == keys[j])
    return out


@njit(cache=True)
def emit_fill(out, keys, counts):
    """Expand (key, count) pairs into out as per-pair bulk fills."""
    p = 0
    for i in range(keys.shape[0]):
        k = keys[i]
        c = counts[i]
        for j in range(c):
            out[p + j] = k
        p += c
    return p


@njit(cache=True)
def radix_sort_pairs(keys, counts, scratch_keys, scratch_counts):
    """Stable LSD radix sort of pairs by key: 8 passes of 8-bit digits.

    keys must be uint64.  Ping-pongs between the main and scratch buffers;
    after the 8 (even) passes the result is back in keys/counts.
    """
    n = keys.shape[0]
    hist = np.empty(256, dtype=np.int64)
    src_k, src_c = keys, counts
    dst_k, dst_c = scratch_keys, scratch_counts
    for p in range(8):
        shift = np.uint64(8 * p)
        for b in range(256):
            hist[b] = 0
        for i in range(n):
            hist[(src_k[i] >> shift) & np.uint64(0xFF)] += 1
        total = 0
        for b in range(256):
            c = hist[b]
            hist[b] = total
            total += c
        for i in range(n):
            d = (src_k[i] >> shift) & np.uint64(0xFF)
            pos = hist[d]
            dst_k[pos] = src_k[i]
            dst_c[pos] = src_c[i]
            hist[d] = pos + 1
        src_k, dst_k = dst_k, src_k
        src_c, dst_c = dst_c, src_c

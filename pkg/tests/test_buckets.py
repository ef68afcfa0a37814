"""Hashing, bucket update semantics, table sizing, and the bucket table."""

import numpy as np
import pytest

from cafs.buckets import (
    Bucket,
    BucketTable,
    CAP_BY_ITEMSIZE,
    HASH_MULT,
    bucket_cap,
    bucket_padding,
    bucket_update,
    fast_hash,
    table_size_for,
)

MASK64 = (1 << 64) - 1


def bigint_hash(x, m_log2):
    # independent oracle: arbitrary-precision multiply, top m_log2 bits
    return ((x * HASH_MULT) % (1 << 64)) >> (64 - m_log2)


def find_colliders(count, m_log2, bucket=0, start=1):
    cand = np.arange(start, start + (count << (m_log2 + 4)), dtype=np.uint64)
    hits = cand[fast_hash(cand, m_log2) == bucket]
    assert hits.shape[0] >= count
    return hits[:count]


class TestFastHash:
    @pytest.mark.parametrize("m_log2", [1, 3, 9, 32, 63])
    def test_zero_maps_to_zero(self, m_log2):
        assert fast_hash(0, m_log2) == 0

    def test_one_at_nine_bits(self):
        assert fast_hash(1, 9) == 316
        assert fast_hash(1, 9) == bigint_hash(1, 9)

    def test_matches_bigint_oracle(self):
        rng = np.random.default_rng(11)
        for m_log2 in (3, 7, 12, 33, 63):
            for x in rng.integers(0, MASK64, 50, dtype=np.uint64).tolist():
                assert fast_hash(x, m_log2) == bigint_hash(x, m_log2)

    def test_array_path_matches_scalar(self):
        rng = np.random.default_rng(5)
        xs = rng.integers(0, MASK64, 1000, dtype=np.uint64)
        out = fast_hash(xs, 12)
        assert out.tolist() == [fast_hash(int(x), 12) for x in xs.tolist()]

    def test_output_in_range(self):
        rng = np.random.default_rng(7)
        for m_log2 in range(3, 17):
            xs = rng.integers(0, MASK64, 2000, dtype=np.uint64)
            assert int(fast_hash(xs, m_log2).max()) < (1 << m_log2)

    def test_spreads_arithmetic_progression(self):
        # 0..4095 into 512 buckets: no bucket takes more than 32 of the 4096
        xs = np.arange(4096, dtype=np.uint64)
        hist = np.bincount(fast_hash(xs, 9).astype(np.int64), minlength=512)
        assert int(hist.max()) <= 32
        # naive modulo collapses a step-512 progression onto one bucket
        prog = np.arange(4096, dtype=np.uint64) * np.uint64(512)
        assert len(set((prog % np.uint64(512)).tolist())) == 1

    @pytest.mark.parametrize("m_log2", [0, 64, -3])
    def test_rejects_bad_width(self, m_log2):
        with pytest.raises(ValueError):
            fast_hash(1, m_log2)


class TestBucketUpdate:
    def test_first_claim_lowest_slot(self):
        b = Bucket.empty()
        assert bucket_update(b, 42, 1)
        assert b.keys[0] == 42 and b.counts[0] == 1
        assert b.occupied() == 1

    def test_hit_accumulates(self):
        b = Bucket.empty()
        bucket_update(b, 42, 1)
        assert bucket_update(b, 42, 3)
        assert b.keys[0] == 42 and b.counts[0] == 4
        assert b.occupied() == 1

    def test_full_bucket_rejects_fifth_key(self):
        b = Bucket.empty()
        for v in (10, 20, 30, 40):
            assert bucket_update(b, v, 1)
        before_keys, before_counts = b.keys.copy(), b.counts.copy()
        assert not bucket_update(b, 50, 1)
        assert np.array_equal(b.keys, before_keys)
        assert np.array_equal(b.counts, before_counts)

    def test_zero_key_claims_zeroed_empty_slot(self):
        b = Bucket.empty()
        assert bucket_update(b, 0, 2)
        assert b.keys[0] == 0 and b.counts[0] == 2
        assert bucket_update(b, 0, 1)
        assert b.counts[0] == 3 and b.occupied() == 1

    def test_zero_key_after_other_claims(self):
        b = Bucket.empty()
        bucket_update(b, 7, 1)
        bucket_update(b, 0, 5)
        assert b.keys[1] == 0 and b.counts[1] == 5
        bucket_update(b, 0, 1)
        assert b.counts[1] == 6

    def test_occupied_slots_form_prefix(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            b = Bucket.empty()
            for v in rng.integers(0, 6, 12).tolist():
                bucket_update(b, v, 1)
            occ = (b.counts > 0).tolist()
            assert occ == sorted(occ, reverse=True)

    def test_occupied_keys_pairwise_distinct(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            b = Bucket.empty()
            for v in rng.integers(0, 5, 16).tolist():
                bucket_update(b, v, int(rng.integers(1, 4)))
            occupied = b.keys[b.counts > 0].tolist()
            assert len(occupied) == len(set(occupied))

    def test_rejects_zero_inc(self):
        with pytest.raises(ValueError):
            bucket_update(Bucket.empty(), 1, 0)

    def test_32bit_bucket_has_eight_slots(self):
        b = Bucket.empty(np.uint32)
        for v in range(1, 9):
            assert bucket_update(b, v, 1)
        assert not bucket_update(b, 9, 1)


class TestLayout:
    def test_cache_line_arithmetic(self):
        for dtype, cap in ((np.uint64, 4), (np.uint32, 8)):
            itemsize = np.dtype(dtype).itemsize
            assert bucket_cap(dtype) == cap == CAP_BY_ITEMSIZE[itemsize]
            assert cap * (itemsize + 4) + bucket_padding(dtype) == 64
        assert bucket_padding(np.uint64) == 16
        assert bucket_padding(np.uint32) == 0

    def test_rejects_other_widths(self):
        with pytest.raises(ValueError):
            bucket_cap(np.uint16)


class TestTableSizeFor:
    @pytest.mark.parametrize("k_hat,n,cap,want", [
        (200, 10**7, 4, 512),
        (4000, 10**7, 4, 8192),
        (10**4, 10**7, 4, 32768),
        (1, 10**7, 4, 8),
        (10**6, 1024, 4, 256),
    ])
    def test_fixtures(self, k_hat, n, cap, want):
        assert table_size_for(k_hat, n, cap) == want

    def test_lower_clamp_wins_on_inverted_interval(self):
        assert table_size_for(1, 4, 4) == 8

    def test_fractional_estimate(self):
        assert table_size_for(200.3, 10**7, 4) == 512

    def test_power_of_two(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            k_hat = float(rng.uniform(1, 1e6))
            n = int(rng.integers(1, 10**7))
            m = table_size_for(k_hat, n, 4)
            assert m >= 8 and m & (m - 1) == 0

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            table_size_for(0, 10, 4)
        with pytest.raises(ValueError):
            table_size_for(1, 0, 4)
        with pytest.raises(ValueError):
            table_size_for(1, 10, 5)


class TestTableUpdate:
    def test_double_update_one_slot(self):
        t = BucketTable(3)
        t.update(7, 1)
        t.update(7, 1)
        h = fast_hash(7, 3)
        assert t.keys[h, 0] == 7 and t.counts[h, 0] == 2
        assert t.spill_len == 0
        assert t.stats.updates == 2 and t.stats.hits == 1 and t.stats.claims == 1

    def test_fifth_collider_spills(self):
        keys = find_colliders(5, 3)
        t = BucketTable(3)
        for v in keys.tolist():
            t.update(v, 1)
        assert t.counted_total() == 4
        assert t.spill.tolist() == [int(keys[4])]
        assert t.stats.spill_pushes == 1

    def test_run_spill_is_replicated(self):
        keys = find_colliders(5, 3)
        t = BucketTable(3)
        for v in keys[:4].tolist():
            t.update(v, 1)
        t.update(int(keys[4]), 3)
        assert t.spill.tolist() == [int(keys[4])] * 3
        assert t.spill_len == 3

    def test_conservation(self):
        rng = np.random.default_rng(9)
        t = BucketTable(3)
        total = 0
        for _ in range(500):
            inc = int(rng.integers(1, 5))
            t.update(int(rng.integers(0, 40)), inc)
            total += inc
        assert t.counted_total() + t.spill_len == total

    def test_occupied_keys_hash_home(self):
        rng = np.random.default_rng(10)
        t = BucketTable(4)
        for v in rng.integers(0, MASK64, 300, dtype=np.uint64).tolist():
            t.update(v, 1)
        rows, cols = np.nonzero(t.counts)
        for r, c in zip(rows.tolist(), cols.tolist()):
            assert fast_hash(int(t.keys[r, c]), 4) == r

    def test_update_is_idempotent_in_key_set(self):
        t = BucketTable(3)
        for v in (1, 2, 3):
            t.update(v, 1)
        occupied = (t.counts > 0).copy()
        for v in (3, 1, 2, 2):
            t.update(v, 4)
        assert np.array_equal(t.counts > 0, occupied)

    def test_rejects_tiny_table(self):
        with pytest.raises(ValueError):
            BucketTable(2)


def _scalar_replay(vals, lens, m_log2, dtype):
    ref = BucketTable(m_log2, dtype=dtype)
    for v, c in zip(vals.tolist(), lens.tolist()):
        ref.update(v, c)
    return ref


def _tables_equal(a, b):
    return (np.array_equal(a.keys, b.keys)
            and np.array_equal(a.counts, b.counts)
            and np.array_equal(a.spill, b.spill)
            and a.stats.updates == b.stats.updates
            and a.stats.hits == b.stats.hits
            and a.stats.claims == b.stats.claims
            and a.stats.spill_pushes == b.stats.spill_pushes
            and a.spill_len == b.spill_len)


class TestBulkEquivalence:
    """The compiled paths must be bit-identical to the scalar reference."""

    @pytest.mark.parametrize("seed", range(8))
    def test_update_many_matches_scalar(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 400))
        # small value range + tiny table forces collisions, spill, and zero keys
        vals = rng.integers(0, 25, n, dtype=np.uint64)
        lens = rng.integers(1, 6, n).astype(np.int64)
        fast = BucketTable(3)
        fast.update_many(vals, lens)
        assert _tables_equal(fast, _scalar_replay(vals, lens, 3, np.uint64))

    @pytest.mark.parametrize("seed", range(8))
    def test_count_sequence_matches_scalar_runs(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(1, 600))
        x = rng.integers(0, 12, n, dtype=np.uint64)
        x.sort()
        if seed % 2:
            x = x[rng.permutation(n)]
        # reference: fold maximal runs by hand, then scalar updates
        runs_v, runs_c = [], []
        for v in x.tolist():
            if runs_v and runs_v[-1] == v:
                runs_c[-1] += 1
            else:
                runs_v.append(v)
                runs_c.append(1)
        ref = _scalar_replay(np.array(runs_v, np.uint64),
                             np.array(runs_c, np.int64), 3, np.uint64)
        fast = BucketTable(3)
        fast.count_sequence(x)
        assert _tables_equal(fast, ref)

    def test_uint32_path(self):
        rng = np.random.default_rng(77)
        vals = rng.integers(0, 30, 500, dtype=np.uint32)
        fast = BucketTable(3, dtype=np.uint32)
        fast.count_sequence(vals)
        runs_v, runs_c = [vals[0]], [1]
        for v in vals[1:].tolist():
            if runs_v[-1] == v:
                runs_c[-1] += 1
            else:
                runs_v.append(v)
                runs_c.append(1)
        ref = _scalar_replay(np.array(runs_v, np.uint32),
                             np.array(runs_c, np.int64), 3, np.uint32)
        assert _tables_equal(fast, ref)

    def test_spill_buffer_growth_preserves_sequence(self):
        # 6 colliders into one bucket: everything after the fourth spills,
        # in push order, across the resumable growth boundary
        keys = find_colliders(6, 3)
        vals = np.concatenate([np.repeat(keys[:4], 2),
                               np.repeat(keys[4:], 9000)]).astype(np.uint64)
        t = BucketTable(3)
        t.update_many(vals)
        ref = _scalar_replay(vals, np.ones(len(vals), np.int64), 3, np.uint64)
        assert _tables_equal(t, ref)
        assert t.spill_len == 18000


class TestSpillRate:
    def test_half_key_per_bucket_spills_rarely(self):
        # design load factor: 2^12 buckets, 2^11 distinct random keys
        spills = updates = 0
        for seed in range(3):
            rng = np.random.default_rng(1000 + seed)
            keys = rng.integers(0, MASK64, 2048, dtype=np.uint64)
            keys = np.unique(keys)
            t = BucketTable(12)
            t.update_many(keys)
            spills += t.stats.spill_pushes
            updates += t.stats.updates
        assert spills / updates <= 1e-3

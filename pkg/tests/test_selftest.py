"""Self-test machinery: collider construction and suite behavior."""

import numpy as np

from cafs.buckets import fast_hash
from cafs.selftest import (
    _sweep_points,
    collide_keys,
    collide_keys_exact,
    run_selftest,
    suite_dispatch_routes,
    suite_oracle_sweep,
)


class TestColliders:
    def test_brute_force_keys_collide(self):
        keys = collide_keys(10, 5, bucket=3)
        assert len(set(keys.tolist())) == 10
        assert np.all(fast_hash(keys, 5) == 3)

    def test_exact_enumeration_collides(self):
        keys = collide_keys_exact(10_000, 8, bucket=42, offset=12345)
        assert np.all(fast_hash(keys, 8) == 42)
        assert len(np.unique(keys)) == 10_000

    def test_exact_agrees_with_brute_force(self):
        # every brute-forced collider is the inverse image of a point in the
        # bucket's output interval: the two constructions are one bijection
        from cafs.buckets import HASH_MULT
        from cafs.selftest import _HASH_INV
        mask = (1 << 64) - 1
        for x in collide_keys(20, 6, bucket=9).tolist():
            y = (x * HASH_MULT) & mask
            assert y >> 58 == 9
            assert (_HASH_INV * y) & mask == x

    def test_preimage_exhaustion_rejected(self):
        import pytest
        with pytest.raises(ValueError):
            collide_keys_exact(1 << 60, 8)


class TestSweep:
    def test_points_deterministic(self):
        assert _sweep_points(1, 50) == _sweep_points(1, 50)
        assert _sweep_points(1, 50) != _sweep_points(2, 50)

    def test_reduced_sweep_passes(self):
        result = suite_oracle_sweep(seed=3, points=15)
        assert result.passed, result.detail

    def test_fault_injection_fails_with_point(self):
        result = suite_oracle_sweep(seed=3, points=15, fault_point=0)
        assert not result.passed
        assert "(" in result.detail  # names the failing (n, k)

    def test_dispatch_suite(self):
        assert suite_dispatch_routes().passed

    def test_run_selftest_shape(self):
        results = run_selftest(points=10)
        assert [r.name for r in results] == [
            "oracle-sweep", "dispatch-routes", "estimator-accuracy",
            "spill-bound"]
        assert all(r.passed for r in results)

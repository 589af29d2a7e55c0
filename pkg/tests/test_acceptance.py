"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines and timings.  Expected values are frozen from independent
computations (closed-form bounds evaluated in exact rational arithmetic,
brute-force enumerations, and the rank oracles exercised in the unit
suites); tolerances are stated inline and never loosened at runtime.
"""

import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from icrelay.channel import AntennaConfig, sample_channel, write_channel
from icrelay.converse import rank_bound_check
from icrelay.linalg import (DEFAULT_TOL, null_space_basis, numerical_rank,
                            pseudo_inverse, rank_at_scale, schur_complement,
                            spectral_norm)
from icrelay.region import (allocate_antennas, ic_dof_region,
                            linear_dof_region, linear_sum_dof, outer_bounds)
from icrelay.scheme import build_plan, verify_plan, write_plan
from icrelay.simulate import SnrSweep, slope_estimate


@contextmanager
def criterion(num, label, budget_s):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < budget_s, (
            f"criterion {num} took {elapsed:.2f}s, budget {budget_s}s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        print(f"\n[criterion {num}] {label}: {status} ({elapsed:.2f}s)")


def crand(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def test_criterion_1_region_values():
    with criterion(1, "region sum bounds on the full grid", 1.0):
        for m in range(1, 5):
            for n in range(0, 7):
                for l in range(0, 7):
                    config = AntennaConfig(m, n, l)
                    region = linear_dof_region(config)
                    expected = m + min(Fraction(m), Fraction(n), Fraction(l),
                                       Fraction(max(n, l), 2))
                    assert region.sum_bound() == expected
                    bounds = outer_bounds(config)
                    outer = min(bounds.cognitive, bounds.genie)
                    meets = expected == outer
                    assert meets == (max(n, l) >= 2 * min(m, n, l))
                    assert meets == bounds.tight


def test_criterion_2_worked_examples():
    with criterion(2, "(4,4,2) and (4,2,4) over 200 seeds each", 30.0):
        for (m, n, l) in [(4, 4, 2), (4, 2, 4)]:
            config = AntennaConfig(m, n, l)
            region = linear_dof_region(config)
            assert region.sum_bound() == 6
            assert region.vertices == ((0, 0), (4, 0), (4, 2), (2, 4), (0, 4))
            for seed in range(200):
                ch = sample_channel(config, seed)
                for corner, pair in ((1, (4, 2)), (2, (2, 4))):
                    report = verify_plan(ch, build_plan(ch, corner=corner))
                    assert report.all_ok, (m, n, l, seed, corner)
                    assert report.max_neutralization_residual <= 1e-9
                    assert report.achieved_pair == pair


def test_criterion_3_equal_antenna_benchmark():
    with criterion(3, "(m,m,m) reaches 3m/2 per use, 100 seeds per m", 60.0):
        for m in range(1, 5):
            config = AntennaConfig(m, m, m)
            for seed in range(100):
                ch = sample_channel(config, seed)
                report = verify_plan(ch, build_plan(ch, corner=1))
                assert report.all_ok, (m, seed)
                assert sum(report.achieved_pair) == Fraction(3 * m, 2)


def test_criterion_4_slope_validation():
    with criterion(4, "rate slopes within 5% of the sum-DoF formula", 300.0):
        sweep = SnrSweep(snr_points_db=(40.0, 50.0, 60.0, 70.0, 80.0),
                         trials=20, seed=2024)
        for (m, n, l) in [(4, 4, 2), (4, 2, 4), (4, 8, 4), (4, 4, 4), (1, 1, 1)]:
            target = float(linear_sum_dof(m, n, l))
            estimate = slope_estimate(AntennaConfig(m, n, l), sweep)
            assert abs(estimate.sum_dof - target) <= 0.05 * target, (
                (m, n, l), estimate.sum_dof, target)
            # per-user slopes track the corner's stream counts (m, k)
            for got, want in zip(estimate.per_user, (m, target - m)):
                assert abs(got - want) <= 0.05 * max(want, 1.0), (
                    (m, n, l), estimate.per_user)


def test_criterion_5_rank_bound_sampling():
    with criterion(5, "cross-rank lower bound over 1000 mixing samples", 120.0):
        equality_required = {(4, 4, 4), (4, 2, 2)}  # max(n,l) < 2 min, even dims
        for (m, n, l) in [(4, 4, 4), (4, 2, 2), (2, 4, 4), (4, 4, 2), (4, 2, 4)]:
            ch = sample_channel(AntennaConfig(m, n, l), 7)
            report = rank_bound_check(ch, samples=1000, seed=7)
            assert report.violations == (), (m, n, l)
            assert report.min_rank_sum >= report.bound == 2 * m - max(n, l)
            if (m, n, l) in equality_required:
                assert report.scheme_rank_sum == report.bound, (m, n, l)


def test_criterion_6_ic_region_oracles():
    with criterion(6, "rank-based interference-channel region checks", 30.0):
        # (a) generic full-rank square instances
        for m in range(1, 5):
            for seed in range(5):
                rng = np.random.default_rng(100 * m + seed)
                region = ic_dof_region(crand(rng, m, m), crand(rng, m, m),
                                       crand(rng, m, m), crand(rng, m, m))
                assert region.max_sum() == m
        # (b) genie-augmented instances reproduce min(m + n, 2m)
        for (m, n) in [(2, 1), (2, 2), (4, 2), (4, 4)]:
            rng = np.random.default_rng(10 * m + n)
            h11, h12, h21, h22 = (crand(rng, m, m) for _ in range(4))
            h01, h02 = crand(rng, n, m), crand(rng, n, m)
            region = ic_dof_region(np.vstack([h11, h01]), np.vstack([h12, h02]),
                                   np.vstack([h21, h01]), np.vstack([h22, h02]))
            assert region.max_sum() == min(m + n, 2 * m), (m, n)
        # (c) user-swap mirror symmetry on rank-deficient instances
        rng = np.random.default_rng(555)
        for _ in range(100):
            dims = [int(rng.integers(1, 4)) for _ in range(4)]
            n1, n2, m1, m2 = dims

            def lowrank(rows, cols):
                r = int(rng.integers(0, min(rows, cols) + 1))
                if r == 0:
                    return np.zeros((rows, cols), dtype=complex)
                return crand(rng, rows, r) @ crand(rng, r, cols)

            h11, h12 = lowrank(n1, m1), lowrank(n1, m2)
            h21, h22 = lowrank(n2, m1), lowrank(n2, m2)
            region = ic_dof_region(h11, h12, h21, h22)
            swapped = ic_dof_region(h22, h21, h12, h11)
            assert {(y, x) for (x, y) in region.vertices} == set(swapped.vertices)


def test_criterion_7_antenna_allocation():
    with criterion(7, "half-duplex antenna split enumeration", 1.0):
        m = 4
        for total in range(0, 13):
            splits, value = allocate_antennas(m, total)
            if total % 3 == 0 and total <= 3 * m:
                assert value == m + min(Fraction(m), Fraction(total, 3)), total
            if total % 3 == 0 and 0 < total and Fraction(total, 3) < m:
                for (n, l) in splits:
                    assert Fraction(n, l) in (Fraction(1, 2), Fraction(2)), (total, n, l)
        # the balanced split loses strictly once fractional splits
        # (realized over two channel uses) are allowed
        for total in range(3, 9):
            half_splits = [Fraction(i, 2) for i in range(0, 2 * total + 1)]
            best = max(linear_sum_dof(m, x, total - x) for x in half_splits)
            even = linear_sum_dof(m, Fraction(total, 2), Fraction(total, 2))
            assert even < best, total


def test_criterion_8_numerics_property_suite():
    with criterion(8, "kernel property suite", 10.0):
        rng = np.random.default_rng(99)
        # partitioned-rank identity, exact integer equality, 200 instances
        checked = 0
        while checked < 200:
            rows = int(rng.integers(2, 7))
            cols = int(rng.integers(2, 7))
            r = int(rng.integers(1, min(rows, cols) + 1))
            mat = crand(rng, rows, r) @ crand(rng, r, cols)
            q = int(rng.integers(1, r + 1))
            if numerical_rank(mat[rows - q:, cols - q:]) < q:
                continue
            comp = schur_complement(mat, rows - q, cols - q)
            assert numerical_rank(mat) == q + rank_at_scale(comp, spectral_norm(mat))
            checked += 1
        # null-space residual bound and pseudo-inverse reconstruction
        for _ in range(50):
            mat = crand(rng, int(rng.integers(1, 6)), int(rng.integers(1, 8)))
            basis = null_space_basis(mat)
            if basis.shape[1]:
                assert spectral_norm(mat @ basis) <= (
                    DEFAULT_TOL.residual_rel_tol * spectral_norm(mat))
            pinv = pseudo_inverse(mat)
            assert spectral_norm(mat @ pinv @ mat - mat) <= (
                1e-9 * max(spectral_norm(mat), 1e-300))
        # determinism: identical runs produce bit-identical artifacts
        config = AntennaConfig(4, 2, 4)
        ch1, ch2 = sample_channel(config, 12345), sample_channel(config, 12345)
        assert write_channel(ch1) == write_channel(ch2)
        assert write_plan(build_plan(ch1, corner=1)) == write_plan(build_plan(ch2, corner=1))

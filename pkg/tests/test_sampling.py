from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from permconc.engines import subset_sum_without_replacement
from permconc.numerics import DiscreteDistribution, Interval, PreconditionError
from permconc.sampling import (
    BLOCK,
    ConstantSampler,
    DiscreteSampler,
    PermSumSampler,
    Rng,
    SubsetSumSampler,
    block_seed,
    draw_many,
    estimate_concentration_function,
    estimate_interval_mass,
    estimate_point_mass,
    mix64,
    run_blocks,
    sample_permutation,
    sample_permutations,
    sample_subset_sum,
    splitmix64,
)

CHI_LEVEL = 1e-6


def test_splitmix_reference_values():
    # first outputs of SplitMix64 seeded with 0, as published with the generator
    assert splitmix64(0, 1) == 0xE220A8397B1DCDAF
    assert splitmix64(0, 2) == 0x6E789E6AA1B965F4
    arr = mix64(np.array([0x9E3779B97F4A7C15], dtype=np.uint64))
    assert int(arr[0]) == 0xE220A8397B1DCDAF


def test_rng_lanes_are_independent_streams():
    a = Rng(42, lanes=3)
    b = Rng(42, lanes=3)
    assert np.array_equal(a.next(), b.next())
    x = a.next()
    assert len(set(x.tolist())) == 3


def test_uniform_range_and_random():
    r = Rng(1, lanes=1000)
    u = r.uniform(7)
    assert u.min() >= 0 and u.max() < 7
    f = r.random()
    assert ((f >= 0) & (f < 1)).all()


def test_permutation_identity_for_n1():
    assert sample_permutation(1, Rng(3)) == [0]


def test_permutations_are_permutations():
    p = sample_permutations(6, Rng(9, lanes=500))
    assert (np.sort(p, axis=1) == np.arange(6)).all()


def test_permutation_sampler_chi_square():
    rows = np.concatenate(run_blocks(lambda rng: sample_permutations(3, rng), 600_000, 2024))
    keys = rows[:, 0] * 9 + rows[:, 1] * 3 + rows[:, 2]
    _, counts = np.unique(keys, return_counts=True)
    assert len(counts) == 6
    assert chisquare(counts).pvalue > CHI_LEVEL
    # every cell within 5 sigma of 1/6
    sd = np.sqrt(600_000 * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - 100_000) < 5 * sd)


def test_uniform_chi_square_million():
    draws = np.concatenate(run_blocks(lambda rng: rng.uniform(10), 1_000_000, 77))
    counts = np.bincount(draws.astype(np.int64), minlength=10)
    assert chisquare(counts).pvalue > CHI_LEVEL


def test_determinism_and_thread_independence():
    s = PermSumSampler([1, -1, 0, 2], [1, 2, 3, 5])
    a = draw_many(s, 3 * BLOCK + 17, 5, threads=1)
    b = draw_many(s, 3 * BLOCK + 17, 5, threads=4)
    c = draw_many(s, 3 * BLOCK + 17, 5, threads=3)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert not np.array_equal(a, draw_many(s, 3 * BLOCK + 17, 6, threads=1))


def test_block_seeds_differ():
    assert len({block_seed(0, b) for b in range(1000)}) == 1000


def test_samples_must_be_positive():
    with pytest.raises(PreconditionError):
        estimate_point_mass([1, 0], [1, 2], 1, 0, 1)


def test_interval_mass_example():
    est = estimate_interval_mass([1, -1, 0], [1, 2, 3], Interval(1, 1), 100_000, 7)
    assert abs(est.estimate - 1 / 3) <= 3 * est.stderr


def test_point_mass_edges():
    full = estimate_interval_mass([1, -1, 0], [1, 2, 3], Interval(-100, 100), 5000, 1)
    assert full.estimate == 1 and full.stderr == 0
    off = estimate_point_mass([1, -1, 0], [1, 2, 3], Fraction(1, 2), 5000, 1)
    assert off.estimate == 0
    empty = estimate_interval_mass([1, -1, 0], [1, 2, 3], Interval(50, 60), 5000, 1)
    assert empty.estimate == 0


def test_subset_sampler_laws():
    assert sample_subset_sum([1, 2, 3], 3, "without", Rng(4)) == 6
    s = SubsetSumSampler([1, 2, 3], 2, "without")
    x = draw_many(s, 100_000, 3)
    counts = Counter(x.tolist())
    assert sorted(counts) == [3, 4, 5]
    assert chisquare([counts[3], counts[4], counts[5]]).pvalue > CHI_LEVEL
    s = SubsetSumSampler([0, 1], 2, "with")
    x = draw_many(s, 100_000, 3)
    c = np.bincount(x.astype(np.int64), minlength=3)
    assert chisquare(c, [25_000, 50_000, 25_000]).pvalue > CHI_LEVEL


def test_subset_sampler_rational_grid():
    A = [Fraction(1, 2), 1, Fraction(5, 2), 4]
    s = SubsetSumSampler(A, 2, "without")
    d = subset_sum_without_replacement(A, 2)
    x = draw_many(s, 60_000, 8)
    vals, counts = np.unique(x, return_counts=True)
    exp = [d.prob(s.grid.to_value(int(v))) * 60_000 for v in vals]
    assert chisquare(counts, [float(e) for e in exp]).pvalue > CHI_LEVEL


def test_concentration_estimator():
    d = DiscreteDistribution.uniform([3, 4, 5])
    est = estimate_concentration_function(DiscreteSampler(d), 1, 50_000, 12)
    assert abs(est.estimate - 2 / 3) <= 4 * est.stderr
    assert estimate_concentration_function(ConstantSampler(7), 0, 1000, 1).estimate == 1
    assert estimate_concentration_function(DiscreteSampler(d), 10, 1000, 1).estimate == 1
    with pytest.raises(PreconditionError):
        estimate_concentration_function(DiscreteSampler(d), -1, 1000, 1)


def test_discrete_sampler_chi_square():
    d = DiscreteDistribution.from_counts({0: 1, 1: 3, 5: 6})
    x = draw_many(DiscreteSampler(d), 200_000, 21)
    vals, counts = np.unique(x.astype(np.int64), return_counts=True)
    assert vals.tolist() == [0, 1, 5]
    assert chisquare(counts, [20_000, 60_000, 120_000]).pvalue > CHI_LEVEL


def test_large_n_sampler_runs():
    n = 1000
    w = [1, -1] + [0] * (n - 2)
    est = estimate_point_mass(w, list(range(1, n + 1)), 1, 20_000, 3)
    assert abs(est.estimate - 1 / n) <= 4 * max(est.stderr, 1e-4)

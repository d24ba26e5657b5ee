import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from permconc import bounds as B
from permconc.engines import max_point_mass
from permconc.numerics import PreconditionError

TIGHT = 1e-15


def test_directed_square_roots_bracket():
    for x in [2, 3, Fraction(1, 7), 10**6 + 1, Fraction(22, 7)]:
        lo, hi = B.sqrt_lower(x), B.sqrt_upper(x)
        assert lo * lo <= x <= hi * hi
        assert hi - lo <= Fraction(1, 2**60)
    assert B.sqrt_lower(9) == B.sqrt_upper(9) == 3


def test_log_upper_is_upper():
    for n in [2, 3, 10, 1000]:
        u = B.log_upper(n)
        assert u >= math.log(n) - 1e-15
        assert float(u) - math.log(n) < 1e-12


@given(st.fractions(min_value=-50, max_value=50, max_denominator=20),
       st.fractions(min_value=0, max_value=100, max_denominator=20))
def test_sqrt_times_rounding(c, q):
    lo = B.ceil_sqrt_times(c, q)
    hi = B.floor_sqrt_times(c, q)
    # lo is the least integer >= c*sqrt(q); hi the greatest integer <= it
    assert (lo - 1 < c * math.sqrt(q) + 1e-9) and (lo > c * math.sqrt(q) - 1e-9)
    assert hi <= lo and lo - hi <= 1


def test_delta_examples():
    assert B.delta([1, 2, 4]) == 1
    assert B.delta([3, 3, 5]) == 0
    assert B.delta([Fraction(1, 2), 2, Fraction(7, 2)]) == Fraction(3, 2)


def test_main_bound_example():
    rep = B.main_theorem_bound([0, 0, 1, 1], [1, 2, 3, 4], 0, 2, 2)
    assert rep.preconditions_ok
    exact = 1 / (4 * math.sqrt(2))
    assert rep.value >= Fraction(exact) - Fraction(1, 10**15)
    assert abs(float(rep.value) - exact) < TIGHT


def test_main_bound_point_specialization():
    w = [0, 1, 2, 3, 4, 5, 6]
    for i1, i2 in B.valid_index_pairs(w):
        rep = B.main_theorem_bound(w, w, 0, i1, i2)
        assert abs(float(rep.value) - 1 / ((i1 + i2) * math.sqrt(min(i1, i2)))) < TIGHT


def test_main_bound_zero_gap_fails():
    rep = B.main_theorem_bound([0, 1, 1, 1], [1, 2, 3, 4], 0, 2, 2)
    assert not rep.preconditions_ok
    assert rep.value == math.inf
    assert "w_gap>0" in rep.violations


def test_main_bound_repeated_v_fails():
    rep = B.main_theorem_bound([0, 1, 2], [1, 1, 2], 0, 1, 1)
    assert rep.violations == ["delta(v)>0"]


def test_optimize_constant_w_errors():
    with pytest.raises(PreconditionError, match="no valid"):
        B.optimize_indices([2, 2, 2], [1, 2, 3], 0)


def test_optimize_single_one():
    w = [0, 0, 0, 0, 0, 1]
    i1, i2, rep = B.optimize_indices(w, list(range(1, 7)), 0)
    brute = min((B.main_theorem_bound(w, list(range(1, 7)), 0, a, b).value, a, b)
                for a, b in B.valid_index_pairs(w))
    assert (rep.value, i1, i2) == brute
    assert i2 == 1


def test_optimize_distinct_eight():
    w = list(range(1, 9))
    assert len(B.valid_index_pairs(w)) == 28
    i1, i2, rep = B.optimize_indices(w, w, 0)
    assert (i1, i2) == (4, 4)
    assert rep.value == Fraction(1, 16)


def test_repetition_bound():
    w = [1, 1, 2, 3, 4, 5, 6, 7, 8]
    rep = B.repetition_corollary_bound(w, range(1, 10), Fraction(1, 3))
    assert rep.value == Fraction(1, 9)
    rep = B.repetition_corollary_bound([1, 2, 3, 4], [1, 2, 3, 4], Fraction(3, 4))
    assert rep.value == Fraction(1, 6)


def test_repetition_bound_preconditions():
    assert not B.repetition_corollary_bound([5, 5, 5], [1, 2, 3], Fraction(1, 3)).preconditions_ok
    # eps = 1 leaves room for no value at all, so even distinct w fails
    rep = B.repetition_corollary_bound([1, 2, 3, 4], [1, 2, 3, 4], 1)
    assert not rep.preconditions_ok
    assert not B.repetition_corollary_bound([1, 2, 3], [1, 1, 3], Fraction(1, 3)).preconditions_ok


def test_sigma_bound():
    assert B.sigma_corollary_bound([0, 1, 5], [1, 2, 3], 0).value == Fraction(1, 3)
    rep = B.sigma_corollary_bound([-1, 0, 0, 1], [1, 2, 3, 4], 1)
    exact = math.sqrt(math.log(4)) / (4 * math.sqrt(2)) + 0.25
    assert rep.value >= Fraction(exact) - Fraction(1, 10**14)
    assert abs(float(rep.value) - exact) < TIGHT
    bad = B.sigma_corollary_bound([0, 0, 0], [1, 2, 3], 1)
    assert bad.violations == ["sigma>0"] and bad.value == math.inf


def test_pawlowski_examples():
    r = B.pawlowski_check([1, -1, 0], [1, 2, 3])
    assert (r.bound, r.max_mass, r.satisfied) == (Fraction(1, 3), Fraction(1, 3), True)
    r = B.pawlowski_check([1, -1, 0, 0], [1, 2, 3, 4])
    assert r.bound == Fraction(1, 3) and r.satisfied
    with pytest.raises(PreconditionError):
        B.pawlowski_check([1, 1, 1], [1, 2, 3])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=6).filter(lambda w: len(set(w)) > 1),
       st.integers(-3, 3).filter(bool), st.integers(-5, 5), st.integers(-5, 5))
def test_pawlowski_invariance(w, lam, c, d):
    v = list(range(1, len(w) + 1))
    base = B.pawlowski_check(w, v)
    moved = B.pawlowski_check([lam * x + c for x in w], [y + d for y in v])
    assert (base.satisfied, base.max_mass) == (moved.satisfied, moved.max_mass)


def test_subset_lemma_bounds():
    assert B.subset_lemma_bound(100, 25, "with").value == Fraction(1, 500)
    assert B.subset_lemma_bound(10, 9, "without").value == Fraction(1, 10)
    assert B.subset_lemma_bound(7, 1, "with").value == Fraction(1, 7)
    assert not B.subset_lemma_bound(10, 10, "without").preconditions_ok
    with pytest.raises(PreconditionError):
        B.subset_lemma_bound(10, 2, "sideways")


def test_center_and_normalize():
    sc = B.center_and_normalize([1, -1, 0])
    assert sc.shift == 0 and sc.norm2 == 2
    with pytest.raises(PreconditionError):
        B.center_and_normalize([3, 3])


def test_decay_window_exact_edges():
    sc = B.center_and_normalize([1, -1, 0])
    # |y / sqrt 2| <= 1  <=>  |y| <= 1.414..., grid scale 1
    assert B.decay_window(sc, 3, 0, 1) == (-1, 1)


def test_soze_profile_far_L_is_zero():
    prof, _ = B.soze_decay_profile([1, -1, 0], 3, [0, 5], 5000, 3)
    assert prof[1][1].estimate == 0


def test_soze_profile_small_exact():
    # centered unit w = (1,-1,0)/sqrt2, v = (1,2,3): |w.v| <= 1 iff raw sum in {-1, 1}
    prof, _ = B.soze_decay_profile([1, -1, 0], 3, [0], 20000, 11)
    est = prof[0][1]
    exact = 2 / 3
    assert abs(est.estimate - exact) <= 3 * est.stderr


def test_main_bound_dominates_exact_small():
    w, v = [0, 0, 1, 1], [1, 2, 3, 4]
    mass, _ = max_point_mass(w, v)
    _, _, rep = B.optimize_indices(w, v, 0)
    assert mass <= 4 * rep.value

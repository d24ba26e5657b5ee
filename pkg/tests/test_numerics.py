from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from permconc.numerics import (
    DiscreteDistribution,
    GridEmbedding,
    Interval,
    PreconditionError,
    RationalVector,
    concentration_function,
    embed,
    prob_mass,
    to_fraction,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_to_fraction_accepts_strings_and_ints():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(-2) == Fraction(-2)
    assert to_fraction(" -1/6 ") == Fraction(-1, 6)


def test_vector_rejects_empty():
    with pytest.raises(PreconditionError):
        RationalVector([])


def test_vector_predicates():
    v = RationalVector([3, 1, 2])
    assert v.sorted().coords == (1, 2, 3)
    assert not v.is_increasing()
    assert v.is_distinct()
    assert RationalVector([2, 2]).is_constant()
    assert v.total() == 6


@given(st.lists(rationals, min_size=1, max_size=8))
def test_embedding_round_trips(xs):
    g = embed(xs)
    assert all(isinstance(c, int) for c in g.values)
    assert list(g.reconstruct().coords) == xs


def test_embedding_scale_is_lcm():
    g = embed([Fraction(1, 2), Fraction(1, 3), 1])
    assert g.scale == 6
    assert g.values == (3, 2, 6)


def test_interval_rejects_reversed():
    with pytest.raises(PreconditionError):
        Interval(2, 1)


def test_interval_grid_bounds_round_inwards():
    grid = GridEmbedding(3)
    lo, hi = Interval(Fraction(1, 2), Fraction(5, 4)).grid_bounds(grid)
    assert (lo, hi) == (2, 3)


def test_distribution_rejects_empty_support():
    with pytest.raises(PreconditionError):
        DiscreteDistribution((), (), 0, GridEmbedding(1))


def test_prob_mass_and_point_mass():
    d = DiscreteDistribution.uniform([1, 2, 2, 5])
    assert prob_mass(d, Interval.point(2)) == Fraction(1, 2)
    assert prob_mass(d, Interval(Fraction(3, 2), 5)) == Fraction(3, 4)
    assert prob_mass(d, Interval(6, 7)) == 0
    assert d.max_point_mass() == (Fraction(1, 2), 2)


def test_max_point_mass_tie_breaks_to_smallest():
    d = DiscreteDistribution.uniform([4, 1])
    assert d.max_point_mass() == (Fraction(1, 2), 1)


def test_prob_mass_grid_mismatch():
    d = DiscreteDistribution.uniform([1, 2])
    with pytest.raises(PreconditionError):
        prob_mass(d, Interval.point(1), GridEmbedding(7))


def test_concentration_function_examples():
    d = DiscreteDistribution.uniform([3, 4, 5])
    assert concentration_function(d, 0) == Fraction(1, 3)
    assert concentration_function(d, 1) == Fraction(2, 3)
    assert concentration_function(d, 2) == 1
    with pytest.raises(PreconditionError):
        concentration_function(d, -1)


def _q_brute(values, t):
    return max(Fraction(sum(1 for y in values if x <= y <= x + t), len(values)) for x in values)


@given(st.lists(rationals, min_size=1, max_size=10), st.fractions(min_value=0, max_value=10, max_denominator=6))
def test_concentration_function_matches_brute_force(values, t):
    d = DiscreteDistribution.uniform(values)
    assert concentration_function(d, t) == _q_brute(values, t)


@given(st.lists(rationals, min_size=1, max_size=8),
       st.fractions(min_value=0, max_value=5, max_denominator=4),
       st.fractions(min_value=0, max_value=5, max_denominator=4))
def test_concentration_function_monotone_in_t(values, t1, t2):
    d = DiscreteDistribution.uniform(values)
    lo, hi = sorted((t1, t2))
    assert concentration_function(d, lo) <= concentration_function(d, hi)


def test_map_values_reflects_and_shifts():
    d = DiscreteDistribution.uniform([1, 2, 2])
    r = d.map_values(-1, 3)
    assert r.as_dict() == {Fraction(1): Fraction(2, 3), Fraction(2): Fraction(1, 3)}

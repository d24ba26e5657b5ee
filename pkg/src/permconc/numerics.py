"""Exact rational vectors, integer-grid embeddings and finite distributions.

Everything here is exact: coordinates are ``Fraction`` objects, distributions
carry Python-int counts, and probabilities come back as ``Fraction``.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction, str]


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class CapExceededError(RuntimeError):
    """An exact request is larger than the configured cap."""


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # floats are accepted only when they are exactly what they look like
        if not math.isfinite(x):
            raise PreconditionError(f"non-finite coordinate {x!r}")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class RationalVector:
    coords: tuple

    def __init__(self, coords: Iterable[Rational]):
        cs = tuple(to_fraction(c) for c in coords)
        if not cs:
            raise PreconditionError("vector must be nonempty")
        object.__setattr__(self, "coords", cs)

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def sorted(self) -> "RationalVector":
        return RationalVector(sorted(self.coords))

    def is_increasing(self) -> bool:
        return all(a <= b for a, b in zip(self.coords, self.coords[1:]))

    def is_distinct(self) -> bool:
        return len(set(self.coords)) == len(self.coords)

    def is_constant(self) -> bool:
        return len(set(self.coords)) == 1

    def total(self) -> Fraction:
        return sum(self.coords, Fraction(0))

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coords)


def as_vector(x) -> RationalVector:
    return x if isinstance(x, RationalVector) else RationalVector(x)


@dataclass(frozen=True)
class GridEmbedding:
    """Integer grid: original value = (grid value + offset) / scale."""

    scale: int
    offset: int = 0
    values: tuple = ()

    def __post_init__(self):
        if self.scale <= 0:
            raise PreconditionError("grid scale must be positive")

    def to_value(self, g: int) -> Fraction:
        return Fraction(g + self.offset, self.scale)

    def reconstruct(self) -> RationalVector:
        return RationalVector(self.to_value(g) for g in self.values)

    def floor_grid(self, x) -> int:
        """Largest grid integer whose value is <= x."""
        return math.floor(to_fraction(x) * self.scale) - self.offset

    def ceil_grid(self, x) -> int:
        """Smallest grid integer whose value is >= x."""
        return math.ceil(to_fraction(x) * self.scale) - self.offset


def embed(v) -> GridEmbedding:
    v = as_vector(v)
    scale = math.lcm(*(c.denominator for c in v))
    return GridEmbedding(scale=scale, offset=0,
                         values=tuple(int(c * scale) for c in v))


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __init__(self, lo: Rational, hi: Rational):
        lo, hi = to_fraction(lo), to_fraction(hi)
        if lo > hi:
            raise PreconditionError(f"interval [{lo}, {hi}] has lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: Rational) -> "Interval":
        return cls(x, x)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def grid_bounds(self, grid: GridEmbedding) -> tuple[int, int]:
        """Inclusive grid-integer range covering exactly the points of the interval."""
        return grid.ceil_grid(self.lo), grid.floor_grid(self.hi)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Exact law on grid points: P(value = grid.to_value(support[i])) = counts[i] / total."""

    support: tuple
    counts: tuple
    total: int
    grid: GridEmbedding = field(default_factory=lambda: GridEmbedding(1))

    def __post_init__(self):
        if not self.support:
            raise PreconditionError("empty-support distributions are not representable")
        if len(self.support) != len(self.counts):
            raise PreconditionError("support and counts differ in length")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise PreconditionError("support must be strictly increasing")
        if any(c <= 0 for c in self.counts):
            raise PreconditionError("counts must be positive")
        if sum(self.counts) != self.total:
            raise PreconditionError("counts do not sum to total")

    @classmethod
    def from_counts(cls, counts: dict, grid: GridEmbedding | None = None,
                    total: int | None = None) -> "DiscreteDistribution":
        items = sorted((int(x), int(c)) for x, c in counts.items() if c)
        support = tuple(x for x, _ in items)
        cs = tuple(c for _, c in items)
        s = sum(cs)
        if total is not None and total != s:
            raise PreconditionError(f"counts sum to {s}, expected {total}")
        return cls(support, cs, s, grid or GridEmbedding(1))

    @classmethod
    def from_dense(cls, lo: int, counts, grid: GridEmbedding | None = None) -> "DiscreteDistribution":
        """Build from a dense count array whose entry j sits at grid point lo + j."""
        support, cs = [], []
        for j, c in enumerate(counts):
            c = int(c)
            if c:
                support.append(lo + j)
                cs.append(c)
        return cls(tuple(support), tuple(cs), sum(cs), grid or GridEmbedding(1))

    @classmethod
    def uniform(cls, values: Sequence[Rational]) -> "DiscreteDistribution":
        g = embed(values)
        counts: dict[int, int] = {}
        for x in g.values:
            counts[x] = counts.get(x, 0) + 1
        return cls.from_counts(counts, GridEmbedding(g.scale))

    def values(self) -> list[Fraction]:
        return [self.grid.to_value(x) for x in self.support]

    def probabilities(self) -> list[Fraction]:
        return [Fraction(c, self.total) for c in self.counts]

    def as_dict(self) -> dict[Fraction, Fraction]:
        return dict(zip(self.values(), self.probabilities()))

    def prob(self, x) -> Fraction:
        return prob_mass(self, Interval.point(x))

    def diameter(self) -> Fraction:
        return self.grid.to_value(self.support[-1]) - self.grid.to_value(self.support[0])

    def max_point_mass(self) -> tuple[Fraction, Fraction]:
        """(max_x P(X = x), smallest x attaining it)."""
        best = max(self.counts)
        i = self.counts.index(best)
        return Fraction(best, self.total), self.grid.to_value(self.support[i])

    def map_values(self, sign: int, shift_grid: int = 0) -> "DiscreteDistribution":
        """Law of sign * X + shift (shift given in grid units, offset kept)."""
        if sign not in (1, -1):
            raise ValueError("sign must be +-1")
        if sign == 1:
            return DiscreteDistribution(tuple(x + shift_grid for x in self.support),
                                        self.counts, self.total, self.grid)
        if self.grid.offset:
            raise ValueError("reflection requires a zero-offset grid")
        return DiscreteDistribution(tuple(shift_grid - x for x in reversed(self.support)),
                                    tuple(reversed(self.counts)), self.total, self.grid)

    def same_law(self, other: "DiscreteDistribution") -> bool:
        return self.as_dict() == other.as_dict()


def _check_grid(d: DiscreteDistribution, grid: GridEmbedding | None):
    if grid is not None and (grid.scale, grid.offset) != (d.grid.scale, d.grid.offset):
        raise PreconditionError("interval grid does not match the distribution's grid")


def prob_mass(d: DiscreteDistribution, interval: Interval, grid: GridEmbedding | None = None) -> Fraction:
    """Exact P(X in [lo, hi]).

    ``grid`` may be passed to assert that the caller expressed the interval in
    the same value space the distribution lives on.
    """
    _check_grid(d, grid)
    lo, hi = interval.grid_bounds(d.grid)
    if lo > hi:
        return Fraction(0)
    i, j = bisect_left(d.support, lo), bisect_right(d.support, hi)
    return Fraction(sum(d.counts[i:j]), d.total)


def concentration_function(d: DiscreteDistribution, t) -> Fraction:
    """Q(X, t): the largest mass on a closed interval of length t.

    Any interval can be slid right until its left end hits a support point
    without losing mass, so windows [x, x + t] anchored at support points
    suffice. Two pointers over the sorted support give O(|support|).
    """
    t = to_fraction(t)
    if t < 0:
        raise PreconditionError("interval length must be nonnegative")
    width = math.floor(t * d.grid.scale)
    sup, cnt = d.support, d.counts
    best = run = 0
    j = 0
    for i in range(len(sup)):
        if j < i:
            j, run = i, 0
        while j < len(sup) and sup[j] - sup[i] <= width:
            run += cnt[j]
            j += 1
        best = max(best, run)
        run -= cnt[i]
    return Fraction(best, d.total)

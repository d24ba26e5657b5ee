"""Exact laws of permutation sums, subset sums and Rademacher sums.

All engines work on integer grids and keep counts as Python ints, so the
returned distributions are exact regardless of size.  Dense numpy arrays
(object dtype) are used for the convolutions when the sum range is small
enough; otherwise a sparse dict is used.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from typing import Iterator

import numpy as np

from .numerics import (
    CapExceededError,
    DiscreteDistribution,
    GridEmbedding,
    Interval,
    PreconditionError,
    as_vector,
    embed,
    prob_mass,
    to_fraction,
)

DEFAULT_CAP = 12
DENSE_RANGE_LIMIT = 2_000_000


def _shift_add(acc: np.ndarray, src: np.ndarray, shift: int, mult: int = 1):
    """acc[j + shift] += mult * src[j] for every j in range."""
    if mult == 1:
        acc[shift:shift + len(src)] += src
    else:
        acc[shift:shift + len(src)] += src * mult


def _perm_counts(wg: tuple, vg: tuple) -> tuple[int, dict | np.ndarray]:
    """Counts of value-assignments of w's multiset to v's positions, by sum.

    DP over positions of v; the state is the multiplicity vector of the
    w-values still unassigned, so repeated w-values never branch twice.
    Returns (lo, dense array) or (None, dict).
    """
    mult = Counter(wg)
    vals = sorted(mult)
    m0 = tuple(mult[x] for x in vals)
    lo = sum(min(x * y for x in vals) for y in vg)
    hi = sum(max(x * y for x in vals) for y in vg)
    dense = hi - lo + 1 <= DENSE_RANGE_LIMIT

    # states keyed by remaining multiplicities; values are partial sums (offset lo_i)
    if dense:
        layer = {m0: (0, np.array([1], dtype=object))}
    else:
        layer = {m0: {0: 1}}
    for y in vg:
        nxt: dict = {}
        for state, dist in layer.items():
            for idx, x in enumerate(vals):
                if state[idx] == 0:
                    continue
                ns = state[:idx] + (state[idx] - 1,) + state[idx + 1:]
                step = x * y
                if dense:
                    base, arr = dist
                    nb = base + step
                    if ns in nxt:
                        ob, oarr = nxt[ns]
                        new_lo = min(ob, nb)
                        new_hi = max(ob + len(oarr), nb + len(arr))
                        if new_lo != ob or new_hi != ob + len(oarr):
                            grown = np.zeros(new_hi - new_lo, dtype=object)
                            _shift_add(grown, oarr, ob - new_lo)
                            oarr, ob = grown, new_lo
                        _shift_add(oarr, arr, nb - ob)
                        nxt[ns] = (ob, oarr)
                    else:
                        nxt[ns] = (nb, arr.copy())
                else:
                    tgt = nxt.setdefault(ns, {})
                    for s, c in dist.items():
                        tgt[s + step] = tgt.get(s + step, 0) + c
        layer = nxt
    (final,) = layer.values()
    if dense:
        return final
    return None, final


def perm_sum_distribution(w, v, cap: int = DEFAULT_CAP) -> DiscreteDistribution:
    """Exact law of sum_i w_i v_pi(i) for pi uniform on S_n (total n!)."""
    w, v = as_vector(w), as_vector(v)
    if w.n != v.n:
        raise PreconditionError(f"length mismatch: len(w)={w.n}, len(v)={v.n}")
    if w.n > cap:
        raise CapExceededError(f"n={w.n} exceeds exact cap {cap}; use Monte Carlo")
    gw, gv = embed(w), embed(v)
    grid = GridEmbedding(gw.scale * gv.scale)
    lo, res = _perm_counts(gw.values, gv.values)
    weight = math.prod(math.factorial(m) for m in Counter(gw.values).values())
    if lo is None:
        counts = {s: c * weight for s, c in res.items()}
        return DiscreteDistribution.from_counts(counts, grid, total=math.factorial(w.n))
    d = DiscreteDistribution.from_dense(lo, res * weight, grid)
    assert d.total == math.factorial(w.n)
    return d


def point_mass(w, v, x, cap: int = DEFAULT_CAP) -> Fraction:
    d = perm_sum_distribution(w, v, cap)
    return prob_mass(d, Interval.point(x))


def max_point_mass(w, v, cap: int = DEFAULT_CAP) -> tuple[Fraction, Fraction]:
    """(max_x P(w_pi . v = x), smallest maximizing x)."""
    return perm_sum_distribution(w, v, cap).max_point_mass()


def _require_distinct(a, what="A"):
    if not a.is_distinct():
        raise PreconditionError(f"coordinates of {what} must be pairwise distinct")


def with_replacement_counts(A) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (lo, dense counts) of k iid uniform draws from A, for k = 1, 2, ..."""
    A = as_vector(A)
    g = embed(A).values
    amin = min(g)
    offsets = [x - amin for x in g]
    span = max(offsets)
    cur = np.zeros(span + 1, dtype=object)
    for o in offsets:
        cur[o] += 1
    k = 1
    while True:
        yield k * amin, cur
        nxt = np.zeros(len(cur) + span, dtype=object)
        for o in offsets:
            _shift_add(nxt, cur, o)
        cur = nxt
        k += 1


def subset_sum_with_replacement(A, k: int) -> DiscreteDistribution:
    """Exact law of the sum of k iid uniform draws from A (total n^k)."""
    A = as_vector(A)
    _require_distinct(A)
    if k < 1:
        raise PreconditionError("k must be >= 1")
    grid = GridEmbedding(embed(A).scale)
    g = embed(A).values
    if max(g) - min(g) > DENSE_RANGE_LIMIT // max(k, 1):
        dist = {0: 1}
        for _ in range(k):
            nd: dict = {}
            for s, c in dist.items():
                for x in g:
                    nd[s + x] = nd.get(s + x, 0) + c
            dist = nd
        return DiscreteDistribution.from_counts(dist, grid, total=A.n ** k)
    for kk, (lo, arr) in enumerate(with_replacement_counts(A), start=1):
        if kk == k:
            return DiscreteDistribution.from_dense(lo, arr, grid)


def without_replacement_table(A, kmax: int | None = None) -> tuple[int, np.ndarray]:
    """DP table T[j, s - lo]: number of j-subsets of A with grid sum s, j <= kmax.

    Columns span only the sums reachable with at most kmax elements; ``lo``
    is the smallest of them.
    """
    A = as_vector(A)
    g = embed(A).values
    n = len(g)
    kmax = n if kmax is None else kmax
    srt = sorted(g)
    lo = sum(x for x in srt[:kmax] if x < 0)
    hi = sum(x for x in srt[n - kmax:] if x > 0) if kmax else 0
    T = np.zeros((kmax + 1, hi - lo + 1), dtype=object)
    T[0, -lo] = 1
    if kmax == 0:
        return lo, T
    W = T.shape[1]
    for x in g:
        if x >= 0:
            if x < W:
                T[1:, x:] += T[:-1, :W - x].copy()
        elif -x < W:
            T[1:, :W + x] += T[:-1, -x:].copy()
    return lo, T


def subset_sum_without_replacement(A, k: int) -> DiscreteDistribution:
    """Exact law of the sum of a uniform k-subset of A (total C(n, k))."""
    A = as_vector(A)
    _require_distinct(A)
    if not 0 <= k <= A.n:
        raise PreconditionError(f"k={k} out of range 0..{A.n}")
    grid = GridEmbedding(embed(A).scale)
    g = embed(A).values
    if max(g) - min(g) > DENSE_RANGE_LIMIT // max(A.n, 1):
        layers = [dict() for _ in range(k + 1)]
        layers[0][0] = 1
        for x in g:
            for j in range(k, 0, -1):
                for s, c in layers[j - 1].items():
                    layers[j][s + x] = layers[j].get(s + x, 0) + c
        return DiscreteDistribution.from_counts(layers[k], grid, total=math.comb(A.n, k))
    lo, T = without_replacement_table(A, k)
    d = DiscreteDistribution.from_dense(lo, T[k], grid)
    assert d.total == math.comb(A.n, k)
    return d


def rademacher_sum_distribution(v) -> DiscreteDistribution:
    """Exact law of sum_i xi_i v_i with xi_i iid uniform on {-1, +1} (total 2^n)."""
    v = as_vector(v)
    g = embed(v).values
    grid = GridEmbedding(embed(v).scale)
    span = sum(abs(x) for x in g)
    if 2 * span + 1 > DENSE_RANGE_LIMIT:
        dist = {0: 1}
        for x in g:
            nd: dict = {}
            for s, c in dist.items():
                nd[s + x] = nd.get(s + x, 0) + c
                nd[s - x] = nd.get(s - x, 0) + c
            dist = nd
        return DiscreteDistribution.from_counts(dist, grid)
    arr = np.zeros(2 * span + 1, dtype=object)
    arr[span] = 1
    for x in g:
        x = abs(x)
        nxt = np.zeros_like(arr)
        if x == 0:
            nxt = arr * 2
        else:
            nxt[x:] += arr[:len(arr) - x]
            nxt[:len(arr) - x] += arr[x:]
        arr = nxt
    return DiscreteDistribution.from_dense(-span, arr, grid)


def perm_sum_value(w, v, perm) -> Fraction:
    """sum_i w_i v_perm(i) in exact arithmetic."""
    return sum((to_fraction(w[i]) * to_fraction(v[p]) for i, p in enumerate(perm)), Fraction(0))

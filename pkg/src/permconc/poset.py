"""Dominance order on k-subsets, its width two ways, and the covering-step gap.

Orientation: ``U <= V`` iff the i-th smallest element of U is at most the
i-th smallest element of V for every i; equivalently
``|U & (-inf, x]| >= |V & (-inf, x]|`` for every x.  Along this order the
subsets tracked by :class:`AssignmentContext` are the positions receiving
the upper block B, so moving up the order moves large w-values onto larger
v-values and S increases.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .bounds import delta
from .engines import without_replacement_table
from .numerics import CapExceededError, Interval, PreconditionError, as_vector

ORACLE_CAP = 500


def dominance_leq(U, V) -> bool:
    """Sorted U is coordinatewise <= sorted V."""
    if len(U) != len(V):
        raise PreconditionError("subsets must have equal size")
    return all(a <= b for a, b in zip(sorted(U), sorted(V)))


def dominance_leq_prefix(U, V) -> bool:
    """Same order through prefix counts: |U & (-inf, x]| >= |V & (-inf, x]| for all x."""
    if len(U) != len(V):
        raise PreconditionError("subsets must have equal size")
    su, sv = set(U), set(V)
    cu = cv = 0
    for x in sorted(su | sv):
        cu += x in su
        cv += x in sv
        if cu < cv:
            return False
    return True


class DominancePoset:
    """All k-subsets of {1..n} (or of a given ground set) under dominance."""

    def __init__(self, n: int, k: int, ground=None):
        if ground is None:
            ground = range(1, n + 1)
        ground = sorted(ground)
        if len(set(ground)) != len(ground):
            raise PreconditionError("ground set must be distinct")
        if not 0 <= k <= len(ground):
            raise PreconditionError(f"k={k} out of range 0..{len(ground)}")
        self.ground = tuple(ground)
        self.n, self.k = len(ground), k
        self.elements = list(itertools.combinations(self.ground, k))

    def __len__(self):
        return len(self.elements)

    def leq_matrix(self, elements=None) -> np.ndarray:
        return _leq_matrix(self.elements if elements is None else elements, self.k)


def _leq_matrix(elements, k: int) -> np.ndarray:
    m = len(elements)
    if k == 0:
        return np.ones((m, m), dtype=bool)
    E = np.array([sorted(e) for e in elements], dtype=object if _needs_object(elements) else np.int64)
    E = E.reshape(m, k)
    out = np.empty((m, m), dtype=bool)
    for i in range(m):
        out[i] = (E[i] <= E).all(axis=1)
    return out


def _needs_object(elements) -> bool:
    return any(not isinstance(x, (int, np.integer)) for e in elements for x in e)


def stanley_width(n: int, k: int) -> int:
    """Largest number of k-subsets of {1..n} sharing one sum.

    This is the largest coefficient of the Gaussian binomial [n choose k]_q.
    """
    if not 0 <= k <= n:
        raise PreconditionError(f"k={k} out of range 0..{n}")
    k = min(k, n - k)  # complements: k-subsets with sum t <-> (n-k)-subsets with sum n(n+1)/2 - t
    if k == 0:
        return 1
    _, T = without_replacement_table(list(range(1, n + 1)), k)
    return int(max(T[k]))


def equal_sum_count(ground, k: int) -> int:
    """Largest number of k-subsets of ``ground`` sharing one sum."""
    ground = as_vector(ground)
    if not 0 <= k <= ground.n:
        raise PreconditionError(f"k={k} out of range 0..{ground.n}")
    _, T = without_replacement_table(ground, k)
    return int(max(T[k]))


def _matching(strict: np.ndarray) -> np.ndarray:
    """Maximum matching on the comparability bipartite graph; row -> col or -1."""
    if strict.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return maximum_bipartite_matching(csr_matrix(strict.astype(np.int8)), perm_type="column")


def _min_chain_cover(leq: np.ndarray) -> list[list[int]]:
    """Dilworth/Konig: chains from a maximum matching on strict comparabilities."""
    m = leq.shape[0]
    strict = leq & ~np.eye(m, dtype=bool)
    succ = _matching(strict)
    has_pred = np.zeros(m, dtype=bool)
    for i, j in enumerate(succ):
        if j >= 0:
            has_pred[j] = True
    chains = []
    for i in range(m):
        if has_pred[i]:
            continue
        chain = [i]
        while succ[chain[-1]] >= 0:
            chain.append(int(succ[chain[-1]]))
        chains.append(chain)
    return chains


def dilworth_width_oracle(n: int, k: int, cap: int = ORACLE_CAP, ground=None) -> int:
    """Width of the dominance poset via minimum chain cover (|P| - max matching)."""
    if not 0 <= k <= n:
        raise PreconditionError(f"k={k} out of range 0..{n}")
    size = math.comb(n, k)
    if size > cap:
        raise CapExceededError(f"C({n},{k})={size} exceeds oracle cap {cap}")
    P = DominancePoset(n, k, ground)
    leq = P.leq_matrix()
    matched = int((_matching(leq & ~np.eye(len(P), dtype=bool)) >= 0).sum())
    return len(P) - matched


@dataclass(frozen=True)
class WidthCertificate:
    n: int
    k: int
    stanley_width: int
    dilworth_width: int | None
    agree: bool | None

    def rows(self):
        return [("n", str(self.n)), ("k", str(self.k)),
                ("stanley_width", str(self.stanley_width)),
                ("dilworth_width", "" if self.dilworth_width is None else str(self.dilworth_width)),
                ("agree", "" if self.agree is None else str(self.agree).lower())]


def width_certificate(n: int, k: int, oracle: bool = True, cap: int = ORACLE_CAP) -> WidthCertificate:
    s = stanley_width(n, k)
    if not oracle:
        return WidthCertificate(n, k, s, None, None)
    d = dilworth_width_oracle(n, k, cap)
    return WidthCertificate(n, k, s, d, s == d)


# -- the permutation construction behind the covering-step gap --------------------

@dataclass(frozen=True)
class AssignmentContext:
    """Partial permutation: free indices fixed, blocks A and B ordered.

    ``w``/``v`` are increasing; ``A = {i : w_i < t1}``, ``B = {i : w_i >= t2}``
    (1-based indices).  ``fixed`` maps each index outside A and B to its
    position; ``order_A``/``order_B`` give the relative order of positions
    inside each block.  The free positions X receive A and B; a subset
    U of X with |U| = |B| settles the rest: B fills U in order_B, A fills
    X \\ U in order_A.
    """

    w: tuple
    v: tuple
    t1: Fraction
    t2: Fraction
    fixed: dict
    order_A: tuple
    order_B: tuple

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def A(self) -> tuple:
        return tuple(i for i in range(1, self.n + 1) if self.w[i - 1] < self.t1)

    @property
    def B(self) -> tuple:
        return tuple(i for i in range(1, self.n + 1) if self.w[i - 1] >= self.t2)

    @property
    def X(self) -> tuple:
        used = set(self.fixed.values())
        return tuple(p for p in range(1, self.n + 1) if p not in used)

    @property
    def delta_gap(self) -> Fraction:
        return delta(self.v) * (self.t2 - self.t1)

    def validate(self):
        w, v = as_vector(self.w), as_vector(self.v)
        if w.n != v.n:
            raise PreconditionError("length mismatch")
        if not (w.is_increasing() and v.is_increasing()):
            raise PreconditionError("w and v must be increasing")
        if delta(v) <= 0:
            raise PreconditionError("delta(v) must be positive")
        if not self.t1 < self.t2:
            raise PreconditionError("t1 < t2 required")
        A, B = set(self.A), set(self.B)
        rest = set(range(1, self.n + 1)) - A - B
        if set(self.fixed) != rest:
            raise PreconditionError("fixed must cover exactly the indices outside A and B")
        if len(set(self.fixed.values())) != len(self.fixed) or \
                not set(self.fixed.values()) <= set(range(1, self.n + 1)):
            raise PreconditionError("fixed positions must be distinct and in range")
        if sorted(self.order_A) != sorted(A) or sorted(self.order_B) != sorted(B):
            raise PreconditionError("order_A/order_B must list the blocks A/B")

    def permutation(self, U) -> dict:
        """Index -> position for the choice sigma(B) = U."""
        X = self.X
        U = sorted(U)
        if len(U) != len(self.order_B) or not set(U) <= set(X):
            raise PreconditionError("U must be a |B|-subset of the free positions")
        rest = [p for p in X if p not in set(U)]
        sigma = dict(self.fixed)
        sigma.update(zip(self.order_B, U))
        sigma.update(zip(self.order_A, rest))
        return sigma

    def S(self, U) -> Fraction:
        """sum_i w_i v_sigma(i)."""
        sigma = self.permutation(U)
        return sum((self.w[i - 1] * self.v[p - 1] for i, p in sigma.items()), Fraction(0))

    def subsets(self):
        return list(itertools.combinations(self.X, len(self.order_B)))


def make_context(w, v, t1, t2, fixed, order_A=None, order_B=None) -> AssignmentContext:
    w, v = as_vector(w), as_vector(v)
    ctx = AssignmentContext(w.coords, v.coords, Fraction(t1), Fraction(t2), dict(fixed),
                            (), ())
    oa = tuple(order_A) if order_A is not None else ctx.A
    ob = tuple(order_B) if order_B is not None else ctx.B
    ctx = AssignmentContext(w.coords, v.coords, Fraction(t1), Fraction(t2), dict(fixed), oa, ob)
    ctx.validate()
    return ctx


def is_covering_pair(ctx: AssignmentContext, U, V) -> bool:
    """V is U with one element moved to the next free position above it."""
    su, sv = set(U), set(V)
    if len(su) != len(sv) or len(su - sv) != 1:
        return False
    (x,) = su - sv
    (y,) = sv - su
    X = ctx.X
    if x not in X or y not in X:
        return False
    i = X.index(x)
    return i + 1 < len(X) and X[i + 1] == y


def covering_step_gap(ctx: AssignmentContext, U, V) -> Fraction:
    """S(V) - S(U) for a covering pair U < V, from the explicit permutations."""
    if not is_covering_pair(ctx, U, V):
        raise PreconditionError("U, V is not a covering pair of the dominance order on X")
    return ctx.S(V) - ctx.S(U)


def random_context(rng: random.Random, n: int, value_range: int = 6) -> AssignmentContext:
    """A random valid context with nonempty A and B."""
    while True:
        w = sorted(rng.randint(-value_range, value_range) for _ in range(n))
        if w[0] < w[-1]:
            break
    v = sorted(rng.sample(range(-3 * n, 3 * n + 1), n))
    if rng.random() < 0.5:
        v = [Fraction(x, rng.randint(1, 4)) for x in v]
        v = sorted(set(v))
        while len(v) < n:
            v.append(v[-1] + Fraction(1, 3))
    lo, hi = w[0], w[-1]
    # thresholds t1 < t2 with lo < t1 and t2 <= hi so A and B are nonempty
    a = Fraction(rng.randint(0, 4 * (hi - lo) - 1), 4) + lo
    t1 = a + Fraction(1, 8)
    t2 = t1 + Fraction(rng.randint(1, max(1, int((hi - t1) * 8))), 8)
    if t2 > hi:
        t2 = Fraction(hi)
    if not t1 < t2:
        return random_context(rng, n, value_range)
    A = [i for i in range(1, n + 1) if w[i - 1] < t1]
    B = [i for i in range(1, n + 1) if w[i - 1] >= t2]
    rest = [i for i in range(1, n + 1) if i not in A and i not in B]
    pos = list(range(1, n + 1))
    rng.shuffle(pos)
    fixed = dict(zip(rest, pos[:len(rest)]))
    rng.shuffle(A)
    rng.shuffle(B)
    return make_context(w, v, t1, t2, fixed, A, B)


def random_covering_pair(rng: random.Random, ctx: AssignmentContext):
    """Uniform-ish covering pair (U, V) in the poset of |B|-subsets of X, or None."""
    X = ctx.X
    k = len(ctx.order_B)
    for _ in range(50):
        U = sorted(rng.sample(X, k))
        movable = [x for x in U if X.index(x) + 1 < len(X) and X[X.index(x) + 1] not in U]
        if movable:
            x = rng.choice(movable)
            y = X[X.index(x) + 1]
            V = sorted((set(U) - {x}) | {y})
            return tuple(U), tuple(V)
    return None


def level_set(ctx: AssignmentContext, interval: Interval) -> list[tuple[tuple, Fraction]]:
    """All |B|-subsets U of X with S(U) in the interval, with their S values."""
    out = []
    for U in ctx.subsets():
        s = ctx.S(U)
        if s in interval:
            out.append((U, s))
    return out


@dataclass
class ChainDecomposition:
    chains: list
    width: int
    max_chain_size: int
    size_bound: Fraction
    bound_ok: bool


def chain_decompose(E, interval: Interval, delta_gap, cap: int = ORACLE_CAP) -> ChainDecomposition:
    """Minimum chain cover of E under dominance, and the chain-length check.

    ``E`` is a list of (subset, S value).  Along a chain each step passes
    through at least one covering step, so S grows by at least ``delta_gap``
    per step; chains inside a window of length |I| therefore have at most
    1 + |I| / delta_gap elements.
    """
    delta_gap = Fraction(delta_gap)
    if delta_gap <= 0:
        raise PreconditionError("delta_gap must be positive")
    if len(E) > cap:
        raise CapExceededError(f"|E|={len(E)} exceeds cap {cap}")
    subsets = [tuple(sorted(u)) for u, _ in E]
    if not subsets:
        return ChainDecomposition([], 0, 0, 1 + interval.length / delta_gap, True)
    k = len(subsets[0])
    leq = _leq_matrix(subsets, k)
    idx_chains = _min_chain_cover(leq)
    chains = [[E[i] for i in c] for c in idx_chains]
    for c in idx_chains:
        for a, b in zip(c, c[1:]):
            assert leq[a, b] and a != b
    longest = max(len(c) for c in chains)
    bound = 1 + interval.length / delta_gap
    return ChainDecomposition(chains, len(chains), longest, bound, longest <= bound)


def context_width(ctx: AssignmentContext, cap: int = ORACLE_CAP) -> dict:
    """Width of the poset of |B|-subsets of X, computed against both ground sets.

    Returns the matching width on X, the equal-sum count on {1..|X|}
    (Stanley's formula), and the equal-sum count on X itself, which can
    only be smaller (equal-sum subsets form an antichain).
    """
    X, k = ctx.X, len(ctx.order_B)
    return {
        "dilworth_on_X": dilworth_width_oracle(len(X), k, cap, ground=X),
        "stanley_on_range": stanley_width(len(X), k),
        "equal_sum_on_X": equal_sum_count(X, k),
    }

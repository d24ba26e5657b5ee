"""Seeded Monte Carlo for permutation sums and subset sums.

RNG contract
------------
* Generator: xoshiro256** (Blackman & Vigna), 64-bit output
  ``rotl(s1 * 5, 7) * 9``, state update with shift 17 and rotation 45.
* Seeding: SplitMix64.  Output i (i = 1, 2, ...) of the stream seeded with
  ``s`` is ``mix64(s + i * 0x9E3779B97F4A7C15)`` where ``mix64`` is
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2^64).
* Sharding: samples are cut into blocks of ``BLOCK`` consecutive draws.
  Block b gets seed ``splitmix64(master, b + 1)``; inside a block, lane j
  (one lane per draw) takes splitmix outputs 4j+1 .. 4j+4 of the block
  seed as its xoshiro state.  Blocks are independent, so the merged
  result does not depend on how blocks are spread over workers.
* Bounded integers: ``uniform(m) = ((x >> 32) * m) >> 32`` for m < 2^32.
  One draw per call; the bias is below m / 2^32.
* A permutation of n consumes n - 1 draws (Fisher-Yates, position i swapped
  with a uniform position in [i, n)).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engines import perm_sum_value
from .numerics import (
    DiscreteDistribution,
    GridEmbedding,
    Interval,
    PreconditionError,
    as_vector,
    concentration_function,
    embed,
    to_fraction,
)

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
BLOCK = 4096
BOOTSTRAP_RESAMPLES = 200
THREADS_ENV = "PERMCONC_THREADS"

_U = np.uint64


def mix64(z):
    """SplitMix64 finalizer on a uint64 array (or Python int)."""
    if isinstance(z, int):
        z &= M64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        return z ^ (z >> 31)
    z = z ^ (z >> _U(30))
    z = z * _U(0xBF58476D1CE4E5B9)
    z = z ^ (z >> _U(27))
    z = z * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


def splitmix64(seed: int, i: int) -> int:
    """i-th output (1-based) of the SplitMix64 stream seeded with ``seed``."""
    return mix64((seed + i * GOLDEN) & M64)


def block_seed(master: int, block: int) -> int:
    return splitmix64(master & M64, block + 1)


def _rotl(x, k):
    return (x << _U(k)) | (x >> _U(64 - k))


class Rng:
    """xoshiro256** with one independent stream per lane, advanced in lockstep."""

    def __init__(self, seed: int, lanes: int = 1):
        seed &= M64
        idx = np.arange(1, 4 * lanes + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = _U(seed) + idx * _U(GOLDEN)
            st = mix64(z).reshape(lanes, 4).T.copy()
        self.s = st  # shape (4, lanes)
        self.seed = seed
        self.lanes = lanes
        self.draws = 0

    def next(self) -> np.ndarray:
        s = self.s
        with np.errstate(over="ignore"):
            result = _rotl(s[1] * _U(5), 7) * _U(9)
            t = s[1] << _U(17)
            s[2] ^= s[0]
            s[3] ^= s[1]
            s[1] ^= s[2]
            s[0] ^= s[3]
            s[2] ^= t
            s[3] = _rotl(s[3], 45)
        self.draws += 1
        return result

    def uniform(self, m) -> np.ndarray:
        """Per-lane integer in [0, m); m may be a scalar or a per-lane array."""
        x = self.next() >> _U(32)
        with np.errstate(over="ignore"):
            return ((x * np.asarray(m, dtype=np.uint64)) >> _U(32)).astype(np.int64)

    def random(self) -> np.ndarray:
        """Per-lane float in [0, 1) with 53 random bits."""
        return (self.next() >> _U(11)).astype(np.float64) * 2.0 ** -53


def sample_permutations(n: int, rng: Rng) -> np.ndarray:
    """One uniform permutation of range(n) per lane, shape (lanes, n)."""
    if n < 1:
        raise PreconditionError("n >= 1 required")
    perm = np.tile(np.arange(n, dtype=np.int64), (rng.lanes, 1))
    rows = np.arange(rng.lanes)
    for i in range(n - 1):
        j = i + rng.uniform(n - i)
        a = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = a
    return perm


def sample_permutation(n: int, rng: Rng) -> list[int]:
    return sample_permutations(n, rng)[0].tolist()


def resolve_threads(threads=None) -> int:
    if threads:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _blocks(samples: int):
    return [(b, min(BLOCK, samples - b * BLOCK)) for b in range(math.ceil(samples / BLOCK))]


def run_blocks(fn, samples: int, seed: int, threads=None) -> list:
    """Apply fn(Rng) to every block; results come back in block order."""
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    jobs = [(block_seed(seed, b), size) for b, size in _blocks(samples)]
    work = lambda job: fn(Rng(job[0], job[1]))  # noqa: E731
    nt = resolve_threads(threads)
    if nt == 1 or len(jobs) == 1:
        return [work(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=nt) as ex:
        return list(ex.map(work, jobs))


# -- samplers -------------------------------------------------------------------

def _int_dtype(bound: int):
    return np.int64 if bound < 2 ** 62 else object


class PermSumSampler:
    """Draws w_pi . v = sum_i w_i v_pi(i) on the grid of scale scale_w * scale_v."""

    def __init__(self, w, v):
        w, v = as_vector(w), as_vector(v)
        if w.n != v.n:
            raise PreconditionError(f"length mismatch: len(w)={w.n}, len(v)={v.n}")
        gw, gv = embed(w), embed(v)
        self.n = w.n
        self.grid = GridEmbedding(gw.scale * gv.scale)
        bound = w.n * max(map(abs, gw.values)) * max(map(abs, gv.values))
        dt = _int_dtype(bound)
        self.wg = np.array(gw.values, dtype=dt)
        self.vg = np.array(gv.values, dtype=dt)

    def draw(self, rng: Rng) -> np.ndarray:
        perm = sample_permutations(self.n, rng)
        return (self.vg[perm] * self.wg).sum(axis=1)


class SubsetSumSampler:
    def __init__(self, A, k: int, mode: str):
        A = as_vector(A)
        if not A.is_distinct():
            raise PreconditionError("coordinates of A must be pairwise distinct")
        if mode not in ("with", "without"):
            raise PreconditionError("mode must be 'with' or 'without'")
        if mode == "with" and k < 1:
            raise PreconditionError("k must be >= 1")
        if mode == "without" and not 0 <= k <= A.n:
            raise PreconditionError(f"k={k} out of range 0..{A.n}")
        g = embed(A)
        self.grid = GridEmbedding(g.scale)
        self.n, self.k, self.mode = A.n, k, mode
        self.ag = np.array(g.values, dtype=_int_dtype(max(1, k) * max(map(abs, g.values))))

    def draw(self, rng: Rng) -> np.ndarray:
        if self.mode == "with":
            tot = np.zeros(rng.lanes, dtype=self.ag.dtype)
            for _ in range(self.k):
                tot = tot + self.ag[rng.uniform(self.n)]
            return tot
        # partial Fisher-Yates: only the first k slots are shuffled
        idx = np.tile(np.arange(self.n, dtype=np.int64), (rng.lanes, 1))
        rows = np.arange(rng.lanes)
        for i in range(self.k):
            j = i + rng.uniform(self.n - i)
            a = idx[rows, i].copy()
            idx[rows, i] = idx[rows, j]
            idx[rows, j] = a
        return self.ag[idx[:, :self.k]].sum(axis=1) if self.k else np.zeros(rng.lanes, dtype=self.ag.dtype)


class ConstantSampler:
    def __init__(self, value):
        value = to_fraction(value)
        self.grid = GridEmbedding(value.denominator)
        self.value = value.numerator

    def draw(self, rng: Rng) -> np.ndarray:
        rng.next()
        return np.full(rng.lanes, self.value, dtype=np.int64)


class DiscreteSampler:
    """Draws from an exact DiscreteDistribution by inverse-CDF on its counts."""

    def __init__(self, d: DiscreteDistribution):
        self.grid = d.grid
        self.support = np.array(d.support, dtype=object)
        self.total = d.total
        if self.total >= 2 ** 62:
            raise PreconditionError("total too large for the inverse-CDF sampler")
        self.cum = np.cumsum(np.array(d.counts, dtype=np.int64))

    def draw(self, rng: Rng) -> np.ndarray:
        if self.total < 1 << 32:
            u = rng.uniform(self.total)
        else:
            u = np.floor(rng.random() * self.total).astype(np.int64)
        pos = np.searchsorted(self.cum, u, side="right")
        return self.support[pos]


def sample_subset_sum(A, k: int, mode: str, rng: Rng) -> Fraction:
    """One draw (lane 0) of a with/without-replacement subset sum, as a value."""
    s = SubsetSumSampler(A, k, mode)
    return s.grid.to_value(int(s.draw(rng)[0]))


# -- estimators -----------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    hits: int | None = None
    method: str = "binomial"

    def rows(self) -> list[tuple[str, str]]:
        out = [("estimate", repr(self.estimate)), ("stderr", repr(self.stderr)),
               ("samples", str(self.samples)), ("seed", str(self.seed)),
               ("method", self.method)]
        if self.hits is not None:
            out.insert(0, ("hits", str(self.hits)))
        return out


def _binomial(hits: int, samples: int, seed: int) -> McEstimate:
    p = hits / samples
    return McEstimate(p, math.sqrt(p * (1 - p) / samples), samples, seed & M64, hits)


def estimate_sampler_window(sampler, lo: int, hi: int, samples: int, seed: int, threads=None) -> McEstimate:
    """Fraction of draws whose grid value lies in [lo, hi] (grid integers)."""
    def count(rng):
        x = sampler.draw(rng)
        return int(((x >= lo) & (x <= hi)).sum())

    hits = sum(run_blocks(count, samples, seed, threads))
    return _binomial(hits, samples, seed)


def estimate_interval_mass(w, v, interval: Interval, samples: int, seed: int, threads=None) -> McEstimate:
    """MC estimate of P(w_pi . v in I); membership is decided on grid integers."""
    s = PermSumSampler(w, v)
    lo, hi = interval.grid_bounds(s.grid)
    return estimate_sampler_window(s, lo, hi, samples, seed, threads)


def estimate_point_mass(w, v, x, samples: int, seed: int, threads=None) -> McEstimate:
    return estimate_interval_mass(w, v, Interval.point(x), samples, seed, threads)


def estimate_grid_window(w, v, window, samples: int, seed: int, threads=None) -> McEstimate:
    """Like estimate_interval_mass, with ``window(grid_scale) -> (lo, hi)``."""
    s = PermSumSampler(w, v)
    lo, hi = window(s.grid.scale)
    return estimate_sampler_window(s, lo, hi, samples, seed, threads)


def draw_many(sampler, samples: int, seed: int, threads=None) -> np.ndarray:
    return np.concatenate(run_blocks(sampler.draw, samples, seed, threads))


def _empirical(values: np.ndarray, grid: GridEmbedding) -> DiscreteDistribution:
    u, c = np.unique(values, return_counts=True)
    return DiscreteDistribution(tuple(int(x) for x in u), tuple(int(x) for x in c), int(c.sum()), grid)


def estimate_concentration_function(sampler, t, samples: int, seed: int, threads=None,
                                    resamples: int = BOOTSTRAP_RESAMPLES) -> McEstimate:
    """Plug-in estimate of Q(S, t): the best window on the empirical law.

    The max over windows makes this biased upward.  stderr is the standard
    deviation over ``resamples`` bootstrap replicates; the bootstrap uses the
    same generator: replicate r resamples with one lane per draw, seeded
    with splitmix64(block_seed(seed, 2^64 - 1), r + 1).
    """
    t = to_fraction(t)
    if t < 0:
        raise PreconditionError("t must be nonnegative")
    x = draw_many(sampler, samples, seed, threads)
    emp = _empirical(x, sampler.grid)
    q = concentration_function(emp, t)
    boot = block_seed(seed, M64)
    reps = np.zeros(resamples)
    for r in range(resamples):
        idx = Rng(splitmix64(boot, r + 1), samples).uniform(samples)
        reps[r] = float(concentration_function(_empirical(x[idx], sampler.grid), t))
    return McEstimate(float(q), float(reps.std(ddof=1)) if resamples > 1 else 0.0,
                      samples, seed & M64, None, "plug-in max window, bootstrap stderr (upward biased)")


def naive_perm_sum(w, v, perm) -> Fraction:
    return perm_sum_value(as_vector(w).coords, as_vector(v).coords, perm)

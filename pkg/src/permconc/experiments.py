"""Sweeps that compare exact left-hand sides against the bound evaluators.

A sweep is described by a :class:`SweepConfig` (JSON on disk) and yields one
:class:`SweepRecord` per instance plus a summary.  For bounds with an
unspecified absolute constant the summary reports the fitted constant
C* = max(lhs / bound) and a Kendall-tau test for an increasing trend of the
per-size maxima C*(n) against n.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from scipy.stats import kendalltau

from . import bounds as B
from .engines import (
    perm_sum_distribution,
    rademacher_sum_distribution,
    with_replacement_counts,
    without_replacement_table,
)
from .numerics import CapExceededError, PreconditionError, concentration_function

TREND_LEVEL = 0.01
CEILING_FACTOR = 10
STATEMENTS = ("main", "sigma", "pawlowski", "repetition", "lemma-with", "lemma-without", "elo")
CSV_HEADER = ["descriptor", "n", "param", "lhs", "lhs_float", "bound", "bound_float",
              "ratio", "running_max"]
CSV_SCHEMA_VERSION = 1


@dataclass
class SweepConfig:
    statement: str
    generator: dict = field(default_factory=lambda: {"kind": "random", "seed": 0})
    n_values: list = field(default_factory=lambda: list(range(3, 10)))
    k_rule: str = "all"
    lengths: list = field(default_factory=lambda: ["0", "1", "2", "5"])
    samples: int = 0
    output: str | None = None
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
        if "statement" not in d:
            raise PreconditionError("config needs a 'statement'")
        cfg = cls(**d)
        if cfg.statement not in STATEMENTS:
            raise PreconditionError(f"unknown statement {cfg.statement!r}")
        if cfg.samples:
            raise PreconditionError("sweeps are exact; samples must be 0")
        return cfg

    @classmethod
    def load(cls, path) -> "SweepConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise PreconditionError(f"cannot read config: {e}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise PreconditionError(f"config parse error: {e}") from None
        if not isinstance(data, dict):
            raise PreconditionError("config must be a JSON object")
        return cls.from_dict(data)

    def dumps(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class SweepRecord:
    descriptor: str
    n: int
    param: str
    lhs: Fraction
    bound: Fraction
    ratio: Fraction
    running_max: float = 0.0

    def row(self) -> list:
        return [self.descriptor, self.n, self.param, str(self.lhs), repr(float(self.lhs)),
                str(self.bound), repr(float(self.bound)), repr(float(self.ratio)),
                repr(self.running_max)]


@dataclass
class TrendTest:
    tau: float
    pvalue: float
    increasing: bool
    points: int


def kendall_trend(sizes, values, level: float = TREND_LEVEL) -> TrendTest:
    """One-sided Kendall tau test for an increasing trend of values in sizes."""
    if len(set(sizes)) < 3:
        return TrendTest(float("nan"), 1.0, False, len(sizes))
    if len(set(values)) == 1:
        return TrendTest(0.0, 1.0, False, len(sizes))
    res = kendalltau(sizes, values, alternative="greater")
    tau, p = float(res.statistic), float(res.pvalue)
    return TrendTest(tau, p, bool(p < level), len(sizes))


def per_size_max(records) -> dict:
    out: dict = {}
    for r in records:
        out[r.n] = max(out.get(r.n, 0.0), float(r.ratio))
    return dict(sorted(out.items()))


def summarize(statement: str, records: list) -> dict:
    if not records:
        raise PreconditionError("generator produced no valid instances")
    by_n = per_size_max(records)
    trend = kendall_trend(list(by_n), list(by_n.values()))
    c_star = max(float(r.ratio) for r in records)
    constant_free = statement == "pawlowski"
    if constant_free:
        violations = [r.descriptor for r in records if r.ratio > 1]
        passed = not violations
        ceiling = None
    else:
        # predictive sanity ceiling: fit on the smaller half of the sizes
        sizes = sorted(by_n)
        fit_sizes = sizes[: max(1, (len(sizes) + 1) // 2)]
        c_fit = max(by_n[s] for s in fit_sizes)
        ceiling = CEILING_FACTOR * c_fit
        violations = [r.descriptor for r in records if float(r.ratio) > ceiling]
        passed = not violations and not trend.increasing
    return {
        "statement": statement,
        "records": len(records),
        "fitted_constant": c_star,
        "per_size_max": {str(k): v for k, v in by_n.items()},
        "trend_tau": trend.tau,
        "trend_pvalue": trend.pvalue,
        "trend_increasing": trend.increasing,
        "trend_level": TREND_LEVEL,
        "ceiling": ceiling,
        "violations": violations,
        "constant_mode": not constant_free,
        "pass": passed,
        "csv_schema_version": CSV_SCHEMA_VERSION,
    }


# -- instance generation -------------------------------------------------------------

def _fmt_vec(x) -> str:
    return "(" + ",".join(str(c) for c in x) + ")"


def random_instance(rng: random.Random, n: int, w_range: int = 3, v_range: int = 12,
                    rational_v: bool = True) -> tuple[list, list]:
    """Nonconstant integer w (repeats allowed) and distinct increasing v."""
    while True:
        w = [rng.randint(-w_range, w_range) for _ in range(n)]
        if len(set(w)) > 1:
            break
    v = sorted(rng.sample(range(-v_range, v_range + 1), n))
    if rational_v and rng.random() < 0.3:
        d = rng.choice([2, 3])
        v = [Fraction(x, d) for x in v]
    return w, v


def random_battery(seed: int, count: int, n_values, lengths, w_range=3, v_range=12) -> list[dict]:
    """Seeded list of {w, v, len} instances; n cycles through n_values."""
    rng = random.Random(seed)
    out = []
    for t in range(count):
        n = n_values[t % len(n_values)]
        w, v = random_instance(rng, n, w_range, v_range)
        out.append({"w": w, "v": v, "len": Fraction(rng.choice(lengths))})
    return out


def _instances(cfg: SweepConfig) -> list[dict]:
    g = dict(cfg.generator)
    kind = g.pop("kind", "random")
    if kind == "explicit":
        return [{"w": [Fraction(x) for x in inst["w"]], "v": [Fraction(x) for x in inst["v"]],
                 "len": Fraction(inst.get("len", 0)), "eps": inst.get("eps")}
                for inst in g.get("instances", [])]
    if kind == "random":
        return random_battery(int(g.get("seed", 0)), int(g.get("count", 100)), list(cfg.n_values),
                              [Fraction(x) for x in cfg.lengths], int(g.get("w_range", 3)),
                              int(g.get("v_range", 12)))
    if kind == "grid":
        out = []
        for n in cfg.n_values:
            w_lo, w_hi = int(g.get("w_min", -2)), int(g.get("w_max", 2))
            v_lo, v_hi = int(g.get("v_min", 1)), n + int(g.get("v_max_plus_n", 1))
            for v in itertools.combinations(range(v_lo, v_hi + 1), n):
                for w in itertools.product(range(w_lo, w_hi + 1), repeat=n):
                    if len(set(w)) > 1:
                        out.append({"w": list(w), "v": list(v), "len": Fraction(0)})
        return out
    raise PreconditionError(f"unknown generator kind {kind!r}")


def _evaluate(statement: str, inst: dict, cache: dict | None = None) -> list[SweepRecord]:
    w, v, L = inst["w"], inst["v"], inst.get("len", Fraction(0))
    n = len(w)
    desc = f"n={n};w={_fmt_vec(w)};v={_fmt_vec(v)}"
    key = (tuple(sorted(w)), tuple(sorted(v)))
    if cache is not None and key in cache:
        d = cache[key]
    else:
        d = perm_sum_distribution(w, v)
        if cache is not None:
            cache[key] = d
    if statement == "pawlowski":
        res = B.pawlowski_check(w, v)
        return [SweepRecord(desc, n, "point", res.max_mass, res.bound, res.max_mass / res.bound)]
    if statement == "main":
        try:
            i1, i2, rep = B.optimize_indices(w, v, L)
        except PreconditionError:
            return []
        lhs = concentration_function(d, L)
        return [SweepRecord(f"{desc};len={L};i1={i1};i2={i2}", n, f"len={L}", lhs, rep.value,
                            lhs / rep.value)]
    if statement == "sigma":
        rep = B.sigma_corollary_bound(w, v, L)
        if not rep.preconditions_ok:
            return []
        lhs = concentration_function(d, L)
        return [SweepRecord(f"{desc};len={L}", n, f"len={L}", lhs, rep.value, lhs / rep.value)]
    if statement == "repetition":
        eps = inst.get("eps")
        if eps is None:
            eps = 1 - Fraction(B.max_multiplicity(w), n)
        eps = Fraction(eps)
        if eps <= 0:
            return []
        rep = B.repetition_corollary_bound(w, v, eps)
        if not rep.preconditions_ok:
            return []
        lhs, _ = d.max_point_mass()
        return [SweepRecord(f"{desc};eps={eps}", n, f"eps={eps}", lhs, rep.value, lhs / rep.value)]
    raise PreconditionError(f"statement {statement!r} is not instance-based")


def _evaluate_chunk(args):
    statement, chunk = args
    cache: dict = {}
    out = []
    for inst in chunk:
        out.extend(_evaluate(statement, inst, cache))
    return out


def _lemma_records(cfg: SweepConfig) -> list[SweepRecord]:
    mode = "with" if cfg.statement == "lemma-with" else "without"
    g = cfg.generator
    rows = scaling_study(mode, cfg.n_values, cfg.k_rule, g.get("family", "range"), int(g.get("seed", 0)))
    return [SweepRecord(f"n={r['n']};k={r['k']};family={r['family']}", r["n"], f"k={r['k']}",
                        r["max_point_mass"], r["bound"], r["max_point_mass"] / r["bound"])
            for r in rows]


def _elo_records(cfg: SweepConfig) -> list[SweepRecord]:
    """Rademacher baseline: Q(sum xi_i v_i, t) against (t + 1) / sqrt(n), |v_i| >= 1."""
    rng = random.Random(int(cfg.generator.get("seed", 0)))
    out = []
    for n in cfg.n_values:
        for t in cfg.lengths:
            t = Fraction(t)
            v = [rng.choice([-1, 1]) * rng.randint(1, 4) for _ in range(n)]
            d = rademacher_sum_distribution(v)
            lhs = concentration_function(d, t)
            bound = (t + 1) / B.sqrt_lower(n)
            out.append(SweepRecord(f"n={n};v={_fmt_vec(v)};len={t}", n, f"len={t}", lhs, bound, lhs / bound))
    return out


def _canonical_key(r: SweepRecord):
    return (r.n, r.descriptor)


def run_sweep(cfg: SweepConfig) -> tuple[list[SweepRecord], dict]:
    if cfg.statement in ("lemma-with", "lemma-without"):
        records = _lemma_records(cfg)
    elif cfg.statement == "elo":
        records = _elo_records(cfg)
    else:
        insts = _instances(cfg)
        if cfg.workers > 1:
            chunks = [insts[i::cfg.workers] for i in range(cfg.workers)]
            with ProcessPoolExecutor(cfg.workers) as ex:
                parts = list(ex.map(_evaluate_chunk, [(cfg.statement, c) for c in chunks]))
            records = [r for p in parts for r in p]
        else:
            records = _evaluate_chunk((cfg.statement, insts))
    records.sort(key=_canonical_key)
    run = 0.0
    for r in records:
        run = max(run, float(r.ratio))
        r.running_max = run
    summary = summarize(cfg.statement, records)
    if cfg.output:
        write_outputs(cfg, records, summary)
    return records, summary


def records_csv(records) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in records:
        wr.writerow(r.row())
    return buf.getvalue()


def summary_text(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def write_outputs(cfg: SweepConfig, records, summary):
    base = Path(cfg.output)
    base.parent.mkdir(parents=True, exist_ok=True)
    base.with_suffix(".csv").write_text(records_csv(records))
    base.with_suffix(".summary.json").write_text(summary_text(summary))


# -- extremal search ------------------------------------------------------------------

@dataclass
class ExtremalResult:
    value: Fraction
    w: tuple
    v: tuple
    mode: str
    evaluated: int


def _objective(w, v, objective: str, t: Fraction, cap: int) -> Fraction:
    d = perm_sum_distribution(w, v, cap)
    if objective == "point":
        return d.max_point_mass()[0]
    if objective == "q":
        return concentration_function(d, t)
    raise PreconditionError(f"unknown objective {objective!r}")


def extremal_search(n: int, coord_bound: int, objective: str = "point", t=0, *,
                    exhaustive: bool | None = None, restarts: int = 32, seed: int = 0,
                    cap: int = 12, plateau_moves: int = 20) -> ExtremalResult:
    """Maximize the point mass (or Q(., t)) over w nonconstant, v distinct.

    Coordinates range over {-coord_bound..coord_bound}.  Exhaustive mode
    enumerates sorted w and increasing v only: the law of w_pi . v depends
    on w and v through their multisets.  Larger n use seeded hill climbing
    with single-coordinate +-1 moves and ``restarts`` random starts.
    """
    t = Fraction(t)
    vals = list(range(-coord_bound, coord_bound + 1))
    if n < 2:
        raise PreconditionError("n >= 2 required")
    if len(vals) < n:
        raise PreconditionError("coordinate grid too small for n distinct v values")
    if n > cap:
        raise CapExceededError(f"n={n} exceeds exact cap {cap}")
    if exhaustive is None:
        exhaustive = n <= 5
    if exhaustive:
        if n > 6:
            raise CapExceededError("exhaustive mode is limited to n <= 6")
        best, count = None, 0
        vs = list(itertools.combinations(vals, n))
        for w in itertools.combinations_with_replacement(vals, n):
            if w[0] == w[-1]:
                continue
            for v in vs:
                val = _objective(w, v, objective, t, cap)
                count += 1
                if best is None or val > best[0]:
                    best = (val, w, v)
        return ExtremalResult(best[0], best[1], best[2], "exhaustive", count)
    return _hill_climb(n, vals, objective, t, restarts, seed, cap, plateau_moves)


def _hill_climb(n, vals, objective, t, restarts, seed, cap, plateau_moves) -> ExtremalResult:
    rng = random.Random(seed)
    lo, hi = vals[0], vals[-1]
    memo: dict = {}

    def f(w, v):
        key = (tuple(sorted(w)), tuple(sorted(v)))
        if key not in memo:
            memo[key] = _objective(w, v, objective, t, cap)
        return memo[key]

    def neighbors(w, v):
        for i in range(n):
            for dlt in (-1, 1):
                x = w[i] + dlt
                if lo <= x <= hi:
                    nw = w[:i] + (x,) + w[i + 1:]
                    if len(set(nw)) > 1:
                        yield nw, v
                y = v[i] + dlt
                if lo <= y <= hi and y not in v:
                    yield w, v[:i] + (y,) + v[i + 1:]

    best = None
    for _ in range(restarts):
        while True:
            w = tuple(rng.choice(vals) for _ in range(n))
            if len(set(w)) > 1:
                break
        v = tuple(rng.sample(vals, n))
        cur = f(w, v)
        flat = 0
        while True:
            nb = list(neighbors(w, v))
            scored = [(f(a, b), a, b) for a, b in nb]
            top = max(s for s, _, _ in scored)
            if top > cur:
                cands = [(a, b) for s, a, b in scored if s == top]
                w, v = rng.choice(cands)
                cur, flat = top, 0
            elif top == cur and flat < plateau_moves:
                cands = [(a, b) for s, a, b in scored if s == top]
                w, v = rng.choice(cands)
                flat += 1
            else:
                break
        if best is None or cur > best[0]:
            best = (cur, tuple(sorted(w)), tuple(sorted(v)))
    return ExtremalResult(best[0], best[1], best[2], "hill-climb", len(memo))


# -- scaling studies ------------------------------------------------------------------

def k_values(n: int, rule: str, mode: str) -> list[int]:
    if rule == "all":
        return list(range(1, n + 1)) if mode == "with" else list(range(1, n))
    if rule == "half":
        return [n // 2]
    if rule == "one":
        return [1]
    if rule == "n":
        return [n]
    if rule == "sqrt":
        return [max(1, math.isqrt(n))]
    raise PreconditionError(f"unknown k rule {rule!r}")


def family_set(n: int, family: str, seed: int = 0) -> list:
    """Distinct ground sets: 1..n, or 1..n with seeded half-step perturbations."""
    if family == "range":
        return list(range(1, n + 1))
    if family == "perturbed":
        rng = random.Random(seed * 1_000_003 + n)
        return [i + Fraction(rng.randint(0, 1), 2) for i in range(1, n + 1)]
    raise PreconditionError(f"unknown family {family!r}")


def scaling_study(mode: str, n_values, k_rule: str = "all", family: str = "range",
                  seed: int = 0, output=None) -> list[dict]:
    """Exact max point mass of subset sums against the lemma bounds."""
    if mode not in ("with", "without"):
        raise PreconditionError("mode must be 'with' or 'without'")
    rows = []
    for n in n_values:
        A = family_set(n, family, seed)
        ks = [k for k in k_values(n, k_rule, mode) if (k >= 1 if mode == "with" else 1 <= min(k, n - k))]
        if mode == "without":
            _, T = without_replacement_table(A)
            for k in ks:
                mp = Fraction(int(max(T[k])), math.comb(n, k))
                rows.append(_scaling_row(n, k, family, mp, mode))
        else:
            kmax = max(ks) if ks else 0
            want = set(ks)
            for k, (_, arr) in enumerate(with_replacement_counts(A), start=1):
                if k > kmax:
                    break
                if k in want:
                    rows.append(_scaling_row(n, k, family, Fraction(int(max(arr)), n ** k), mode))
    if output:
        write_scaling_csv(rows, output)
    return rows


def _scaling_row(n, k, family, mp, mode) -> dict:
    bound = B.subset_lemma_bound(n, k, mode).value
    return {"n": n, "k": k, "family": family, "max_point_mass": mp, "bound": bound,
            "ratio": mp / bound}


SCALING_HEADER = ["n", "k", "family", "max_point_mass", "max_point_mass_float", "bound_float", "ratio"]


def scaling_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(SCALING_HEADER)
    for r in rows:
        wr.writerow([r["n"], r["k"], r["family"], str(r["max_point_mass"]),
                     repr(float(r["max_point_mass"])), repr(float(r["bound"])), repr(float(r["ratio"]))])
    return buf.getvalue()


def write_scaling_csv(rows, output):
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    Path(output).write_text(scaling_csv(rows))


def scaling_summary(rows) -> dict:
    by_n: dict = {}
    for r in rows:
        by_n[r["n"]] = max(by_n.get(r["n"], 0.0), float(r["ratio"]))
    trend = kendall_trend(list(by_n), list(by_n.values()))
    return {"fitted_constant": max(by_n.values()), "per_size_max": by_n,
            "trend_tau": trend.tau, "trend_pvalue": trend.pvalue,
            "trend_increasing": trend.increasing}


# -- batteries shared by the acceptance checks ------------------------------------------

def oracle_battery(seed: int = 20240601, count: int = 200, n_max: int = 7) -> list[tuple[list, list]]:
    """Seeded (w, v) pairs with n <= n_max, a third of them with heavy repeats."""
    rng = random.Random(seed)
    out = []
    for t in range(count):
        n = 1 + t % n_max
        if t % 3 == 0:
            w = [rng.choice([0, 1]) for _ in range(n)]
        else:
            w = [Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2])) for _ in range(n)]
        v = [Fraction(rng.randint(-5, 5), rng.choice([1, 3])) for _ in range(n)]
        out.append((w, v))
    return out


def main_battery(seed: int = 7, count: int = 500, n_values=range(3, 10)) -> list[dict]:
    return random_battery(seed, count, list(n_values), ["0", "1", "2", "3", "5", "8", "13"])


def battery_records(statement: str, battery) -> list[SweepRecord]:
    out = []
    cache: dict = {}
    for inst in battery:
        out.extend(_evaluate(statement, inst, cache))
    out.sort(key=_canonical_key)
    return out

"""Command-line entry point: ``permconc <subcommand> ...``.

Exit codes: 0 success, 2 input or precondition error, 3 resource cap.
Every output starts with ``#`` comment lines recording the version, the
resolved arguments and the seed.  ``--threads`` is left out of that
preamble because it never changes results.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import bounds as B
from .engines import DEFAULT_CAP, perm_sum_distribution
from .experiments import (
    SweepConfig,
    extremal_search,
    records_csv,
    run_sweep,
    scaling_csv,
    scaling_study,
    scaling_summary,
)
from .numerics import (
    CapExceededError,
    Interval,
    PreconditionError,
    RationalVector,
    concentration_function,
    prob_mass,
    to_fraction,
)
from .poset import ORACLE_CAP, width_certificate
from .sampling import (
    PermSumSampler,
    estimate_concentration_function,
    estimate_interval_mass,
)

VALUE_FLAGS = ("--w", "--v", "--L", "--interval", "--point", "--q", "--t", "--len-I", "--eps")
EXIT_INPUT = 2
EXIT_CAP = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- parsing helpers -------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"not a rational: {text!r}") from None


def parse_vector(text: str) -> RationalVector:
    """``1,-1/2,3`` or ``@path`` (one value per line, blank lines and # ignored)."""
    if text.startswith("@"):
        try:
            lines = Path(text[1:]).read_text().splitlines()
        except OSError as e:
            raise PreconditionError(f"cannot read vector file: {e}") from None
        items = [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("#")]
    else:
        items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise PreconditionError("empty vector")
    return RationalVector(parse_rational(s) for s in items)


def parse_interval(text: str) -> Interval:
    if ":" not in text:
        raise PreconditionError(f"interval must be lo:hi, got {text!r}")
    lo, hi = text.split(":", 1)
    return Interval(parse_rational(lo), parse_rational(hi))


def _glue_vector_flags(argv):
    """Let ``--w -1,2`` through: argparse would read -1,2 as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


# -- output ------------------------------------------------------------------------

def preamble(args) -> str:
    items = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "threads")}
    lines = [f"# permconc {__version__}",
             "# args: " + " ".join(f"{k}={_arg_str(v)}" for k, v in items.items()),
             f"# seed: {getattr(args, 'seed', None)}"]
    return "\n".join(lines) + "\n"


def _arg_str(v) -> str:
    if isinstance(v, list):
        return "[" + ",".join(str(x) for x in v) + "]"
    return str(v)


def kv(rows) -> str:
    return "".join(f"{k}={v}\n" for k, v in rows)


# -- subcommands -------------------------------------------------------------------

def _instance(args):
    if args.w is None or args.v is None:
        raise PreconditionError("--w and --v are required")
    w, v = parse_vector(args.w), parse_vector(args.v)
    if w.n != v.n:
        raise PreconditionError(f"length mismatch: len(w)={w.n}, len(v)={v.n}")
    return w, v


def cmd_exact(args) -> str:
    w, v = _instance(args)
    d = perm_sum_distribution(w, v, args.cap)
    if args.full:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        if args.format == "csv":
            wr.writerow(["value", "count", "probability"])
            for x, c, p in zip(d.values(), d.counts, d.probabilities()):
                wr.writerow([x, c, p])
            return buf.getvalue()
        rows = [("total", d.total), ("support_size", len(d.support))]
        rows += [(f"p[{x}]", p) for x, p in zip(d.values(), d.probabilities())]
        return kv(rows)
    if args.point is not None:
        x = parse_rational(args.point)
        rows = [("point", x), ("probability", prob_mass(d, Interval.point(x)))]
    elif args.interval is not None:
        I = parse_interval(args.interval)
        rows = [("interval", f"{I.lo}:{I.hi}"), ("probability", prob_mass(d, I))]
    elif args.q is not None:
        t = parse_rational(args.q)
        rows = [("t", t), ("concentration", concentration_function(d, t))]
    else:
        m, x = d.max_point_mass()
        rows = [("max_point_mass", m), ("witness", x)]
    return _render(rows, args.format)


def _render(rows, fmt) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow([k for k, _ in rows])
        wr.writerow([v for _, v in rows])
        return buf.getvalue()
    return kv(rows)


def cmd_mc(args) -> str:
    w, v = _instance(args)
    if args.samples < 1:
        raise PreconditionError("--samples must be >= 1")
    if args.q is not None:
        est = estimate_concentration_function(PermSumSampler(w, v), parse_rational(args.q),
                                              args.samples, args.seed, args.threads)
        rows = [("t", parse_rational(args.q))]
    else:
        if args.point is not None:
            I = Interval.point(parse_rational(args.point))
        elif args.interval is not None:
            I = parse_interval(args.interval)
        else:
            raise PreconditionError("one of --point, --interval, --q is required")
        est = estimate_interval_mass(w, v, I, args.samples, args.seed, args.threads)
        rows = [("interval", f"{I.lo}:{I.hi}")]
    return _render(rows + est.rows(), args.format)


def cmd_bounds(args) -> str:
    st = args.statement
    len_I = parse_rational(args.len_I)
    if st in ("lemma-with", "lemma-without"):
        if args.n is None or args.k is None:
            raise PreconditionError("--n and --k are required")
        rep = B.subset_lemma_bound(args.n, args.k, st.split("-")[1])
        return _report(rep)
    if st == "soze":
        w = parse_vector(args.w) if args.w else None
        if w is None:
            raise PreconditionError("--w is required")
        Ls = [parse_rational(x) for x in (args.L or "0,1,2").split(",")]
        prof, sc = B.soze_decay_profile(w, w.n, Ls, args.samples, args.seed, args.threads)
        rows = [("statement", "soze"), ("normalization", sc.describe()),
                ("constant_mode", B.CONSTANT_NOTE)]
        for L, est in prof:
            rows += [(f"L={L}.estimate", repr(est.estimate)), (f"L={L}.stderr", repr(est.stderr))]
        return kv(rows)
    w, v = _instance(args)
    if st == "pawlowski":
        res = B.pawlowski_check(w, v, args.cap)
        return kv([("statement", "pawlowski"), ("bound", res.bound), ("max_mass", res.max_mass),
                   ("witness", res.witness), ("satisfied", str(res.satisfied).lower()),
                   ("constant_mode", "exact"),
                   ("note", "hypothesis read as 'w nonconstant' (point masses are invariant under w -> w + c1)")])
    if st == "main":
        if args.optimize:
            i1, i2, rep = B.optimize_indices(w, v, len_I)
            return kv([("i1", i1), ("i2", i2)]) + _report(rep)
        if args.i1 is None or args.i2 is None:
            raise PreconditionError("--i1 and --i2 are required (or --optimize)")
        return _report(B.main_theorem_bound(w, v, len_I, args.i1, args.i2))
    if st == "sigma":
        return _report(B.sigma_corollary_bound(w, v, len_I))
    if st == "repetition":
        if args.eps is None:
            raise PreconditionError("--eps is required")
        return _report(B.repetition_corollary_bound(w, v, parse_rational(args.eps)))
    raise PreconditionError(f"unknown statement {st}")


class ReportFailure(Exception):
    def __init__(self, text, reason):
        self.text, self.reason = text, reason


def _report(rep: B.BoundReport) -> str:
    text = kv(rep.rows())
    if not rep.preconditions_ok:
        raise ReportFailure(text, "precondition violated: " + ";".join(rep.violations))
    return text


def cmd_width(args) -> str:
    cert = width_certificate(args.n, args.k, args.oracle, args.cap)
    return kv(cert.rows())


def cmd_search(args) -> str:
    res = extremal_search(args.n, args.coord_bound, args.objective, parse_rational(args.t),
                          restarts=args.restarts, seed=args.seed)
    return kv([("value", res.value), ("w", ",".join(map(str, res.w))),
               ("v", ",".join(map(str, res.v))), ("mode", res.mode), ("evaluated", res.evaluated)])


def cmd_sweep(args) -> str:
    cfg = SweepConfig.load(args.config)
    if args.output:
        cfg.output = args.output
    records, summary = run_sweep(cfg)
    if args.format == "csv":
        return records_csv(records)
    rows = [(k, summary[k]) for k in ("statement", "records", "fitted_constant", "trend_tau",
                                      "trend_pvalue", "trend_increasing", "ceiling", "pass")]
    rows.append(("violations", len(summary["violations"])))
    return kv(rows)


def cmd_scaling(args) -> str:
    rows = scaling_study(args.lemma, range(args.n_min, args.n_max + 1), args.k_rule,
                         args.family, args.seed, args.output)
    if args.format == "csv":
        return scaling_csv(rows)
    return kv(scaling_summary(rows).items())


# -- parser ------------------------------------------------------------------------

def _instance_flags(p):
    p.add_argument("--w", help="comma-separated rationals or @file")
    p.add_argument("--v", help="comma-separated rationals or @file")


def _query_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--interval", help="lo:hi (closed)")
    g.add_argument("--point", help="x")
    g.add_argument("--q", help="concentration function Q(S, t) at this t")
    return g


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="permconc", description="Anti-concentration of random-permutation sums.")
    ap.add_argument("--version", action="version", version=f"permconc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", help="exact law of w_pi . v")
    _instance_flags(p)
    g = _query_flags(p)
    g.add_argument("--full", action="store_true", help="print the whole distribution")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--format", choices=("structured", "csv"), default="structured")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("mc", help="Monte Carlo estimates")
    _instance_flags(p)
    _query_flags(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", choices=("structured", "csv"), default="structured")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("bounds", help="evaluate a bound")
    p.add_argument("--statement", required=True,
                   choices=("main", "sigma", "repetition", "pawlowski", "lemma-with", "lemma-without", "soze"))
    _instance_flags(p)
    p.add_argument("--i1", type=int)
    p.add_argument("--i2", type=int)
    p.add_argument("--len-I", dest="len_I", default="0")
    p.add_argument("--eps")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--L", help="comma-separated L values (soze)")
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--optimize", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("width", help="poset width certificate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also run the matching-based check")
    p.add_argument("--cap", type=int, default=ORACLE_CAP)
    p.set_defaults(func=cmd_width)

    p = sub.add_parser("search", help="extremal instance search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--coord-bound", dest="coord_bound", type=int, required=True)
    p.add_argument("--objective", choices=("point", "q"), default="point")
    p.add_argument("--t", default="0")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="override the config's output path prefix")
    p.add_argument("--format", choices=("structured", "csv"), default="structured")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scaling", help="subset-sum lemma scaling table")
    p.add_argument("--lemma", choices=("with", "without"), required=True)
    p.add_argument("--n-min", dest="n_min", type=int, default=10)
    p.add_argument("--n-max", dest="n_max", type=int, default=60)
    p.add_argument("--k-rule", dest="k_rule", default="all")
    p.add_argument("--family", choices=("range", "perturbed"), default="range")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--format", choices=("structured", "csv"), default="csv")
    p.set_defaults(func=cmd_scaling)
    return ap


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = _glue_vector_flags(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        stderr.write(f"error: usage: {e}\n")
        return EXIT_INPUT
    try:
        body = args.func(args)
    except ReportFailure as e:
        stdout.write(preamble(args) + e.text)
        stderr.write(f"error: {e.reason}\n")
        return EXIT_INPUT
    except CapExceededError as e:
        stderr.write(f"error: cap: {e}\n")
        return EXIT_CAP
    except (PreconditionError, ValueError, ZeroDivisionError) as e:
        stderr.write(f"error: precondition: {e}\n")
        return EXIT_INPUT
    stdout.write(preamble(args) + body)
    return 0


if __name__ == "__main__":
    sys.exit(main())


def main_entry():
    sys.exit(main())

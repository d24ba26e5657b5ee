"""Evaluators for the anti-concentration bounds, with precondition checks.

Bounds whose absolute constant is unspecified are evaluated with constant 1
and flagged ``constant_mode``.  Square roots and logarithms are rounded in
the direction that makes the reported value an upper bound on the exact
formula (``PRECISION_BITS`` fractional bits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from .engines import DEFAULT_CAP, max_point_mass
from .numerics import PreconditionError, as_vector, to_fraction

PRECISION_BITS = 64
INF = math.inf

CONSTANT_NOTE = "up to absolute constant"


# -- directed rounding -------------------------------------------------------

def sqrt_upper(x, bits: int = PRECISION_BITS) -> Fraction:
    """Smallest multiple of 2^-bits that is >= sqrt(x)."""
    x = to_fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative")
    num = x.numerator << (2 * bits)
    r = math.isqrt(num // x.denominator)
    while r * r * x.denominator < num:
        r += 1
    return Fraction(r, 1 << bits)


def sqrt_lower(x, bits: int = PRECISION_BITS) -> Fraction:
    """Largest multiple of 2^-bits that is <= sqrt(x)."""
    x = to_fraction(x)
    if x < 0:
        raise ValueError("sqrt of negative")
    num = x.numerator << (2 * bits)
    r = math.isqrt(num // x.denominator)
    # isqrt(floor(a)) == floor(sqrt(a)) for a >= 0
    return Fraction(r, 1 << bits)


def log_upper(n: int, bits: int = PRECISION_BITS) -> Fraction:
    """A multiple of 2^-bits that is >= ln(n), n a positive integer."""
    if n < 1:
        raise ValueError("log of non-positive")
    if n == 1:
        return Fraction(0)
    with localcontext() as ctx:
        ctx.prec = 60
        val = Fraction(Decimal(n).ln())
    # Decimal.ln is correctly rounded to 60 digits; pad by well over one ulp
    val += Fraction(1, 10 ** 55)
    return Fraction(math.ceil(val * (1 << bits)), 1 << bits)


def ceil_sqrt_times(c: Fraction, q: Fraction) -> int:
    """ceil(c * sqrt(q)) exactly, for rational c and q >= 0."""
    if q == 0 or c == 0:
        return 0
    # c*sqrt(q) = sign(c) * sqrt(c^2 q)
    a = c * c * q
    if c > 0:
        r = math.isqrt(a.numerator // a.denominator)
        while Fraction(r * r) < a:
            r += 1
        return r
    r = math.isqrt(a.numerator // a.denominator)  # floor(sqrt(a))
    return -r


def floor_sqrt_times(c: Fraction, q: Fraction) -> int:
    """floor(c * sqrt(q)) exactly."""
    return -ceil_sqrt_times(-c, q)


# -- report type ---------------------------------------------------------------

@dataclass
class BoundReport:
    name: str
    value: object  # Fraction or math.inf
    preconditions_ok: bool
    violations: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)
    constant_mode: bool = True
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not self.preconditions_ok:
            self.value = INF

    def as_float(self) -> float:
        return float(self.value)

    def rows(self) -> list[tuple[str, str]]:
        out = [("statement", self.name),
               ("value", str(self.value)),
               ("value_float", repr(float(self.value))),
               ("preconditions_ok", str(self.preconditions_ok).lower()),
               ("violations", ";".join(self.violations)),
               ("constant_mode", CONSTANT_NOTE if self.constant_mode else "exact")]
        out += [(f"input.{k}", _fmt(v)) for k, v in self.inputs.items()]
        out += [("note", s) for s in self.notes]
        return out


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _failed(name, violations, inputs, constant_mode=True, notes=()):
    return BoundReport(name, INF, False, list(violations), inputs, constant_mode, list(notes))


# -- statements ----------------------------------------------------------------

def delta(v) -> Fraction:
    """Minimum gap between two coordinates of v (0 if any value repeats)."""
    v = as_vector(v)
    if v.n < 2:
        raise PreconditionError("delta needs at least two coordinates")
    s = sorted(v.coords)
    return min(b - a for a, b in zip(s, s[1:]))


def index_gap(w_sorted, i1: int, i2: int) -> Fraction:
    """Gap between the i2-th largest and the i1-th smallest entry of sorted w.

    With A the i1 smallest and B the i2 largest indices, every admissible
    threshold pair t1 < t2 splitting them satisfies t2 - t1 < this gap, and
    the gap is the supremum.  In 1-based terms: w[n - i2 + 1] - w[i1].
    """
    n = len(w_sorted)
    return w_sorted[n - i2] - w_sorted[i1 - 1]


def _index_violations(n, i1, i2, w_sorted) -> list[str]:
    out = []
    if i1 < 1 or i2 < 1:
        out.append("i1>=1 and i2>=1")
    if i1 + i2 > n:
        out.append("i1+i2<=n")
    if not out and index_gap(w_sorted, i1, i2) <= 0:
        out.append("w_gap>0")
    return out


def main_theorem_bound(w, v, len_I, i1: int, i2: int) -> BoundReport:
    """(1 + |I| / (Delta(v) * gap)) / ((i1 + i2) * sqrt(min(i1, i2)))."""
    w, v = as_vector(w), as_vector(v)
    len_I = to_fraction(len_I)
    inputs = dict(w=w.coords, v=v.coords, len_I=len_I, i1=i1, i2=i2)
    notes = []
    if not w.is_increasing() or not v.is_increasing():
        notes.append("inputs sorted increasingly")
    ws, vs = sorted(w.coords), sorted(v.coords)
    viol = []
    if w.n != v.n:
        viol.append("len(w)=len(v)")
    if len_I < 0:
        viol.append("len_I>=0")
    d = delta(vs) if v.n >= 2 else Fraction(0)
    if d <= 0:
        viol.append("delta(v)>0")
    viol += _index_violations(w.n, i1, i2, ws)
    if viol:
        return _failed("main", viol, inputs, notes=notes)
    gap = index_gap(ws, i1, i2)
    inputs.update(delta=d, w_gap=gap)
    num = 1 + len_I / (d * gap)
    den = (i1 + i2) * sqrt_lower(min(i1, i2))
    return BoundReport("main", num / den, True, [], inputs, True, notes)


def valid_index_pairs(w_sorted) -> list[tuple[int, int]]:
    n = len(w_sorted)
    return [(i1, i2) for i1 in range(1, n) for i2 in range(1, n - i1 + 1)
            if index_gap(w_sorted, i1, i2) > 0]


def optimize_indices(w, v, len_I) -> tuple[int, int, BoundReport]:
    """Exhaustive search over admissible (i1, i2) for the smallest main bound.

    Ties go to the smaller i1, then the smaller i2.
    """
    ws = sorted(as_vector(w).coords)
    pairs = valid_index_pairs(ws)
    if not pairs:
        raise PreconditionError("no valid (i1,i2): w is constant")
    best = None
    for i1, i2 in pairs:
        rep = main_theorem_bound(w, v, len_I, i1, i2)
        if not rep.preconditions_ok:
            raise PreconditionError("main bound preconditions fail: " + ";".join(rep.violations))
        if best is None or rep.value < best[2].value:
            best = (i1, i2, rep)
    return best


def max_multiplicity(w) -> int:
    w = as_vector(w)
    counts: dict = {}
    for x in w.coords:
        counts[x] = counts.get(x, 0) + 1
    return max(counts.values())


def repetition_corollary_bound(w, v, eps) -> BoundReport:
    """1 / (eps * n^(3/2)) when no w-value repeats more than (1 - eps) n times."""
    w, v = as_vector(w), as_vector(v)
    eps = to_fraction(eps)
    n = w.n
    inputs = dict(w=w.coords, v=v.coords, eps=eps)
    viol = []
    if w.n != v.n:
        viol.append("len(w)=len(v)")
    if not 0 < eps <= 1:
        viol.append("0<eps<=1")
    if not v.is_distinct():
        viol.append("v distinct")
    if max_multiplicity(w) > (1 - eps) * n:
        viol.append("max multiplicity of w <= (1-eps)n")
    if viol:
        return _failed("repetition", viol, inputs)
    # n^(3/2) = n * sqrt(n); round the denominator down
    return BoundReport("repetition", 1 / (eps * n * sqrt_lower(n)), True, [], inputs)


def sigma_squared(w) -> Fraction:
    w = as_vector(w)
    mean = w.total() / w.n
    return sum(((x - mean) ** 2 for x in w.coords), Fraction(0))


def sigma_corollary_bound(w, v, len_I) -> BoundReport:
    """|I| sqrt(log n) / (n sigma Delta(v)) + 1/n, natural log."""
    w, v = as_vector(w), as_vector(v)
    len_I = to_fraction(len_I)
    n = w.n
    inputs = dict(w=w.coords, v=v.coords, len_I=len_I)
    viol = []
    if w.n != v.n:
        viol.append("len(w)=len(v)")
    if len_I < 0:
        viol.append("len_I>=0")
    s2 = sigma_squared(w)
    if s2 == 0:
        viol.append("sigma>0")
    d = delta(v) if v.n >= 2 else Fraction(0)
    if d <= 0:
        viol.append("delta(v)>0")
    if viol:
        return _failed("sigma", viol, inputs)
    inputs.update(sigma2=s2, delta=d)
    first = Fraction(0)
    if len_I:
        first = len_I * sqrt_upper(log_upper(n)) / (n * sqrt_lower(s2) * d)
    return BoundReport("sigma", first + Fraction(1, n), True, [], inputs)


@dataclass
class PawlowskiResult:
    bound: Fraction
    satisfied: bool
    max_mass: Fraction
    witness: Fraction


def pawlowski_bound(n: int) -> Fraction:
    return Fraction(1, n) if n % 2 else Fraction(1, n - 1)


def pawlowski_check(w, v, cap: int = DEFAULT_CAP) -> PawlowskiResult:
    """Compare the exact max point mass against 1/n (n odd) or 1/(n-1) (n even).

    The hypothesis on w is taken as "w nonconstant": the point masses are
    unchanged by w -> w + c*1, so a condition on w . 1 cannot matter.
    """
    w, v = as_vector(w), as_vector(v)
    if w.n != v.n:
        raise PreconditionError("length mismatch")
    if w.n < 2:
        raise PreconditionError("n >= 2 required")
    if not v.is_distinct():
        raise PreconditionError("v must have distinct coordinates")
    if w.is_constant():
        raise PreconditionError("w must be nonconstant")
    mass, x = max_point_mass(w, v, cap)
    b = pawlowski_bound(w.n)
    return PawlowskiResult(b, mass <= b, mass, x)


def subset_lemma_bound(n: int, k: int, mode: str) -> BoundReport:
    """1/(n sqrt k) with replacement, 1/(n sqrt(min(k, n-k))) without."""
    inputs = dict(n=n, k=k, mode=mode)
    if mode not in ("with", "without"):
        raise PreconditionError("mode must be 'with' or 'without'")
    m = k if mode == "with" else min(k, n - k)
    if not (1 <= k <= n) or m < 1:
        return _failed(f"lemma-{mode}", ["1<=k<=n" if mode == "with" else "1<=min(k,n-k)"], inputs)
    return BoundReport(f"lemma-{mode}", 1 / (n * sqrt_lower(m)), True, [], inputs)


# -- unit-vector normalization used by the decay profile ------------------------------

@dataclass(frozen=True)
class CenteredScaling:
    """w_unit = (w - shift) / sqrt(norm2); recorded so the map can be reported."""
    shift: Fraction
    norm2: Fraction
    centered: tuple

    def describe(self) -> str:
        return f"w -> (w - {self.shift}) / sqrt({self.norm2})"


def center_and_normalize(w) -> CenteredScaling:
    w = as_vector(w)
    if w.is_constant():
        raise PreconditionError("constant w cannot be centered to a unit vector")
    mean = w.total() / w.n
    c = tuple(x - mean for x in w.coords)
    return CenteredScaling(mean, sum((x * x for x in c), Fraction(0)), c)


def decay_window(scaling: CenteredScaling, n: int, L, grid_scale: int) -> tuple[int, int]:
    """Inclusive grid range of centered sums y with |y / ||w_c|| - L n| <= 1.

    With s = ||w_c||, the event is (L n - 1) s <= y <= (L n + 1) s; the
    irrational endpoints are converted to grid integers exactly.
    """
    L = to_fraction(L)
    q = scaling.norm2
    lo = ceil_sqrt_times((L * n - 1) * grid_scale, q)
    hi = floor_sqrt_times((L * n + 1) * grid_scale, q)
    return lo, hi


def soze_decay_profile(w, n: int, L_values, samples: int, seed: int, threads=None):
    """Monte Carlo P(|w_pi . v - L n| <= 1) for v = (1..n), w centered to unit norm.

    Returns (list of (L, McEstimate), the centering map).
    """
    from .sampling import estimate_grid_window

    w = as_vector(w)
    if w.n != n:
        raise PreconditionError(f"len(w)={w.n} differs from n={n}")
    sc = center_and_normalize(w)
    v = list(range(1, n + 1))
    out = []
    for L in L_values:
        est = estimate_grid_window(sc.centered, v, lambda scale, L=L: decay_window(sc, n, L, scale),
                                   samples, seed, threads)
        out.append((to_fraction(L), est))
    return out, sc

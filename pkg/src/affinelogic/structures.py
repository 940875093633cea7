"""Finite metric structures: validation, exact evaluation, quotients.

A FiniteStructure has an explicit finite universe; quantifiers are evaluated
by exhaustive maxima/minima, so every value is an exact rational.  The tuple
metric is the coordinatewise sum for exponent 1.  For exponent p > 1 the
stored metric matrix may hold p-th powers of distances (``metric_power = p``),
in which case distance atoms evaluate to those stored powers and validation
compares p-th powers instead of taking roots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import EvalError, ValidationError
from .syntax import (
    Condition,
    Const,
    Dist,
    Formula,
    Inf,
    Max,
    Min,
    One,
    Rel,
    Scale,
    Signature,
    Sum,
    Sup,
    Term,
    Var,
)

Assignment = Mapping[str, str]


@dataclass
class FiniteStructure:
    """A finite universe with a rational (pseudo)metric and full interpretation tables.

    metric_power=1 means the matrix holds distances; metric_power=p>1 means it
    holds exact p-th powers of distances (used for means built in L^p mode).
    """

    points: tuple[str, ...]
    metric: tuple[tuple[Fraction, ...], ...]
    constants: dict[str, str]
    functions: dict[str, dict[tuple[str, ...], str]]
    relations: dict[str, dict[tuple[str, ...], Fraction]]
    metric_power: int = 1
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._index = {p: i for i, p in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise ValidationError("duplicate point ids")
        if not self.points:
            raise ValidationError("empty universe")

    def d(self, a: str, b: str) -> Fraction:
        """Stored metric entry (a p-th power when metric_power > 1)."""
        return self.metric[self._index[a]][self._index[b]]

    def dist_power(self, a: str, b: str, p: int) -> Fraction:
        """d(a,b)^p as an exact rational."""
        if p == self.metric_power:
            return self.d(a, b)
        if self.metric_power == 1:
            return self.d(a, b) ** p
        raise EvalError(
            f"structure stores {self.metric_power}-th powers; cannot evaluate at exponent {p}"
        )

    def tuple_dist(self, xs: Sequence[str], ys: Sequence[str]) -> Fraction:
        """Sum metric on tuples (exponent-1 convention)."""
        if self.metric_power != 1:
            raise EvalError("tuple distances need an exponent-1 metric")
        return sum((self.d(a, b) for a, b in zip(xs, ys)), Fraction(0))


def make_structure(
    points: Sequence[str],
    metric: Mapping[tuple[str, str], object] | Sequence[Sequence[object]],
    constants: Mapping[str, str] | None = None,
    functions: Mapping[str, Mapping[tuple[str, ...], str]] | None = None,
    relations: Mapping[str, Mapping[tuple[str, ...], object]] | None = None,
    metric_power: int = 1,
) -> FiniteStructure:
    """Build a FiniteStructure, symmetrizing the metric input.

    ``metric`` is either a full row-major matrix or a mapping on (unordered)
    pairs; missing diagonal entries default to 0.
    """
    pts = tuple(points)
    n = len(pts)
    idx = {p: i for i, p in enumerate(pts)}
    rows = [[Fraction(0)] * n for _ in range(n)]
    if isinstance(metric, Mapping):
        for (a, b), v in metric.items():
            rows[idx[a]][idx[b]] = Fraction(v)
            rows[idx[b]][idx[a]] = Fraction(v)
    else:
        for i, row in enumerate(metric):
            for j, v in enumerate(row):
                rows[i][j] = Fraction(v)
    return FiniteStructure(
        points=pts,
        metric=tuple(tuple(row) for row in rows),
        constants=dict(constants or {}),
        functions={f: dict(tab) for f, tab in (functions or {}).items()},
        relations={
            r: {k: Fraction(v) for k, v in tab.items()} for r, tab in (relations or {}).items()
        },
        metric_power=metric_power,
    )


# ---------------------------------------------------------------------------
# Root-sum comparisons for p-th power matrices.
#
# leq_root_sum decides  c^(1/p) <= a^(1/p) + b^(1/p)  exactly for nonnegative
# rationals.  p=1 is direct, p=2 has a quadratic closed form, and larger p is
# handled through exact rational p-th roots plus interval bisection.


def _rational_root(x: Fraction, p: int) -> Fraction | None:
    """The exact p-th root of x if it is rational, else None."""
    if x < 0:
        raise ValueError("negative radicand")
    num = _iroot(x.numerator, p)
    den = _iroot(x.denominator, p)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _iroot(n: int, p: int) -> int | None:
    if n in (0, 1):
        return n
    try:
        r = round(n ** (1.0 / p))
    except OverflowError:
        r = -1
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**p == n:
            return cand
    # float guess can be off (or overflow) for very large n; integer bisection
    lo, hi = 0, 1
    while hi**p < n:
        hi *= 2
    while lo <= hi:
        mid = (lo + hi) // 2
        m = mid**p
        if m == n:
            return mid
        if m < n:
            lo = mid + 1
        else:
            hi = mid - 1
    return None


def _root_bounds(x: Fraction, p: int, steps: int) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds of x^(1/p) after `steps` bisection rounds."""
    if x == 0:
        return Fraction(0), Fraction(0)
    lo, hi = Fraction(0), max(Fraction(1), x)
    for _ in range(steps):
        mid = (lo + hi) / 2
        if mid**p <= x:
            lo = mid
        else:
            hi = mid
    return lo, hi


def leq_root_sum(c: Fraction, a: Fraction, b: Fraction, p: int) -> bool:
    """Decide c^(1/p) <= a^(1/p) + b^(1/p) for nonnegative rationals, exactly."""
    if min(a, b, c) < 0:
        raise ValueError("negative entries")
    if p == 1:
        return c <= a + b
    if a == 0:
        return c <= b
    if b == 0:
        return c <= a
    if p == 2:
        t = c - a - b
        return t <= 0 or t * t <= 4 * a * b
    # Exact shortcut: all three roots rational, or a/b a p-th power.
    ra, rb, rc = (_rational_root(v, p) for v in (a, b, c))
    if ra is not None and rb is not None and rc is not None:
        return rc <= ra + rb
    s = _rational_root(a / b, p)
    if s is not None:  # a^(1/p)+b^(1/p) = (s+1) b^(1/p)
        return c <= (s + 1) ** p * b
    for steps in (32, 64, 128, 256):
        alo, ahi = _root_bounds(a, p, steps)
        blo, bhi = _root_bounds(b, p, steps)
        clo, chi = _root_bounds(c, p, steps)
        if chi <= alo + blo:
            return True
        if clo > ahi + bhi:
            return False
    raise ValidationError(
        f"undecided root-sum comparison at exponent {p}; entries {a}, {b}, {c}"
    )


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    amount: Fraction | None = None

    def __str__(self):
        extra = f" by {self.amount}" if self.amount is not None else ""
        return f"{self.kind}: {self.where}{extra}"


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def valid(self) -> bool:
        return not self.violations


def validate(m: FiniteStructure, sig: Signature, p: int | None = None) -> ValidationReport:
    """Check all structure invariants against a signature.

    Reports every violated instance: metric axioms (zero diagonal, symmetry,
    triangle inequality, entries in [0,1]), totality of tables, Lipschitz
    bounds for functions and relations, relation values in [0,1].  With a
    p-th-power metric the triangle inequality is checked on stored powers.
    """
    p = m.metric_power if p is None else p
    v: list[Violation] = []
    pts = m.points
    n = len(pts)

    for i in range(n):
        if m.metric[i][i] != 0:
            v.append(Violation("nonzero-self-distance", pts[i], m.metric[i][i]))
        for j in range(n):
            e = m.metric[i][j]
            if e < 0 or e > 1:
                v.append(Violation("metric-out-of-range", f"d({pts[i]},{pts[j]})", e))
            if m.metric[j][i] != e:
                v.append(Violation("asymmetric-metric", f"d({pts[i]},{pts[j]})"))

    # triangle inequality on a common integer denominator for speed
    den = 1
    for row in m.metric:
        for e in row:
            den = den * e.denominator // math.gcd(den, e.denominator)
    imat = [[int(e * den) for e in row] for row in m.metric]
    if p == 1 or m.metric_power == 1:
        for i in range(n):
            ri = imat[i]
            for j in range(i + 1, n):
                dij = ri[j]
                rj = imat[j]
                for k in range(n):
                    if dij > ri[k] + rj[k]:
                        v.append(
                            Violation(
                                "triangle-violation",
                                f"d({pts[i]},{pts[j]}) > d({pts[i]},{pts[k]})+d({pts[k]},{pts[j]})",
                                Fraction(dij - ri[k] - rj[k], den),
                            )
                        )
    else:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(n):
                    if not leq_root_sum(m.metric[i][j], m.metric[i][k], m.metric[k][j], p):
                        v.append(
                            Violation(
                                "triangle-violation",
                                f"d({pts[i]},{pts[j]}) > d({pts[i]},{pts[k]})+d({pts[k]},{pts[j]})"
                                f" (compared in {p}-th powers)",
                            )
                        )

    def tuple_power_dist(xs: tuple[str, ...], ys: tuple[str, ...]) -> Fraction:
        return sum((m.dist_power(a, b, p) for a, b in zip(xs, ys)), Fraction(0))

    for sym in sig.constants():
        if sym.name not in m.constants:
            v.append(Violation("missing-interpretation", sym.name))
        elif m.constants[sym.name] not in m._index:
            v.append(Violation("constant-not-a-point", sym.name))

    for sym in sig.functions():
        tab = m.functions.get(sym.name)
        if tab is None:
            v.append(Violation("missing-interpretation", sym.name))
            continue
        domain = list(itertools.product(pts, repeat=sym.arity))
        for args in domain:
            if args not in tab:
                v.append(Violation("table-gap", f"{sym.name}{args}"))
            elif tab[args] not in m._index:
                v.append(Violation("value-not-a-point", f"{sym.name}{args}"))
        if any(args not in tab for args in domain):
            continue
        lam = sym.lipschitz
        for xs in domain:
            for ys in domain:
                lhs = m.dist_power(tab[xs], tab[ys], p)
                rhs = tuple_power_dist(xs, ys)
                ok = (
                    leq_root_sum(lhs, rhs * lam**p, Fraction(0), p)
                    if p != 1
                    else lhs <= lam * rhs
                )
                if not ok:
                    v.append(
                        Violation(
                            "function-lipschitz",
                            f"d({sym.name}{xs},{sym.name}{ys}) > {lam}*d({xs},{ys})",
                        )
                    )

    for sym in sig.relations():
        tab = m.relations.get(sym.name)
        if tab is None:
            v.append(Violation("missing-interpretation", sym.name))
            continue
        domain = list(itertools.product(pts, repeat=sym.arity))
        for args in domain:
            if args not in tab:
                v.append(Violation("table-gap", f"{sym.name}{args}"))
            else:
                val = tab[args]
                if val < 0 or val > 1:
                    v.append(Violation("relation-out-of-range", f"{sym.name}{args}", val))
        if any(args not in tab for args in domain):
            continue
        lam = sym.lipschitz
        for xs in domain:
            for ys in domain:
                diff = tab[xs] - tab[ys]
                if diff <= 0:
                    continue
                rhs = tuple_power_dist(xs, ys)
                ok = leq_root_sum(diff**p, rhs * lam**p, Fraction(0), p) if p != 1 else diff <= lam * rhs
                if not ok:
                    v.append(
                        Violation(
                            "relation-lipschitz",
                            f"{sym.name}{xs} - {sym.name}{ys} > {lam}*d({xs},{ys})",
                            diff,
                        )
                    )

    return ValidationReport(v)


# ---------------------------------------------------------------------------
# Evaluation


def term_value(m: FiniteStructure, t: Term, asg: Assignment) -> str:
    if isinstance(t, Var):
        try:
            point = asg[t.name]
        except KeyError:
            raise EvalError(f"no assignment for variable {t.name}") from None
        if point not in m._index:
            raise EvalError(f"{point!r} (assigned to {t.name}) is not a point")
        return point
    if isinstance(t, Const):
        try:
            return m.constants[t.name]
        except KeyError:
            raise EvalError(f"no interpretation for constant {t.name}") from None
    vals = tuple(term_value(m, a, asg) for a in t.args)
    try:
        return m.functions[t.func][vals]
    except KeyError:
        raise EvalError(f"table gap at {t.func}{vals}") from None


def eval_formula(
    m: FiniteStructure,
    phi: Formula,
    asg: Assignment | None = None,
    p: int = 1,
) -> Fraction:
    """Exact value of a formula under an assignment covering its free variables.

    Distance atoms evaluate to d^p; quantifiers are exhaustive over the finite
    universe, so the result is the true sup/inf.
    """
    if not (isinstance(p, int) and p >= 1):
        raise EvalError(f"exponent must be a positive integer, got {p!r}")
    scope: dict[str, str] = dict(asg or {})
    missing = phi.free - scope.keys()
    if missing:
        raise EvalError(f"assignment is missing variables {sorted(missing)}")

    def go(f: Formula) -> Fraction:
        if isinstance(f, One):
            return Fraction(1)
        if isinstance(f, Dist):
            return m.dist_power(term_value(m, f.left, scope), term_value(m, f.right, scope), p)
        if isinstance(f, Rel):
            vals = tuple(term_value(m, a, scope) for a in f.args)
            try:
                return m.relations[f.rel][vals]
            except KeyError:
                raise EvalError(f"table gap at {f.rel}{vals}") from None
        if isinstance(f, Sum):
            return go(f.left) + go(f.right)
        if isinstance(f, Scale):
            return f.coeff * go(f.body)
        if isinstance(f, Min):
            return min(go(f.left), go(f.right))
        if isinstance(f, Max):
            return max(go(f.left), go(f.right))
        if isinstance(f, (Sup, Inf)):
            pick = max if isinstance(f, Sup) else min
            x = f.varname
            saved = scope.get(x)
            best: Fraction | None = None
            for pt in m.points:
                scope[x] = pt
                val = go(f.body)
                best = val if best is None else pick(best, val)
            if saved is None:
                del scope[x]
            else:
                scope[x] = saved
            assert best is not None
            return best
        raise TypeError(f)

    return go(phi)


def check_condition(
    m: FiniteStructure,
    cond: Condition,
    asg: Assignment | None = None,
    p: int = 1,
) -> tuple[bool, Fraction]:
    """Evaluate a condition; returns (holds, margin) with margin = rhs - lhs."""
    margin = eval_formula(m, cond.rhs, asg, p) - eval_formula(m, cond.lhs, asg, p)
    return margin >= 0, margin


def holds_universally(m: FiniteStructure, cond: Condition, p: int = 1) -> tuple[bool, Fraction]:
    """Check a condition under every assignment of its free variables.

    Returns (holds, worst margin over assignments).
    """
    free = sorted(cond.free)
    worst: Fraction | None = None
    for combo in itertools.product(m.points, repeat=len(free)):
        _, margin = check_condition(m, cond, dict(zip(free, combo)), p)
        worst = margin if worst is None else min(worst, margin)
    assert worst is not None
    return worst >= 0, worst


# ---------------------------------------------------------------------------
# Quotient


def quotient(m: FiniteStructure) -> tuple[FiniteStructure, dict[str, str]]:
    """Identify points at stored distance 0.

    Returns the quotient structure and the point -> representative map.  The
    Lipschitz invariants make all interpretations well-defined on classes;
    this is asserted for every merged entry.
    """
    reps: list[str] = []
    rep_of: dict[str, str] = {}
    for a in m.points:
        for r in reps:
            if m.d(a, r) == 0:
                rep_of[a] = r
                break
        else:
            reps.append(a)
            rep_of[a] = a

    if len(reps) == len(m.points):
        return m, rep_of

    def cls(x: str) -> str:
        return rep_of[x]

    new_metric = {
        (a, b): m.d(a, b) for a, b in itertools.combinations(reps, 2)
    }
    new_constants = {c: cls(x) for c, x in m.constants.items()}
    new_functions: dict[str, dict[tuple[str, ...], str]] = {}
    for fname, tab in m.functions.items():
        arity = len(next(iter(tab)))
        newtab: dict[tuple[str, ...], str] = {}
        for args in itertools.product(reps, repeat=arity):
            newtab[args] = cls(tab[args])
        for args, val in tab.items():
            mapped = tuple(cls(a) for a in args)
            if cls(val) != newtab[mapped]:
                raise ValidationError(f"function {fname} not well-defined on classes at {args}")
        new_functions[fname] = newtab
    new_relations: dict[str, dict[tuple[str, ...], Fraction]] = {}
    for rname, tab in m.relations.items():
        arity = len(next(iter(tab)))
        newtab_r: dict[tuple[str, ...], Fraction] = {}
        for args in itertools.product(reps, repeat=arity):
            newtab_r[args] = tab[args]
        for args, val in tab.items():
            mapped = tuple(cls(a) for a in args)
            if newtab_r[mapped] != val:
                raise ValidationError(f"relation {rname} not well-defined on classes at {args}")
        new_relations[rname] = newtab_r

    q = make_structure(
        reps,
        new_metric,
        new_constants,
        new_functions,
        new_relations,
        metric_power=m.metric_power,
    )
    return q, rep_of


# ---------------------------------------------------------------------------
# Rendez-vous values


def rendezvous_value(m: FiniteStructure, n: int) -> tuple[Fraction, Fraction]:
    """(sup-inf, inf-sup) of the n-point average-distance sentences.

    lower = sup over x1..xn of inf over y of (1/n) sum d(xi,y);
    upper = inf over x1..xn of sup over y of the same average.
    Computed by exhaustive integer loops on a common denominator.
    """
    if n < 1:
        raise EvalError("n must be >= 1")
    if m.metric_power != 1:
        raise EvalError("rendezvous values need an exponent-1 metric")
    den = 1
    for row in m.metric:
        for e in row:
            den = den * e.denominator // math.gcd(den, e.denominator)
    imat = [[int(e * den) for e in row] for row in m.metric]
    npts = len(m.points)
    lower_best = None
    upper_best = None
    for combo in itertools.combinations_with_replacement(range(npts), n):
        rows = [imat[i] for i in combo]
        sums = [sum(r[y] for r in rows) for y in range(npts)]
        lo = min(sums)
        hi = max(sums)
        lower_best = lo if lower_best is None else max(lower_best, lo)
        upper_best = hi if upper_best is None else min(upper_best, hi)
    assert lower_best is not None and upper_best is not None
    return Fraction(lower_best, n * den), Fraction(upper_best, n * den)


def rendezvous_sentences(n: int) -> tuple[Formula, Formula]:
    """The two n-point rendez-vous sentences (sup-inf and inf-sup forms)."""
    xs = [f"x{i+1}" for i in range(n)]
    avg: Formula = Scale(
        Fraction(1, n),
        _sum_chain([Dist(Var(x), Var("y")) for x in xs]),
    )
    lower: Formula = Inf("y", avg)
    upper: Formula = Sup("y", avg)
    for x in reversed(xs):
        lower = Sup(x, lower)
        upper = Inf(x, upper)
    return lower, upper


def _sum_chain(parts: Sequence[Formula]) -> Formula:
    acc = parts[0]
    for part in parts[1:]:
        acc = Sum(acc, part)
    return acc

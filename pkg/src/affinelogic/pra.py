"""Symbolic quantifier elimination for the affine theory of probability algebras.

The probability-algebra language has Boolean operations and/or/not/sym (the
last is symmetric difference), constants zero/one, the measure relation mu,
and the metric d(x,y) = mu(sym(x,y)).  Every quantifier-free formula is a
rational constant plus a rational combination of measures of events; events
are kept in minterm normal form over their minimal supporting variables.

Elimination of sup_y works on the full minterm expansion over all variables
in scope including y: writing the value as
c + sum over minterms m of x-variables of [a+(m) mu(m & y) + a-(m) mu(m & ~y)],
the measures mu(m & y) range independently over [0, mu(m)] as y ranges over
the algebra, so the supremum is c + sum max(a+(m), a-(m)) mu(m), attained at
y = union of the minterms with a+ > a-.  inf goes through
inf_y phi = -sup_y(-phi).  A brute-force oracle over small finite algebras
(quantifiers range over all events) adjudicates every rewrite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import NotAffineError, SignatureError, ValidationError
from .structures import FiniteStructure, make_structure
from .syntax import (
    App,
    Const,
    Dist,
    Formula,
    Inf,
    One,
    Rel,
    Scale,
    Signature,
    Sum,
    Sup,
    Term,
    Var,
    constant_symbol,
    format_fraction,
    function_symbol,
    relation_symbol,
)

BOOLEAN_FUNCTIONS = {"and": 2, "or": 2, "sym": 2, "not": 1}


def pra_signature() -> Signature:
    return Signature(
        [
            relation_symbol("mu", 1, 1),
            function_symbol("and", 2, 1),
            function_symbol("or", 2, 1),
            function_symbol("sym", 2, 1),
            function_symbol("not", 1, 1),
            constant_symbol("zero"),
            constant_symbol("one"),
        ]
    )


# ---------------------------------------------------------------------------
# Events in minterm normal form


@dataclass(frozen=True)
class EventTerm:
    """A Boolean event over its minimal supporting variables.

    minterms holds bitmasks over `vars` (bit i set = vars[i] occurs
    positively); the event is the union of its minterms.  Variables the event
    does not depend on are projected away, so equal events have equal
    representations.
    """

    vars: tuple[str, ...]
    minterms: frozenset[int]

    @staticmethod
    def zero() -> "EventTerm":
        return EventTerm((), frozenset())

    @staticmethod
    def one() -> "EventTerm":
        return EventTerm((), frozenset({0}))

    @staticmethod
    def variable(name: str) -> "EventTerm":
        return EventTerm((name,), frozenset({1}))

    @property
    def is_zero(self) -> bool:
        return not self.minterms

    @property
    def is_one(self) -> bool:
        return not self.vars and self.minterms

    def lift(self, scope: tuple[str, ...]) -> frozenset[int]:
        """Minterm masks of this event over a larger variable scope."""
        pos = {v: i for i, v in enumerate(scope)}
        own = [pos[v] for v in self.vars]
        free = [i for i in range(len(scope)) if scope[i] not in self.vars]
        out = set()
        for m in self.minterms:
            base = 0
            for bit, target in enumerate(own):
                if m >> bit & 1:
                    base |= 1 << target
            for extra in range(1 << len(free)):
                mask = base
                for bit, target in enumerate(free):
                    if extra >> bit & 1:
                        mask |= 1 << target
                out.add(mask)
        return frozenset(out)


def _reduce(scope: tuple[str, ...], minterms: frozenset[int]) -> EventTerm:
    """Project away variables the minterm set does not depend on."""
    vars_ = list(scope)
    masks = set(minterms)
    i = 0
    while i < len(vars_):
        bit = 1 << i
        if all((m ^ bit) in masks for m in masks):
            masks = {
                ((m >> (i + 1)) << i) | (m & (bit - 1)) for m in masks if not m & bit
            }
            del vars_[i]
        else:
            i += 1
    if not masks:
        return EventTerm.zero()
    return EventTerm(tuple(vars_), frozenset(masks))


def _common_scope(a: EventTerm, b: EventTerm) -> tuple[str, ...]:
    return tuple(sorted(set(a.vars) | set(b.vars)))


def event_and(a: EventTerm, b: EventTerm) -> EventTerm:
    scope = _common_scope(a, b)
    return _reduce(scope, a.lift(scope) & b.lift(scope))


def event_or(a: EventTerm, b: EventTerm) -> EventTerm:
    scope = _common_scope(a, b)
    return _reduce(scope, a.lift(scope) | b.lift(scope))


def event_sym(a: EventTerm, b: EventTerm) -> EventTerm:
    scope = _common_scope(a, b)
    return _reduce(scope, a.lift(scope) ^ b.lift(scope))


def event_not(a: EventTerm) -> EventTerm:
    full = frozenset(range(1 << len(a.vars)))
    return _reduce(a.vars, full - a.minterms)


def event_from_term(t: Term) -> EventTerm:
    if isinstance(t, Var):
        return EventTerm.variable(t.name)
    if isinstance(t, Const):
        if t.name == "zero":
            return EventTerm.zero()
        if t.name == "one":
            return EventTerm.one()
        raise SignatureError(f"unknown probability-algebra constant {t.name}")
    if isinstance(t, App):
        args = [event_from_term(a) for a in t.args]
        if t.func == "and":
            return event_and(*args)
        if t.func == "or":
            return event_or(*args)
        if t.func == "sym":
            return event_sym(*args)
        if t.func == "not":
            return event_not(args[0])
        raise SignatureError(f"unknown probability-algebra function {t.func}")
    raise TypeError(t)


def conjunction_event(names: Sequence[str]) -> EventTerm:
    """The event  x1 and ... and xn  (the full-ones minterm over its variables)."""
    vs = tuple(sorted(names))
    if not vs:
        return EventTerm.one()
    return EventTerm(vs, frozenset({(1 << len(vs)) - 1}))


def event_depends_positively(e: EventTerm, y: str) -> bool:
    """True if y does not occur in e, or occurs only positively (every minterm
    has the y bit set)."""
    if y not in e.vars:
        return True
    bit = 1 << e.vars.index(y)
    return all(m & bit for m in e.minterms)


# ---------------------------------------------------------------------------
# Quantifier-free measure combinations


@dataclass(frozen=True)
class PraFormula:
    """constant + sum of coeff * mu(event); atoms collapsed, zero-free, sorted."""

    constant: Fraction
    atoms: tuple[tuple[Fraction, EventTerm], ...]

    @property
    def variables(self) -> tuple[str, ...]:
        out: set[str] = set()
        for _, e in self.atoms:
            out.update(e.vars)
        return tuple(sorted(out))

    @property
    def is_constant(self) -> bool:
        return not self.atoms


def make_pra(
    constant: Fraction | int, atoms: Sequence[tuple[Fraction, EventTerm]]
) -> PraFormula:
    const = Fraction(constant)
    merged: dict[EventTerm, Fraction] = {}
    for coeff, event in atoms:
        if event.is_zero:
            continue
        if event.is_one:
            const += coeff
            continue
        merged[event] = merged.get(event, Fraction(0)) + coeff
    cleaned = sorted(
        ((c, e) for e, c in merged.items() if c != 0),
        key=lambda item: (len(item[1].vars), item[1].vars, sorted(item[1].minterms)),
    )
    return PraFormula(const, tuple(cleaned))


def pra_add(a: PraFormula, b: PraFormula) -> PraFormula:
    return make_pra(a.constant + b.constant, a.atoms + b.atoms)


def pra_scale(r: Fraction, a: PraFormula) -> PraFormula:
    return make_pra(r * a.constant, [(r * c, e) for c, e in a.atoms])


def pra_neg(a: PraFormula) -> PraFormula:
    return pra_scale(Fraction(-1), a)


def expand_inclusion_exclusion(event: EventTerm) -> PraFormula:
    """Rewrite mu(event) as an integer combination of measures of positive
    conjunctions (inclusion-exclusion over the minterm set), e.g.
    mu(x or y) -> mu(x) + mu(y) - mu(x and y)."""
    coeffs: dict[frozenset[str], Fraction] = {}
    n = len(event.vars)
    for m in event.minterms:
        pos = [i for i in range(n) if m >> i & 1]
        rest = [i for i in range(n) if not m >> i & 1]
        for r in range(len(rest) + 1):
            for extra in itertools.combinations(rest, r):
                key = frozenset(event.vars[i] for i in pos + list(extra))
                coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction((-1) ** r)
    atoms = [(c, conjunction_event(sorted(k))) for k, c in coeffs.items()]
    return make_pra(0, atoms)


def canonicalize(phi: PraFormula) -> PraFormula:
    """Unique normal form: every event a positive conjunction.

    Measures of positive conjunctions are linearly independent functionals on
    finite algebras, so equal formulas get identical canonical forms.
    """
    out = make_pra(phi.constant, [])
    for coeff, event in phi.atoms:
        out = pra_add(out, pra_scale(coeff, expand_inclusion_exclusion(event)))
    return out


def split_on(phi: PraFormula, y: str) -> PraFormula:
    """Refine atoms so y occurs positively or not at all in every event.

    Each mu(e) with mixed occurrences of y becomes
    mu(e & y) + [mu(f) - mu(f & y)] where f is the y-part of e with y freed;
    overlapping pieces collapse, so the postcondition can undo the split
    textually while the value is preserved on every algebra.
    """
    atoms: list[tuple[Fraction, EventTerm]] = []
    yev = EventTerm.variable(y)
    for coeff, event in phi.atoms:
        if y not in event.vars:
            atoms.append((coeff, event))
            continue
        bit = 1 << event.vars.index(y)
        pos = frozenset(m for m in event.minterms if m & bit)
        neg = frozenset(m for m in event.minterms if not m & bit)
        if pos:
            atoms.append((coeff, _reduce(event.vars, pos)))
        if neg:
            freed = _reduce(event.vars, neg | {m | bit for m in neg})
            atoms.append((coeff, freed))
            atoms.append((-coeff, event_and(freed, yev)))
    result = make_pra(phi.constant, atoms)
    assert all(event_depends_positively(e, y) for _, e in result.atoms)
    return result


def eliminate_sup(phi: PraFormula, y: str) -> PraFormula:
    """Exact supremum over all events y of a quantifier-free measure combination.

    Internally refines all events to pairwise-disjoint minterms over every
    variable in scope including y, then keeps the better of the y / not-y
    coefficient for each minterm of the remaining variables.  The output
    mentions only the other variables and is returned in canonical
    (positive-conjunction) form.
    """
    xvars = tuple(v for v in phi.variables if v != y)
    scope = tuple(sorted(xvars)) + (y,)
    ybit = 1 << (len(scope) - 1)
    coeff: dict[int, Fraction] = {}
    for c, event in phi.atoms:
        for m in event.lift(scope):
            coeff[m] = coeff.get(m, Fraction(0)) + c
    atoms: list[tuple[Fraction, EventTerm]] = []
    for mx in range(1 << len(xvars)):
        a_pos = coeff.get(mx | ybit, Fraction(0))
        a_neg = coeff.get(mx, Fraction(0))
        best = max(a_pos, a_neg)
        if best != 0:
            atoms.append((best, _reduce(tuple(sorted(xvars)), frozenset({mx}))))
    return canonicalize(make_pra(phi.constant, atoms))


def qe(phi: Formula) -> PraFormula:
    """Eliminate all quantifiers from a probability-algebra formula.

    Accepts arbitrary nesting (not just prefixes); inf is routed through
    inf_y phi = -sup_y(-phi).  Sentences come out as plain constants.
    """
    if isinstance(phi, One):
        return make_pra(1, [])
    if isinstance(phi, Rel):
        if phi.rel != "mu":
            raise SignatureError(f"relation {phi.rel} is not part of the PrA language")
        return make_pra(0, [(Fraction(1), event_from_term(phi.args[0]))])
    if isinstance(phi, Dist):
        event = event_sym(event_from_term(phi.left), event_from_term(phi.right))
        return make_pra(0, [(Fraction(1), event)])
    if isinstance(phi, Sum):
        return pra_add(qe(phi.left), qe(phi.right))
    if isinstance(phi, Scale):
        return pra_scale(phi.coeff, qe(phi.body))
    if isinstance(phi, Sup):
        return eliminate_sup(qe(phi.body), phi.varname)
    if isinstance(phi, Inf):
        return pra_neg(eliminate_sup(pra_neg(qe(phi.body)), phi.varname))
    raise NotAffineError("min/max are not part of the affine PrA fragment")


# ---------------------------------------------------------------------------
# Finite algebras and the exhaustive oracle


@dataclass(frozen=True)
class FiniteAlgebra:
    """The powerset algebra on k atoms with nonnegative atom weights summing to 1."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.weights:
            raise ValidationError("an algebra needs at least one atom")
        if any(w < 0 for w in self.weights):
            raise ValidationError("negative atom weight")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValidationError("atom weights must sum to 1")

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    @property
    def full(self) -> int:
        return (1 << self.atom_count) - 1

    def events(self) -> range:
        return range(1 << self.atom_count)

    def measure(self, event: int) -> Fraction:
        return sum(
            (w for i, w in enumerate(self.weights) if event >> i & 1), Fraction(0)
        )


def algebra(weights: Sequence[Fraction | int | str]) -> FiniteAlgebra:
    return FiniteAlgebra(tuple(Fraction(w) for w in weights))


def weight_grid(k: int, step_denominator: int = 4) -> list[FiniteAlgebra]:
    """All k-atom algebras whose weights are multiples of 1/step_denominator."""

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    return [
        FiniteAlgebra(tuple(Fraction(c, step_denominator) for c in comp))
        for comp in compositions(step_denominator, k)
    ]


def algebras_up_to(kmax: int, step_denominator: int = 4) -> list[FiniteAlgebra]:
    out: list[FiniteAlgebra] = []
    for k in range(1, kmax + 1):
        out.extend(weight_grid(k, step_denominator))
    return out


def _term_event(t: Term, alg: FiniteAlgebra, asg: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise ValidationError(f"no event assigned to variable {t.name}") from None
    if isinstance(t, Const):
        if t.name == "zero":
            return 0
        if t.name == "one":
            return alg.full
        raise SignatureError(f"unknown constant {t.name}")
    args = [_term_event(a, alg, asg) for a in t.args]
    if t.func == "and":
        return args[0] & args[1]
    if t.func == "or":
        return args[0] | args[1]
    if t.func == "sym":
        return args[0] ^ args[1]
    if t.func == "not":
        return alg.full & ~args[0]
    raise SignatureError(f"unknown function {t.func}")


def oracle_eval(
    phi: Formula | PraFormula, alg: FiniteAlgebra, asg: Mapping[str, int] | None = None
) -> Fraction:
    """Brute-force value on a finite algebra; quantifiers range over all events."""
    scope = dict(asg or {})
    if isinstance(phi, PraFormula):
        total = phi.constant
        for coeff, event in phi.atoms:
            mask = 0
            for m in event.minterms:
                piece = alg.full
                for i, v in enumerate(event.vars):
                    ev = scope.get(v)
                    if ev is None:
                        raise ValidationError(f"no event assigned to variable {v}")
                    piece &= ev if m >> i & 1 else alg.full & ~ev
                mask |= piece
            total += coeff * alg.measure(mask)
        return total

    def go(f: Formula) -> Fraction:
        if isinstance(f, One):
            return Fraction(1)
        if isinstance(f, Rel):
            if f.rel != "mu":
                raise SignatureError(f"relation {f.rel} is not part of the PrA language")
            return alg.measure(_term_event(f.args[0], alg, scope))
        if isinstance(f, Dist):
            return alg.measure(
                _term_event(f.left, alg, scope) ^ _term_event(f.right, alg, scope)
            )
        if isinstance(f, Sum):
            return go(f.left) + go(f.right)
        if isinstance(f, Scale):
            return f.coeff * go(f.body)
        if isinstance(f, (Sup, Inf)):
            pick = max if isinstance(f, Sup) else min
            saved = scope.get(f.varname)
            best: Fraction | None = None
            for event in alg.events():
                scope[f.varname] = event
                val = go(f.body)
                best = val if best is None else pick(best, val)
            if saved is None:
                del scope[f.varname]
            else:
                scope[f.varname] = saved
            assert best is not None
            return best
        raise NotAffineError("min/max are not part of the affine PrA fragment")

    return go(phi)


# ---------------------------------------------------------------------------
# Formatting and conversion back to the shared formula syntax


def format_event(event: EventTerm) -> str:
    """Event as a term string; canonical conjunctions come out as nested ands."""
    if event.is_zero:
        return "zero"
    if event.is_one:
        return "one"
    parts = []
    for m in sorted(event.minterms):
        lits = [
            v if m >> i & 1 else f"not({v})" for i, v in enumerate(event.vars)
        ]
        term = lits[0]
        for lit in lits[1:]:
            term = f"and({term},{lit})"
        parts.append(term)
    out = parts[0]
    for part in parts[1:]:
        out = f"or({out},{part})"
    return out


def format_pra(phi: PraFormula) -> str:
    """Textual form in the shared grammar, e.g. 'mu(x) + -2*mu(and(x,y))'."""
    parts: list[str] = []
    if phi.constant != 0 or not phi.atoms:
        if phi.constant == 1:
            parts.append("1")
        else:
            parts.append(f"{format_fraction(phi.constant)}*1")
    for coeff, event in phi.atoms:
        atom = f"mu({format_event(event)})"
        parts.append(atom if coeff == 1 else f"{format_fraction(coeff)}*{atom}")
    return " + ".join(parts)


def pra_as_formula(phi: PraFormula, sig: Signature | None = None) -> Formula:
    """PraFormula back to a shared-syntax Formula (via its printed form)."""
    from .syntax import parse_formula

    return parse_formula(format_pra(phi), sig or pra_signature())


def structure_from_algebra(alg: FiniteAlgebra) -> FiniteStructure:
    """The algebra as a finite metric structure over the PrA signature.

    Points are the events named by their atom bitstrings (e.g. e101), the
    metric is mu of the symmetric difference, and all tables are total.
    """
    k = alg.atom_count
    names = {event: "e" + format(event, f"0{k}b") for event in alg.events()}
    points = [names[e] for e in alg.events()]
    metric = {
        (names[a], names[b]): alg.measure(a ^ b)
        for a in alg.events()
        for b in alg.events()
        if a < b
    }
    functions = {
        "and": {(names[a], names[b]): names[a & b] for a in alg.events() for b in alg.events()},
        "or": {(names[a], names[b]): names[a | b] for a in alg.events() for b in alg.events()},
        "sym": {(names[a], names[b]): names[a ^ b] for a in alg.events() for b in alg.events()},
        "not": {(names[a],): names[alg.full & ~a] for a in alg.events()},
    }
    relations = {"mu": {(names[a],): alg.measure(a) for a in alg.events()}}
    constants = {"zero": names[0], "one": names[alg.full]}
    return make_structure(points, metric, constants, functions, relations)


def event_of_point(name: str) -> int:
    """Invert the e<bits> naming used by structure_from_algebra."""
    return int(name[1:], 2)

"""Means of structure families under finitely supported probability charges.

The mean of a family (M_i) under weights (w_i) has as universe the choice
functions i -> a_i with points at distance 0 identified, metric
sum_i w_i d_i(a_i, b_i), componentwise functions, and averaged relations.
For every affine formula the value on a class equals the weighted average of
the member values; the test suite exercises this identity exactly.

In L^p mode the mean metric entry is the exact p-th power
sum_i w_i d_i(a_i,b_i)^p and the resulting structure is marked with
``metric_power = p``; roots are never taken.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import UniverseCapError, ValidationError
from .structures import FiniteStructure, make_structure, quotient
from .syntax import Rational, as_fraction

DEFAULT_TUPLE_CAP = 4096

_SEP = "|"


@dataclass(frozen=True)
class Charge:
    """Finitely supported probability weights over an index list."""

    ids: tuple[str, ...]
    weights: dict[str, Fraction]

    def __post_init__(self):
        if set(self.ids) != set(self.weights):
            raise ValidationError("charge ids and weights disagree")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("duplicate charge ids")
        if any(w < 0 for w in self.weights.values()):
            raise ValidationError("negative charge weight")
        if sum(self.weights.values(), Fraction(0)) != 1:
            raise ValidationError("charge weights must sum to 1")

    def __hash__(self):
        return hash((self.ids, tuple(self.weights[i] for i in self.ids)))

    def weight(self, i: str) -> Fraction:
        return self.weights[i]


def charge(weights: Mapping[str, Rational]) -> Charge:
    w = {k: as_fraction(v) for k, v in weights.items()}
    return Charge(tuple(w.keys()), w)


def uniform_charge(ids: Sequence[str]) -> Charge:
    n = len(ids)
    return charge({i: Fraction(1, n) for i in ids})


def point_mass(ids: Sequence[str], at: str) -> Charge:
    return charge({i: Fraction(1 if i == at else 0) for i in ids})


def fubini(mu: Charge, nu: Charge) -> Charge:
    """Product charge on the pair index set; ids are joined with '|'.

    Because joined ids are flat strings, (mu x nu) x rho and mu x (nu x rho)
    produce identical charges, so associativity holds on the nose.
    """
    w = {
        f"{i}{_SEP}{j}": mu.weight(i) * nu.weight(j)
        for i in mu.ids
        for j in nu.ids
    }
    return Charge(tuple(w.keys()), w)


@dataclass
class MeanStructure:
    """A mean structure together with its provenance.

    class_of maps each choice tuple (one member point per index) to the point
    id of its distance-0 class in the quotiented structure.
    """

    structure: FiniteStructure
    charge: Charge
    family_size: int
    class_of: dict[tuple[str, ...], str]
    p: int = 1

    def class_point(self, tup: Sequence[str]) -> str:
        return self.class_of[tuple(tup)]


def _tuple_id(tup: Sequence[str]) -> str:
    return _SEP.join(tup)


def ultramean(
    family: Sequence[FiniteStructure],
    mu: Charge,
    p: int = 1,
    max_tuples: int = DEFAULT_TUPLE_CAP,
) -> MeanStructure:
    """Mean of a finite family under a charge, with distance-0 tuples collapsed.

    The family order matches mu.ids.  Raises UniverseCapError if the product
    universe would exceed max_tuples.
    """
    if len(family) != len(mu.ids):
        raise ValidationError(
            f"family size {len(family)} != charge index size {len(mu.ids)}"
        )
    if not family:
        raise ValidationError("empty family")
    names = {
        "constants": [sorted(m.constants) for m in family],
        "functions": [sorted(m.functions) for m in family],
        "relations": [sorted(m.relations) for m in family],
    }
    for key, per_member in names.items():
        if any(sym != per_member[0] for sym in per_member[1:]):
            raise ValidationError(f"family members interpret different {key}")
    for m in family:
        if m.metric_power not in (1, p):
            raise ValidationError(
                f"family member stores {m.metric_power}-th powers; mean requested at exponent {p}"
            )

    size = 1
    for m in family:
        size *= len(m.points)
        if size > max_tuples:
            raise UniverseCapError(
                f"product universe exceeds the cap ({size} > {max_tuples} tuples)"
            )

    weights = [mu.weight(i) for i in mu.ids]
    tuples = list(itertools.product(*(m.points for m in family)))
    ids = [_tuple_id(t) for t in tuples]
    index = {t: i for i, t in enumerate(tuples)}

    metric: dict[tuple[str, str], Fraction] = {}
    for a_pos in range(len(tuples)):
        a = tuples[a_pos]
        for b_pos in range(a_pos + 1, len(tuples)):
            b = tuples[b_pos]
            entry = sum(
                (
                    w * m.dist_power(x, y, p)
                    for w, m, x, y in zip(weights, family, a, b)
                ),
                Fraction(0),
            )
            metric[(ids[a_pos], ids[b_pos])] = entry

    constants = {
        c: _tuple_id(tuple(m.constants[c] for m in family)) for c in family[0].constants
    }
    functions: dict[str, dict[tuple[str, ...], str]] = {}
    for fname in family[0].functions:
        arity = len(next(iter(family[0].functions[fname])))
        tab: dict[tuple[str, ...], str] = {}
        for args in itertools.product(tuples, repeat=arity):
            value = tuple(
                m.functions[fname][tuple(arg[k] for arg in args)]
                for k, m in enumerate(family)
            )
            tab[tuple(ids[index[a]] for a in args)] = _tuple_id(value)
        functions[fname] = tab
    relations: dict[str, dict[tuple[str, ...], Fraction]] = {}
    for rname in family[0].relations:
        arity = len(next(iter(family[0].relations[rname])))
        tab_r: dict[tuple[str, ...], Fraction] = {}
        for args in itertools.product(tuples, repeat=arity):
            value = sum(
                (
                    w * m.relations[rname][tuple(arg[k] for arg in args)]
                    for k, (w, m) in enumerate(zip(weights, family))
                ),
                Fraction(0),
            )
            tab_r[tuple(ids[index[a]] for a in args)] = value
        relations[rname] = tab_r

    pre = make_structure(ids, metric, constants, functions, relations, metric_power=p)
    collapsed, rep_of = quotient(pre)
    class_of = {t: rep_of[_tuple_id(t)] for t in tuples}
    return MeanStructure(
        structure=collapsed,
        charge=mu,
        family_size=len(family),
        class_of=class_of,
        p=p,
    )


def powermean(
    m: FiniteStructure,
    mu: Charge,
    p: int = 1,
    max_tuples: int = DEFAULT_TUPLE_CAP,
) -> MeanStructure:
    """Mean of the constant family (M, ..., M) under mu."""
    return ultramean([m] * len(mu.ids), mu, p=p, max_tuples=max_tuples)


def diagonal_class(mean: MeanStructure, point: str) -> str:
    """Image of a point under the diagonal embedding into a powermean."""
    return mean.class_point((point,) * mean.family_size)

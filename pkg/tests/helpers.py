"""Seeded random generators shared by the module and acceptance tests.

Structures are generated valid by construction: metrics are repaired to
satisfy the triangle inequality via shortest paths, functions are constant
or identity maps, and relations are clamped anchored-distance combinations
whose coefficients respect the declared Lipschitz constants.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from affinelogic.structures import FiniteStructure, make_structure
from affinelogic.syntax import (
    App,
    Const,
    Dist,
    Formula,
    Inf,
    ONE,
    Rel,
    Scale,
    Signature,
    Sum,
    Sup,
    Term,
    Var,
    constant_symbol,
    function_symbol,
    relation_symbol,
)
from affinelogic.ultramean import Charge


def rand_weights(rng: random.Random, n: int, denominator: int = 8) -> list[Fraction]:
    cuts = sorted(rng.randint(0, denominator) for _ in range(n - 1))
    parts = []
    prev = 0
    for c in cuts:
        parts.append(Fraction(c - prev, denominator))
        prev = c
    parts.append(Fraction(denominator - prev, denominator))
    return parts


def rand_charge(rng: random.Random, n: int) -> Charge:
    ids = tuple(f"i{k}" for k in range(n))
    w = rand_weights(rng, n)
    return Charge(ids, dict(zip(ids, w)))


def rand_signature(rng: random.Random) -> Signature:
    syms = []
    if rng.random() < 0.6:
        syms.append(constant_symbol("c"))
    if rng.random() < 0.5:
        syms.append(function_symbol("F", 1, rng.choice([1, 1, 2])))
    if rng.random() < 0.8:
        syms.append(relation_symbol("P", 1, Fraction(rng.choice([1, 1, 2]), 2)))
    if rng.random() < 0.25:
        syms.append(relation_symbol("Q", 2, Fraction(1, 2)))
    return Signature(syms)


def _rand_metric(rng: random.Random, n: int) -> list[list[Fraction]]:
    d = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = Fraction(rng.randint(0 if rng.random() < 0.15 else 1, 8), 8)
    # shortest-path repair keeps it an exact pseudometric
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def _clamp01(x: Fraction) -> Fraction:
    return min(max(x, Fraction(0)), Fraction(1))


def rand_structure(rng: random.Random, sig: Signature, max_points: int = 4) -> FiniteStructure:
    n = rng.randint(1, max_points)
    points = [f"p{i}" for i in range(n)]
    metric = _rand_metric(rng, n)

    constants = {s.name: rng.choice(points) for s in sig.constants()}
    functions = {}
    for s in sig.functions():
        if s.lipschitz >= 1 and rng.random() < 0.5:
            tab = {args: args[0] for args in itertools.product(points, repeat=s.arity)}
        else:
            target = rng.choice(points)
            tab = {args: target for args in itertools.product(points, repeat=s.arity)}
        functions[s.name] = tab
    relations = {}
    idx = {p: i for i, p in enumerate(points)}
    for s in sig.relations():
        base = Fraction(rng.randint(0, 8), 8)
        anchors = [rng.choice(points) for _ in range(s.arity)]
        signs = [rng.choice([-1, 1]) for _ in range(s.arity)]
        coeffs = rand_weights(rng, s.arity, 4)  # |coeffs| sum to 1, scaled by lambda
        lam = s.lipschitz
        tab = {}
        for args in itertools.product(points, repeat=s.arity):
            val = base
            for a, anchor, cmul, sgn in zip(args, anchors, coeffs, signs):
                val += sgn * lam * cmul * metric[idx[a]][idx[anchor]]
            tab[args] = _clamp01(val)
        relations[s.name] = tab
    return make_structure(points, metric, constants, functions, relations)


def rand_family(
    rng: random.Random, sig: Signature, max_size: int = 3, max_points: int = 4
) -> list[FiniteStructure]:
    return [
        rand_structure(rng, sig, max_points) for _ in range(rng.randint(1, max_size))
    ]


def rand_term(rng: random.Random, sig: Signature, variables: list[str], depth: int = 1) -> Term:
    options: list[str] = []
    if variables:
        options += ["var"] * 3
    if sig.constants():
        options.append("const")
    if (variables or sig.constants()) and sig.functions() and depth > 0:
        options += ["app", "app"]
    if not options:
        raise ValueError("no terms available: no variables and no constants")
    kind = rng.choice(options)
    if kind == "var":
        return Var(rng.choice(variables))
    if kind == "const":
        return Const(rng.choice(sig.constants()).name)
    f = rng.choice(sig.functions())
    return App(
        f.name,
        tuple(rand_term(rng, sig, variables, depth - 1) for _ in range(f.arity)),
        f.lipschitz,
    )


def rand_affine_formula(
    rng: random.Random,
    sig: Signature,
    variables: list[str],
    quant_depth: int = 2,
    budget: int = 12,
) -> Formula:
    """Random affine formula using only the given free variables plus bound ones."""

    def atom(vs: list[str]) -> Formula:
        kinds = ["one", "dist", "dist"]
        if sig.relations():
            kinds += ["rel", "rel"]
        k = rng.choice(kinds)
        if k == "one" or (not vs and not sig.constants()):
            return ONE
        if k == "dist":
            return Dist(rand_term(rng, sig, vs), rand_term(rng, sig, vs))
        r = rng.choice(sig.relations())
        return Rel(
            r.name,
            tuple(rand_term(rng, sig, vs) for _ in range(r.arity)),
            r.lipschitz,
        )

    fresh = iter(f"u{k}" for k in range(16))

    def build(vs: list[str], depth: int, nodes: int) -> tuple[Formula, int]:
        options = ["atom"]
        if nodes >= 3:
            options += ["sum", "scale"]
        if depth > 0 and nodes >= 2:
            options += ["quant", "quant"]
        k = rng.choice(options)
        if k == "atom":
            return atom(vs), 1
        if k == "sum":
            left, n1 = build(vs, depth, (nodes - 1) // 2)
            right, n2 = build(vs, depth, nodes - 1 - n1)
            return Sum(left, right), 1 + n1 + n2
        if k == "scale":
            body, n1 = build(vs, depth, nodes - 1)
            coeff = Fraction(rng.choice([-2, -1, 1, 1, 2, 3]), rng.choice([1, 2]))
            return Scale(coeff, body), 1 + n1
        x = next(fresh)
        body, n1 = build(vs + [x], depth - 1, nodes - 1)
        node = Sup(x, body) if rng.random() < 0.5 else Inf(x, body)
        return node, 1 + n1

    phi, _ = build(list(variables), quant_depth, budget)
    return phi


def rand_sentence(
    rng: random.Random, sig: Signature, quant_depth: int = 2, budget: int = 12
) -> Formula:
    """A random affine sentence (free variables quantified away at the top)."""
    phi = rand_affine_formula(rng, sig, [], quant_depth, budget)
    for v in sorted(phi.free):
        phi = Sup(v, phi) if rng.random() < 0.5 else Inf(v, phi)
    return phi

"""Finitary proof checker for the affine deduction system.

Proofs are finite trees whose leaves are axiom instances (A1-A22) or
hypotheses from a condition set Gamma and whose internal nodes apply one of
the rules

    R1  phi<=psi, psi<=theta  /  phi<=theta
    R2  phi<=psi              /  phi+theta <= psi+theta
    R3  0<=r, phi<=psi        /  r*phi <= r*psi
    R4  phi<=psi              /  sup_x phi <= sup_x psi   (x not free in Gamma)

Every node carries a single <=-condition; an axiom stated as an equality
justifies either orientation.  Matching is purely syntactic on the ASTs: the
constant 0 is the canonical 0*1, bounds appearing in axioms use the atomic
formula 1, and no arithmetic normalization is applied implicitly (a separate
``normalize_zero_scales`` helper is provided for callers who want 0*phi
collapsed before building nodes).  Checking is deterministic and total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .structures import FiniteStructure, holds_universally
from .syntax import (
    App,
    Condition,
    Dist,
    Formula,
    Inf,
    One,
    Rel,
    Scale,
    Sum,
    Sup,
    Term,
    ZERO,
    substitute,
    substitution_correct,
)

AXIOM_TAGS = tuple(f"A{i}" for i in range(1, 23))
RULE_TAGS = ("R1", "R2", "R3", "R4")


@dataclass(frozen=True)
class AxiomSchema:
    """Catalog entry for one axiom: its pattern and side condition, both
    matched purely syntactically (metavariables phi/psi/theta range over
    formulas, r/s over rationals, t over terms, x over variables)."""

    tag: str
    pattern: str
    side_condition: str | None = None
    equality: bool = False  # equalities justify either <= orientation


AXIOM_SCHEMAS: dict[str, AxiomSchema] = {
    s.tag: s
    for s in (
        AxiomSchema("A1", "r1 + r2 = r", "r1 + r2 = r holds in the reals", True),
        AxiomSchema("A2", "r1*(r2*1) = r", "r1 * r2 = r holds in the reals", True),
        AxiomSchema("A3", "r <= s", "r <= s holds in the reals"),
        AxiomSchema("A4", "phi+(psi+theta) = (phi+psi)+theta", None, True),
        AxiomSchema("A5", "phi+psi = psi+phi", None, True),
        AxiomSchema("A6", "0+phi = phi", None, True),
        AxiomSchema("A7", "r*(phi+psi) = r*phi + r*psi", None, True),
        AxiomSchema("A8", "(r+s)*phi = r*phi + s*phi", None, True),
        AxiomSchema("A9", "r*(s*phi) = (r*s)*phi", None, True),
        AxiomSchema("A10", "1*phi = phi", None, True),
        AxiomSchema("A11", "0*phi = 0", None, True),
        AxiomSchema("A12", "phi[t/x] <= sup x. phi", "the substitution of t for x is correct"),
        AxiomSchema("A13", "sup x. (phi+psi) = (sup x. phi) + psi", "x is not free in psi", True),
        AxiomSchema("A14", "sup x. (phi+psi) <= (sup x. phi) + (sup x. psi)"),
        AxiomSchema("A15", "sup x. (r*phi) = r*(sup x. phi)", "0 <= r", True),
        AxiomSchema("A16", "sup x. phi = -1*(inf x. -1*phi)", None, True),
        AxiomSchema("A17", "d(t,t) = 0", None, True),
        AxiomSchema("A18", "d(t1,t2) = d(t2,t1)", None, True),
        AxiomSchema("A19", "d(t1,t3) <= d(t1,t2) + d(t2,t3)"),
        AxiomSchema("A20", "d(F(xs),F(ys)) <= lambda_F * (d(x1,y1) + ... + d(xn,yn))"),
        AxiomSchema("A21", "R(xs) - R(ys) <= lambda_R * (d(x1,y1) + ... + d(xn,yn))"),
        AxiomSchema("A22", "0 <= R(ts), R(ts) <= 1 (including d)"),
    )
}


@dataclass(frozen=True)
class ProofNode:
    concl: Condition
    by: str  # axiom tag, rule tag, or "hyp:<index>"
    premises: tuple["ProofNode", ...] = ()
    inst: dict[str, Term] = field(default_factory=dict, hash=False, compare=False)


def axiom(concl: Condition, tag: str, **inst: Term) -> ProofNode:
    return ProofNode(concl, tag, (), dict(inst))


def hypothesis(concl: Condition, index: int) -> ProofNode:
    return ProofNode(concl, f"hyp:{index}")


def rule(concl: Condition, tag: str, *premises: ProofNode) -> ProofNode:
    return ProofNode(concl, tag, tuple(premises))


@dataclass
class CheckResult:
    valid: bool
    path: str = ""
    reason: str = ""

    def __bool__(self):
        return self.valid


def _numeral(phi: Formula) -> Fraction | None:
    """The rational r if phi is the numeral r*1, else None."""
    if isinstance(phi, Scale) and isinstance(phi.body, One):
        return phi.coeff
    return None


def _dist_chain(phi: Formula) -> list[Dist] | None:
    """Decompose a left-associated sum of distance atoms."""
    if isinstance(phi, Dist):
        return [phi]
    if isinstance(phi, Sum):
        left = _dist_chain(phi.left)
        if left is not None and isinstance(phi.right, Dist):
            return left + [phi.right]
    return None


Matcher = Callable[[Formula, Formula, dict[str, Term]], str | None]


def _match_a1(lhs, rhs, inst):
    r = _numeral(rhs)
    if (
        r is not None
        and isinstance(lhs, Sum)
        and (r1 := _numeral(lhs.left)) is not None
        and (r2 := _numeral(lhs.right)) is not None
    ):
        return None if r1 + r2 == r else f"arithmetic fails: {r1}+{r2} != {r}"
    return "shape mismatch for r1+r2 = r"


def _match_a2(lhs, rhs, inst):
    r = _numeral(rhs)
    if (
        r is not None
        and isinstance(lhs, Scale)
        and (r2 := _numeral(lhs.body)) is not None
    ):
        return None if lhs.coeff * r2 == r else f"arithmetic fails: {lhs.coeff}*{r2} != {r}"
    return "shape mismatch for r1*r2 = r"


def _match_a4(lhs, rhs, inst):
    if (
        isinstance(lhs, Sum)
        and isinstance(lhs.right, Sum)
        and isinstance(rhs, Sum)
        and isinstance(rhs.left, Sum)
        and lhs.left == rhs.left.left
        and lhs.right.left == rhs.left.right
        and lhs.right.right == rhs.right
    ):
        return None
    return "shape mismatch for phi+(psi+theta) = (phi+psi)+theta"


def _match_a5(lhs, rhs, inst):
    if isinstance(lhs, Sum) and isinstance(rhs, Sum):
        if lhs.left == rhs.right and lhs.right == rhs.left:
            return None
    return "shape mismatch for phi+psi = psi+phi"


def _match_a6(lhs, rhs, inst):
    if isinstance(lhs, Sum) and lhs.left == ZERO and lhs.right == rhs:
        return None
    return "shape mismatch for 0+phi = phi"


def _match_a7(lhs, rhs, inst):
    if (
        isinstance(lhs, Scale)
        and isinstance(lhs.body, Sum)
        and isinstance(rhs, Sum)
        and isinstance(rhs.left, Scale)
        and isinstance(rhs.right, Scale)
        and rhs.left.coeff == lhs.coeff == rhs.right.coeff
        and rhs.left.body == lhs.body.left
        and rhs.right.body == lhs.body.right
    ):
        return None
    return "shape mismatch for r(phi+psi) = r*phi+r*psi"


def _match_a8(lhs, rhs, inst):
    if (
        isinstance(lhs, Scale)
        and isinstance(rhs, Sum)
        and isinstance(rhs.left, Scale)
        and isinstance(rhs.right, Scale)
        and rhs.left.body == rhs.right.body == lhs.body
    ):
        if rhs.left.coeff + rhs.right.coeff == lhs.coeff:
            return None
        return f"arithmetic fails: {rhs.left.coeff}+{rhs.right.coeff} != {lhs.coeff}"
    return "shape mismatch for (r+s)phi = r*phi+s*phi"


def _match_a9(lhs, rhs, inst):
    if (
        isinstance(lhs, Scale)
        and isinstance(lhs.body, Scale)
        and isinstance(rhs, Scale)
        and lhs.body.body == rhs.body
    ):
        if lhs.coeff * lhs.body.coeff == rhs.coeff:
            return None
        return f"arithmetic fails: {lhs.coeff}*{lhs.body.coeff} != {rhs.coeff}"
    return "shape mismatch for r(s*phi) = (rs)phi"


def _match_a10(lhs, rhs, inst):
    if isinstance(lhs, Scale) and lhs.coeff == 1 and lhs.body == rhs:
        return None
    return "shape mismatch for 1*phi = phi"


def _match_a11(lhs, rhs, inst):
    if isinstance(lhs, Scale) and lhs.coeff == 0 and rhs == ZERO:
        return None
    return "shape mismatch for 0*phi = 0"


def _match_a13(lhs, rhs, inst):
    if (
        isinstance(lhs, Sup)
        and isinstance(lhs.body, Sum)
        and isinstance(rhs, Sum)
        and isinstance(rhs.left, Sup)
        and rhs.left.varname == lhs.varname
        and rhs.left.body == lhs.body.left
        and rhs.right == lhs.body.right
    ):
        if lhs.varname in rhs.right.free:
            return f"side condition fails: {lhs.varname} is free in the residue"
        return None
    return "shape mismatch for sup_x(phi+psi) = (sup_x phi)+psi"


def _match_a15(lhs, rhs, inst):
    if (
        isinstance(lhs, Sup)
        and isinstance(lhs.body, Scale)
        and isinstance(rhs, Scale)
        and isinstance(rhs.body, Sup)
        and rhs.body.varname == lhs.varname
        and rhs.coeff == lhs.body.coeff
        and rhs.body.body == lhs.body.body
    ):
        if rhs.coeff < 0:
            return f"side condition fails: r = {rhs.coeff} < 0"
        return None
    return "shape mismatch for sup_x(r*phi) = r*sup_x phi"


def _match_a16(lhs, rhs, inst):
    if (
        isinstance(lhs, Sup)
        and isinstance(rhs, Scale)
        and rhs.coeff == -1
        and isinstance(rhs.body, Inf)
        and rhs.body.varname == lhs.varname
        and isinstance(rhs.body.body, Scale)
        and rhs.body.body.coeff == -1
        and rhs.body.body.body == lhs.body
    ):
        return None
    return "shape mismatch for sup_x phi = -inf_x -phi"


def _match_a17(lhs, rhs, inst):
    if isinstance(lhs, Dist) and lhs.left == lhs.right and rhs == ZERO:
        return None
    return "shape mismatch for d(t,t) = 0"


def _match_a18(lhs, rhs, inst):
    if (
        isinstance(lhs, Dist)
        and isinstance(rhs, Dist)
        and lhs.left == rhs.right
        and lhs.right == rhs.left
    ):
        return None
    return "shape mismatch for d(t1,t2) = d(t2,t1)"


_EQUALITY_MATCHERS: dict[str, Matcher] = {
    "A1": _match_a1,
    "A2": _match_a2,
    "A4": _match_a4,
    "A5": _match_a5,
    "A6": _match_a6,
    "A7": _match_a7,
    "A8": _match_a8,
    "A9": _match_a9,
    "A10": _match_a10,
    "A11": _match_a11,
    "A13": _match_a13,
    "A15": _match_a15,
    "A16": _match_a16,
    "A17": _match_a17,
    "A18": _match_a18,
}


def _check_axiom(tag: str, concl: Condition, inst: dict[str, Term]) -> str | None:
    lhs, rhs = concl.lhs, concl.rhs
    if tag in _EQUALITY_MATCHERS:
        m = _EQUALITY_MATCHERS[tag]
        err = m(lhs, rhs, inst)
        if err is None:
            return None
        if AXIOM_SCHEMAS[tag].equality:
            err2 = m(rhs, lhs, inst)
            if err2 is None:
                return None
        return err
    if tag == "A3":
        r, s = _numeral(lhs), _numeral(rhs)
        if r is None or s is None:
            return "shape mismatch for r <= s"
        return None if r <= s else f"arithmetic fails: {r} > {s}"
    if tag == "A12":
        if not isinstance(rhs, Sup):
            return "right side must be sup_x phi"
        t = inst.get("t")
        if t is None:
            return "missing metavariable t (the substituted term)"
        if not substitution_correct(rhs.body, rhs.varname, t):
            return f"substitution of {t} for {rhs.varname} is not correct (capture)"
        expected = substitute(rhs.body, rhs.varname, t)
        if lhs == expected:
            return None
        return "left side is not phi[t/x]"
    if tag == "A14":
        if (
            isinstance(lhs, Sup)
            and isinstance(lhs.body, Sum)
            and isinstance(rhs, Sum)
            and isinstance(rhs.left, Sup)
            and isinstance(rhs.right, Sup)
            and rhs.left.varname == rhs.right.varname == lhs.varname
            and rhs.left.body == lhs.body.left
            and rhs.right.body == lhs.body.right
        ):
            return None
        return "shape mismatch for sup_x(phi+psi) <= sup_x phi + sup_x psi"
    if tag == "A19":
        if (
            isinstance(lhs, Dist)
            and isinstance(rhs, Sum)
            and isinstance(rhs.left, Dist)
            and isinstance(rhs.right, Dist)
            and rhs.left.left == lhs.left
            and rhs.left.right == rhs.right.left
            and rhs.right.right == lhs.right
        ):
            return None
        return "shape mismatch for d(t1,t3) <= d(t1,t2)+d(t2,t3)"
    if tag == "A20":
        if not (
            isinstance(lhs, Dist)
            and isinstance(lhs.left, App)
            and isinstance(lhs.right, App)
            and lhs.left.func == lhs.right.func
        ):
            return "left side must be d(F(xs), F(ys))"
        if not (isinstance(rhs, Scale) and rhs.coeff == lhs.left.func_lipschitz):
            return f"right side must scale by the Lipschitz constant {lhs.left.func_lipschitz}"
        chain = _dist_chain(rhs.body)
        if chain is None or len(chain) != len(lhs.left.args):
            return "right side must be lambda_F * (sum of coordinate distances)"
        for dnode, x, y in zip(chain, lhs.left.args, lhs.right.args):
            if dnode.left != x or dnode.right != y:
                return "coordinate distances do not match the function arguments"
        return None
    if tag == "A21":
        if not (
            isinstance(lhs, Sum)
            and isinstance(lhs.left, Rel)
            and isinstance(lhs.right, Scale)
            and lhs.right.coeff == -1
            and isinstance(lhs.right.body, Rel)
            and lhs.left.rel == lhs.right.body.rel
        ):
            return "left side must be R(xs) - R(ys)"
        if not (isinstance(rhs, Scale) and rhs.coeff == lhs.left.rel_lipschitz):
            return f"right side must scale by the Lipschitz constant {lhs.left.rel_lipschitz}"
        chain = _dist_chain(rhs.body)
        if chain is None or len(chain) != len(lhs.left.args):
            return "right side must be lambda_R * (sum of coordinate distances)"
        for dnode, x, y in zip(chain, lhs.left.args, lhs.right.body.args):
            if dnode.left != x or dnode.right != y:
                return "coordinate distances do not match the relation arguments"
        return None
    if tag == "A22":
        if isinstance(rhs, (Rel, Dist)) and lhs == ZERO:
            return None
        if isinstance(lhs, (Rel, Dist)) and isinstance(rhs, One):
            return None
        return "shape mismatch for 0 <= R(xs) <= 1"
    return f"unknown axiom tag {tag}"


def _check_rule(tag: str, concl: Condition, premises: Sequence[Condition], gamma: Sequence[Condition]) -> str | None:
    if tag == "R1":
        if len(premises) != 2:
            return "R1 needs two premises"
        p1, p2 = premises
        if p1.rhs != p2.lhs:
            return "middle formulas of the premises do not match"
        if concl.lhs != p1.lhs or concl.rhs != p2.rhs:
            return "conclusion is not the chained inequality"
        return None
    if tag == "R2":
        if len(premises) != 1:
            return "R2 needs one premise"
        (p,) = premises
        if (
            isinstance(concl.lhs, Sum)
            and isinstance(concl.rhs, Sum)
            and concl.lhs.left == p.lhs
            and concl.rhs.left == p.rhs
            and concl.lhs.right == concl.rhs.right
        ):
            return None
        return "conclusion is not premise-plus-theta on both sides"
    if tag == "R3":
        if len(premises) != 2:
            return "R3 needs two premises (sign premise first)"
        sign, p = premises
        if not (
            isinstance(concl.lhs, Scale)
            and isinstance(concl.rhs, Scale)
            and concl.lhs.coeff == concl.rhs.coeff
        ):
            return "conclusion sides must scale by the same rational"
        r = concl.lhs.coeff
        if sign.lhs != ZERO or _numeral(sign.rhs) != r:
            return f"first premise must be the sign premise 0 <= {r}"
        if concl.lhs.body != p.lhs or concl.rhs.body != p.rhs:
            return "scaled bodies do not match the second premise"
        return None
    if tag == "R4":
        if len(premises) != 1:
            return "R4 needs one premise"
        (p,) = premises
        if not (
            isinstance(concl.lhs, Sup)
            and isinstance(concl.rhs, Sup)
            and concl.lhs.varname == concl.rhs.varname
            and concl.lhs.body == p.lhs
            and concl.rhs.body == p.rhs
        ):
            return "conclusion is not sup_x of the premise"
        x = concl.lhs.varname
        for i, cond in enumerate(gamma):
            if x in cond.free:
                return f"side condition fails: {x} is free in hypothesis {i}"
        return None
    return f"unknown rule tag {tag}"


def check(proof: ProofNode, gamma: Sequence[Condition]) -> CheckResult:
    """Validate a proof tree against hypotheses gamma.

    Returns Valid, or Invalid with the dotted path of the offending node and
    a reason naming the failing shape, side condition or metavariable.
    """

    def walk(node: ProofNode, path: list[int]) -> CheckResult:
        loc = ".".join(map(str, path)) or "root"
        by = node.by
        if by.startswith("hyp:"):
            if node.premises:
                return CheckResult(False, loc, "hypothesis nodes take no premises")
            try:
                i = int(by.split(":", 1)[1])
            except ValueError:
                return CheckResult(False, loc, f"malformed hypothesis reference {by!r}")
            if not 0 <= i < len(gamma):
                return CheckResult(False, loc, f"hypothesis index {i} out of range")
            if gamma[i] != node.concl:
                return CheckResult(False, loc, f"conclusion is not hypothesis {i}")
            return CheckResult(True)
        if by in AXIOM_TAGS:
            if node.premises:
                return CheckResult(False, loc, "axiom nodes take no premises")
            err = _check_axiom(by, node.concl, node.inst)
            if err is not None:
                return CheckResult(False, loc, f"{by}: {err}")
            return CheckResult(True)
        if by in RULE_TAGS:
            for k, prem in enumerate(node.premises):
                sub = walk(prem, path + [k])
                if not sub.valid:
                    return sub
            err = _check_rule(by, node.concl, [q.concl for q in node.premises], gamma)
            if err is not None:
                return CheckResult(False, loc, f"{by}: {err}")
            return CheckResult(True)
        return CheckResult(False, loc, f"unknown justification {by!r}")

    return walk(proof, [])


def normalize_zero_scales(phi: Formula) -> Formula:
    """Collapse every 0*psi subformula to the canonical 0*1.

    Provided as an explicit preprocessing step; the checker itself never
    normalizes.
    """
    if isinstance(phi, Scale):
        if phi.coeff == 0:
            return ZERO
        return Scale(phi.coeff, normalize_zero_scales(phi.body))
    if isinstance(phi, Sum):
        return Sum(normalize_zero_scales(phi.left), normalize_zero_scales(phi.right))
    if isinstance(phi, Sup):
        return Sup(phi.varname, normalize_zero_scales(phi.body))
    if isinstance(phi, Inf):
        return Inf(phi.varname, normalize_zero_scales(phi.body))
    return phi


@dataclass
class ProbeViolation:
    structure_index: int
    margin: Fraction


@dataclass
class ProbeReport:
    checked: int  # structures satisfying the hypotheses
    skipped: int  # structures not satisfying the hypotheses
    violations: list[ProbeViolation]

    @property
    def sound(self) -> bool:
        return not self.violations


def soundness_probe(
    proof: ProofNode,
    gamma: Sequence[Condition],
    family: Sequence[FiniteStructure],
    p: int = 1,
) -> ProbeReport:
    """Empirical soundness check of a Valid proof.

    On every family member satisfying all hypotheses (open conditions are
    closed universally over assignments), the conclusion must hold with
    margin >= 0; any violation indicates a checker bug and is reported.
    """
    result = check(proof, gamma)
    if not result.valid:
        raise ValueError(f"probe requires a valid proof: {result.path}: {result.reason}")
    checked = skipped = 0
    violations: list[ProbeViolation] = []
    for i, m in enumerate(family):
        if all(holds_universally(m, c, p)[0] for c in gamma):
            checked += 1
            holds, margin = holds_universally(m, proof.concl, p)
            if not holds:
                violations.append(ProbeViolation(i, margin))
        else:
            skipped += 1
    return ProbeReport(checked, skipped, violations)

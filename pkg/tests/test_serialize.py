import json
import random
from fractions import Fraction

import pytest

from affinelogic.errors import InputError
from affinelogic.pra import algebra, pra_signature, structure_from_algebra
from affinelogic.serialize import (
    basis_from_doc,
    charge_from_doc,
    charge_to_doc,
    proof_from_doc,
    proof_to_doc,
    signature_from_doc,
    signature_to_doc,
    structure_from_doc,
    structure_to_doc,
    theory_from_doc,
    theory_to_doc,
)
from affinelogic.syntax import Signature, Theory
from affinelogic.ultramean import charge

from helpers import rand_signature, rand_structure
from proof_helpers import zero_scalar_derivation


class TestStructureRoundTrip:
    def test_random_structures(self):
        rng = random.Random(51)
        for _ in range(25):
            sig = rand_signature(rng)
            m = rand_structure(rng, sig)
            doc = structure_to_doc(m, sig)
            again, sig2 = structure_from_doc(json.loads(json.dumps(doc)))
            assert again.points == m.points
            assert again.metric == m.metric
            assert again.constants == m.constants
            assert again.functions == m.functions
            assert again.relations == m.relations
            assert sig2 == sig

    def test_pra_structure(self):
        m = structure_from_algebra(algebra(["1/2", "1/2"]))
        doc = structure_to_doc(m)
        again, _ = structure_from_doc(doc)
        assert again.relations == m.relations

    def test_decimal_metric_rejected(self):
        doc = {
            "format_version": 1,
            "points": ["a", "b"],
            "metric": ["0", 0.5, 0.5, "0"],
        }
        with pytest.raises(InputError):
            structure_from_doc(doc)

    def test_metric_length_checked(self):
        doc = {"format_version": 1, "points": ["a"], "metric": ["0", "0"]}
        with pytest.raises(InputError):
            structure_from_doc(doc)


class TestChargeAndTheory:
    def test_charge_round_trip(self):
        mu = charge({"i0": "1/3", "i1": "2/3"})
        assert charge_from_doc(charge_to_doc(mu)) == mu

    def test_theory_round_trip_and_equality_sugar(self):
        sig = pra_signature()
        doc = {
            "format_version": 1,
            "conditions": [
                "sup x. mu(x) <= 1",
                "(sup x. mu(x)) = 1",
            ],
        }
        theory = theory_from_doc(doc, sig)
        assert len(theory) == 3  # the equality expands to two conditions
        again = theory_from_doc(theory_to_doc(theory), sig)
        assert list(again) == list(theory)

    def test_bare_list_accepted(self):
        sig = Signature.metric_only()
        theory = theory_from_doc(["sup x. d(x,x) <= 0*1"], sig)
        assert len(theory) == 1


class TestBasis:
    def test_variables_inferred_when_missing(self):
        sig = pra_signature()
        variables, formulas = basis_from_doc({"formulas": ["mu(x)", "mu(and(x,y))"]}, sig)
        assert variables == ("x", "y")
        assert len(formulas) == 2

    def test_explicit_variables_respected(self):
        sig = pra_signature()
        variables, _ = basis_from_doc(
            {"variables": ["x", "y", "z"], "formulas": ["mu(x)"]}, sig
        )
        assert variables == ("x", "y", "z")


class TestSignature:
    def test_round_trip(self):
        rng = random.Random(52)
        for _ in range(10):
            sig = rand_signature(rng)
            assert signature_from_doc(signature_to_doc(sig)) == sig


class TestProof:
    def test_round_trip_of_worked_derivation(self):
        from affinelogic.proofs import check

        proof, gamma = zero_scalar_derivation(Fraction(3))
        sig = Signature.metric_only()
        doc = proof_to_doc(proof)
        again = proof_from_doc(json.loads(json.dumps(doc)), sig)
        assert check(again, gamma).valid
        assert again == proof or again.concl == proof.concl

    def test_inst_terms_parsed(self):
        sig = Signature.metric_only()
        doc = {
            "concl": "d(y,y) <= sup x. d(x,x)",
            "by": "A12",
            "inst": {"t": "y"},
        }
        node = proof_from_doc(doc, sig)
        from affinelogic.proofs import check

        assert check(node, []).valid

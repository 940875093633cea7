import random
from fractions import Fraction

import pytest

from affinelogic.errors import UniverseCapError
from affinelogic.spaces import two_point
from affinelogic.structures import eval_formula, make_structure, quotient, validate
from affinelogic.syntax import (
    Min,
    Signature,
    Sup,
    parse_formula,
    relation_symbol,
)
from affinelogic.ultramean import (
    charge,
    diagonal_class,
    fubini,
    point_mass,
    powermean,
    ultramean,
    uniform_charge,
)

from helpers import (
    rand_affine_formula,
    rand_charge,
    rand_family,
    rand_sentence,
    rand_signature,
    rand_structure,
)

METRIC_ONLY = Signature.metric_only()


def family_assignment(rng, family, mean, free_vars):
    """Random member-point choices per free variable, with both views."""
    mean_asg = {}
    member_asgs = [dict() for _ in family]
    for v in free_vars:
        tup = tuple(rng.choice(m.points) for m in family)
        mean_asg[v] = mean.class_point(tup)
        for i, a in enumerate(tup):
            member_asgs[i][v] = a
    return mean_asg, member_asgs


class TestUltramean:
    def test_point_mass_is_isomorphic_projection(self):
        rng = random.Random(21)
        sig = rand_signature(rng)
        family = [rand_structure(rng, sig) for _ in range(2)]
        mu = point_mass(["i0", "i1"], "i1")
        mean = ultramean(family, mu)
        # same number of classes as the selected member, same sentence values
        collapsed, _ = quotient(family[1])
        assert len(mean.structure.points) == len(collapsed.points)
        sigma = rand_sentence(rng, sig, 1, 8)
        assert eval_formula(mean.structure, sigma) == eval_formula(family[1], sigma)

    def test_half_half_sentence_identity(self):
        rng = random.Random(22)
        for _ in range(20):
            sig = rand_signature(rng)
            family = [rand_structure(rng, sig, 3) for _ in range(2)]
            mu = uniform_charge(["i0", "i1"])
            mean = ultramean(family, mu)
            sigma = rand_sentence(rng, sig, 2, 10)
            lhs = eval_formula(mean.structure, sigma)
            rhs = (
                eval_formula(family[0], sigma) + eval_formula(family[1], sigma)
            ) / 2
            assert lhs == rhs

    def test_nondegenerate_mean_is_proper_extension(self):
        m = two_point()
        mu = charge({"i0": Fraction(1, 3), "i1": Fraction(2, 3)})
        mean = ultramean([m, m], mu)
        assert len(mean.structure.points) == 4  # strictly more than 2 classes

    def test_mean_output_validates(self):
        rng = random.Random(23)
        for _ in range(15):
            sig = rand_signature(rng)
            family = rand_family(rng, sig)
            mu = rand_charge(rng, len(family))
            mean = ultramean(family, mu)
            assert validate(mean.structure, sig).valid

    def test_zero_weight_components_collapse(self):
        m1 = two_point()
        m2 = two_point(Fraction(1, 2))
        mu = charge({"i0": 1, "i1": 0})
        mean = ultramean([m1, m2], mu)
        # choices differing only in the weight-0 coordinate share a class
        assert mean.class_point(("a", "a")) == mean.class_point(("a", "b"))
        assert len(mean.structure.points) == 2

    def test_universe_cap(self):
        m = make_structure([f"q{i}" for i in range(8)], {})
        mu = uniform_charge(["i0", "i1", "i2"])
        with pytest.raises(UniverseCapError):
            ultramean([m, m, m], mu, max_tuples=100)

    def test_ultramean_theorem_exact(self):
        rng = random.Random(24)
        for _ in range(60):
            sig = rand_signature(rng)
            family = rand_family(rng, sig, 3, 4)
            mu = rand_charge(rng, len(family))
            mean = ultramean(family, mu)
            free = ["x"] if rng.random() < 0.5 else []
            phi = rand_affine_formula(rng, sig, free, 2, 10)
            mean_asg, member_asgs = family_assignment(rng, family, mean, sorted(phi.free))
            lhs = eval_formula(mean.structure, phi, mean_asg)
            rhs = sum(
                (
                    mu.weight(i) * eval_formula(m, phi, asg)
                    for i, m, asg in zip(mu.ids, family, member_asgs)
                ),
                Fraction(0),
            )
            assert lhs == rhs


class TestPowermean:
    def test_point_mass_is_identity(self):
        rng = random.Random(31)
        sig = rand_signature(rng)
        m = rand_structure(rng, sig)
        mean = powermean(m, point_mass(["i0", "i1"], "i0"))
        sigma = rand_sentence(rng, sig, 1, 8)
        assert eval_formula(mean.structure, sigma) == eval_formula(m, sigma)

    def test_diagonal_embedding_is_elementary(self):
        rng = random.Random(32)
        for _ in range(25):
            sig = rand_signature(rng)
            m = rand_structure(rng, sig, 3)
            mu = rand_charge(rng, rng.randint(1, 3))
            mean = powermean(m, mu)
            phi = rand_affine_formula(rng, sig, ["x", "y"], 1, 8)
            asg = {v: rng.choice(m.points) for v in phi.free}
            diag = {v: diagonal_class(mean, pt) for v, pt in asg.items()}
            assert eval_formula(m, phi, asg) == eval_formula(mean.structure, phi, diag)

    def test_two_point_uniform_powermean_has_four_points(self):
        mean = powermean(two_point(), uniform_charge(["i0", "i1"]))
        assert len(mean.structure.points) == 4

    def test_composition_with_fubini(self):
        rng = random.Random(33)
        for _ in range(20):
            sig = rand_signature(rng)
            m = rand_structure(rng, sig, 3)
            mu = rand_charge(rng, rng.randint(1, 2))
            nu = rand_charge(rng, rng.randint(1, 2))
            iterated = powermean(powermean(m, mu).structure, nu)
            combined = powermean(m, fubini(mu, nu))
            sigma = rand_sentence(rng, sig, 2, 10)
            assert eval_formula(iterated.structure, sigma) == eval_formula(
                combined.structure, sigma
            )


class TestFubini:
    def test_point_masses(self):
        mu = point_mass(["a", "b"], "a")
        nu = point_mass(["c"], "c")
        prod = fubini(mu, nu)
        assert prod.weights == {"a|c": 1, "b|c": 0}

    def test_uniform_products(self):
        prod = fubini(uniform_charge(["a", "b"]), uniform_charge(["x", "y", "z"]))
        assert len(prod.ids) == 6
        assert all(w == Fraction(1, 6) for w in prod.weights.values())

    def test_associativity_on_the_nose(self):
        rng = random.Random(41)
        mu = rand_charge(rng, 2)
        nu = rand_charge(rng, 3)
        rho = rand_charge(rng, 2)
        assert fubini(fubini(mu, nu), rho) == fubini(mu, fubini(nu, rho))


class TestNonAffineFailure:
    def test_min_sentence_breaks_the_mean_identity(self):
        sig = Signature(
            [relation_symbol("P", 1, 0), relation_symbol("Q", 1, 0)]
        )
        m1 = make_structure(
            ["a"], {}, relations={"P": {("a",): 0}, "Q": {("a",): 1}}
        )
        m2 = make_structure(
            ["a"], {}, relations={"P": {("a",): 1}, "Q": {("a",): 0}}
        )
        sigma = Min(
            Sup("x", parse_formula("P(x)", sig)), Sup("x", parse_formula("Q(x)", sig))
        )
        mu = uniform_charge(["i0", "i1"])
        mean = ultramean([m1, m2], mu)
        mean_value = eval_formula(mean.structure, sigma)
        weighted = (eval_formula(m1, sigma) + eval_formula(m2, sigma)) / 2
        assert mean_value == Fraction(1, 2)
        assert weighted == 0
        assert mean_value != weighted

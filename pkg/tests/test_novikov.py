import math
import random
from fractions import Fraction

import pytest

from floerbar.novikov import (
    DensePeriodGroupError,
    GroundFieldMismatch,
    NovikovError,
    NovikovScalar,
    PeriodGroup,
    invert,
    leading_term,
    snap,
    valuation,
)

from helpers import scalar


class TestSnap:
    def test_exact_inputs_pass_through(self):
        assert snap(Fraction(1, 3)) == Fraction(1, 3)
        assert snap(2) == Fraction(2)
        assert snap("3/7") == Fraction(3, 7)

    def test_floats_land_on_the_grid(self):
        v = snap(0.1)
        assert v.denominator <= 2**40
        assert abs(v - Fraction(1, 10)) < Fraction(1, 2**40)
        assert snap(0.5) == Fraction(1, 2)

    def test_non_finite_rejected(self):
        with pytest.raises(NovikovError):
            snap(math.nan)
        with pytest.raises(NovikovError):
            snap(math.inf)


class TestPeriodGroup:
    def test_trivial(self):
        g = PeriodGroup.trivial()
        assert g.is_trivial
        assert g.contains(0)
        assert not g.contains(Fraction(1, 2))
        assert g.reduce(Fraction(7, 3)) == Fraction(7, 3)

    def test_gcd_reduction(self):
        g = PeriodGroup.from_generators(1, Fraction(1, 3))
        assert g.generator == Fraction(1, 3)
        assert g.contains(Fraction(2, 3))
        assert g.contains(-2)
        assert not g.contains(Fraction(1, 2))

    def test_reduce_and_circular_distance(self):
        g = PeriodGroup.from_generators(1)
        assert g.reduce(Fraction(5, 3)) == Fraction(2, 3)
        assert g.reduce(Fraction(-1, 4)) == Fraction(3, 4)
        d = g.circular_distance(Fraction(1, 10), Fraction(9, 10))
        assert d == Fraction(1, 5)

    def test_dense_input_rejected_with_advice(self):
        with pytest.raises(DensePeriodGroupError) as err:
            PeriodGroup.from_generators(1, 0.1)
        assert "exact" in str(err.value).lower()

    def test_rational_float_free_inputs_ok(self):
        g = PeriodGroup.from_generators("1/10", 1)
        assert g.generator == Fraction(1, 10)


class TestScalarBasics:
    def test_valuation_frozen_examples(self):
        x = scalar(2, ("1/2", 1), ("6/5", 1))
        assert valuation(x) == Fraction(1, 2)
        assert valuation(NovikovScalar.zero(2)) == math.inf
        y = scalar(2, (-1, 1), (0, 1))
        assert valuation(y) == Fraction(-1)
        assert leading_term(y) == (Fraction(-1), 1)

    def test_canonicalization_mod_p(self):
        x = NovikovScalar.from_terms(3, [(Fraction(1), 2), (Fraction(1), 1)])
        assert x.terms == ()
        y = NovikovScalar.from_terms(3, [(Fraction(0), 5)])
        assert y.terms == ((Fraction(0), 2),)

    def test_field_mismatch(self):
        with pytest.raises(GroundFieldMismatch):
            NovikovScalar.one(2) + NovikovScalar.one(3)

    def test_zero_has_no_leading_term(self):
        with pytest.raises(NovikovError):
            NovikovScalar.zero(2).leading_term()


class TestArithmetic:
    def test_invert_frozen_example(self):
        x = scalar(2, (0, 1), (1, 1))  # 1 + T
        y = invert(x, 3)
        assert y.terms == ((Fraction(0), 1), (Fraction(1), 1), (Fraction(2), 1))
        assert y.trunc == Fraction(3)
        back = x * y
        assert back.terms == ((Fraction(0), 1),)
        assert back.trunc == Fraction(3)
        assert back.agrees_with(NovikovScalar.one(2), 3)

    def test_monomial_inverse(self):
        x = NovikovScalar.monomial(5, 3, Fraction(2))
        y = invert(x, 4)
        prod = x * y
        assert prod.agrees_with(NovikovScalar.one(5), 4)

    def test_invert_zero_rejected(self):
        with pytest.raises(NovikovError):
            invert(NovikovScalar.zero(2), 3)

    def test_truncation_min_rule_on_add(self):
        a = scalar(2, (0, 1), trunc=2)
        b = scalar(2, (1, 1), trunc=3)
        s = a + b
        assert s.trunc == Fraction(2)
        assert s.terms == ((Fraction(0), 1), (Fraction(1), 1))

    def test_truncation_rule_on_mul(self):
        a = scalar(2, (1, 1), trunc=3)   # T, known below T^3
        b = scalar(2, (2, 1), trunc=4)   # T^2, known below T^4
        m = a * b
        # min(nu(a)+trunc(b), nu(b)+trunc(a)) = min(1+4, 2+3) = 5
        assert m.trunc == Fraction(5)
        assert m.terms == ((Fraction(3), 1),)

    def test_terms_at_or_above_trunc_dropped(self):
        s = scalar(2, (0, 1), (5, 1), trunc=2)
        assert s.terms == ((Fraction(0), 1),)

    def test_field_axioms_randomized(self):
        rng = random.Random(7)
        for p in (2, 5):
            for _ in range(60):
                def rand_scalar():
                    terms = [
                        (Fraction(rng.randint(-8, 8), 4), rng.randrange(0, p))
                        for _ in range(rng.randint(0, 3))
                    ]
                    return NovikovScalar.from_terms(p, terms)

                a, b, c = rand_scalar(), rand_scalar(), rand_scalar()
                assert (a + b) + c == a + (b + c)
                assert a + b == b + a
                assert a * (b + c) == a * b + a * c
                assert (a * b) * c == a * (b * c)
                assert a - a == NovikovScalar.zero(p)
                if a and b:
                    assert valuation(a * b) == valuation(a) + valuation(b)
                if a:
                    inv = invert(a, 6)
                    assert (a * inv).agrees_with(NovikovScalar.one(p), 6)
                s = a + b
                if a.terms or b.terms:
                    assert valuation(s) >= min(valuation(a), valuation(b))


class TestText:
    def test_round_trip(self):
        x = scalar(5, ("-1", 2), ("3/2", 4))
        text = x.to_text()
        assert text == "2*T^-1 + 4*T^3/2"
        y = NovikovScalar.from_text(text, 5)
        assert y == x

    def test_zero_text(self):
        assert NovikovScalar.zero(2).to_text() == "0"
        assert NovikovScalar.from_text("0", 2) == NovikovScalar.zero(2)

    def test_str_shows_truncation(self):
        s = scalar(2, (0, 1), trunc=2)
        assert "mod" in str(s)

from fractions import Fraction

import pytest

from floerbar.complexes import (
    FloerPackage,
    Generator,
    PackageError,
    PerturbationTooLarge,
    chain_action,
    difference_set,
    dualize,
    perturb_actions,
    spectrum,
    validate,
)
from floerbar.novikov import NovikovScalar, PeriodGroup

from helpers import scalar, two_storey_random


def three_chain():
    """x1 at action 2, x2 at 1/2, x3 at 0; boundary x1 -> x2."""
    gens = (
        Generator("x1", Fraction(2)),
        Generator("x2", Fraction(1, 2)),
        Generator("x3", Fraction(0)),
    )
    terms = ((0, 1, NovikovScalar.one(2)),)
    return FloerPackage(gens, terms)


def circle_pair():
    """Unit period group; boundary x1 -> (1 + T) x2 with a 3/2 action drop."""
    gens = (Generator("x1", Fraction(3, 2)), Generator("x2", Fraction(0)))
    terms = ((0, 1, scalar(2, (0, 1), (1, 1))),)
    return FloerPackage(gens, terms, PeriodGroup.from_generators(1))


class TestValidate:
    def test_three_chain_is_valid_with_margin(self):
        report = validate(three_chain())
        assert report.ok
        assert report.margin == Fraction(3, 2)
        assert report.issues == ()

    def test_circle_pair_arrows(self):
        report = validate(circle_pair())
        assert report.ok
        assert report.margin == Fraction(3, 2)

    def test_action_increase_flagged(self):
        gens = (Generator("a", Fraction(0)), Generator("b", Fraction(1)))
        pkg = FloerPackage(gens, ((0, 1, NovikovScalar.one(2)),))
        report = validate(pkg)
        assert not report.strictly_action_decreasing
        assert not report.ok

    def test_component_crossing_flagged(self):
        gens = (
            Generator("a", Fraction(1), "u"),
            Generator("b", Fraction(0), "v"),
        )
        pkg = FloerPackage(gens, ((0, 1, NovikovScalar.one(2)),))
        assert not validate(pkg).components_preserved

    def test_exponent_outside_group_flagged(self):
        gens = (Generator("a", Fraction(2)), Generator("b", Fraction(0)))
        pkg = FloerPackage(
            gens,
            ((0, 1, scalar(2, ("1/2", 1))),),
            PeriodGroup.from_generators(1),
        )
        assert not validate(pkg).exponents_in_group

    def test_square_zero_violation_flagged(self):
        gens = (
            Generator("a", Fraction(2)),
            Generator("b", Fraction(1)),
            Generator("c", Fraction(0)),
        )
        one = NovikovScalar.one(2)
        pkg = FloerPackage(gens, ((0, 1, one), (1, 2, one)))
        report = validate(pkg)
        assert not report.boundary_squares_to_zero

    def test_square_zero_with_cancellation(self):
        # a -> b + b', b -> c, b' -> c cancels over F_2.
        gens = (
            Generator("a", Fraction(3)),
            Generator("b", Fraction(2)),
            Generator("b'", Fraction(1)),
            Generator("c", Fraction(0)),
        )
        one = NovikovScalar.one(2)
        pkg = FloerPackage(
            gens, ((0, 1, one), (0, 2, one), (1, 3, one), (2, 3, one))
        )
        assert validate(pkg).boundary_squares_to_zero

    def test_self_term_rejected(self):
        gens = (Generator("a", Fraction(1)),)
        with pytest.raises(PackageError):
            FloerPackage(gens, ((0, 0, NovikovScalar.one(2)),))


class TestChainAction:
    def test_plain_max(self):
        pkg = three_chain()
        one = NovikovScalar.one(2)
        assert chain_action(pkg, {0: one, 1: one}) == Fraction(2)
        assert chain_action(pkg, {1: one}) == Fraction(1, 2)

    def test_valuation_shifts_action(self):
        pkg = circle_pair()
        # T^2 * x1 sits at action 3/2 - 2.
        coeff = NovikovScalar.monomial(2, 1, 2)
        assert chain_action(pkg, {0: coeff}) == Fraction(-1, 2)

    def test_zero_chain_rejected(self):
        with pytest.raises(PackageError):
            chain_action(three_chain(), {})


class TestDualize:
    def test_involution_and_validity(self):
        for pkg in (three_chain(), circle_pair()):
            dual = dualize(pkg)
            assert validate(dual).ok
            assert dualize(dual) == pkg

    def test_arrow_lengths_preserved(self):
        pkg = circle_pair()
        assert validate(dualize(pkg)).margin == validate(pkg).margin


class TestPerturb:
    def test_zero_delta_identity(self):
        pkg = three_chain()
        assert perturb_actions(pkg, 0) == pkg

    def test_too_large_delta_rejected(self):
        pkg = three_chain()  # margin 3/2
        with pytest.raises(PerturbationTooLarge):
            perturb_actions(pkg, Fraction(3, 4))

    def test_small_delta_stays_valid_and_close(self):
        pkg = three_chain()
        delta = Fraction(1, 4)
        pert = perturb_actions(pkg, delta, seed=3)
        assert validate(pert).ok
        for old, new in zip(pkg.generators, pert.generators):
            assert abs(new.action - old.action) < delta

    def test_deterministic_in_seed(self):
        pkg = three_chain()
        a = perturb_actions(pkg, "1/4", seed=11)
        b = perturb_actions(pkg, "1/4", seed=11)
        c = perturb_actions(pkg, "1/4", seed=12)
        assert a == b
        assert a != c

    def test_random_corpus_margins_respected(self):
        for seed in range(6):
            pkg = two_storey_random(seed)
            margin = validate(pkg).margin
            if margin is None:
                continue
            pert = perturb_actions(pkg, margin / 3, seed=seed)
            assert validate(pert).ok


class TestSpectra:
    def test_spectrum_plain(self):
        spec = spectrum(three_chain())
        assert spec.parts == (
            ("o", (Fraction(0), Fraction(1, 2), Fraction(2))),
        )

    def test_spectrum_reduced_mod_group(self):
        spec = spectrum(circle_pair())
        assert spec.parts == (("o", (Fraction(0), Fraction(1, 2))),)

    def test_difference_set_contains_bar_length(self):
        (ds,) = difference_set(three_chain())
        assert ds.contains(Fraction(3, 2))
        assert ds.contains(0)
        assert ds.contains(Fraction(-3, 2))
        assert not ds.contains(1)

    def test_difference_set_mod_group(self):
        (ds,) = difference_set(circle_pair())
        assert ds.gamma_orbit
        assert ds.contains(Fraction(3, 2))  # reduces to 1/2
        assert ds.contains(Fraction(1, 2))
        assert not ds.contains(Fraction(1, 4))


class TestStructure:
    def test_terms_sorted_and_indexed(self):
        pkg = three_chain()
        assert pkg.n == 3
        assert pkg.rows() == {0: {1: NovikovScalar.one(2)}}
        assert pkg.action_diameter() == Fraction(2)

    def test_permuted_round_trip(self):
        pkg = three_chain()
        perm = [2, 0, 1]
        moved = pkg.permuted(perm)
        assert moved.generators[0].label == "x3"
        assert validate(moved).ok
        margins = validate(moved).margin
        assert margins == Fraction(3, 2)

    def test_out_of_range_term_rejected(self):
        gens = (Generator("a", Fraction(1)),)
        with pytest.raises(PackageError):
            FloerPackage(gens, ((0, 5, NovikovScalar.one(2)),))

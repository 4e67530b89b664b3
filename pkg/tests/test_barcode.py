from fractions import Fraction

import pytest

from floerbar.barcode import (
    OrthogonalityError,
    b_eps,
    barcode,
    boundary_depth,
    intersection_lower_bound,
    robust_b_eps,
    singular_decomposition,
)
from floerbar.complexes import (
    FloerPackage,
    Generator,
    PackageError,
    dualize,
    perturb_actions,
    validate,
)
from floerbar.novikov import NovikovScalar, PeriodGroup

from helpers import (
    brute_b_eps_oracle,
    conjugated_ground_truth,
    persistence_reduction_oracle,
    scalar,
    two_storey_random,
)

from test_complexes import circle_pair, three_chain


class TestFrozenExamples:
    def test_three_chain(self):
        bc = barcode(three_chain())
        assert bc.finite_lengths() == (Fraction(3, 2),)
        assert bc.infinite == 1
        assert bc.exact
        assert bc.certified_floor is None
        assert bc.generator_count == 3
        assert bc.b_eps(1) == 2
        assert bc.b_eps(Fraction(3, 2)) == 1  # strict comparison
        assert bc.b_eps(2) == 1
        assert bc.boundary_depth() == Fraction(3, 2)

    def test_circle_pair(self):
        bc = barcode(circle_pair())
        assert bc.finite_lengths() == (Fraction(3, 2),)
        assert bc.infinite == 0
        assert bc.exact

    def test_module_level_helpers(self):
        pkg = three_chain()
        assert b_eps(pkg, 1) == 2
        assert boundary_depth(pkg) == Fraction(3, 2)
        assert intersection_lower_bound(pkg, 1, "2/5") == 2
        assert intersection_lower_bound(pkg, 1, "3/5") == 1

    def test_counting_identity(self):
        for seed in range(8):
            pkg = two_storey_random(seed)
            bc = barcode(pkg)
            assert bc.generator_count == pkg.n
            assert 2 * len(bc.finite_lengths()) + bc.infinite == pkg.n

    def test_series_pivot_stays_exact(self):
        # Shortest arrow carries 1 + T; exact fraction arithmetic absorbs
        # the series inverse, so the barcode comes out with no caveat.
        gens = (
            Generator("s1", Fraction(1)),
            Generator("s2", Fraction(2)),
            Generator("t", Fraction(0)),
        )
        terms = (
            (0, 2, scalar(2, (0, 1), (1, 1))),
            (1, 2, NovikovScalar.one(2)),
        )
        pkg = FloerPackage(gens, terms, PeriodGroup.from_generators(1))
        bc = barcode(pkg)
        assert bc.finite_lengths() == (Fraction(1),)
        assert bc.infinite == 1
        assert bc.exact
        assert bc.certified_floor is None
        # Chain extraction works in plain scalars and keeps the truncated
        # cancellation: auto order 2*diam + 2*period + 1 = 7, and the
        # dropped entry sits at action 2 - 0, so its floor is 9.
        dec = singular_decomposition(pkg)
        assert not dec.exact
        assert dec.certified_floor == Fraction(9)
        assert dec.to_barcode().finite_lengths() == (Fraction(1),)

    def test_truncated_input_pivot_floor(self):
        # Same shape, but the series coefficient is only known up to
        # order 5; the inverse is capped there, the other row cancels only
        # up to that order, and the dropped entry at action gap 2 leaves
        # floor 2 + 5.
        gens = (
            Generator("s1", Fraction(1)),
            Generator("s2", Fraction(2)),
            Generator("t", Fraction(0)),
        )
        terms = (
            (0, 2, NovikovScalar.from_terms(2, [(0, 1), (1, 1)], trunc=5)),
            (1, 2, NovikovScalar.one(2)),
        )
        pkg = FloerPackage(gens, terms, PeriodGroup.from_generators(1))
        bc = barcode(pkg)
        assert bc.finite_lengths() == (Fraction(1),)
        assert bc.infinite == 1
        assert not bc.exact
        assert bc.certified_floor == Fraction(7)

    def test_empty_and_arrowless_packages(self):
        empty = FloerPackage(())
        assert barcode(empty).generator_count == 0
        lone = FloerPackage((Generator("a", Fraction(1)),))
        bc = barcode(lone)
        assert bc.finite_lengths() == ()
        assert bc.infinite == 1


class TestAgainstOracles:
    def test_persistence_reduction_corpus(self):
        for seed in range(40):
            pkg = two_storey_random(seed, n_targets=6, n_sources=6)
            expected = persistence_reduction_oracle(pkg)
            bc = barcode(pkg)
            assert (bc.finite_lengths(), bc.infinite) == expected, f"seed {seed}"

    def test_brute_force_b_eps_corpus(self):
        for seed in range(12):
            pkg = two_storey_random(seed, n_targets=4, n_sources=4)
            bc = barcode(pkg)
            eps_grid = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3)]
            eps_grid += list(bc.finite_lengths())  # exact bar values: strictness
            for eps in eps_grid:
                assert bc.b_eps(eps) == brute_b_eps_oracle(pkg, eps), (
                    f"seed {seed}, eps {eps}"
                )

    def test_conjugated_ground_truth_trivial_group(self):
        for seed in range(30):
            pkg, lengths, infinite = conjugated_ground_truth(seed)
            assert validate(pkg).ok, f"seed {seed}"
            bc = barcode(pkg)
            assert bc.finite_lengths() == lengths, f"seed {seed}"
            assert bc.infinite == infinite, f"seed {seed}"
            assert bc.exact

    def test_conjugated_ground_truth_unit_period(self):
        for seed in range(30):
            pkg, lengths, infinite = conjugated_ground_truth(seed, use_gamma=True)
            assert validate(pkg).ok, f"seed {seed}"
            bc = barcode(pkg)
            assert bc.finite_lengths() == lengths, f"seed {seed}"
            assert bc.infinite == infinite, f"seed {seed}"

    def test_conjugated_ground_truth_odd_field(self):
        for seed in range(20):
            pkg, lengths, infinite = conjugated_ground_truth(seed, p=5)
            bc = barcode(pkg)
            assert (bc.finite_lengths(), bc.infinite) == (lengths, infinite)


class TestInvariance:
    def test_duality(self):
        for seed in range(10):
            pkg = two_storey_random(seed)
            assert barcode(dualize(pkg)).finite_lengths() == barcode(pkg).finite_lengths()
            assert barcode(dualize(pkg)).infinite == barcode(pkg).infinite
        pkg = circle_pair()
        assert barcode(dualize(pkg)).finite_lengths() == (Fraction(3, 2),)

    def test_permutation_invariance(self):
        pkg = two_storey_random(3, n_targets=5, n_sources=4)
        moved = pkg.permuted(list(reversed(range(pkg.n))))
        assert barcode(moved).finite_lengths() == barcode(pkg).finite_lengths()

    def test_stability_under_perturbation(self):
        for seed in range(8):
            pkg = two_storey_random(seed, n_targets=5, n_sources=5)
            margin = validate(pkg).margin
            if margin is None:
                continue
            delta = margin / 4
            bc = barcode(pkg)
            pert_bc = barcode(perturb_actions(pkg, delta, seed=seed))
            for eps in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4)):
                hi = bc.b_eps(eps - 2 * delta)
                lo = bc.b_eps(eps + 2 * delta)
                val = pert_bc.b_eps(eps)
                assert lo <= val <= hi, f"seed {seed}, eps {eps}"

    def test_robust_b_eps_respects_stability_floor(self):
        pkg = three_chain()
        delta = Fraction(1, 2)
        val = robust_b_eps(pkg, Fraction(2, 5), delta, trials=4)
        assert val >= barcode(pkg).b_eps(Fraction(2, 5) + 2 * delta)
        assert val == 2  # bars stay above 1/2 > 2/5

    def test_bar_lengths_live_in_difference_set(self):
        from floerbar.complexes import difference_set

        for seed in range(6):
            pkg = two_storey_random(seed)
            sets = {d.component: d for d in difference_set(pkg)}
            bc = barcode(pkg)
            for part in bc.parts:
                for length in part.finite:
                    assert sets[part.component].contains(length)


class TestSingularDecomposition:
    def test_three_chain_chains(self):
        dec = singular_decomposition(three_chain())
        assert dec.exact
        (pair,) = dec.pairs
        assert pair.length == Fraction(3, 2)
        assert pair.top == Fraction(2)
        assert pair.bottom == Fraction(1, 2)
        assert pair.top - pair.bottom == pair.length
        (idx_eta, coeff_eta), = pair.eta
        assert idx_eta == 0 and coeff_eta == NovikovScalar.one(2)
        (idx_g, _), = pair.gamma
        assert idx_g == 1
        (alpha,) = dec.singulars
        assert alpha.action == Fraction(0)
        assert alpha.chain == ((2, NovikovScalar.one(2)),)
        assert dec.to_barcode().finite_lengths() == (Fraction(3, 2),)

    def test_circle_pair_chains(self):
        dec = singular_decomposition(circle_pair())
        (pair,) = dec.pairs
        assert pair.length == Fraction(3, 2)
        assert pair.top == Fraction(3, 2)
        assert pair.bottom == Fraction(0)
        assert dec.singulars == ()

    def test_collision_raises_but_barcode_fine(self):
        gens = (
            Generator("a", Fraction(1)),
            Generator("b", Fraction(1)),
            Generator("u", Fraction(0)),
            Generator("v", Fraction(0)),
        )
        one = NovikovScalar.one(2)
        terms = ((0, 2, one), (0, 3, one), (1, 2, one), (1, 3, one))
        pkg = FloerPackage(gens, terms)
        bc = barcode(pkg)
        assert bc.finite_lengths() == (Fraction(1),)
        assert bc.infinite == 2
        with pytest.raises(OrthogonalityError):
            singular_decomposition(pkg)

    def test_corpus_chains_certify(self):
        for seed in range(10):
            pkg = two_storey_random(seed)
            dec = singular_decomposition(pkg)
            seen = set()
            for pair in dec.pairs:
                assert pair.top - pair.bottom == pair.length
                for chain in (pair.eta, pair.gamma):
                    lead = max(
                        chain,
                        key=lambda t: pkg.action(t[0]) - t[1].valuation(),
                    )[0]
                    assert lead not in seen
                    seen.add(lead)
            bc = barcode(pkg)
            assert dec.to_barcode().finite_lengths() == bc.finite_lengths()

    def test_invalid_package_rejected(self):
        gens = (Generator("a", Fraction(0)), Generator("b", Fraction(1)))
        pkg = FloerPackage(gens, ((0, 1, NovikovScalar.one(2)),))
        with pytest.raises(PackageError):
            barcode(pkg)

from fractions import Fraction

import pytest

from floerbar.barcode import barcode
from floerbar.complexes import FloerPackage, Generator
from floerbar.floer_graph import floer_graph
from floerbar.novikov import NovikovScalar, PeriodGroup

from helpers import scalar, two_storey_random
from test_complexes import circle_pair, three_chain


class TestArrows:
    def test_three_chain_single_arrow(self):
        g = floer_graph(three_chain())
        assert len(g.arrows) == 1
        arrow = g.arrows[0]
        assert (arrow.source, arrow.target) == (0, 1)
        assert arrow.length == Fraction(3, 2)
        assert g.shortest_arrow() == Fraction(3, 2)
        assert g.certified_below is None

    def test_circle_pair_two_arrows(self):
        g = floer_graph(circle_pair())
        assert [a.length for a in g.arrows] == [Fraction(3, 2), Fraction(5, 2)]

    def test_truncated_coefficient_limits_certification(self):
        gens = (Generator("a", Fraction(2)), Generator("b", Fraction(0)))
        pkg = FloerPackage(
            gens,
            ((0, 1, scalar(2, (0, 1), trunc=3)),),
            PeriodGroup.from_generators(1),
        )
        g = floer_graph(pkg)
        assert g.certified_below == Fraction(5)  # 2 - 0 + 3
        assert g.isolated(1) == (0, 1)  # the known T^0 arrow has length 2
        assert g.isolated(2) == ()
        with pytest.raises(ValueError):
            g.isolated(5)


class TestIsolation:
    def test_three_chain_isolated_sets(self):
        g = floer_graph(three_chain())
        assert g.isolated(1) == (0, 1, 2)
        assert g.isolated(Fraction(3, 2)) == (2,)
        assert g.isolated(100) == (2,)

    def test_lower_bound_rounds_up(self):
        g = floer_graph(three_chain())
        assert g.isolated_lower_bound(1) == 2  # ceil(3/2)
        assert g.isolated_lower_bound(Fraction(3, 2)) == 1

    def test_bound_below_barcode_on_corpus(self):
        for seed in range(12):
            pkg = two_storey_random(seed)
            g = floer_graph(pkg)
            bc = barcode(pkg)
            for eps in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3)):
                assert g.isolated_lower_bound(eps) <= bc.b_eps(eps), (
                    f"seed {seed}, eps {eps}"
                )


class TestDot:
    def test_dot_output_shape(self):
        g = floer_graph(three_chain())
        dot = g.to_dot(eps=Fraction(3, 2))
        assert dot.startswith("digraph floer {")
        assert 'g0 -> g1' in dot
        assert "color=red" in dot
        assert dot.strip().endswith("}")

    def test_dot_without_cut(self):
        dot = floer_graph(circle_pair()).to_dot()
        assert "color=red" not in dot

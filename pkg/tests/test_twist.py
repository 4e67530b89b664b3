import math
from fractions import Fraction

import numpy as np
import pytest

from floerbar.dynamics import (
    IdentityMap,
    RotationMap,
    ShearMap,
    TwistMapModel,
    find_periodic_orbits,
    orbit_table,
)
from floerbar.dynamics.orbits import OrbitRecord, component_label
from floerbar.dynamics.twist import defect_free_window, lefschetz_defect

TWO_PI = 2.0 * math.pi


def torus_orbit_points(rec):
    """Reconstruct (x, y) torus points from a record: y_i is the incoming
    step, so the point sequence is independent of the search internals."""
    return [
        (rec.positions[i], rec.steps[i - 1] % 1.0) for i in range(rec.period)
    ]


class TestModelIdentities:
    def test_area_preservation(self):
        rng = np.random.default_rng(5)
        pts = rng.random((64, 2))
        for K in (0.0, 0.5, 2.0, 6.0):
            jac = TwistMapModel(K).jacobian_array(pts)
            dets = np.linalg.det(jac)
            assert np.allclose(dets, 1.0, atol=1e-12)

    def test_lift_commutes_with_deck_translations(self):
        model = TwistMapModel(2.0)
        rng = np.random.default_rng(6)
        pts = rng.random((32, 2))
        base = model.lift_array(pts)
        for m in (-2, 1, 5):
            shifted = pts + np.array([m, 0.0])
            moved = model.lift_array(shifted)
            assert np.allclose(moved, base + np.array([m, 0.0]), atol=1e-12)
        assert np.allclose(model.map_array(pts), base % 1.0, atol=1e-12)

    def test_hessian_opposes_criticality_jacobian(self):
        model = TwistMapModel(3.0)
        lifts = np.array([[0.1, 0.7, 0.4]])
        assert np.allclose(
            model.hessian(lifts), -model.criticality_jacobian(lifts), atol=0
        )

    def test_criticality_is_flow_action_gradient(self):
        # Central differences of the flow potential against -G, entry by
        # entry; this pins the sign convention as well as the values.
        model = TwistMapModel(4.0)
        lifts = np.array([[0.15, 0.62, 0.38, 0.91]])
        m = np.array([1])
        n = np.array([2])
        g = model.criticality(lifts, m, n)[0]
        h = 1e-6
        for i in range(4):
            bumped = lifts.copy()
            bumped[0, i] += h
            up = model.flow_action(bumped, m, n)[0]
            bumped[0, i] -= 2 * h
            down = model.flow_action(bumped, m, n)[0]
            assert (up - down) / (2 * h) == pytest.approx(-g[i], abs=1e-5)

    def test_constant_sequence_action(self):
        # Zero displacement leaves only the potential term K/(4 pi^2) per
        # step.
        model = TwistMapModel(5.0)
        for k in (1, 3, 6):
            lifts = np.zeros((1, k))
            expected = k * 5.0 / (4.0 * math.pi**2)
            assert model.action(lifts, np.array([0]))[0] == pytest.approx(
                expected, abs=1e-12
            )

    def test_fixed_point_trace_formula(self):
        # One-step monodromy trace is 2 - K cos(2 pi x).
        for K in (2.0, 8.0):
            model = TwistMapModel(K)
            for x in (0.0, 0.25, 0.5):
                jac = model.jacobian_array(np.array([[x, 0.0]]))[0]
                assert np.trace(jac) == pytest.approx(
                    2.0 - K * math.cos(TWO_PI * x), abs=1e-12
                )


class TestFixedPointSearch:
    def test_weak_coupling_pair(self):
        res = find_periodic_orbits(TwistMapModel(2.0), 1, grid=64)
        recs = sorted(res.records, key=lambda r: r.positions[0])
        assert [r.positions[0] for r in recs] == pytest.approx([0.0, 0.5], abs=1e-12)
        assert [r.trace for r in recs] == pytest.approx([0.0, 4.0], abs=1e-9)
        assert [r.classification for r in recs] == ["elliptic", "hyperbolic"]
        assert res.complete

    def test_strong_coupling_sextet(self):
        # At K = 8 the momentum can jump by one unit: sin(2 pi x) = -2 pi
        # N / K has solutions for N in {-1, 0, 1}, giving six fixed points
        # with analytically known positions and traces.
        K = 8.0
        res = find_periodic_orbits(TwistMapModel(K), 1, grid=64)
        recs = sorted(res.records, key=lambda r: r.positions[0])
        x1 = math.asin(math.pi / 4.0) / TWO_PI
        expected_x = sorted([0.0, 0.5, x1, 0.5 - x1, 0.5 + x1, 1.0 - x1])
        assert [r.positions[0] for r in recs] == pytest.approx(expected_x, abs=1e-9)
        assert sorted(r.momentum_winding for r in recs) == [-1, -1, 0, 0, 1, 1]
        for r in recs:
            assert r.trace == pytest.approx(
                2.0 - K * math.cos(TWO_PI * r.positions[0]), abs=1e-9
            )
            assert r.is_hyperbolic

    def test_control_maps_have_no_isolated_orbits(self):
        for model in (IdentityMap(), ShearMap(), RotationMap(alpha=0.3)):
            res = find_periodic_orbits(model, 3)
            assert res.records == ()
            assert res.complete
            assert dict(res.diagnostics)["degenerate_model"] == 1

    def test_rejects_nonpositive_period(self):
        with pytest.raises(ValueError):
            find_periodic_orbits(TwistMapModel(2.0), 0)


@pytest.fixture(scope="module")
def k2_table():
    return orbit_table(TwistMapModel(2.0), 4, grid=64)


class TestOrbitTable:
    def test_point_counts(self, k2_table):
        assert [k2_table.point_count(k) for k in range(1, 5)] == [2, 6, 14, 22]
        assert [k2_table.orbit_count(d) for d in range(1, 5)] == [2, 2, 4, 4]

    def test_census(self, k2_table):
        census = sorted(
            (r.period, r.winding, r.momentum_winding, r.classification)
            for r in k2_table.records
        )
        assert census == [
            (1, 0, 0, "elliptic"),
            (1, 0, 0, "hyperbolic"),
            (2, 1, 0, "hyperbolic"),
            (2, 1, 0, "parabolic"),
            (3, 1, 0, "hyperbolic"),
            (3, 1, 0, "reflection-hyperbolic"),
            (3, 2, 0, "hyperbolic"),
            (3, 2, 0, "reflection-hyperbolic"),
            (4, 1, 0, "hyperbolic"),
            (4, 1, 0, "reflection-hyperbolic"),
            (4, 3, 0, "hyperbolic"),
            (4, 3, 0, "reflection-hyperbolic"),
        ]

    def test_accelerator_orbit_trace(self, k2_table):
        # The {0, 1/2} two-cycle has monodromy J(1/2) J(0) whose trace is
        # -2 by direct multiplication: cos is exactly +-1 at those points.
        par = [r for r in k2_table.records if r.classification == "parabolic"]
        assert len(par) == 1
        assert par[0].positions == pytest.approx([0.0, 0.5], abs=1e-12)
        assert par[0].trace == pytest.approx(-2.0, abs=1e-9)

    def test_records_are_map_orbits(self, k2_table):
        # Independent of the search: feeding position and incoming step
        # back through the map must reproduce the cycle on the torus.
        model = TwistMapModel(2.0)
        for rec in k2_table.records:
            pts = torus_orbit_points(rec)
            cur = np.array([pts[0]])
            for i in range(1, rec.period + 1):
                cur = model.map_array(cur)
                expect = pts[i % rec.period]
                dx = abs(cur[0, 0] - expect[0])
                dy = abs(cur[0, 1] - expect[1])
                assert min(dx, 1.0 - dx) < 1e-8
                assert min(dy, 1.0 - dy) < 1e-8

    def test_action_lift_matches_model_action(self, k2_table):
        model = TwistMapModel(2.0)
        for rec in k2_table.records:
            lift = [rec.positions[0]]
            for s in rec.steps[:-1]:
                lift.append(lift[-1] + s)
            val = model.action(np.array([lift]), np.array([rec.winding]))[0]
            assert float(rec.action_lift) == pytest.approx(val, abs=1e-9)

    def test_signed_counts_vanish(self, k2_table):
        # The linear part of the family is a unipotent shear, so every
        # Lefschetz number is zero and the signed fixed-point sums must
        # cancel wherever the parity is defined.
        assert [lefschetz_defect(k2_table.records, k) for k in range(1, 4)] == [0, 0, 0]
        # At k = 4 the parabolic two-cycle has iterated trace exactly 2.
        assert lefschetz_defect(k2_table.records, 4) is None
        assert defect_free_window(k2_table) == (1, 3)

    def test_table_metadata(self, k2_table):
        assert k2_table.complete
        assert k2_table.gamma.generator == Fraction(1, 2)
        assert k2_table.diagnostic("verify_failed") == 0
        assert not any(k.startswith("lefschetz_defect") for k, _ in k2_table.diagnostics)

    def test_point_count_range_check(self, k2_table):
        with pytest.raises(ValueError):
            k2_table.point_count(0)
        with pytest.raises(ValueError):
            k2_table.point_count(5)

    def test_determinism(self, k2_table):
        again = orbit_table(TwistMapModel(2.0), 4, grid=64)
        assert [r.orbit_id for r in again.records] == [
            r.orbit_id for r in k2_table.records
        ]

    def test_zero_coupling_is_degenerate(self):
        table = orbit_table(TwistMapModel(0.0), 3, grid=32)
        assert table.records == ()
        assert table.complete

    def test_strong_coupling_counts(self):
        # Regression pins for the K = 6 searches; the zero defect at each
        # period certifies the counts via the signed-sum identity.
        table = orbit_table(TwistMapModel(6.0), 3, grid=64)
        assert [table.point_count(k) for k in range(1, 4)] == [2, 16, 86]
        assert [table.orbit_count(d) for d in range(1, 4)] == [2, 7, 28]
        assert [lefschetz_defect(table.records, k) for k in range(1, 4)] == [0, 0, 0]

    def test_budget_flag(self):
        res = find_periodic_orbits(TwistMapModel(6.0), 3, grid=16, seed_budget=1)
        assert not res.complete
        assert dict(res.diagnostics)["seed_budget_hit"] == 1


class TestIterateBookkeeping:
    def sample(self, n=1):
        return OrbitRecord(
            period=1,
            winding=0,
            momentum_winding=n,
            positions=(0.25,),
            steps=(0.5,),
            action_lift=Fraction(0),
            trace=4.0,
            index=0,
            classification="hyperbolic",
        )

    def test_iterate_windings_quadratic_drift(self):
        rec = self.sample(n=1)
        assert rec.iterate_windings(1) == (0, 1)
        assert rec.iterate_windings(2) == (1, 2)
        assert rec.iterate_windings(3) == (3, 3)
        with pytest.raises(ValueError):
            self.sample().iterate_windings(0)

    def test_component_labels(self):
        assert component_label(5, 0, 3) == "w2"
        assert component_label(1, 2, 2) == "n2w1"
        assert component_label(7, 4, 6) == "n4w1"
        with pytest.raises(ValueError):
            component_label(0, 0, 0)
        rec = self.sample(n=2)
        assert rec.label(2) == "n4w1"

    def test_power_trace_chebyshev(self, k2_table):
        for rec in k2_table.records:
            t = rec.trace
            assert rec.power_trace(1) == pytest.approx(t, abs=1e-12)
            assert rec.power_trace(2) == pytest.approx(t * t - 2.0, abs=1e-6)
            assert rec.power_trace(3) == pytest.approx(t**3 - 3.0 * t, abs=1e-4)

    def test_index_parity(self, k2_table):
        by_class = {r.classification: r for r in k2_table.records if r.period == 1}
        assert by_class["elliptic"].index_parity(1) == 1
        assert by_class["hyperbolic"].index_parity(1) == 0
        par = next(r for r in k2_table.records if r.classification == "parabolic")
        assert par.index_parity(2) == 1
        with pytest.raises(ValueError):
            par.index_parity(4)

    def test_period_mismatch_raises(self):
        with pytest.raises(ValueError):
            OrbitRecord(
                period=2,
                winding=0,
                momentum_winding=0,
                positions=(0.1,),
                steps=(0.0,),
                action_lift=Fraction(0),
                trace=3.0,
                index=0,
                classification="hyperbolic",
            )


class TestControlMaps:
    def test_shear_and_rotation_lifts(self):
        pts = np.array([[0.2, 0.7]])
        assert ShearMap().lift_array(pts)[0] == pytest.approx([0.9, 0.7], abs=1e-12)
        assert RotationMap(alpha=0.375).lift_array(pts)[0] == pytest.approx(
            [0.575, 0.7], abs=1e-12
        )
        assert IdentityMap().map_array(pts)[0] == pytest.approx([0.2, 0.7])

    def test_unit_jacobians(self):
        pts = np.random.default_rng(7).random((8, 2))
        for model in (IdentityMap(), ShearMap(), RotationMap(alpha=0.1)):
            dets = np.linalg.det(model.jacobian_array(pts))
            assert np.allclose(dets, 1.0, atol=1e-12)

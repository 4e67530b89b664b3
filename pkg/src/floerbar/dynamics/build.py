"""Assemble action-filtered complexes from periodic orbit tables.

Generators of the k-th package are the fixed points of the k-th iterate:
every point of every orbit whose minimal period divides k.  Actions are
step-action lifts reduced modulo the table's period group (the integers
for torus maps, whose action is defined modulo the torus area; the trivial
group for symbolic models), with the discarded lift parts recovered by the
arrow exponents.

For a d-periodic orbit repeated m = k/d times the lift action is exact in
the stored data:

    W_k = m W_d + N M d(m)(m-1)/2-type corrections,

see _iterate_action below; rotating the starting point adds
m N (x_r - x_0) + r m^2 N^2 / 2.  For momentum winding N = 0 every point
of an orbit therefore carries exactly the same action.

The differential counts gradient-descent flows from odd-index orbits to
even-index ones, mod 2, replicated over cyclic shifts.  A flow whose
endpoint gauge disagrees with the canonical target lift can make the
bookkept drop nonpositive even though the flow itself strictly descended;
such connections cannot enter a strictly filtered differential and are
dropped with a diagnostic count instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..complexes import FloerPackage, Generator, PackageError, validate
from ..floer_graph import floer_graph
from ..novikov import NovikovScalar, snap
from .orbits import OrbitRecord, OrbitTable
from .twist import CouplingError, morse_descent_terms


def _iterate_action(rec: OrbitRecord, k: int) -> Fraction:
    """Exact lift action of the orbit's base point under the k-th iterate."""
    if k % rec.period:
        raise ValueError("iterate must be a multiple of the minimal period")
    m = k // rec.period
    n = rec.momentum_winding
    base = rec.action_lift * m
    base += Fraction(n * rec.winding * m * (m - 1), 2)
    base += Fraction(rec.period * n * n * (m - 1) * m * (2 * m - 1), 12)
    return base


def _point_action(rec: OrbitRecord, k: int, rotation: int, base: Fraction) -> Fraction:
    """Lift action of orbit point ``rotation`` as a k-iterate generator.

    The generator action is the flow potential W_N = (step action sum) -
    N_k * x_base evaluated on the configuration based at that point.  The
    base-position terms cancel between the two summands, leaving the exact
    increment N_k^2/2 per rotation step; only the orbit's first position
    enters, snapped once.
    """
    n_k = (k // rec.period) * rec.momentum_winding
    if n_k == 0:
        return base
    start = base - n_k * snap(rec.positions[0])
    return start + Fraction(rotation * n_k * n_k, 2)


@dataclass(frozen=True)
class BuildReport:
    """A built package plus the bookkeeping that explains its shape."""

    package: FloerPackage
    k: int
    complete: bool
    diagnostics: tuple[tuple[str, int], ...]

    def diagnostic(self, key: str) -> int:
        return dict(self.diagnostics).get(key, 0)


def build_package_from_orbits(
    table: OrbitTable,
    k: int,
    *,
    model=None,
    differential: str = "descent",
    p: int = 2,
    descent_options: dict | None = None,
) -> BuildReport:
    """Package of the k-th iterate from an orbit table.

    differential "descent" needs the generating map model and works over
    the two-element field; "none" builds the arrowless package for any p.
    """
    if differential not in ("descent", "none"):
        raise ValueError(f"unknown differential rule {differential!r}")
    if differential == "descent":
        if model is None:
            raise CouplingError("descent coupling needs the generating map model")
        if p != 2:
            raise CouplingError("descent coupling counts flows mod 2; use p = 2")

    records = tuple(table.iter_for(k))
    diagnostics: dict[str, int] = {}

    generators: list[Generator] = []
    lift_actions: list[Fraction] = []
    gen_index: dict[tuple[int, int], int] = {}
    parity: dict[int, int | None] = {}
    for idx, rec in enumerate(records):
        try:
            parity[idx] = rec.index_parity(k)
        except ValueError:
            parity[idx] = None
            diagnostics["parity_degenerate"] = diagnostics.get("parity_degenerate", 0) + 1
        base = _iterate_action(rec, k)
        for r in range(rec.period):
            lift = _point_action(rec, k, r, base)
            gen_index[(idx, r)] = len(generators)
            generators.append(Generator(
                label=f"{rec.orbit_id}.{r}",
                action=table.gamma.reduce(lift),
                component=rec.label(k),
            ))
            lift_actions.append(lift)

    diagnostics["generators"] = len(generators)
    diagnostics["orbits"] = len(records)

    term_parity: dict[tuple[int, int, Fraction], int] = {}
    if differential == "descent" and records:
        options = descent_options or {}
        connections, flow_diag = morse_descent_terms(model, records, k, **options)
        for key, val in flow_diag.items():
            diagnostics[key] = diagnostics.get(key, 0) + val
        for conn in connections:
            if conn.count % 2 == 0:
                diagnostics["cancelled_mod2"] = diagnostics.get("cancelled_mod2", 0) + 1
                continue
            src, tgt = records[conn.source], records[conn.target]
            if parity[conn.source] != 1 or parity[conn.target] != 0:
                diagnostics["parity_skipped"] = diagnostics.get("parity_skipped", 0) + 1
                continue
            if src.label(k) != tgt.label(k):
                diagnostics["component_mismatch"] = diagnostics.get("component_mismatch", 0) + 1
                continue
            i = gen_index[(conn.source, conn.source_rotation)]
            j = gen_index[(conn.target, conn.target_rotation)]
            m_t, n_k = tgt.iterate_windings(k)
            m_rho = m_t + conn.target_rotation * n_k
            c0 = conn.step_shift
            chart_cost = c0 * m_rho + Fraction(k * c0 * c0, 2)
            drop = lift_actions[i] - lift_actions[j] - chart_cost + n_k * conn.shift
            if drop <= 0:
                diagnostics["nonpositive_drop"] = diagnostics.get("nonpositive_drop", 0) + 1
                continue
            a = drop - (generators[i].action - generators[j].action)
            if not table.gamma.contains(a):
                raise PackageError(
                    "arrow exponent escaped the period group; "
                    "the endpoint charts are inconsistent")
            term_parity[(i, j, a)] = term_parity.get((i, j, a), 0) ^ 1

    by_pair: dict[tuple[int, int], list[Fraction]] = {}
    for (i, j, a), odd in term_parity.items():
        if odd:
            by_pair.setdefault((i, j), []).append(a)
    terms = tuple(
        (i, j, NovikovScalar.from_terms(p, [(a, 1) for a in sorted(exps)]))
        for (i, j), exps in sorted(by_pair.items())
    )
    diagnostics["arrows"] = len(terms)

    package = FloerPackage(
        generators=tuple(generators),
        terms=terms,
        gamma=table.gamma,
        p=p,
    )
    report = validate(package)
    if not report.ok:
        raise PackageError("built package failed validation: " + "; ".join(report.issues))
    return BuildReport(
        package=package,
        k=k,
        complete=table.complete,
        diagnostics=tuple(sorted(diagnostics.items())),
    )


def gap_floor(package: FloerPackage) -> Fraction | None:
    """Length of the shortest arrow; None when the differential vanishes."""
    return floer_graph(package).shortest_arrow()


@dataclass(frozen=True)
class GapScan:
    """Per-iterate minimal nonzero action gap between distinct orbits.

    ``rows`` holds (k, gap) pairs; a ``None`` gap means fewer than two
    distinct action values contributed (vacuous minimum, +infinity).
    """

    model: str
    hyperbolic_only: bool
    rows: tuple[tuple[int, Fraction | None], ...]

    @property
    def floor(self) -> Fraction | None:
        finite = [g for _, g in self.rows if g is not None]
        return min(finite) if finite else None

    def bounded_away(self, threshold: Fraction) -> bool:
        """True when every iterate's gap exceeds ``threshold``.

        Vacuous iterates count as bounded away (their gap is +infinity).
        """
        return all(g is None or g > threshold for _, g in self.rows)


def action_gap_scan(
    table: OrbitTable,
    k_max: int | None = None,
    *,
    hyperbolic_only: bool = False,
) -> GapScan:
    """Scan iterates 1..k_max for the minimal distance between orbit actions.

    Uses one representative action per orbit (the canonical base point's
    lift) and measures distances in the circle of actions modulo the
    table's period group, so a pair of lifts differing by a full period
    counts as a zero gap and is excluded from the minimum.
    """
    if k_max is None:
        k_max = table.k_max
    if k_max < 1 or k_max > table.k_max:
        raise ValueError("scan range must fit inside the table range")
    rows: list[tuple[int, Fraction | None]] = []
    for k in range(1, k_max + 1):
        actions = sorted(
            {
                table.gamma.reduce(_iterate_action(rec, k))
                for rec in table.iter_for(k)
                if not hyperbolic_only or rec.is_hyperbolic
            }
        )
        # Reduced representatives are sorted, so the minimal circular
        # distance is realized by neighbours or by the wrap-around pair.
        candidates: list[Fraction] = []
        for a, b in zip(actions, actions[1:]):
            candidates.append(table.gamma.circular_distance(a, b))
        if not table.gamma.is_trivial and len(actions) > 1:
            candidates.append(
                table.gamma.circular_distance(actions[-1], actions[0])
            )
        positive = [c for c in candidates if c > 0]
        rows.append((k, min(positive) if positive else None))
    return GapScan(
        model=table.model,
        hyperbolic_only=hyperbolic_only,
        rows=tuple(rows),
    )

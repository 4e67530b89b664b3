"""Barcodes of action-filtered complexes via valuation-greedy elimination.

The eliminator repeatedly splits off the globally shortest arrow of the
differential as an acyclic two-term summand.  With that pivot choice every
basis change is action-nonincreasing and every arrow created by a step is
at least as long as the arrow eliminated, so the multiset of arrow lengths
consumed by the process is exactly the barcode: finite bars from the
eliminated pairs, one infinite bar per surviving generator.

Packages whose coefficients are all exact are eliminated in exact
arithmetic: working entries are quotients of finite sums, so a multi-term
pivot costs a denominator instead of a truncation and the barcode comes
out with ``exact=True``.  Truncated coefficients, and chain extraction,
whose output must stay in plain scalars, are handled soundly rather than
optimistically: whenever an entry cancels to zero only up to its
truncation order, the entry is dropped and the shortest arrow it might
still hide is recorded; the minimum over these is published as
``certified_floor``.  Finite bars shorter than the floor are provably
correct; bars at or above it, including the split between long finite
bars and infinite bars, may be affected by hidden terms.  A barcode with
``exact=True`` has no caveat.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .complexes import (
    FloerPackage,
    PackageError,
    chain_action,
    perturb_actions,
    validate,
)
from .novikov import ExponentLike, NovikovScalar, snap

__all__ = [
    "OrthogonalityError",
    "ComponentBarcode",
    "Barcode",
    "BarPair",
    "SingularChain",
    "SingularDecomposition",
    "barcode",
    "singular_decomposition",
    "b_eps",
    "boundary_depth",
    "intersection_lower_bound",
    "robust_b_eps",
]


class OrthogonalityError(ValueError):
    """No decomposition with pairwise distinct leading generators was found.

    Typically the package has action collisions modulo the period group;
    breaking ties with ``perturb_actions`` usually resolves it.
    """


Chain = tuple[tuple[int, NovikovScalar], ...]


@dataclass(frozen=True)
class ComponentBarcode:
    component: str
    finite: tuple[Fraction, ...]  # lengths, descending
    infinite: int

    @property
    def generator_count(self) -> int:
        return 2 * len(self.finite) + self.infinite

    def b_eps(self, eps: ExponentLike) -> int:
        e = snap(eps)
        return sum(1 for length in self.finite if length > e) + self.infinite


@dataclass(frozen=True)
class Barcode:
    parts: tuple[ComponentBarcode, ...]
    exact: bool = True
    certified_floor: Optional[Fraction] = None

    def part(self, component: str) -> ComponentBarcode:
        for cb in self.parts:
            if cb.component == component:
                return cb
        raise KeyError(component)

    def finite_lengths(self) -> tuple[Fraction, ...]:
        merged: list[Fraction] = []
        for cb in self.parts:
            merged.extend(cb.finite)
        return tuple(sorted(merged, reverse=True))

    @property
    def infinite(self) -> int:
        return sum(cb.infinite for cb in self.parts)

    @property
    def generator_count(self) -> int:
        return sum(cb.generator_count for cb in self.parts)

    def b_eps(self, eps: ExponentLike) -> int:
        """Number of bars strictly longer than eps; infinite bars always count."""
        e = snap(eps)
        return sum(1 for length in self.finite_lengths() if length > e) + self.infinite

    def boundary_depth(self) -> Fraction:
        lengths = self.finite_lengths()
        return lengths[0] if lengths else Fraction(0)


@dataclass(frozen=True)
class BarPair:
    """Finite bar with certifying chains: boundary(eta) = gamma."""

    component: str
    length: Fraction
    top: Fraction
    bottom: Fraction
    eta: Chain
    gamma: Chain


@dataclass(frozen=True)
class SingularChain:
    """Cycle spanning an infinite bar."""

    component: str
    action: Fraction
    chain: Chain


@dataclass(frozen=True)
class SingularDecomposition:
    pairs: tuple[BarPair, ...]
    singulars: tuple[SingularChain, ...]
    exact: bool
    certified_floor: Optional[Fraction]

    def to_barcode(self) -> Barcode:
        by_comp: dict[str, tuple[list[Fraction], int]] = {}
        for bp in self.pairs:
            by_comp.setdefault(bp.component, ([], 0))[0].append(bp.length)
        for sc in self.singulars:
            lengths, inf = by_comp.setdefault(sc.component, ([], 0))
            by_comp[sc.component] = (lengths, inf + 1)
        parts = tuple(
            ComponentBarcode(c, tuple(sorted(l, reverse=True)), inf)
            for c, (l, inf) in sorted(by_comp.items())
        )
        return Barcode(parts, self.exact, self.certified_floor)


def _auto_order(package: FloerPackage) -> Fraction:
    """Default truncation order for pivot inverses.

    Twice the action diameter plus twice the period generator leaves all
    plausibly relevant arrow lengths below the certified floor that a
    truncated cancellation at this order produces.
    """
    return 2 * package.action_diameter() + 2 * package.gamma.generator + 1


_ONE_TERMS = ((Fraction(0), 1),)


class _Fraction:
    """Quotient of exact scalars; closes the elimination under division.

    A multi-term pivot has no finite inverse, so eliminating through one
    in plain scalar arithmetic forces a truncation and a certified floor.
    Holding every working entry as num/den of exact finite sums keeps
    cancellation structural: a difference is zero exactly when its
    numerator is, and exact packages come out with exact barcodes.
    Denominators are normalised to valuation zero and leading coefficient
    one, which collapses monomial denominators to one and makes equal
    denominators frequent, so the common-denominator branch of addition
    carries most of the load.
    """

    __slots__ = ("num", "den")
    trunc = None

    def __init__(self, num: NovikovScalar, den: NovikovScalar) -> None:
        if not den.terms:
            raise ZeroDivisionError("fraction with zero denominator")
        if not num.terms:
            den = NovikovScalar.one(num.p)
        else:
            e0, f0 = den.leading_term()
            if e0 or f0 != 1:
                u = pow(f0, -1, num.p)
                num = num.scaled(u).shifted(-e0)
                den = den.scaled(u).shifted(-e0)
        self.num = num
        self.den = den

    @classmethod
    def wrap(cls, c: NovikovScalar) -> "_Fraction":
        return cls(c, NovikovScalar.one(c.p))

    @property
    def terms(self) -> tuple[tuple[Fraction, int], ...]:
        return self.num.terms

    def valuation(self):
        return self.num.valuation()

    def inverse(self) -> "_Fraction":
        return _Fraction(self.den, self.num)

    def __neg__(self) -> "_Fraction":
        return _Fraction(-self.num, self.den)

    def __add__(self, other: "_Fraction") -> "_Fraction":
        if self.den.terms == other.den.terms:
            return _Fraction(self.num + other.num, self.den)
        return _Fraction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "_Fraction") -> "_Fraction":
        if self.den.terms == other.den.terms:
            return _Fraction(self.num - other.num, self.den)
        return _Fraction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __mul__(self, other: "_Fraction") -> "_Fraction":
        if self.den.terms == _ONE_TERMS and other.den.terms == _ONE_TERMS:
            return _Fraction(self.num * other.num, self.den)
        return _Fraction(self.num * other.num, self.den * other.den)


def _invert(
    c: NovikovScalar | _Fraction, order: Fraction
) -> NovikovScalar | _Fraction:
    if isinstance(c, _Fraction):
        return c.inverse()
    # Exact monomials invert exactly; anything else is a genuine series.
    if c.is_exact() and len(c.terms) == 1:
        e, f = c.terms[0]
        return NovikovScalar.monomial(c.p, pow(f, -1, c.p), -e)
    return c.inverse(order)


class _Reduction:
    """Greedy elimination state for one component.

    ``rows[i][j]`` is the coefficient of basis element j in the boundary of
    basis element i, in the current basis.  ``lift[i]`` expresses basis
    element i in the original generators; it is only maintained when chains
    are requested.  In exact mode the entries are ``_Fraction`` values and
    ``floors`` stays empty; otherwise every zero-by-truncation drop lands
    in ``floors``.  Chain lifts live in plain scalars, so exact mode and
    chain extraction are mutually exclusive.
    """

    def __init__(
        self,
        package: FloerPackage,
        indices: tuple[int, ...],
        order: Fraction,
        want_chains: bool,
        exact_mode: bool = False,
    ) -> None:
        self.pkg = package
        self.order = order
        self.want = want_chains
        self.actions = {i: package.action(i) for i in indices}
        self.rows: dict[int, dict[int, NovikovScalar | _Fraction]] = {}
        self.cols: dict[int, set[int]] = {}
        # Heap key prefers non-self arrows among equal lengths; self
        # entries appear transiently in tower-shaped complexes and are
        # never valid pivots, they cancel once their length class clears.
        self.heap: list[tuple[Fraction, int, int, int]] = []
        self.floors: list[Fraction] = []
        self.pairs: list[tuple[int, int, Fraction]] = []
        self.consumed: set[int] = set()
        self.indices = indices
        self.lift: Optional[dict[int, dict[int, NovikovScalar]]] = None
        if want_chains:
            one = NovikovScalar.one(package.p)
            self.lift = {i: {i: one} for i in indices}
        member = set(indices)
        orig = package.rows()
        for i in indices:
            for j, c in orig.get(i, {}).items():
                if j not in member:
                    raise PackageError("differential crosses components")
                self._set(i, j, _Fraction.wrap(c) if exact_mode else c)

    def _set(self, i: int, j: int, value: NovikovScalar | _Fraction) -> None:
        row = self.rows.get(i)
        old = None if row is None else row.get(j)
        if value.terms:
            if row is None:
                row = self.rows[i] = {}
            row[j] = value
            self.cols.setdefault(j, set()).add(i)
            length = self.actions[i] - self.actions[j] + value.valuation()
            heapq.heappush(self.heap, (length, 1 if i == j else 0, i, j))
            return
        if value.trunc is not None:
            self.floors.append(self.actions[i] - self.actions[j] + value.trunc)
        if old is not None:
            del row[j]
            if not row:
                del self.rows[i]
            col = self.cols[j]
            col.discard(i)
            if not col:
                del self.cols[j]

    def run(self) -> None:
        while self.heap:
            length, selfloop, i, j = heapq.heappop(self.heap)
            if selfloop:
                continue
            row = self.rows.get(i)
            if row is None:
                continue
            c = row.get(j)
            if c is None:
                continue
            if self.actions[i] - self.actions[j] + c.valuation() != length:
                continue  # stale heap entry
            self._pivot(i, j, c, length)
        if self.rows:
            raise PackageError("elimination stalled with arrows remaining")
        self.survivors = tuple(g for g in self.indices if g not in self.consumed)

    def _pivot(
        self, i: int, j: int, c: NovikovScalar | _Fraction, length: Fraction
    ) -> None:
        inv_c = _invert(c, self.order)
        for z in sorted(k for k in self.cols.get(j, ()) if k != i):
            zrow = self.rows.get(z)
            if zrow is None:
                continue
            cz = zrow.get(j)
            if cz is None:
                continue
            q = cz * inv_c
            if self.lift is not None:
                self.lift[z] = _chain_sub_scaled(self.lift[z], q, self.lift[i])
            # z as a target elsewhere: rewriting z moves its coefficient
            # onto the eliminated source, where everything must cancel.
            for u in list(self.cols.get(z, ())):
                add = self.rows[u][z] * q
                cur = self.rows.get(u, {}).get(i)
                self._set(u, i, add if cur is None else cur + add)
            # The pivot row must be read fresh per step: compensation can
            # give it a transient self coordinate, and dropping that term
            # here would leave the source column uncancelled.
            for w, ciw in list(self.rows[i].items()):
                delta = q * ciw
                cur = self.rows.get(z, {}).get(w)
                self._set(z, w, (-delta) if cur is None else cur - delta)
        leftover = self.cols.get(i)
        if leftover:
            raise PackageError(
                "differential does not square to zero at generator "
                f"{i}: arrows into an eliminated source survive"
            )
        self.pairs.append((i, j, length))
        self._drop_row(i)
        # The eliminated target is replaced by the boundary of the
        # eliminated source, whose own boundary vanishes identically.
        self._drop_row(j)
        self.consumed.update((i, j))

    def _drop_row(self, i: int) -> None:
        row = self.rows.pop(i, None)
        if row is None:
            return
        for w in row:
            col = self.cols.get(w)
            if col is not None:
                col.discard(i)
                if not col:
                    del self.cols[w]


def _chain_sub_scaled(
    a: dict[int, NovikovScalar], q: NovikovScalar, b: dict[int, NovikovScalar]
) -> dict[int, NovikovScalar]:
    """a - q*b on sparse chains; zero coefficients are pruned."""
    out = dict(a)
    for g, coeff in b.items():
        delta = q * coeff
        cur = out.get(g)
        val = (-delta) if cur is None else cur - delta
        if val.terms:
            out[g] = val
        elif cur is not None:
            del out[g]
    return out


def _apply_boundary(
    rows: dict[int, dict[int, NovikovScalar]], chain: dict[int, NovikovScalar]
) -> dict[int, NovikovScalar]:
    out: dict[int, NovikovScalar] = {}
    for g, coeff in chain.items():
        for w, c in rows.get(g, {}).items():
            add = coeff * c
            cur = out.get(w)
            val = add if cur is None else cur + add
            if val.terms:
                out[w] = val
            elif cur is not None:
                del out[w]
    return out


def _chain_leading(
    actions: dict[int, Fraction], chain: dict[int, NovikovScalar]
) -> tuple[int, bool]:
    best: Optional[Fraction] = None
    best_g = -1
    unique = True
    for g, coeff in chain.items():
        v = actions[g] - coeff.valuation()
        if best is None or v > best:
            best, best_g, unique = v, g, True
        elif v == best:
            unique = False
    return best_g, unique


def _freeze(chain: dict[int, NovikovScalar]) -> Chain:
    return tuple(sorted(chain.items()))


def _run_components(
    package: FloerPackage, order: Optional[ExponentLike], want_chains: bool
) -> tuple[list[tuple[str, _Reduction]], bool, Optional[Fraction]]:
    ord_frac = snap(order) if order is not None else _auto_order(package)
    inputs_exact = all(c.is_exact() for _, _, c in package.terms)
    runs = []
    floors: list[Fraction] = []
    for comp, idx in package.component_indices().items():
        red = _Reduction(
            package,
            idx,
            ord_frac,
            want_chains,
            exact_mode=inputs_exact and not want_chains,
        )
        red.run()
        floors.extend(red.floors)
        runs.append((comp, red))
    exact = inputs_exact and not floors
    floor = min(floors) if floors else None
    return runs, exact, floor


def barcode(
    package: FloerPackage,
    *,
    order: Optional[ExponentLike] = None,
    validate_package: bool = True,
) -> Barcode:
    """Barcode of the package: finite bar lengths and infinite counts.

    Packages with exact coefficients are reduced in exact arithmetic and
    always come out ``exact=True``.  ``order`` only matters for truncated
    inputs, where it overrides the truncation order used for pivot
    inverses; the default is high enough that certified floors sit above
    every bar the data can support.
    """
    if validate_package:
        report = validate(package)
        if not report.ok:
            raise PackageError("invalid package: " + "; ".join(report.issues))
    runs, exact, floor = _run_components(package, order, want_chains=False)
    parts = tuple(
        ComponentBarcode(
            comp,
            tuple(sorted((length for _, _, length in red.pairs), reverse=True)),
            len(red.survivors),
        )
        for comp, red in runs
    )
    return Barcode(parts, exact, floor)


def singular_decomposition(
    package: FloerPackage,
    *,
    order: Optional[ExponentLike] = None,
    validate_package: bool = True,
) -> SingularDecomposition:
    """Chain-level decomposition into bar pairs and singular cycles.

    Every returned chain has a unique leading generator and no generator
    leads twice across the whole decomposition; that is the orthogonality
    certificate.  When the greedy run cannot reach such a family, usually
    because of action collisions modulo the period group, the function
    raises ``OrthogonalityError`` instead of returning ambiguous chains.

    Chain coefficients are plain scalars, so multi-term pivots go through
    truncated inverses here; the decomposition can therefore report a
    certified floor on a package whose ``barcode`` is exact.  The bar data
    below the floor agrees between the two.
    """
    if validate_package:
        report = validate(package)
        if not report.ok:
            raise PackageError("invalid package: " + "; ".join(report.issues))
    runs, exact, floor = _run_components(package, order, want_chains=True)
    orig = package.rows()
    all_actions = {i: package.action(i) for i in range(package.n)}
    min_action = min((g.action for g in package.generators), default=Fraction(0))
    guard = min_action - (snap(order) if order is not None else _auto_order(package))

    pairs: list[BarPair] = []
    singulars: list[SingularChain] = []
    for comp, red in runs:
        assert red.lift is not None
        taken: dict[int, tuple[str, dict[int, NovikovScalar]]] = {}
        for i, j, length in red.pairs:
            eta = red.lift[i]
            gamma = _apply_boundary(orig, eta)
            if not gamma:
                raise OrthogonalityError(
                    "boundary chain lost below the truncation floor"
                )
            for chain, kind in ((eta, "eta"), (gamma, "gamma")):
                g, uniq = _chain_leading(all_actions, chain)
                if not uniq:
                    raise OrthogonalityError(
                        f"chain for pair ({i},{j}) has tied leading actions"
                    )
                if g in taken:
                    raise OrthogonalityError(
                        f"generator {g} leads two chains; actions collide"
                    )
                taken[g] = (kind, chain)
            pairs.append(
                BarPair(
                    comp,
                    length,
                    chain_action(package, eta),
                    chain_action(package, gamma),
                    _freeze(eta),
                    _freeze(gamma),
                )
            )
        for s in sorted(red.survivors, key=lambda g: (-red.actions[g], g)):
            alpha = dict(red.lift[s])
            while True:
                if not alpha:
                    raise OrthogonalityError(
                        f"singular candidate {s} reduced to zero"
                    )
                if chain_action(package, alpha) < guard:
                    raise OrthogonalityError(
                        f"singular candidate {s} descended below the "
                        "truncation guard without finding a free generator"
                    )
                g, uniq = _chain_leading(all_actions, alpha)
                if not uniq:
                    raise OrthogonalityError(
                        f"singular candidate {s} has tied leading actions"
                    )
                if g not in taken:
                    taken[g] = ("alpha", alpha)
                    singulars.append(
                        SingularChain(comp, chain_action(package, alpha), _freeze(alpha))
                    )
                    break
                kind, owner = taken[g]
                if kind == "eta":
                    raise OrthogonalityError(
                        f"generator {g} leads both a cycle and a bar top"
                    )
                # Cancel the leading term against the owning cycle; this
                # strictly lowers the candidate's action at g.
                ea, fa = alpha[g].leading_term()
                eo, fo = owner[g].leading_term()
                lam = NovikovScalar.monomial(
                    package.p, (fa * pow(fo, -1, package.p)) % package.p, ea - eo
                )
                alpha = _chain_sub_scaled(alpha, lam, owner)

    pairs.sort(key=lambda bp: (bp.component, -bp.length, -bp.top))
    singulars.sort(key=lambda sc: (sc.component, -sc.action))
    return SingularDecomposition(tuple(pairs), tuple(singulars), exact, floor)


def b_eps(package: FloerPackage, eps: ExponentLike, **kw) -> int:
    return barcode(package, **kw).b_eps(eps)


def boundary_depth(package: FloerPackage, **kw) -> Fraction:
    return barcode(package, **kw).boundary_depth()


def intersection_lower_bound(
    package: FloerPackage, eps: ExponentLike, delta: ExponentLike, **kw
) -> int:
    """Bars longer than eps surviving any delta-perturbation: b_(eps+delta).

    Any complex within shift distance delta of this one has at least this
    many bars longer than eps, which lower-bounds intersection counts in
    the geometric settings the packages model.
    """
    return barcode(package, **kw).b_eps(snap(eps) + snap(delta))


def robust_b_eps(
    package: FloerPackage,
    eps: ExponentLike,
    delta: ExponentLike,
    trials: int = 8,
    seed: int = 0,
    **kw,
) -> int:
    """Minimum of b_eps over an ensemble of delta-perturbed copies.

    Stability keeps every value at or above b_(eps+2*delta) of the
    unperturbed package; this is a cheap empirical check of that bound.
    """
    best = barcode(package, **kw).b_eps(eps)
    for t in range(trials):
        pert = perturb_actions(package, delta, seed=seed + t)
        val = barcode(pert, **kw).b_eps(eps)
        if val < best:
            best = val
    return best

"""Action-filtered complexes over a Novikov field.

A package bundles a finite generator set with real actions and component
labels, a differential given as a sparse collection of Novikov-scalar
coefficients, and the period group the exponents live in.  The differential
must strictly decrease action term by term: every term ``f*T^a`` of the
coefficient of ``x_j`` in the boundary of ``x_i`` must satisfy
``A(x_i) - A(x_j) + a > 0``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import inf
from typing import Iterable, Mapping, Optional, Sequence, Union

from .novikov import (
    SNAP_GRID,
    ExponentLike,
    NovikovError,
    NovikovScalar,
    PeriodGroup,
    snap,
)

__all__ = [
    "Generator",
    "FloerPackage",
    "Chain",
    "ValidationReport",
    "ActionSpectrum",
    "DifferenceSet",
    "PackageError",
    "PerturbationTooLarge",
    "validate",
    "chain_action",
    "dualize",
    "perturb_actions",
    "spectrum",
    "difference_set",
]


class PackageError(ValueError):
    """Structural problem with a package or chain."""


class PerturbationTooLarge(PackageError):
    """Requested action perturbation does not fit below the margin."""


@dataclass(frozen=True)
class Generator:
    label: str
    action: Fraction
    component: str = "o"


@dataclass(frozen=True)
class FloerPackage:
    """Finite action-filtered complex over a Novikov field.

    ``terms`` holds the differential as ``(i, j, coeff)`` triples: ``coeff``
    is the Novikov-scalar coefficient of generator ``j`` in the boundary of
    generator ``i``.  Triples are kept sorted for stable equality and
    serialization.
    """

    generators: tuple[Generator, ...]
    terms: tuple[tuple[int, int, NovikovScalar], ...] = ()
    gamma: PeriodGroup = field(default_factory=PeriodGroup.trivial)
    p: int = 2

    def __post_init__(self) -> None:
        n = len(self.generators)
        for i, j, coeff in self.terms:
            if not (0 <= i < n and 0 <= j < n):
                raise PackageError(f"differential index ({i},{j}) out of range")
            if i == j:
                raise PackageError(f"differential has a self term at generator {i}")
            if coeff.p != self.p:
                raise PackageError("differential coefficient over wrong prime field")
        object.__setattr__(
            self, "terms", tuple(sorted(self.terms, key=lambda t: (t[0], t[1])))
        )

    # -- basic views ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.generators)

    def action(self, i: int) -> Fraction:
        return self.generators[i].action

    def component(self, i: int) -> str:
        return self.generators[i].component

    def components(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for g in self.generators:
            seen.setdefault(g.component, None)
        return tuple(sorted(seen))

    def component_indices(self) -> dict[str, tuple[int, ...]]:
        out: dict[str, list[int]] = {}
        for i, g in enumerate(self.generators):
            out.setdefault(g.component, []).append(i)
        return {c: tuple(ix) for c, ix in sorted(out.items())}

    def rows(self) -> dict[int, dict[int, NovikovScalar]]:
        """Differential as a mapping i -> {j -> coeff}."""
        out: dict[int, dict[int, NovikovScalar]] = {}
        for i, j, coeff in self.terms:
            out.setdefault(i, {})[j] = coeff
        return out

    def action_diameter(self) -> Fraction:
        if not self.generators:
            return Fraction(0)
        acts = [g.action for g in self.generators]
        return max(acts) - min(acts)

    # -- derived packages ------------------------------------------------------

    def with_actions(self, actions: Sequence[Fraction]) -> "FloerPackage":
        if len(actions) != self.n:
            raise PackageError("action list length mismatch")
        gens = tuple(
            Generator(g.label, snap(a), g.component)
            for g, a in zip(self.generators, actions)
        )
        return FloerPackage(gens, self.terms, self.gamma, self.p)

    def permuted(self, perm: Sequence[int]) -> "FloerPackage":
        """Reindex generators by ``perm``: new position k holds old perm[k]."""
        if sorted(perm) != list(range(self.n)):
            raise PackageError("not a permutation")
        inv = [0] * self.n
        for new, old in enumerate(perm):
            inv[old] = new
        gens = tuple(self.generators[old] for old in perm)
        terms = tuple((inv[i], inv[j], c) for i, j, c in self.terms)
        return FloerPackage(gens, terms, self.gamma, self.p)


Chain = Mapping[int, NovikovScalar]


def chain_action(package: FloerPackage, chain: Chain) -> Fraction:
    """Action of a nonzero chain: max over entries of A(x_i) - val(coeff)."""
    best: Optional[Fraction] = None
    for i, coeff in chain.items():
        if not coeff:
            continue
        value = package.action(i) - coeff.valuation()
        if best is None or value > best:
            best = value
    if best is None:
        raise PackageError("zero chain has no action")
    return best


@dataclass(frozen=True)
class ValidationReport:
    boundary_squares_to_zero: bool
    strictly_action_decreasing: bool
    components_preserved: bool
    exponents_in_group: bool
    margin: Optional[Fraction]  # minimal arrow length; None when no arrows
    issues: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return (
            self.boundary_squares_to_zero
            and self.strictly_action_decreasing
            and self.components_preserved
            and self.exponents_in_group
        )


def validate(package: FloerPackage) -> ValidationReport:
    """Check differential structure: d^2 = 0 (up to truncation), strict
    action decrease term by term, component preservation, exponent group."""
    issues: list[str] = []
    margin: Optional[Fraction] = None
    decreasing = True
    comps_ok = True
    group_ok = True

    for i, j, coeff in package.terms:
        if package.component(i) != package.component(j):
            comps_ok = False
            issues.append(f"term ({i},{j}) crosses components")
        drop = package.action(i) - package.action(j)
        for e, _ in coeff.terms:
            if not package.gamma.contains(e):
                group_ok = False
                issues.append(f"term ({i},{j}) exponent {e} outside period group")
            length = drop + e
            if length <= 0:
                decreasing = False
                issues.append(
                    f"term ({i},{j}) arrow length {length} is not positive"
                )
            elif margin is None or length < margin:
                margin = length

    rows = package.rows()
    squares = True
    for i, row in rows.items():
        acc: dict[int, NovikovScalar] = {}
        for j, cij in row.items():
            for l, cjl in rows.get(j, {}).items():
                prod = cij * cjl
                if l in acc:
                    acc[l] = acc[l] + prod
                else:
                    acc[l] = prod
        for l, total in acc.items():
            if total.terms:
                squares = False
                issues.append(f"d^2 coefficient ({i},{l}) = {total} is nonzero")

    return ValidationReport(
        boundary_squares_to_zero=squares,
        strictly_action_decreasing=decreasing,
        components_preserved=comps_ok,
        exponents_in_group=group_ok,
        margin=margin,
        issues=tuple(issues),
    )


def dualize(package: FloerPackage) -> FloerPackage:
    """Dual package: actions negated, differential transposed.

    Arrow lengths are preserved, so validity carries over, and the barcode
    is unchanged.  The operation is an involution.
    """
    gens = tuple(
        Generator(g.label, -g.action, g.component) for g in package.generators
    )
    terms = tuple((j, i, c) for i, j, c in package.terms)
    return FloerPackage(gens, terms, package.gamma, package.p)


def perturb_actions(
    package: FloerPackage,
    delta: ExponentLike,
    seed: int = 0,
    grid: Fraction = SNAP_GRID,
) -> FloerPackage:
    """Shift every action by an independent uniform value in (-delta, delta).

    ``delta`` must stay below half the action-decrease margin so the
    perturbed package is still strictly action decreasing.  ``delta=0``
    returns the package unchanged.
    """
    d = snap(delta)
    if d < 0:
        raise PerturbationTooLarge("delta must be nonnegative")
    if d == 0:
        return package
    report = validate(package)
    if report.margin is not None and 2 * d >= report.margin:
        raise PerturbationTooLarge(
            f"delta {d} is not below half the action margin {report.margin}"
        )
    rng = random.Random(seed)
    actions = []
    for g in package.generators:
        # Scale into the open interval, then snap; the shrink factor keeps
        # the snapped value strictly inside (-delta, delta).
        shift = snap(rng.uniform(-0.999, 0.999) * float(d), grid)
        if abs(shift) >= d:
            shift = (d - grid) if shift > 0 else -(d - grid)
        actions.append(g.action + shift)
    return package.with_actions(actions)


@dataclass(frozen=True)
class ActionSpectrum:
    """Per-component action values reduced modulo the period group."""

    gamma: PeriodGroup
    parts: tuple[tuple[str, tuple[Fraction, ...]], ...]

    def component(self, c: str) -> tuple[Fraction, ...]:
        for name, values in self.parts:
            if name == c:
                return values
        return ()


@dataclass(frozen=True)
class DifferenceSet:
    """Spectral gaps of one component: representatives of S - S mod gamma.

    When the period group is nontrivial the true difference set is the whole
    orbit ``reps + gamma``; ``gamma_orbit`` records that.
    """

    component: str
    gamma: PeriodGroup
    reps: tuple[Fraction, ...]
    gamma_orbit: bool

    def contains(self, x: ExponentLike) -> bool:
        xf = snap(x)
        if self.gamma.is_trivial:
            return xf in self.reps
        return self.gamma.reduce(xf) in self.reps


def spectrum(package: FloerPackage) -> ActionSpectrum:
    parts = []
    for c, idx in package.component_indices().items():
        values = sorted({package.gamma.reduce(package.action(i)) for i in idx})
        parts.append((c, tuple(values)))
    return ActionSpectrum(package.gamma, tuple(parts))


def difference_set(package: FloerPackage) -> tuple[DifferenceSet, ...]:
    out = []
    spec = spectrum(package)
    for c, values in spec.parts:
        if package.gamma.is_trivial:
            reps = sorted({a - b for a in values for b in values})
        else:
            reps = sorted({package.gamma.reduce(a - b) for a in values for b in values})
        out.append(
            DifferenceSet(c, package.gamma, tuple(reps), not package.gamma.is_trivial)
        )
    return tuple(out)

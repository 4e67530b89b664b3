"""Symbolic full-shift models with exact affine actions.

A uniformly hyperbolic invariant set conjugate to the full shift on ``s``
symbols is the cleanest source of growth data: fixed points of the k-th
iterate are exactly the s^k length-k symbol blocks, and periodic orbits are
the cyclic equivalence classes (necklaces).  We attach an action to each
orbit as a weighted count of its symbols.  Weights are snapped onto the
dyadic grid used by the exponent arithmetic, so every action is an exact
rational and action gaps can be asserted with ``==``.

With the default two-symbol weights (1, golden ratio) the action of a
k-block is n0 + n1*phi with n0 + n1 = k, so the difference of two distinct
block actions is a nonzero multiple of (phi - 1): the minimal gap equals
(phi - 1) * scale at every iterate, independent of k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..complexes import FloerPackage, Generator
from ..novikov import NovikovScalar, PeriodGroup, snap
from .orbits import OrbitRecord, OrbitTable

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

# Pairwise rationally independent before snapping; snapping preserves the
# gap structure at desk scale because the grid is 2^-40.
_WEIGHT_BASIS = (
    1.0,
    _GOLDEN,
    math.sqrt(2.0),
    math.sqrt(3.0),
    math.sqrt(5.0),
    math.sqrt(7.0),
    math.sqrt(11.0),
    math.sqrt(13.0),
)


def default_weights(symbols: int) -> tuple[Fraction, ...]:
    if symbols > len(_WEIGHT_BASIS):
        raise ValueError(f"no default weights for {symbols} symbols")
    return tuple(snap(w) for w in _WEIGHT_BASIS[:symbols])


def _mobius(n: int) -> int:
    if n == 1:
        return 1
    result, m = 1, n
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


@dataclass(frozen=True)
class SymbolicHorseshoe:
    """Full shift on ``symbols`` letters with affine action weights.

    ``expansion`` is the uniform hyperbolicity constant of the underlying
    linear model (monodromy trace of a period-d orbit is
    expansion^d + expansion^-d).  ``scale`` multiplies every weight and is
    the knob for placing the action spectrum relative to an epsilon grid.
    """

    symbols: int = 2
    weights: tuple[Fraction, ...] = ()
    expansion: float = 0.0
    scale: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.symbols < 2:
            raise ValueError("a shift needs at least two symbols")
        if not self.weights:
            object.__setattr__(self, "weights", default_weights(self.symbols))
        if len(self.weights) != self.symbols:
            raise ValueError("one weight per symbol")
        if len(set(self.weights)) != self.symbols:
            raise ValueError("weights must be distinct")
        if self.expansion == 0.0:
            object.__setattr__(self, "expansion", 2.0 * self.symbols + 1.0)
        if self.expansion <= 1.0:
            raise ValueError("expansion constant must exceed 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def name(self) -> str:
        return f"horseshoe{self.symbols}"

    @property
    def weight_gap(self) -> Fraction:
        """Minimal pairwise weight difference, scaled.

        For two symbols this is the exact minimal action gap between
        distinct orbits of every iterate; for more symbols it is only the
        single-swap gap and the honest floor comes from an exhaustive scan.
        """
        gaps = [
            abs(a - b) for a, b in itertools.combinations(self.weights, 2)
        ]
        return min(gaps) * self.scale

    def point_count(self, k: int) -> int:
        if k < 1:
            raise ValueError("iterate must be positive")
        return self.symbols**k

    def orbit_count(self, period: int) -> int:
        """Number of orbits of exact minimal period, by Moebius inversion."""
        if period < 1:
            raise ValueError("period must be positive")
        total = 0
        for d in range(1, period + 1):
            if period % d == 0:
                total += _mobius(period // d) * self.symbols**d
        return total // period

    def sequence_action(self, sequence: tuple[int, ...]) -> Fraction:
        return self.scale * sum(
            (self.weights[sym] for sym in sequence), Fraction(0)
        )

    def _records_for_period(self, d: int) -> list[OrbitRecord]:
        records = []
        denom = self.symbols**d - 1
        trace = self.expansion**d + self.expansion**-d
        for seq in itertools.product(range(self.symbols), repeat=d):
            rotations = [seq[i:] + seq[:i] for i in range(d)]
            if min(rotations) != seq:
                continue
            if any(rotations[i] == seq for i in range(1, d)):
                continue  # periodic word, belongs to a shorter necklace
            # Embed each orbit point as the base-s fixed point of the shift,
            # x_i = 0.(w_i w_i w_i ...)_s for the rotated word w_i.
            positions = []
            for rot in rotations:
                n = 0
                for sym in rot:
                    n = n * self.symbols + sym
                positions.append(n / denom)
            records.append(
                OrbitRecord(
                    period=d,
                    winding=0,
                    momentum_winding=0,
                    positions=tuple(positions),
                    steps=(0.0,) * d,
                    action_lift=self.sequence_action(seq),
                    trace=trace,
                    index=0,
                    classification="hyperbolic",
                )
            )
        return records


def horseshoe_orbit_table(shoe: SymbolicHorseshoe, k_max: int) -> OrbitTable:
    """Every orbit of minimal period <= k_max, one record per necklace."""
    if k_max < 1:
        raise ValueError("iterate range must be positive")
    records: list[OrbitRecord] = []
    for d in range(1, k_max + 1):
        batch = shoe._records_for_period(d)
        if len(batch) != shoe.orbit_count(d):
            raise RuntimeError(
                f"necklace enumeration and Moebius count disagree at {d}"
            )
        records.extend(batch)
    records.sort(key=lambda r: (r.period, r.positions))
    return OrbitTable(
        model=shoe.name,
        parameter=float(shoe.symbols),
        k_max=k_max,
        records=tuple(records),
        complete=True,
        gamma=PeriodGroup.trivial(),
    )


def _coefficient_one(p: int) -> NovikovScalar:
    return NovikovScalar.monomial(p, 1, Fraction(0))


@dataclass(frozen=True)
class PlantedPairCoupling:
    """Append one finite bar of prescribed length to a package.

    The pair lives in its own component so it cannot interact with the
    existing generators; the new bar has length exactly ``gap``, which
    plants a known boundary-depth floor.
    """

    gap: Fraction
    base: Fraction = Fraction(0)
    component: str = "planted"

    def apply(self, package: FloerPackage) -> FloerPackage:
        if self.gap <= 0:
            raise ValueError("planted gap must be positive")
        if not package.gamma.is_trivial:
            if self.gap >= package.gamma.generator:
                raise ValueError("planted gap must fit inside one period")
        n = len(package.generators)
        top = Generator(
            label=f"{self.component}.top",
            action=package.gamma.reduce(self.base + self.gap),
            component=self.component,
        )
        bottom = Generator(
            label=f"{self.component}.bot",
            action=package.gamma.reduce(self.base),
            component=self.component,
        )
        exponent = (self.base + self.gap - top.action) - (
            self.base - bottom.action
        )
        coeff = _coefficient_one(package.p).shifted(exponent)
        return FloerPackage(
            p=package.p,
            gamma=package.gamma,
            generators=package.generators + (top, bottom),
            terms=package.terms + ((n, n + 1, coeff),),
        )


@dataclass(frozen=True)
class FarPairCoupling:
    """Greedy pairing of generators into strictly action-decreasing arrows.

    Within each component, generators are sorted by action and paired off
    (first with second, third with fourth, ...), skipping pairs whose
    action difference is zero.  Every arrow strictly decreases the action,
    the pairing is a disjoint matching, so the square of the differential
    vanishes for any coefficient field.
    """

    minimum_drop: Fraction = Fraction(0)

    def apply(self, package: FloerPackage) -> FloerPackage:
        by_component: dict[str, list[int]] = {}
        for idx, gen in enumerate(package.generators):
            by_component.setdefault(gen.component, []).append(idx)
        one = _coefficient_one(package.p)
        terms = list(package.terms)
        for indices in by_component.values():
            indices.sort(
                key=lambda i: (package.generators[i].action, i), reverse=True
            )
            pos = 0
            while pos + 1 < len(indices):
                i, j = indices[pos], indices[pos + 1]
                drop = (
                    package.generators[i].action
                    - package.generators[j].action
                )
                if drop <= self.minimum_drop:
                    pos += 1
                    continue
                terms.append((i, j, one))
                pos += 2
        return FloerPackage(
            p=package.p,
            gamma=package.gamma,
            generators=package.generators,
            terms=tuple(terms),
        )

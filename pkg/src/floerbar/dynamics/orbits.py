"""Periodic orbit records and per-period counting tables.

An orbit of minimal period ``d`` on the torus is stored once, through its
canonical rotation (lexicographically smallest cyclic shift of the rounded
position sequence).  Two winding integers pin down its lift: ``winding`` is
the position displacement M over one period, ``momentum_winding`` is the
step displacement N (steps satisfy d[i+period] = d[i] + N, so lifts grow
quadratically when N is nonzero).  Point counts for the k-th iterate sum
d * N_d over divisors d of k, since every point of a period-d orbit is a
fixed point of the k-th iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from ..novikov import PeriodGroup

INTEGER_PERIODS = PeriodGroup.from_generators(Fraction(1))


def component_label(winding: int, momentum_winding: int, k: int) -> str:
    """Fixed-point-class label for a point of the k-th iterate.

    For N = 0 the position winding M is the same for every point of the
    orbit and is well defined mod k.  For N != 0 the per-point windings
    form the coset M + N*Z in Z/k, so only M mod gcd(N, k) is shared by
    the whole orbit; the label keeps N alongside it.
    """
    if k <= 0:
        raise ValueError("iterate must be positive")
    if momentum_winding == 0:
        return f"w{winding % k}"
    g = math.gcd(abs(momentum_winding), k)
    return f"n{momentum_winding}w{winding % g}"


@dataclass(frozen=True)
class OrbitRecord:
    """One periodic orbit at its minimal period, canonical rotation."""

    period: int
    winding: int
    momentum_winding: int
    positions: tuple[float, ...]
    steps: tuple[float, ...]
    action_lift: Fraction
    trace: float
    index: int
    classification: str

    def __post_init__(self) -> None:
        if self.period != len(self.positions) or self.period != len(self.steps):
            raise ValueError("period must match the stored sequence length")

    @property
    def orbit_id(self) -> str:
        x0 = int(round(self.positions[0] * 1e8))
        return f"k{self.period}m{self.winding}n{self.momentum_winding}x{x0}"

    def iterate_windings(self, k: int) -> tuple[int, int]:
        """Winding pair (M_k, N_k) of the orbit's k-step quadratic lift.

        Repeating a (M, n)-orbit m = k/d times compounds the momentum drift:
        x_{i+k} = x_i + M_k + i*N_k with N_k = m*n and
        M_k = m*M + d*n*m(m-1)/2.
        """
        if k % self.period:
            raise ValueError("iterate must be a multiple of the minimal period")
        m = k // self.period
        n = self.momentum_winding
        n_k = m * n
        m_k = m * self.winding + self.period * n * (m * (m - 1) // 2)
        return m_k, n_k

    def label(self, k: int) -> str:
        m_k, n_k = self.iterate_windings(k)
        return component_label(m_k, n_k, k)

    @property
    def residue(self) -> float:
        """Stability residue (2 - tr)/4: in (0, 1) for elliptic orbits,
        negative for hyperbolic ones, above 1 for reflection hyperbolic."""
        return (2.0 - self.trace) / 4.0

    @property
    def is_hyperbolic(self) -> bool:
        return self.classification in ("hyperbolic", "reflection-hyperbolic")

    def power_trace(self, m: int) -> float:
        """Trace of the m-th power of the monodromy, via t_{j+1} = t*t_j - t_{j-1}."""
        if m < 1:
            raise ValueError("power must be positive")
        prev, cur = 2.0, float(self.trace)
        for _ in range(m - 1):
            prev, cur = cur, self.trace * cur - prev
        return cur

    def index_parity(self, k: int) -> int:
        """Morse index parity of each orbit point as a critical point of the
        k-step action, from det(Hessian) = tr(monodromy^(k/d)) - 2."""
        if k % self.period:
            raise ValueError("iterate must be a multiple of the minimal period")
        t = self.power_trace(k // self.period)
        if abs(2.0 - t) < 1e-9:
            raise ValueError("degenerate orbit: trace of the iterated monodromy is 2")
        return 1 if t < 2.0 else 0


@dataclass(frozen=True)
class OrbitTable:
    """All orbits of minimal period <= k_max for one map, plus search health.

    ``gamma`` records the period group of the action values: the integers for
    maps whose action is defined modulo the torus area, trivial for symbolic
    models whose actions live on the real line.
    """

    model: str
    parameter: float
    k_max: int
    records: tuple[OrbitRecord, ...]
    complete: bool = True
    diagnostics: tuple[tuple[str, int], ...] = field(default_factory=tuple)
    gamma: PeriodGroup = INTEGER_PERIODS

    def __post_init__(self) -> None:
        for rec in self.records:
            if rec.period > self.k_max:
                raise ValueError("record period exceeds table range")

    def minimal(self, period: int) -> tuple[OrbitRecord, ...]:
        return tuple(r for r in self.records if r.period == period)

    def orbit_count(self, period: int) -> int:
        return sum(1 for r in self.records if r.period == period)

    def point_count(self, k: int) -> int:
        """Fixed points of the k-th iterate: sum of d * N_d over d | k."""
        if not 1 <= k <= self.k_max:
            raise ValueError(f"iterate {k} outside table range 1..{self.k_max}")
        return sum(d * self.orbit_count(d) for d in range(1, k + 1) if k % d == 0)

    def iter_for(self, k: int) -> Iterator[OrbitRecord]:
        """Orbits contributing fixed points to the k-th iterate."""
        for rec in self.records:
            if k % rec.period == 0:
                yield rec

    def growth_sequence(self) -> list[tuple[int, float]]:
        return [(k, float(self.point_count(k))) for k in range(1, self.k_max + 1)]

    def diagnostic(self, key: str) -> int:
        return dict(self.diagnostics).get(key, 0)

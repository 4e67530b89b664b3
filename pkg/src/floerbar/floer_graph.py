"""Arrow graph of a package and the isolation lower bound for b_eps.

Each differential term ``f*T^a`` of the coefficient of x_j in the boundary
of x_i becomes one arrow i -> j of length A(x_i) - A(x_j) + a.  A vertex
all of whose incident arrows (either direction) are longer than eps is
eps-isolated.  If p vertices are eps-isolated then b_eps >= p/2: a bar of
length at most eps is eliminated along an arrow of that length, and no
arrow at an isolated vertex ever gets that short, before or after any
action-nonincreasing basis change.  Being an integer the bound is
reported as ceil(p/2).

The graph is read off the differential without any elimination, so it
scales to packages far beyond what the barcode itself is computed on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .complexes import FloerPackage
from .novikov import ExponentLike, snap

__all__ = ["Arrow", "FloerGraph", "floer_graph"]


@dataclass(frozen=True)
class Arrow:
    source: int
    target: int
    exponent: Fraction
    coeff: int
    length: Fraction


@dataclass(frozen=True)
class FloerGraph:
    n: int
    labels: tuple[str, ...]
    components: tuple[str, ...]
    arrows: tuple[Arrow, ...]
    certified_below: Optional[Fraction]  # None means the arrow list is exact

    def shortest_arrow(self) -> Optional[Fraction]:
        return min((a.length for a in self.arrows), default=None)

    def incident_lengths(self) -> tuple[tuple[Fraction, ...], ...]:
        acc: list[list[Fraction]] = [[] for _ in range(self.n)]
        for a in self.arrows:
            acc[a.source].append(a.length)
            acc[a.target].append(a.length)
        return tuple(tuple(sorted(l)) for l in acc)

    def isolated(self, eps: ExponentLike) -> tuple[int, ...]:
        """Vertices whose incident arrows are all strictly longer than eps."""
        e = snap(eps)
        if self.certified_below is not None and e >= self.certified_below:
            raise ValueError(
                f"isolation at {e} is not certified: truncated coefficients "
                f"may hide arrows of length >= {self.certified_below}"
            )
        shortest: list[Optional[Fraction]] = [None] * self.n
        for a in self.arrows:
            for v in (a.source, a.target):
                if shortest[v] is None or a.length < shortest[v]:
                    shortest[v] = a.length
        return tuple(
            v for v in range(self.n) if shortest[v] is None or shortest[v] > e
        )

    def isolated_lower_bound(self, eps: ExponentLike) -> int:
        """Certified lower bound for b_eps from isolated vertices alone."""
        p = len(self.isolated(eps))
        return (p + 1) // 2

    def to_dot(self, eps: Optional[ExponentLike] = None) -> str:
        """GraphViz rendering; arrows at or below eps are drawn bold red."""
        cut = None if eps is None else snap(eps)
        lines = ["digraph floer {", "  rankdir=TB;"]
        for v in range(self.n):
            lines.append(
                f'  g{v} [label="{self.labels[v]}\\n{self.components[v]}"];'
            )
        for a in self.arrows:
            style = ""
            if cut is not None and a.length <= cut:
                style = ", color=red, penwidth=2.0"
            lines.append(
                f'  g{a.source} -> g{a.target} '
                f'[label="{float(a.length):.6g}"{style}];'
            )
        lines.append("}")
        return "\n".join(lines)


def floer_graph(package: FloerPackage) -> FloerGraph:
    arrows: list[Arrow] = []
    certified: Optional[Fraction] = None
    for i, j, coeff in package.terms:
        drop = package.action(i) - package.action(j)
        for e, f in coeff.terms:
            arrows.append(Arrow(i, j, e, f, drop + e))
        if coeff.trunc is not None:
            floor = drop + coeff.trunc
            if certified is None or floor < certified:
                certified = floor
    arrows.sort(key=lambda a: (a.length, a.source, a.target, a.exponent))
    return FloerGraph(
        package.n,
        tuple(g.label for g in package.generators),
        tuple(g.component for g in package.generators),
        tuple(arrows),
        certified,
    )

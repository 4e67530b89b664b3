"""Exact arithmetic in truncated Novikov fields.

A scalar is a finite formal sum ``sum_j f_j * T^(a_j)`` with coefficients
``f_j`` in a prime field F_p and real exponents ``a_j`` drawn from a discrete
subgroup of the reals.  Exponents, actions and truncation orders are kept as
exact :class:`fractions.Fraction` values so that valuations and action
comparisons never hinge on float ties.  Floating inputs coming out of solvers
are snapped onto a fixed dyadic grid first.

Truncation: a scalar may carry a finite ``trunc`` order, meaning its terms
with exponent ``>= trunc`` are unknown.  ``trunc=None`` encodes an exact
scalar.  Sums propagate the minimum order; products propagate
``min(val(x) + trunc(y), val(y) + trunc(x))``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

__all__ = [
    "SNAP_GRID",
    "NovikovError",
    "GroundFieldMismatch",
    "DensePeriodGroupError",
    "snap",
    "PeriodGroup",
    "NovikovScalar",
    "valuation",
    "leading_term",
    "invert",
]

# Default dyadic grid for float -> Fraction snapping (2^-40).
SNAP_GRID = Fraction(1, 2**40)

# A generator list is declared "effectively dense" when expressing one
# generator as an integer multiple of the group gcd needs an index above this.
_DENSE_INDEX_LIMIT = 10**6

_INF = math.inf

ExponentLike = Union[Fraction, int, float, str]


class NovikovError(ValueError):
    """Base error for Novikov arithmetic."""


class GroundFieldMismatch(NovikovError):
    """Operands live over different prime fields or period groups."""


class DensePeriodGroupError(NovikovError):
    """Generators do not span a discrete subgroup of the reals."""


def snap(value: ExponentLike, grid: Fraction = SNAP_GRID) -> Fraction:
    """Coerce a number to an exact Fraction, snapping floats to ``grid``.

    Ints, Fractions and strings like ``"3/2"`` convert exactly.  Floats are
    rounded to the nearest grid point; the default grid is fine enough that
    solver output (tolerance ~1e-12) is preserved to far better than any
    action gap we ever compare against.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise NovikovError(f"cannot snap non-finite value {value!r}")
        exact = Fraction(value)  # floats are dyadic rationals, this is exact
        return Fraction(round(exact / grid)) * grid
    raise NovikovError(f"cannot coerce {type(value).__name__} to an exponent")


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    num = math.gcd(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)


@dataclass(frozen=True)
class PeriodGroup:
    """Finitely generated discrete subgroup of the reals.

    ``generator`` is the positive gcd of the declared generators, reduced to
    a single value; ``Fraction(0)`` encodes the trivial group.  Construction
    rejects generator lists whose gcd is suspiciously small relative to the
    generators themselves, which is how incommensurable float input shows up
    after exact conversion.
    """

    generators: tuple[Fraction, ...]
    generator: Fraction

    @classmethod
    def trivial(cls) -> "PeriodGroup":
        return cls((), Fraction(0))

    @classmethod
    def from_generators(cls, *generators: ExponentLike) -> "PeriodGroup":
        gens = tuple(snap(g) for g in generators)
        if any(g <= 0 for g in gens):
            raise NovikovError("period group generators must be positive")
        if not gens:
            return cls.trivial()
        g = gens[0]
        for other in gens[1:]:
            g = _frac_gcd(g, other)
        for original in gens:
            if original / g > _DENSE_INDEX_LIMIT:
                raise DensePeriodGroupError(
                    "generators do not look commensurable; pass exact "
                    "Fractions (e.g. Fraction(1, 3)) rather than floats"
                )
        return cls(gens, g)

    @property
    def is_trivial(self) -> bool:
        return self.generator == 0

    def contains(self, x: ExponentLike) -> bool:
        xf = snap(x)
        if self.is_trivial:
            return xf == 0
        q = xf / self.generator
        return q.denominator == 1

    def reduce(self, x: ExponentLike) -> Fraction:
        """Representative of ``x`` in the fundamental domain [0, generator)."""
        xf = snap(x)
        if self.is_trivial:
            return xf
        return xf - (xf // self.generator) * self.generator

    def circular_distance(self, a: ExponentLike, b: ExponentLike) -> Fraction:
        """Distance between cosets, i.e. min over the group of |a - b - g|."""
        if self.is_trivial:
            return abs(snap(a) - snap(b))
        r = self.reduce(snap(a) - snap(b))
        return min(r, self.generator - r)

    def __str__(self) -> str:
        if self.is_trivial:
            return "{0}"
        return f"{self.generator}*Z"


def _min_trunc(a: Optional[Fraction], b: Optional[Fraction]) -> Optional[Fraction]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass(frozen=True)
class NovikovScalar:
    """Element of a truncated Novikov field over F_p.

    ``terms`` is a tuple of (exponent, coefficient) pairs with exponents
    strictly increasing, coefficients in ``1..p-1``, and every exponent
    strictly below ``trunc`` when that is finite.  The empty tuple is zero
    (an exact zero when ``trunc`` is None, "zero up to order trunc"
    otherwise).
    """

    p: int
    terms: tuple[tuple[Fraction, int], ...] = ()
    trunc: Optional[Fraction] = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, p: int = 2) -> "NovikovScalar":
        return cls(p, ())

    @classmethod
    def one(cls, p: int = 2) -> "NovikovScalar":
        return cls(p, ((Fraction(0), 1),))

    @classmethod
    def monomial(cls, p: int, coeff: int, exponent: ExponentLike) -> "NovikovScalar":
        return cls.from_terms(p, [(snap(exponent), coeff)])

    @classmethod
    def from_terms(
        cls,
        p: int,
        terms: Iterable[tuple[ExponentLike, int]],
        trunc: Optional[ExponentLike] = None,
    ) -> "NovikovScalar":
        if p < 2:
            raise NovikovError("ground field order must be a prime >= 2")
        tr = None if trunc is None else snap(trunc)
        acc: dict[Fraction, int] = {}
        for exponent, coeff in terms:
            e = snap(exponent)
            acc[e] = (acc.get(e, 0) + coeff) % p
        return cls(p, cls._canonical(acc, p, tr), tr)

    @staticmethod
    def _canonical(
        acc: Mapping[Fraction, int], p: int, trunc: Optional[Fraction]
    ) -> tuple[tuple[Fraction, int], ...]:
        items = []
        for e, c in acc.items():
            c %= p
            if c == 0:
                continue
            if trunc is not None and e >= trunc:
                continue
            items.append((e, c))
        items.sort(key=lambda t: t[0])
        return tuple(items)

    # -- queries -----------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_exact(self) -> bool:
        return self.trunc is None

    def valuation(self):
        """Minimal exponent carrying a nonzero coefficient; +inf for zero."""
        if not self.terms:
            return _INF
        return self.terms[0][0]

    def leading_term(self) -> tuple[Fraction, int]:
        if not self.terms:
            raise NovikovError("zero scalar has no leading term")
        return self.terms[0]

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "NovikovScalar") -> None:
        if self.p != other.p:
            raise GroundFieldMismatch(f"F_{self.p} vs F_{other.p}")

    def __add__(self, other: "NovikovScalar") -> "NovikovScalar":
        self._check(other)
        tr = _min_trunc(self.trunc, other.trunc)
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc.get(e, 0) + c
        return NovikovScalar(self.p, self._canonical(acc, self.p, tr), tr)

    def __neg__(self) -> "NovikovScalar":
        return NovikovScalar(
            self.p, tuple((e, (-c) % self.p) for e, c in self.terms), self.trunc
        )

    def __sub__(self, other: "NovikovScalar") -> "NovikovScalar":
        return self + (-other)

    def __mul__(self, other: "NovikovScalar") -> "NovikovScalar":
        self._check(other)
        tr = None
        if other.trunc is not None:
            tr = _min_trunc(tr, (self.valuation() + other.trunc) if self.terms else None)
        if self.trunc is not None:
            tr = _min_trunc(tr, (other.valuation() + self.trunc) if other.terms else None)
        acc: dict[Fraction, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                acc[e] = acc.get(e, 0) + c1 * c2
        return NovikovScalar(self.p, self._canonical(acc, self.p, tr), tr)

    def scaled(self, c: int) -> "NovikovScalar":
        acc = {e: (co * c) % self.p for e, co in self.terms}
        return NovikovScalar(self.p, self._canonical(acc, self.p, self.trunc), self.trunc)

    def shifted(self, a: ExponentLike) -> "NovikovScalar":
        """Multiply by the monomial T^a."""
        af = snap(a)
        tr = None if self.trunc is None else self.trunc + af
        return NovikovScalar(
            self.p, tuple((e + af, c) for e, c in self.terms), tr
        )

    def inverse(self, order: ExponentLike) -> "NovikovScalar":
        """Multiplicative inverse, correct up to terms of order ``order``.

        Returns y with ``self * y = 1 + (terms of exponent >= order + val)``.
        Requires a nonzero scalar and ``order > -valuation``.  When the input
        itself is truncated the achievable order is capped accordingly.
        """
        if not self.terms:
            raise NovikovError("cannot invert zero")
        a = self.terms[0][0]
        f = self.terms[0][1]
        target = snap(order)
        if target <= -a:
            raise NovikovError("inversion order must exceed -valuation")
        if self.trunc is not None:
            target = min(target, self.trunc - 2 * a)
            if target <= -a:
                raise NovikovError("operand truncation too coarse to invert")
        bound = target + a  # exponents of self*y below this must vanish
        finv = pow(f, -1, self.p)
        rem: dict[Fraction, int] = {Fraction(0): 1}
        out: dict[Fraction, int] = {}
        guard = 0
        while rem:
            e0 = min(rem)
            if e0 >= bound:
                break
            c0 = rem.pop(e0)
            ye = e0 - a
            yc = (c0 * finv) % self.p
            if yc:
                out[ye] = (out.get(ye, 0) + yc) % self.p
                # The leading term of self cancels c0 exactly; subtract
                # only the tail from the remainder.
                for e, c in self.terms[1:]:
                    ee = e + ye
                    if ee >= bound:
                        continue
                    rem[ee] = (rem.get(ee, 0) - c * yc) % self.p
                    if rem[ee] == 0:
                        del rem[ee]
            guard += 1
            if guard > 10**6:
                raise NovikovError("inversion did not terminate; order too large?")
        return NovikovScalar(self.p, self._canonical(out, self.p, target), target)

    # -- comparisons --------------------------------------------------------

    def agrees_with(self, other: "NovikovScalar", order: ExponentLike) -> bool:
        """True when self - other has no terms below ``order``."""
        diff = self - other
        o = snap(order)
        return all(e >= o for e, _ in diff.terms)

    # -- text form -----------------------------------------------------------

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*T^{e}" for e, c in self.terms)

    _TERM_RE = re.compile(r"^\s*(\d+)\s*\*\s*T\^(-?\d+(?:/\d+)?)\s*$")

    @classmethod
    def from_text(
        cls, text: str, p: int, trunc: Optional[ExponentLike] = None
    ) -> "NovikovScalar":
        text = text.strip()
        if text == "0":
            return cls.zero(p)
        terms = []
        for chunk in text.split("+"):
            m = cls._TERM_RE.match(chunk)
            if m is None:
                raise NovikovError(f"cannot parse scalar term {chunk!r}")
            terms.append((Fraction(m.group(2)), int(m.group(1))))
        return cls.from_terms(p, terms, trunc)

    def __str__(self) -> str:
        base = self.to_text()
        if self.trunc is not None:
            return f"{base} (mod T^{self.trunc})"
        return base


# Module-level aliases matching the operation vocabulary used elsewhere.

def valuation(x: NovikovScalar):
    return x.valuation()


def leading_term(x: NovikovScalar) -> tuple[Fraction, int]:
    return x.leading_term()


def invert(x: NovikovScalar, order: ExponentLike) -> NovikovScalar:
    return x.inverse(order)

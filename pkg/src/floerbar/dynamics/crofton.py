"""Integral-geometry ratio checks for families of section graphs.

A tomograph family is the set of curves L_s = graph(f_s') where
f_s = sum_l s_l g_l runs over a parameter ball B.  For any fixed closed
curve L' the averaged intersection count integral(N(s), s in B) is bounded
by a constant multiple of the length of L', with the constant depending
only on the family.  The bound comes from the counting formula

    integral(N(s)) = integral over L' of chord(s-line) * |d/dt h_s| dt,

where for each point of L' the parameters hitting it form an affine line
{s . g'(x) = y} whose chord in B has length at most 2r, and
|d/dt h_s| <= |y'| + r |g''(x)| |x'| along a unit-speed parameterization.
Hence

    integral(N(s), B) <= 2r (1 + r max|g''|) / min|g'| * length(L').

For the translate family (single basis function x, parameter interval
[0, 1]) the chord factor is 1 and g'' = 0, so the constant is exactly 1.
For the normalized harmonic pair (cos(2 pi x)/2 pi, sin(2 pi x)/2 pi) the
gradient g' is a unit vector and |g''| = 2 pi, giving 2r(1 + 2 pi r).
Counting is mod 1 in the fiber; for radius below 1/2 at most one integer
shift of the parameter line meets the ball per curve point, so the same
constants hold on the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import _check_closed, polyline_length

__all__ = [
    "DegenerateFamilyError",
    "TomographFamily",
    "translate_family",
    "harmonic_family",
    "CroftonReport",
    "crofton_check",
    "sine_curve_suite",
]

_TWO_PI = 2.0 * math.pi


class DegenerateFamilyError(ValueError):
    """The family map fails to submerse onto the annulus."""


def _parse_term(term: str) -> tuple[str, int]:
    if term == "x":
        return ("x", 0)
    kind, _, freq = term.partition(":")
    if kind in ("cos", "sin") and freq.isdigit() and int(freq) > 0:
        return (kind, int(freq))
    raise ValueError(f"unknown basis term {term!r}")


@dataclass(frozen=True)
class TomographFamily:
    """Curves L_s = graph(f_s'), f_s = sum_l s_l g_l, s in a ball of radius r.

    Basis terms are named: ``x`` for the coordinate function and
    ``cos:m`` / ``sin:m`` for cos(2 pi m x)/(2 pi m) and its sine twin.
    The normalization keeps every harmonic derivative of unit amplitude so
    the family constant stays explicit.  A family consisting of the single
    term ``x`` is the translate family; its parameter domain is the full
    level interval [0, 1] rather than a ball, and its constant is 1.
    """

    terms: tuple[str, ...]
    radius: float = 0.25

    def __post_init__(self) -> None:
        for term in self.terms:
            _parse_term(term)

    @property
    def is_translate(self) -> bool:
        return self.terms == ("x",)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Rows of g'(x), shape (len(terms),) + x.shape."""
        x = np.asarray(x, dtype=float)
        rows = []
        for term in self.terms:
            kind, m = _parse_term(term)
            if kind == "x":
                rows.append(np.ones_like(x))
            elif kind == "cos":
                rows.append(-np.sin(_TWO_PI * m * x))
            else:
                rows.append(np.cos(_TWO_PI * m * x))
        return np.stack(rows, axis=0)

    def second(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rows = []
        for term in self.terms:
            kind, m = _parse_term(term)
            if kind == "x":
                rows.append(np.zeros_like(x))
            elif kind == "cos":
                rows.append(-_TWO_PI * m * np.cos(_TWO_PI * m * x))
            else:
                rows.append(-_TWO_PI * m * np.sin(_TWO_PI * m * x))
        return np.stack(rows, axis=0)

    def section_slope(self, s: np.ndarray, x: np.ndarray) -> np.ndarray:
        """f_s'(x) = s . g'(x)."""
        return np.tensordot(np.asarray(s, dtype=float), self.gradient(x), axes=(0, 0))

    def validate(self, grid: int = 4096) -> None:
        """Reject families whose section map is not a submersion.

        The map (s, x) -> (x, f_s'(x)) submerses exactly when g'(x) never
        vanishes as a vector; that minimum norm also enters the family
        constant, so a near-zero value is rejected rather than tolerated.
        """
        if not self.terms:
            raise DegenerateFamilyError("family has no basis terms")
        if not self.is_translate and not 0.0 < self.radius < 0.5:
            raise DegenerateFamilyError(
                "parameter ball radius must lie in (0, 1/2) for mod-1 counting"
            )
        x = np.arange(grid) / grid
        norms = np.linalg.norm(self.gradient(x), axis=0)
        if float(norms.min()) < 1e-6:
            raise DegenerateFamilyError(
                "family gradient vanishes somewhere: no submersion onto the annulus"
            )

    def constant(self, grid: int = 4096) -> float:
        """Family constant C with integral(N) <= C * length for every curve."""
        self.validate(grid)
        if self.is_translate:
            return 1.0
        x = np.arange(grid) / grid
        g1 = float(np.linalg.norm(self.gradient(x), axis=0).min())
        g2 = float(np.linalg.norm(self.second(x), axis=0).max())
        r = self.radius
        return 2.0 * r * (1.0 + r * g2) / g1

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.is_translate:
            return rng.uniform(0.0, 1.0, size=1)
        d = len(self.terms)
        while True:
            s = rng.uniform(-self.radius, self.radius, size=d)
            if np.dot(s, s) <= self.radius * self.radius:
                return s

    def ball_volume(self) -> float:
        if self.is_translate:
            return 1.0
        d = len(self.terms)
        r = self.radius
        return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r**d


def translate_family() -> TomographFamily:
    return TomographFamily(terms=("x",))


def harmonic_family(radius: float = 0.25) -> TomographFamily:
    return TomographFamily(terms=("cos:1", "sin:1"), radius=radius)


def _crossings(family: TomographFamily, s: np.ndarray, curve: np.ndarray) -> int | None:
    """Transverse intersections of the curve with L_s, mod-1 in the fiber.

    Counts integer crossings of h(t) = y(t) - f_s'(x(t)) via floor
    differences along the polyline; exact whenever h is monotone within
    each segment.  Returns None when some vertex value sits on an integer,
    which the caller treats as a non-transverse sample to be perturbed.
    """
    h = curve[:, 1] - family.section_slope(s, curve[:, 0])
    if np.abs(h - np.round(h)).min() < 1e-9:
        return None
    fl = np.floor(h).astype(np.int64)
    return int(np.abs(np.diff(fl)).sum())


@dataclass(frozen=True)
class CroftonReport:
    """Monte-Carlo ratio estimates against the family constant.

    ``ratios[i]`` estimates integral(N(s), B) / length(curve_i); the family
    bound says every true ratio is at most ``constant``.  ``counts`` keeps
    the raw per-sample intersection numbers of the last curve for
    histogram output.
    """

    constant: float
    lengths: tuple[float, ...]
    estimates: tuple[float, ...]
    ratios: tuple[float, ...]
    samples: int
    resampled: int
    counts: tuple[int, ...]

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)


def crofton_check(
    family: TomographFamily,
    curves,
    samples: int,
    *,
    rng_seed: int = 0,
) -> CroftonReport:
    """Estimate the averaged-intersection ratio for each curve.

    Draws parameters uniformly from the family's ball, counts intersections
    with each closed polyline, and reports vol(B) * mean(N) / length.
    Samples landing non-transversally (an intersection at a polyline
    vertex) are perturbed and redrawn; the redraw count is reported.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    family.validate()
    curves = [_check_closed(c) for c in curves]
    if not curves:
        raise ValueError("no curves supplied")
    rng = np.random.default_rng(rng_seed)
    vol_b = family.ball_volume()
    lengths = []
    estimates = []
    ratios = []
    resampled = 0
    counts: list[int] = []
    for curve in curves:
        length = polyline_length(curve)
        counts = []
        for _ in range(samples):
            s = family.sample(rng)
            n = _crossings(family, s, curve)
            tries = 0
            while n is None:
                resampled += 1
                tries += 1
                if tries > 64:
                    raise RuntimeError("could not find a transverse parameter")
                jitter = 1e-7 * (family.radius if not family.is_translate else 1.0)
                n = _crossings(family, s + rng.normal(0.0, jitter, size=s.shape), curve)
            counts.append(n)
        estimate = vol_b * float(np.mean(counts))
        lengths.append(length)
        estimates.append(estimate)
        ratios.append(estimate / length)
    return CroftonReport(
        constant=family.constant(),
        lengths=tuple(lengths),
        estimates=tuple(estimates),
        ratios=tuple(ratios),
        samples=samples,
        resampled=resampled,
        counts=tuple(counts),
    )


def sine_curve_suite(n: int = 2048) -> tuple[np.ndarray, ...]:
    """Ten closed graph curves whose lengths span more than a factor of 8.

    Sinusoidal graphs y = a sin(2 pi m x) with amplitudes and frequencies
    chosen so the arclengths run from just above 1 to past 8.
    """
    from .curves import graph_curve

    params = (
        (0.01, 1),
        (0.05, 1),
        (0.10, 1),
        (0.20, 1),
        (0.15, 2),
        (0.25, 2),
        (0.30, 2),
        (0.25, 4),
        (0.35, 4),
        (0.50, 4),
    )
    return tuple(
        graph_curve(lambda t, a=a, m=m: a * np.sin(_TWO_PI * m * t), n=n)
        for a, m in params
    )

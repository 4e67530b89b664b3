"""File formats, atomic writes, and experiment manifests.

All persistence lives here: the text format for packages (bit-exact round
trip on the exact fields), CSV emitters for barcodes and orbit tables and
entropy reports, small spec files for maps and tomograph families, an
optional dependency-free SVG plot, and the per-experiment manifest with a
configuration hash.  Every file is written once, atomically, by writing to
a sibling temporary name and renaming over the target.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .barcode import Barcode
from .complexes import FloerPackage, Generator
from .novikov import NovikovScalar, PeriodGroup

__all__ = [
    "ParseError",
    "atomic_write",
    "format_scalar",
    "parse_scalar",
    "write_package",
    "format_package",
    "parse_package",
    "read_package",
    "barcode_csv",
    "beps_csv",
    "orbit_csv",
    "report_csv",
    "growth_svg",
    "parse_map_spec",
    "format_map_spec",
    "parse_tomograph_spec",
    "format_tomograph_spec",
    "parse_curve",
    "format_curve",
    "config_hash",
    "write_manifest",
]


class ParseError(ValueError):
    """Malformed input file; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def atomic_write(path: str, text: str) -> None:
    """Write-then-rename so partial files never land under the real name."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fraction(text: str, line: int, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(line, f"bad {what} {text!r}") from None


# -- Novikov scalar text -------------------------------------------------

def format_scalar(scalar: NovikovScalar) -> str:
    """Render ``coeff T^exponent`` terms joined by ``+``; zero is ``0``.

    Exponents print as exact rationals, so parsing the result recovers the
    scalar bit for bit.
    """
    if not scalar.terms:
        return "0"
    return " + ".join(f"{c} T^{e}" for e, c in scalar.terms)


def parse_scalar(text: str, p: int, *, line: int = 1) -> NovikovScalar:
    text = text.strip()
    if text == "0":
        return NovikovScalar.from_terms(p, [])
    terms = []
    for chunk in text.split("+"):
        chunk = chunk.strip().replace("*", " ")
        coeff_text, _, tail = chunk.partition(" ")
        tail = tail.strip()
        if not tail.startswith("T^"):
            raise ParseError(line, f"bad scalar term {chunk!r}")
        try:
            coeff = int(coeff_text)
        except ValueError:
            raise ParseError(line, f"bad coefficient in {chunk!r}") from None
        terms.append((_fraction(tail[2:], line, "exponent"), coeff))
    return NovikovScalar.from_terms(p, terms)


# -- Package text format -------------------------------------------------

def format_package(package: FloerPackage) -> str:
    """Serialize a package; exact fields survive a round trip bit for bit.

    Header gives the coefficient field and the period group generator,
    then one ``generator`` line per basis element and one ``diff`` line
    per monomial of the differential.
    """
    lines = ["# action-filtered package", f"field {package.p}", f"gamma {package.gamma.generator}"]
    for g in package.generators:
        for piece, name in ((g.label, "label"), (g.component, "component")):
            if not piece or any(ch.isspace() for ch in piece):
                raise ValueError(f"generator {name} {piece!r} is empty or has whitespace")
        lines.append(f"generator {g.label} {g.action} {g.component}")
    for i, j, coeff in package.terms:
        for e, c in coeff.terms:
            lines.append(f"diff {i} {j} {c} {e}")
    return "\n".join(lines) + "\n"


def parse_package(text: str) -> FloerPackage:
    p: Optional[int] = None
    gamma = PeriodGroup.trivial()
    generators: list[Generator] = []
    raw_terms: dict[tuple[int, int], list[tuple[Fraction, int]]] = {}
    order: list[tuple[int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "field":
            if len(fields) != 2 or not fields[1].isdigit():
                raise ParseError(lineno, "field line needs one integer")
            p = int(fields[1])
        elif kind == "gamma":
            gens = [_fraction(f, lineno, "group generator") for f in fields[1:]]
            if not gens:
                raise ParseError(lineno, "gamma line needs at least one generator")
            gamma = PeriodGroup.from_generators(*gens)
        elif kind == "generator":
            if len(fields) != 4:
                raise ParseError(lineno, "generator line needs label, action, component")
            generators.append(
                Generator(
                    label=fields[1],
                    action=_fraction(fields[2], lineno, "action"),
                    component=fields[3],
                )
            )
        elif kind == "diff":
            if len(fields) != 5:
                raise ParseError(lineno, "diff line needs i, j, coeff, exponent")
            try:
                i, j, c = int(fields[1]), int(fields[2]), int(fields[3])
            except ValueError:
                raise ParseError(lineno, "diff indices and coefficient must be integers") from None
            if not 0 <= i < len(generators) or not 0 <= j < len(generators):
                raise ParseError(lineno, f"diff indices ({i},{j}) out of range")
            key = (i, j)
            if key not in raw_terms:
                raw_terms[key] = []
                order.append(key)
            raw_terms[key].append((_fraction(fields[4], lineno, "exponent"), c))
        else:
            raise ParseError(lineno, f"unknown directive {kind!r}")

    if p is None:
        raise ParseError(1, "missing field header")
    terms = tuple(
        (i, j, NovikovScalar.from_terms(p, raw_terms[(i, j)])) for i, j in order
    )
    return FloerPackage(generators=tuple(generators), terms=terms, gamma=gamma, p=p)


def write_package(path: str, package: FloerPackage) -> None:
    atomic_write(path, format_package(package))


def read_package(path: str) -> FloerPackage:
    with open(path) as handle:
        return parse_package(handle.read())


# -- CSV emitters --------------------------------------------------------

def _num(value) -> str:
    """Finite bar lengths print as decimals when exact, else as repr floats."""
    f = Fraction(value)
    scaled = f * 10**6
    if scaled.denominator == 1:
        text = f"{f.numerator / f.denominator:.6f}".rstrip("0").rstrip(".")
        return text if text else "0"
    return repr(float(f))


def barcode_csv(bc: Barcode) -> str:
    lines = ["component,length,multiplicity"]
    for part in bc.parts:
        seen: dict[Fraction, int] = {}
        for length in part.finite:
            seen[length] = seen.get(length, 0) + 1
        for length in sorted(seen, reverse=True):
            lines.append(f"{part.component},{_num(length)},{seen[length]}")
        if part.infinite:
            lines.append(f"{part.component},INF,{part.infinite}")
    return "\n".join(lines) + "\n"


def beps_csv(bc: Barcode, eps: Sequence[float]) -> str:
    lines = ["epsilon,b_eps"]
    for e in eps:
        lines.append(f"{_num(Fraction(e).limit_denominator(10**9))},{bc.b_eps(e)}")
    return "\n".join(lines) + "\n"


def orbit_csv(table) -> str:
    lines = ["period,points,action,trace,type"]
    for rec in table.records:
        lines.append(
            f"{rec.period},{rec.period},{_num(rec.action_lift)},"
            f"{rec.trace!r},{rec.classification}"
        )
    return "\n".join(lines) + "\n"


def report_csv(ks: Sequence[int], eps: Sequence[float], counts, points, lengths, depths) -> str:
    """Per-iterate table: robust bar counts per epsilon, periodic points,
    volume sequence, boundary depth."""
    header = ["k"] + [f"b@{_num(Fraction(e).limit_denominator(10**9))}" for e in eps]
    header += ["points", "length", "depth"]
    lines = [",".join(header)]
    for row, k in enumerate(ks):
        cells = [str(k)]
        cells += [str(counts[col][row]) for col in range(len(eps))]
        cells.append(_num(Fraction(points[row]).limit_denominator(10**9)))
        cells.append(repr(float(lengths[row])) if lengths[row] is not None else "")
        cells.append(_num(depths[row]) if depths[row] is not None else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# -- SVG growth plot -----------------------------------------------------

def growth_svg(ks: Sequence[int], series: dict[str, Sequence[float]], title: str) -> str:
    """Log2-scale growth plot as a self-contained SVG string.

    One polyline per named series over the common iterate axis; zero
    values plot at the floor.  Plain markup, no dependencies, so the file
    is diffable and byte-deterministic.
    """
    width, height, pad = 640, 420, 48
    ys_all = [
        math.log2(v) if v and v > 1.0 else 0.0
        for vals in series.values()
        for v in vals
        if v is not None
    ]
    top = max(ys_all + [1.0])
    k_lo, k_hi = min(ks), max(ks)
    span = max(k_hi - k_lo, 1)

    def sx(k: float) -> float:
        return pad + (k - k_lo) / span * (width - 2 * pad)

    def sy(y: float) -> float:
        return height - pad - y / top * (height - 2 * pad)

    palette = ("#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#b7950b", "#2c3e50")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="24" font-family="monospace" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width - pad}" y="{height - pad + 20}" font-family="monospace" font-size="11" text-anchor="end">k={k_hi}</text>',
        f'<text x="{pad - 4}" y="{pad}" font-family="monospace" font-size="11" text-anchor="end">{top:.2f}</text>',
    ]
    for idx, (name, vals) in enumerate(sorted(series.items())):
        color = palette[idx % len(palette)]
        pts = " ".join(
            f"{sx(k):.2f},{sy(math.log2(v) if v and v > 1.0 else 0.0):.2f}"
            for k, v in zip(ks, vals)
            if v is not None
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{width - pad + 4}" y="{pad + 16 * idx}" font-family="monospace"'
            f' font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- Map and tomograph spec files ----------------------------------------

def format_map_spec(name: str, params: dict[str, float]) -> str:
    lines = [f"model {name}"]
    for key in sorted(params):
        lines.append(f"{key} {params[key]!r}")
    lines.append("domain torus")
    return "\n".join(lines) + "\n"


def parse_map_spec(text: str) -> tuple[str, dict[str, float]]:
    """Model name plus numeric parameters; domain line is checked, not kept."""
    name: Optional[str] = None
    params: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "model":
            if len(fields) != 2:
                raise ParseError(lineno, "model line needs one name")
            name = fields[1]
        elif fields[0] == "domain":
            if fields[1:] != ["torus"]:
                raise ParseError(lineno, f"unsupported domain {' '.join(fields[1:])!r}")
        else:
            if len(fields) != 2:
                raise ParseError(lineno, f"parameter line needs one value: {line!r}")
            try:
                params[fields[0]] = float(fields[1])
            except ValueError:
                raise ParseError(lineno, f"bad numeric value {fields[1]!r}") from None
    if name is None:
        raise ParseError(1, "missing model line")
    return name, params


def format_tomograph_spec(family) -> str:
    return f"family {' '.join(family.terms)}\nradius {family.radius!r}\n"


def parse_tomograph_spec(text: str):
    from .dynamics.crofton import TomographFamily

    terms: Optional[tuple[str, ...]] = None
    radius = 0.25
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "family":
            if len(fields) < 2:
                raise ParseError(lineno, "family line needs basis terms")
            terms = tuple(fields[1:])
        elif fields[0] == "radius":
            try:
                radius = float(fields[1])
            except (IndexError, ValueError):
                raise ParseError(lineno, "radius line needs one number") from None
        else:
            raise ParseError(lineno, f"unknown directive {fields[0]!r}")
    if terms is None:
        raise ParseError(1, "missing family line")
    try:
        return TomographFamily(terms=terms, radius=radius)
    except ValueError as exc:
        raise ParseError(1, str(exc)) from None


def parse_curve(text: str):
    import numpy as np

    pts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(lineno, "curve line needs two coordinates")
        try:
            pts.append((float(fields[0]), float(fields[1])))
        except ValueError:
            raise ParseError(lineno, f"bad coordinate on {line!r}") from None
    if len(pts) < 3:
        raise ParseError(max(len(text.splitlines()), 1), "curve needs at least three points")
    return np.asarray(pts, dtype=float)


def format_curve(curve) -> str:
    return "\n".join(f"{x!r} {y!r}" for x, y in curve) + "\n"


# -- Manifest ------------------------------------------------------------

def config_hash(config: dict) -> str:
    """Stable hash of a configuration mapping; key order never matters."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def write_manifest(out_dir: str, config: dict, files: Iterable[str]) -> str:
    """Record the experiment configuration and the digest of every output.

    Deliberately carries no timestamp so a rerun with the same seed leaves
    a byte-identical directory.
    """
    digests = {}
    for name in sorted(files):
        with open(os.path.join(out_dir, name), "rb") as handle:
            digests[name] = hashlib.sha256(handle.read()).hexdigest()
    manifest = {
        "config": config,
        "config_sha256": config_hash(config),
        "outputs": digests,
    }
    path = os.path.join(out_dir, "manifest.json")
    atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path

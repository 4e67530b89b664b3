"""Command-line surface tying the library into reproducible experiments.

Three subcommands: ``barcode`` reads a package file and emits its barcode,
``entropy`` runs the full orbit-to-rates pipeline for a named model, and
``crofton`` estimates averaged intersection ratios for a tomograph family.
Each experiment writes one output directory with a manifest recording the
configuration hash and a digest of every file; outputs carry no timestamps
so a rerun with the same seed is byte-identical.

Exit codes: 0 success, 2 validation failure, 3 solver budget exhausted
(partial results are still written), 4 parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import io as fio
from .barcode import barcode as compute_barcode
from .complexes import FloerPackage, PackageError, validate
from .dynamics import (
    IdentityMap,
    RotationMap,
    ShearMap,
    SymbolicHorseshoe,
    TwistMapModel,
    action_gap_scan,
    build_package_from_orbits,
    defect_free_window,
    horseshoe_orbit_table,
    orbit_table,
)
from .dynamics.crofton import (
    DegenerateFamilyError,
    crofton_check,
    harmonic_family,
    sine_curve_suite,
    translate_family,
)
from .dynamics.curves import graph_volume_growth
from .entropy import (
    GrowthSequence,
    barcode_entropy,
    compare_rates,
    eps_grid,
    gamma_lower_bound,
    growth_fit,
    iterate_ratios,
    orbit_entropy,
    orbit_growth_sequence,
)
from .floer_graph import floer_graph
from .novikov import PeriodGroup

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_PARSE = 4

WORKERS_ENV = "FLOERBAR_WORKERS"


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _parse_eps(text: str) -> tuple[float, ...]:
    vals = tuple(float(x) for x in text.split(",") if x.strip())
    if not vals:
        raise ValueError("empty epsilon list")
    if any(v <= 0 for v in vals):
        raise ValueError("epsilon values must be positive")
    return tuple(sorted(vals, reverse=True))


def _parse_params(items) -> dict[str, float]:
    params: dict[str, float] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"parameter {item!r} is not KEY=VALUE")
        params[key] = float(value)
    return params


def _resolve_model(name: str, params: dict[str, float]):
    """Model object from a name or a map spec file path."""
    if os.path.exists(name):
        with open(name) as handle:
            name, file_params = fio.parse_map_spec(handle.read())
        file_params.update(params)
        params = file_params
    if name == "twist":
        return TwistMapModel(K=params.get("K", 6.0))
    if name == "identity":
        return IdentityMap()
    if name == "shear":
        return ShearMap()
    if name == "rotation":
        return RotationMap(alpha=params["alpha"]) if "alpha" in params else RotationMap()
    if name == "horseshoe":
        return SymbolicHorseshoe(symbols=int(params.get("s", 2)))
    raise ValueError(f"unknown model {name!r}")


# -- barcode -------------------------------------------------------------

def cmd_barcode(args) -> int:
    try:
        with open(args.package) as handle:
            package = fio.parse_package(handle.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except fio.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.gamma_gen is not None:
        package = FloerPackage(
            generators=package.generators,
            terms=package.terms,
            gamma=PeriodGroup.from_generators(Fraction(args.gamma_gen)),
            p=package.p,
        )
    if args.field_p is not None and args.field_p != package.p:
        print(
            f"validation failed: file declares field {package.p}, flag wants {args.field_p}",
            file=sys.stderr,
        )
        return EXIT_VALIDATION

    report = validate(package)
    if not report.ok:
        print(f"validation failed: {report.issues[0]}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        bc = compute_barcode(package)
    except PackageError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    eps = _parse_eps(args.eps) if args.eps else ()
    out = args.out
    os.makedirs(out, exist_ok=True)
    files = ["barcode.csv", "validation.txt", "graph.dot"]
    fio.atomic_write(os.path.join(out, "barcode.csv"), fio.barcode_csv(bc))
    validation_text = "\n".join(
        [
            f"boundary_squares_to_zero {report.boundary_squares_to_zero}",
            f"strictly_action_decreasing {report.strictly_action_decreasing}",
            f"components_preserved {report.components_preserved}",
            f"exponents_in_group {report.exponents_in_group}",
            f"margin {report.margin}",
        ]
    )
    fio.atomic_write(os.path.join(out, "validation.txt"), validation_text + "\n")
    fio.atomic_write(os.path.join(out, "graph.dot"), floer_graph(package).to_dot())
    if eps:
        fio.atomic_write(os.path.join(out, "beps.csv"), fio.beps_csv(bc, eps))
        files.append("beps.csv")
        for e in eps:
            print(f"b_eps({e:g}) = {bc.b_eps(e)}")
    config = {
        "command": "barcode",
        "package": os.path.abspath(args.package),
        "eps": list(eps),
        "field_p": package.p,
        "gamma_gen": str(package.gamma.generator),
    }
    fio.write_manifest(out, config, files)
    print(f"wrote {out}/barcode.csv ({len(bc.finite_lengths())} finite, {bc.infinite()} infinite)")
    return EXIT_OK


# -- entropy -------------------------------------------------------------

def _entropy_pipeline(model, args, out: str, config: dict) -> int:
    warnings: list[str] = []
    symbolic = isinstance(model, SymbolicHorseshoe)

    if symbolic:
        table = horseshoe_orbit_table(model, args.k_max)
    elif isinstance(model, TwistMapModel):
        table = orbit_table(
            model,
            args.k_max,
            grid=args.grid,
            grid_cap=args.grid_cap,
            seed_budget=args.seed_budget,
        )
    else:
        table = None

    files: list[str] = []
    if table is not None:
        fio.atomic_write(os.path.join(out, "orbits.csv"), fio.orbit_csv(table))
        files.append("orbits.csv")
        if not table.complete:
            warnings.append("orbit search incomplete: " + json.dumps(dict(table.diagnostics)))

    ks = list(range(1, args.k_max + 1))

    def build_for(k: int):
        if table is None or not table.records:
            return None
        if symbolic:
            return build_package_from_orbits(table, k, differential="none", p=args.field_p)
        if args.differential == "descent" or (
            args.differential == "auto" and k <= args.descent_k_max
        ):
            return build_package_from_orbits(
                table, k, model=model, differential="descent", p=args.field_p
            )
        return build_package_from_orbits(table, k, differential="none", p=args.field_p)

    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            builds = list(pool.map(build_for, ks))
    else:
        builds = [build_for(k) for k in ks]

    barcodes = []
    depths = []
    for k, built in zip(ks, builds):
        if built is None:
            continue
        bc = compute_barcode(built.package)
        barcodes.append((k, bc))
        depths.append((k, bc.boundary_depth()))
        fio.atomic_write(os.path.join(out, f"package_k{k}.txt"), fio.format_package(built.package))
        fio.atomic_write(os.path.join(out, f"barcode_k{k}.csv"), fio.barcode_csv(bc))
        files += [f"package_k{k}.txt", f"barcode_k{k}.csv"]
        if not built.complete:
            warnings.append(f"package build at k={k} incomplete")

    if args.eps != "auto":
        eps = _parse_eps(args.eps)
    elif table is not None and table.records:
        scan = action_gap_scan(table)
        upper = float(scan.floor) if scan.floor is not None else 1.0
        eps = eps_grid(upper, upper / 64.0, n=args.eps_count)
    else:
        eps = eps_grid(1.0, 1.0 / 64.0, n=args.eps_count)

    # Counts fitted past the verified range would report the search budget,
    # not the map, so bar and orbit fits stop at the defect-free prefix.
    # The orbit slope also drops the leading half, where iterates still sit
    # in the prefactor regime and tilt a fitted line.  Bar counts stay
    # inside the descent range on top of that, so a single differential
    # convention feeds the whole fit.
    count_window = None
    if table is not None and not symbolic and table.records:
        count_window = defect_free_window(table)
    orbit_window = None
    bar_window = None
    if count_window is not None:
        lo, hi = count_window
        orbit_window = (max(lo, hi // 2 + 1), hi)
        if args.differential == "auto":
            hi = min(hi, args.descent_k_max)
        bar_window = (lo, hi) if hi >= max(lo, 2) else None
    vol_window = (args.k_max // 2 + 1, args.k_max) if args.k_max >= 4 else None

    if barcodes:
        rate = barcode_entropy(barcodes, eps, window=bar_window)
        h_hat = rate.h_hat
        counts = rate.counts
        floor = gamma_lower_bound(depths)
    else:
        rate = None
        h_hat = 0.0
        counts = tuple(tuple(0 for _ in ks) for _ in eps)
        floor = None

    if table is not None:
        orbit_fit = orbit_entropy(table, window=orbit_window)
        hyp_fit = orbit_entropy(table, hyperbolic_only=True, window=orbit_window)
        points = [table.point_count(k) for k in ks]
    else:
        orbit_fit = None
        hyp_fit = None
        points = [0 for _ in ks]

    if symbolic:
        vol_fit = None
        lengths = [None for _ in ks]
    else:
        lengths = list(graph_volume_growth(model, args.k_max))
        vol_fit = growth_fit(
            GrowthSequence(tuple((k, v) for k, v in zip(ks, lengths)), kind="length"),
            vol_window,
        )

    if table is not None and not table.records:
        orbit_rate = 0.0
        hyp_rate = None
    else:
        orbit_rate = orbit_fit.rate if orbit_fit else None
        hyp_rate = hyp_fit.rate if hyp_fit else None

    comparison = compare_rates(
        h_hat,
        vol_fit.rate if vol_fit else None,
        orbit_rate,
        hyperbolic_rate=hyp_rate,
    )

    depth_map = dict(depths)
    fio.atomic_write(
        os.path.join(out, "report.csv"),
        fio.report_csv(
            ks,
            eps,
            counts,
            points,
            lengths,
            [depth_map.get(k) for k in ks],
        ),
    )
    files.append("report.csv")

    ratios = {}
    if table is not None and table.records:
        ratios = {
            str(m): r for m, r in iterate_ratios(orbit_growth_sequence(table)).items()
        }

    summary = {
        "model": config["model"],
        "params": config["params"],
        "k_max": args.k_max,
        "eps": list(eps),
        "h_hat": h_hat,
        "h_hat_eps": rate.h_hat_eps if rate else None,
        "orbit_rate": orbit_rate,
        "hyperbolic_rate": hyp_rate,
        "volume_rate": vol_fit.rate if vol_fit else None,
        "bar_fit_window": list(bar_window) if bar_window else None,
        "orbit_fit_window": list(orbit_window) if orbit_window else None,
        "volume_fit_window": list(vol_window) if vol_window else None,
        "boundary_depth_floor": str(floor.floor) if floor else None,
        "bounded_away": floor.bounded_away if floor else False,
        "verdicts": comparison.verdicts(),
        "reasons": list(comparison.reasons),
        "iterate_ratio_diagnostics": ratios,
        "complete": not warnings,
        "warnings": warnings,
        "seed": args.seed,
        "config_sha256": fio.config_hash(config),
    }
    fio.atomic_write(
        os.path.join(out, "report.json"),
        json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n",
    )
    files.append("report.json")

    if args.svg:
        series: dict[str, list] = {"points": [float(x) for x in points]}
        if rate:
            series[f"bars@{eps[-1]:.3g}"] = [float(c) for c in counts[-1]]
        if not symbolic:
            series["length"] = [float(v) for v in lengths]
        fio.atomic_write(
            os.path.join(out, "growth.svg"),
            fio.growth_svg(ks, series, f"growth, {config['model']}"),
        )
        files.append("growth.svg")

    fio.write_manifest(out, config, files)
    for name, verdict in comparison.verdicts().items():
        print(f"{name}: {verdict}")
    print(f"h_hat = {h_hat:.6f}")
    if warnings:
        print("warning: " + "; ".join(warnings), file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def cmd_entropy(args) -> int:
    try:
        params = _parse_params(args.param)
        model = _resolve_model(args.model, params)
    except fio.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, KeyError) as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.k_max < 1:
        print("validation failed: k-max must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.eps != "auto":
            _parse_eps(args.eps)
    except ValueError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = args.out
    os.makedirs(out, exist_ok=True)
    config = {
        "command": "entropy",
        "model": getattr(model, "name", args.model),
        "params": _parse_params(args.param),
        "k_max": args.k_max,
        "eps": args.eps,
        "seed": args.seed,
        "field_p": args.field_p,
        "differential": args.differential,
        "grid": args.grid,
        "seed_budget": args.seed_budget,
    }
    return _entropy_pipeline(model, args, out, config)


# -- crofton -------------------------------------------------------------

def cmd_crofton(args) -> int:
    try:
        if args.spec:
            with open(args.spec) as handle:
                family = fio.parse_tomograph_spec(handle.read())
        elif args.family == "translate":
            family = translate_family()
        else:
            family = harmonic_family(radius=args.radius)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except fio.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        if args.curve:
            with open(args.curve) as handle:
                curves = [fio.parse_curve(handle.read())]
        else:
            curves = list(sine_curve_suite())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except fio.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        report = crofton_check(family, curves, args.samples, rng_seed=args.seed)
    except DegenerateFamilyError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = args.out
    os.makedirs(out, exist_ok=True)
    lines = ["curve,length,estimate,ratio"]
    for idx, (length, est, ratio) in enumerate(
        zip(report.lengths, report.estimates, report.ratios)
    ):
        lines.append(f"{idx},{length!r},{est!r},{ratio!r}")
    fio.atomic_write(os.path.join(out, "ratios.csv"), "\n".join(lines) + "\n")

    hist: dict[int, int] = {}
    for n in report.counts:
        hist[n] = hist.get(n, 0) + 1
    hist_lines = ["intersections,frequency"]
    for n in sorted(hist):
        hist_lines.append(f"{n},{hist[n]}")
    fio.atomic_write(os.path.join(out, "histogram.csv"), "\n".join(hist_lines) + "\n")

    config = {
        "command": "crofton",
        "family": list(family.terms),
        "radius": family.radius,
        "samples": args.samples,
        "seed": args.seed,
        "curves": len(curves),
    }
    summary = {
        "constant": report.constant,
        "max_ratio": report.max_ratio,
        "bounded": report.max_ratio <= report.constant * 1.1,
        "samples": report.samples,
        "resampled": report.resampled,
        "config_sha256": fio.config_hash(config),
    }
    fio.atomic_write(
        os.path.join(out, "report.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    fio.write_manifest(out, config, ["ratios.csv", "histogram.csv", "report.json"])
    print(f"max ratio {report.max_ratio:.4f} against constant {report.constant:.4f}")
    return EXIT_OK


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floerbar",
        description="Barcodes and entropy of action-filtered complexes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bar = sub.add_parser("barcode", help="barcode of a package file")
    p_bar.add_argument("package", help="package text file")
    p_bar.add_argument("--eps", default="", help="comma-separated epsilon list")
    p_bar.add_argument("--out", default="barcode-out")
    p_bar.add_argument("--field-p", type=int, default=None)
    p_bar.add_argument("--gamma-gen", default=None, help="period group generator override")
    p_bar.set_defaults(func=cmd_barcode)

    p_ent = sub.add_parser("entropy", help="orbit, volume, and barcode rates for a model")
    p_ent.add_argument("--model", required=True, help="twist|horseshoe|identity|shear|rotation or spec file")
    p_ent.add_argument("--param", action="append", help="model parameter KEY=VALUE")
    p_ent.add_argument("--k-max", type=int, required=True, dest="k_max")
    p_ent.add_argument("--eps", default="auto", help="epsilon grid or 'auto'")
    p_ent.add_argument("--eps-count", type=int, default=6, dest="eps_count")
    p_ent.add_argument("--seed", type=int, default=0)
    p_ent.add_argument("--out", default="entropy-out")
    p_ent.add_argument("--field-p", type=int, default=2, dest="field_p")
    p_ent.add_argument("--differential", choices=("auto", "descent", "none"), default="auto")
    p_ent.add_argument("--descent-k-max", type=int, default=7, dest="descent_k_max")
    p_ent.add_argument("--grid", type=int, default=128)
    p_ent.add_argument(
        "--seed-budget", type=int, default=3_000_000, dest="seed_budget",
        help="cap on symbolic seeding work per iterate"
    )
    p_ent.add_argument("--grid-cap", type=int, default=1024, dest="grid_cap")
    p_ent.add_argument("--svg", action="store_true")
    p_ent.set_defaults(func=cmd_entropy)

    p_cro = sub.add_parser("crofton", help="averaged intersection ratios for a family")
    p_cro.add_argument("--spec", default=None, help="tomograph spec file")
    p_cro.add_argument("--family", choices=("translate", "harmonic"), default="translate")
    p_cro.add_argument("--radius", type=float, default=0.25)
    p_cro.add_argument("--curve", default=None, help="curve file; defaults to the sine suite")
    p_cro.add_argument("--samples", type=int, required=True)
    p_cro.add_argument("--seed", type=int, default=0)
    p_cro.add_argument("--out", default="crofton-out")
    p_cro.set_defaults(func=cmd_crofton)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 unreadable or malformed input, 2 invalid carpet,
3 solver non-convergence, 4 a size guard refused the request.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .carpet import CarpetSpec, SpecError, load_spec, validate
from .report import ConvergenceError, analyze, round_floats
from .roots import ROOT_TOL, RootError, assouad_lower_profile
from .variational import TIE_TOL, GuardError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVALID = 2
EXIT_CONVERGENCE = 3
EXIT_GUARD = 4

EXAMPLE_PREFIX = "example:"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def packaged_examples() -> list[str]:
    root = resources.files("carpetdim") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_spec(args) -> CarpetSpec:
    source = args.input_flag or args.input
    if source is None:
        raise CliError(EXIT_INPUT, "no input: give a carpet JSON path or --input PATH")
    try:
        if source.startswith(EXAMPLE_PREFIX):
            name = source[len(EXAMPLE_PREFIX):]
            if name not in packaged_examples():
                raise CliError(
                    EXIT_INPUT,
                    f"unknown example {name!r}; available: {', '.join(packaged_examples())}",
                )
            text = (resources.files("carpetdim") / "data" / f"{name}.json").read_text()
            spec = CarpetSpec.from_json(text)
            if args.strict_partition:
                spec = CarpetSpec(spec.widths, spec.heights, spec.cells, allow_gaps=False)
        else:
            spec = load_spec(source, strict_partition=args.strict_partition)
    except SpecError as exc:
        raise CliError(EXIT_INPUT, f"{source}: field {exc}") from exc
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"{source}: {exc.strerror or exc}") from exc

    report = validate(spec)
    if not report.ok:
        lines = [f"{source}: invalid carpet"]
        lines += [f"  {v.invariant}: {v.message}" for v in report.violations]
        raise CliError(EXIT_INVALID, "\n".join(lines))
    for w in report.warnings:
        print(f"warning: {w.invariant}: {w.message}", file=sys.stderr)
    return spec


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and isinstance(obj[0], (list, dict)):
        for k, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        yield prefix[:-1], " ".join(json.dumps(v) for v in obj)
    else:
        yield prefix[:-1], json.dumps(obj)


def format_output(data: dict, fmt: str) -> str:
    data = round_floats(data)
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    writer.writerows(_flatten(data))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands


def cmd_analyze(args) -> str:
    spec = read_spec(args)
    report = analyze(
        spec,
        tol_eq=args.tol_eq,
        tol_root=args.tol_root,
        starts=args.starts,
        seed=args.seed,
        timings=args.timings,
    )
    if args.plot:
        from .plots import plot_dimensions

        plot_dimensions(report, args.plot)
    if args.format == "json":
        return report.to_json()
    return format_output(report.to_dict(), "csv")


def cmd_boxcount(args) -> str:
    from .symbolic import box_count_estimate

    spec = read_spec(args)
    res = box_count_estimate(spec, args.min_exp, args.max_exp)
    ref = assouad_lower_profile(spec, args.tol_root).dim_B
    if args.plot:
        from .plots import plot_box_counts

        plot_box_counts(res, args.plot, reference=ref)
    if args.format == "csv":
        return res.csv()
    return format_output(
        {
            "slope": res.slope,
            "stderr": res.stderr,
            "dim_B": ref,
            "slope_minus_dim_B": res.slope - ref,
            "deltas": list(res.deltas),
            "counts": list(res.counts),
        },
        "json",
    )


def cmd_gridmax(args) -> str:
    from .variational import grid_oracle, maximize_objective

    spec = read_spec(args)
    p = assouad_lower_profile(spec, args.tol_root)
    targets = {
        "g1": maximize_objective(spec, "g1", args.starts, args.seed).value,
        "g2": maximize_objective(spec, "g2", args.starts, args.seed).value,
        "f": p.dim_B,
    }
    out = {"n": args.n}
    for name, opt in targets.items():
        grid = grid_oracle(spec, name, args.n)
        out[name] = {
            "lattice_max": grid.value,
            "lattice_argmax": [float(v) for v in grid.q],
            "optimizer": opt,
            "gap": opt - grid.value,
            "lattice_below_optimizer": bool(grid.value <= opt + 1e-9),
        }
    out["points"] = grid.points
    return format_output(out, args.format)


def sample_squares(spec: CarpetSpec, count: int, depth: int, seed: int):
    """Random ``(q, square)`` pairs with interior ``q`` and ``k_max <= depth``."""
    from .symbolic import approximate_square

    rng = np.random.default_rng(seed)
    lo = min(spec.cell_widths.min(), spec.cell_heights.min())
    hi = max(spec.cell_widths.max(), spec.cell_heights.max())
    log_lo = depth * np.log(lo)
    out = []
    for _ in range(100 * count):
        if len(out) == count:
            break
        delta = float(np.exp(rng.uniform(max(log_lo, np.log(1e-9)), 0.0)))
        if not (0.0 < delta < 1.0):
            continue
        length = int(np.ceil(np.log(delta) / np.log(hi))) + 1
        word = rng.integers(spec.d, size=max(length, 1))
        sq = approximate_square(spec, word, delta)
        if sq.k_max > depth:
            continue
        out.append((rng.dirichlet(np.ones(spec.d)), sq))
    return out


def cmd_massdiff(args) -> str:
    from .symbolic import MAX_BRUTE_DEPTH, brute_mass_oracle, square_mass

    spec = read_spec(args)
    if args.depth > MAX_BRUTE_DEPTH:
        raise GuardError("brute_depth", f"depth {args.depth} exceeds {MAX_BRUTE_DEPTH}")
    pairs = sample_squares(spec, args.samples, args.depth, args.seed)
    diffs = [abs(square_mass(spec, q, sq) - brute_mass_oracle(spec, q, sq)) for q, sq in pairs]
    kinds = [sq.kind for _, sq in pairs]
    return format_output(
        {
            "samples": len(pairs),
            "depth": args.depth,
            "max_abs_diff": max(diffs) if diffs else 0.0,
            "one_type": kinds.count(1),
            "two_type": kinds.count(2),
            "within_1e-12": bool(all(d <= 1e-12 for d in diffs)),
        },
        args.format,
    )


def cmd_ahlfors(args) -> str:
    from .symbolic import ahlfors_probe

    spec = read_spec(args)
    probe = ahlfors_probe(
        spec, args.samples, range(args.min_exp, args.max_exp + 1), args.seed
    )
    if args.plot:
        from .plots import plot_ahlfors

        plot_ahlfors(probe, args.plot)
    return format_output(
        {
            "measure": probe.measure,
            "dimension": probe.dimension,
            "samples": probe.samples,
            "slope": probe.slope,
            "ratio_min": probe.ratio_min,
            "ratio_max": probe.ratio_max,
            "exponents": list(probe.exponents),
            "mean_log_ratio": list(probe.mean_log_ratio),
        },
        args.format,
    )


def cmd_render(args) -> str:
    from .render import render_svg

    spec = read_spec(args)
    svg = render_svg(spec, args.depth, args.size)
    if args.output in (None, "-"):
        return svg
    Path(args.output).write_text(svg)
    return ""


# ---------------------------------------------------------------------------
# Parser


def _add_input(p: argparse.ArgumentParser):
    p.add_argument("input", nargs="?", help="carpet JSON file, or example:NAME for a packaged one")
    p.add_argument("--input", dest="input_flag", metavar="PATH", help="carpet JSON file")
    p.add_argument(
        "--strict-partition",
        action="store_true",
        help="require the strips to tile the unit square (overrides allow_gaps)",
    )
    p.add_argument("--tol-root", type=float, default=ROOT_TOL, help="root-solver residual (default 1e-13)")


def _add_format(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_seed(p: argparse.ArgumentParser):
    p.add_argument("--starts", type=int, default=16, help="random restarts per maximizer")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carpetdim",
        description="Dimensions and uniform-fibre conditions of Baranski carpets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full dimension and condition report")
    _add_input(p)
    _add_format(p)
    _add_seed(p)
    p.add_argument("--tol-eq", type=float, default=TIE_TOL, help="tie tolerance (default 1e-9)")
    p.add_argument("--plot", metavar="PATH", help="also write a dimension-profile figure")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.set_defaults(func=cmd_analyze)

    oracle = sub.add_parser("oracle", help="numerical cross-checks")
    osub = oracle.add_subparsers(dest="oracle", required=True)

    p = osub.add_parser("boxcount", help="box-counting slope against dim_B")
    _add_input(p)
    _add_format(p)
    p.add_argument("--min-exp", type=int, default=4)
    p.add_argument("--max-exp", type=int, default=11)
    p.add_argument("--plot", metavar="PATH", help="also write the log-log figure")
    p.set_defaults(func=cmd_boxcount)

    p = osub.add_parser("gridmax", help="lattice maxima of g1, g2, f against the optimizers")
    _add_input(p)
    _add_format(p)
    _add_seed(p)
    p.add_argument("--n", type=int, default=60, help="lattice resolution")
    p.set_defaults(func=cmd_gridmax)

    p = osub.add_parser("massdiff", help="product mass formula against brute-force enumeration")
    _add_input(p)
    _add_format(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=6, help="largest cut depth of sampled squares")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_massdiff)

    p = osub.add_parser("ahlfors", help="mass-ratio probe across scales")
    _add_input(p)
    _add_format(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--min-exp", type=int, default=2)
    p.add_argument("--max-exp", type=int, default=11)
    p.add_argument("--plot", metavar="PATH", help="also write the ratio figure")
    p.set_defaults(func=cmd_ahlfors)

    p = sub.add_parser("render", help="SVG prefractal")
    _add_input(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--size", type=int, default=1024)
    p.add_argument("--output", metavar="PATH", help="SVG file (default: standard output)")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except GuardError as exc:
        print(f"error: guard {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConvergenceError, RootError) as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

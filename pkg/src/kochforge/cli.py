"""Command-line interface: ``kochforge <subcommand> [flags]``.

Exit status is 0 on success, 1 on a usage error and 2 on a domain error
(for example a target area outside ``[x_p, y_p]``). Every run echoes its
resolved configuration to stderr and embeds it in JSON reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from . import analysis, area, choices, curves, render, spectrum
from .ifs import KochParams, build_family, verify_nesting_and_osc

THREADS_ENV = "KOCHFORGE_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    return n


def _params(text: str) -> KochParams:
    return KochParams.parse(text)


def _load_spec(path: str) -> choices.SnowflakeSpec:
    return choices.parse(Path(path).read_text())


def _depth_for(spec: choices.SnowflakeSpec, depth: Optional[int]) -> int:
    return spec.depth if depth is None else depth


def _spec_at(spec: choices.SnowflakeSpec, depth: int) -> choices.SnowflakeSpec:
    """The spec itself, or its extension by the spec's fill rule."""
    return spec if depth <= spec.depth else spec.extended(depth)


# --- subcommands --------------------------------------------------------------

def cmd_generate(args, config) -> int:
    params = _params(args.p)
    if args.fill == "zero":
        spec = choices.SnowflakeSpec.uniform(params, args.depth, 0)
    elif args.fill == "one":
        spec = choices.SnowflakeSpec.uniform(params, args.depth, 1)
    else:
        spec = choices.SnowflakeSpec.random(params, args.depth, args.seed)
    _emit(choices.serialize(spec), args.out)
    return 0


def _render_shapes(args):
    if args.what == "double-sided":
        family = build_family(_params(args.p))
        segs = curves.double_sided_segments(family, args.depth, snowflake=args.snowflake)
        return render.segments_to_shapes(segs), False
    if args.spec is None:
        raise UsageError(f"render --what {args.what} requires --spec")
    spec = _load_spec(args.spec)
    depth = _depth_for(spec, args.depth)
    spec = _spec_at(spec, depth)
    family = build_family(spec.params)
    if args.what == "snowflake":
        return [curves.snowflake_polyline(family, spec, depth).polyline], True
    if args.what == "curve":
        return [curves.curve_polyline(family, spec.s, depth).polyline], False
    corners = curves.snowflake_cell_corners(family, spec, depth)
    return list(corners), True


def cmd_render(args, config) -> int:
    shapes, closed = _render_shapes(args)
    opts = render.RenderOptions(width_px=args.width, height_px=args.height,
                                stroke_width=args.stroke_width, fill=args.fill,
                                fill_rule=args.fill_rule, margin_fraction=args.margin)
    _emit(render.to_svg(shapes, opts, closed=closed), args.out)
    return 0


def cmd_area(args, config) -> int:
    spec = _load_spec(args.spec)
    report = area.spec_area_report(spec, args.depth)
    if args.csv:
        _emit(report.to_csv(), args.csv)
    _emit(_dump({"config": config, "area": report.to_dict()}), args.out)
    return 0


def cmd_solve_area(args, config) -> int:
    params = _params(args.p)
    layout = spectrum.parse_layout(args.layout)
    real = spectrum.solve_area(params, args.target, args.depth, layout)
    report = real.to_dict()
    report["config"] = config
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        spec_path = out / "spec.json"
        spec_path.write_text(choices.serialize(real.spec))
        report["spec_file"] = str(spec_path)
        (out / "report.json").write_text(_dump(report))
    else:
        report["spec_file"] = None
        sys.stdout.write(_dump(report))
    return 0


def cmd_witnesses(args, config) -> int:
    params = _params(args.p)
    found = spectrum.ejk_witnesses(params, args.target, args.count, args.seed, args.depth)
    items = []
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for i, w in enumerate(found):
        item = w.to_dict()
        if out:
            path = out / f"witness_{i}.json"
            path.write_text(choices.serialize(w.spec))
            item["spec_file"] = str(path)
        items.append(item)
    report = {"config": config, "k": spectrum.ejk_feasible_k(params), "witnesses": items}
    _emit(_dump(report), str(out / "report.json") if out else None)
    return 0


def _region(text: Optional[str]):
    if text is None:
        return None
    try:
        x, y, r = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--region expects x,y,radius, got {text!r}")
    return (x, y), r


def cmd_classify(args, config) -> int:
    spec = _load_spec(args.spec)
    depth = _depth_for(spec, args.depth)
    verdict = analysis.jordan_classify(_spec_at(spec, depth), depth, args.tol,
                                       region=_region(args.region),
                                       max_witnesses=args.max_witnesses)
    _emit(_dump({"config": config, "classification": verdict.to_dict()}), args.out)
    return 0


def cmd_turning(args, config) -> int:
    spec = _load_spec(args.spec)
    depth = _depth_for(spec, args.depth)
    rep = analysis.turning_ratio(_spec_at(spec, depth), depth, args.samples, args.seed,
                                 tol=args.tol)
    _emit(_dump({"config": config, "turning": rep.to_dict()}), args.out)
    return 0


def cmd_dimension(args, config) -> int:
    if args.what == "double-sided":
        params = _params(args.p)
        family = build_family(params)
        shapes = [curves.double_sided_segments(family, args.depth)]
        theory = analysis.similarity_dimension(params.p, 6)
    else:
        if args.spec is None:
            raise UsageError(f"dimension --what {args.what} requires --spec")
        spec = _spec_at(_load_spec(args.spec), args.depth)
        family = build_family(spec.params)
        params = spec.params
        if args.what == "curve":
            shapes = [curves.curve_polyline(family, spec.s, args.depth).polyline]
        else:
            shapes = [curves.snowflake_polyline(family, spec, args.depth).vertices]
        theory = analysis.similarity_dimension(params.p, 4)
    lo = args.min_level
    if args.depth - lo < 2:
        raise UsageError("need depth >= min-level + 2 for at least three scales")
    scales = [params.p ** j for j in range(lo, args.depth + 1)]
    fit = analysis.box_dimension(shapes, scales, theoretical=theory, workers=_threads())
    if args.csv:
        _emit(fit.to_csv(), args.csv)
    _emit(_dump({"config": config, "dimension": fit.to_dict()}), args.out)
    return 0


def cmd_double_sided(args, config) -> int:
    family = build_family(_params(args.p))
    segs = curves.double_sided_segments(family, args.depth, snowflake=args.snowflake)
    report = {"config": config, "segments": int(len(segs))}
    if args.probe:
        report["measure_zero"] = analysis.measure_zero_probe(
            family, list(range(2, args.depth + 1))).to_dict()
    if args.segments:
        lines = [f"{a[0]:.17g} {a[1]:.17g} {b[0]:.17g} {b[1]:.17g}" for a, b in segs]
        _emit("# x0 y0 x1 y1\n" + "\n".join(lines) + "\n", args.segments)
    _emit(_dump(report), args.out)
    return 0


def cmd_verify_ifs(args, config) -> int:
    family = build_family(_params(args.p))
    report = verify_nesting_and_osc(family, args.tol)
    _emit(_dump({"config": config, "osc": report.to_dict()}), args.out)
    return 0 if report.nested and report.interiors_disjoint else 2


# --- parser -------------------------------------------------------------------

def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kochforge", description="Generalised p-Koch curves and snowflakes.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    def add(name, func: Callable, help_text: str):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        return sp

    g = add("generate", cmd_generate, "write a snowflake spec file")
    g.add_argument("--p", default="1/3")
    g.add_argument("--depth", type=_nonneg_int, required=True)
    g.add_argument("--fill", choices=["zero", "one", "random"], default="zero",
                   help="all-outward, all-inward, or seeded random bits")
    g.add_argument("--seed", type=_nonneg_int, default=0)
    g.add_argument("--out")

    r = add("render", cmd_render, "render a spec or the double-sided set as SVG")
    r.add_argument("--spec")
    r.add_argument("--p", default="1/3", help="used by --what double-sided")
    r.add_argument("--depth", type=_nonneg_int)
    r.add_argument("--what", choices=["snowflake", "curve", "cells", "double-sided"],
                   default="snowflake")
    r.add_argument("--snowflake", action="store_true", help="double-sided set on all sides")
    r.add_argument("--width", type=_pos_int, default=800)
    r.add_argument("--height", type=_pos_int, default=800)
    r.add_argument("--stroke-width", type=float, default=1.0)
    r.add_argument("--fill", action="store_true")
    r.add_argument("--fill-rule", choices=["nonzero", "evenodd"], default="nonzero")
    r.add_argument("--margin", type=float, default=0.05)
    r.add_argument("--out")

    a = add("area", cmd_area, "area series of a spec")
    a.add_argument("--spec", required=True)
    a.add_argument("--depth", type=_nonneg_int)
    a.add_argument("--csv")
    a.add_argument("--out")

    s = add("solve-area", cmd_solve_area, "build a spec with a target area")
    s.add_argument("--p", default="1/3")
    s.add_argument("--target", type=float, required=True)
    s.add_argument("--depth", type=_nonneg_int, default=12)
    s.add_argument("--layout", default="lex", help="lex, balanced or seeded:<n>")
    s.add_argument("--out")

    w = add("witnesses", cmd_witnesses, "several distinct specs with the same area")
    w.add_argument("--p", default="1/3")
    w.add_argument("--target", type=float, required=True)
    w.add_argument("--count", type=_pos_int, default=5)
    w.add_argument("--seed", type=_nonneg_int, default=0)
    w.add_argument("--depth", type=_nonneg_int, default=14)
    w.add_argument("--out")

    c = add("classify", cmd_classify, "Jordan / self-touching classification")
    c.add_argument("--spec", required=True)
    c.add_argument("--depth", type=_nonneg_int)
    c.add_argument("--tol", type=float, default=1e-9)
    c.add_argument("--region", help="x,y,radius: restrict the search to a disk")
    c.add_argument("--max-witnesses", type=_pos_int, default=64)
    c.add_argument("--out")

    t = add("turning", cmd_turning, "sampled bounded-turning ratio")
    t.add_argument("--spec", required=True)
    t.add_argument("--depth", type=_nonneg_int)
    t.add_argument("--samples", type=_pos_int, default=2000)
    t.add_argument("--seed", type=_nonneg_int, default=0)
    t.add_argument("--tol", type=float, default=1e-9)
    t.add_argument("--out")

    d = add("dimension", cmd_dimension, "box-counting dimension estimate")
    d.add_argument("--spec")
    d.add_argument("--p", default="1/3", help="used by --what double-sided")
    d.add_argument("--what", choices=["curve", "snowflake", "double-sided"], default="curve")
    d.add_argument("--depth", type=_nonneg_int, required=True)
    d.add_argument("--min-level", type=_nonneg_int, default=2,
                   help="coarsest scale is p**min_level; finest is p**depth")
    d.add_argument("--csv")
    d.add_argument("--out")

    ds = add("double-sided", cmd_double_sided, "double-sided set segments and probe")
    ds.add_argument("--p", default="1/3")
    ds.add_argument("--depth", type=_nonneg_int, required=True)
    ds.add_argument("--snowflake", action="store_true")
    ds.add_argument("--probe", action="store_true", help="run the measure-zero probe")
    ds.add_argument("--segments", help="write segments as text to this path")
    ds.add_argument("--out")

    v = add("verify-ifs", cmd_verify_ifs, "check nesting and the open set condition")
    v.add_argument("--p", default="1/3")
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--out")
    return parser


def resolved_config(args) -> Dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    if "p" in cfg and cfg["p"] is not None:
        try:
            cfg["p"] = KochParams.parse(cfg["p"]).label
        except ValueError:
            pass
    cfg["threads"] = _threads()
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = resolved_config(args)
        sys.stderr.write("config: " + json.dumps(config, sort_keys=True) + "\n")
        return args.func(args, config)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"kochforge: error: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

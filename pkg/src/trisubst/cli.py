"""Command line: analyze | search | post | render.

Exit status: 0 success, 1 invalid input, 2 inadmissible inflation factor,
3 search truncated by a limit.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .archive import (
    CampaignConfig,
    ResultArchive,
    SchemaError,
    emit_families,
    families_to_json,
    load_config,
    load_families,
)
from .cyclotomic import (
    ConfigurationError,
    InadmissibleError,
    area_vector,
    classify_factor,
    length_matrix,
    length_vector,
    minimal_polynomial,
    substitution_matrix,
)
from .geometry import lattice
from .parallel import run_campaign
from .postprocess import (
    RuleSet,
    apply_and_verify,
    forward_starts,
    group_families,
    polarity_report,
    seed_prototile,
    seed_star,
    tile_vertices,
)
from .render import Drawing
from .search import SearchContext

EXIT_OK, EXIT_INVALID, EXIT_INADMISSIBLE, EXIT_TRUNCATED = 0, 1, 2, 3

log = logging.getLogger("trisubst")


def _matrix_lines(m) -> list[str]:
    return ["  [" + ", ".join(str(x) for x in row) + "]" for row in m]


def _config_from_args(args) -> CampaignConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.n is not None and args.lam is not None:
        cfg = CampaignConfig(args.n, tuple(int(x) for x in args.lam.replace(",", " ").split()))
    else:
        raise ConfigurationError("give --config PATH, or both --n and --lambda")
    over = {}
    for key in ("workers", "kill_threshold", "max_results", "max_nodes", "starter_side"):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = val
    if getattr(args, "no_orientation", False):
        over["orientation"] = False
    return cfg.with_overrides(**over)


def cmd_analyze(args, out=None) -> int:
    out = out or sys.stdout
    cfg = _config_from_args(args)
    n = cfg.n
    q = minimal_polynomial(n)
    lam = cfg.factor
    print(f"n = {n}", file=out)
    print(f"minimal polynomial of a_2: {q}", file=out)
    d = (n - 1) // 2
    for k in range(1, d + 1):
        v = length_vector(n, k)
        print(f"a_{k} = {float(v):.12f}  coefficients {list(v.int_coeffs())}", file=out)
    print(f"lambda = {lam} = {float(lam):.12f}", file=out)
    print("areas (coefficients over powers of a_2):", file=out)
    for t in cfg.prototiles:
        print(f"  T{t}: {[str(c) for c in area_vector(n, t).coeffs]}", file=out)
    print("length matrix X:", file=out)
    print("\n".join(_matrix_lines(length_matrix(n, lam))), file=out)
    fc = classify_factor(lam)
    status = EXIT_OK
    try:
        m = substitution_matrix(n, cfg.prototiles, lam)
        print("substitution matrix M:", file=out)
        print("\n".join(_matrix_lines(m)), file=out)
        print("verdict: admissible", file=out)
    except InadmissibleError as exc:
        print(f"verdict: inadmissible ({exc})", file=out)
        status = EXIT_INADMISSIBLE
    print(f"classification: {fc.describe()} (norm {fc.norm}, conjugates "
          + ", ".join(f"{c:.6f}" for c in fc.conjugates) + ")", file=out)
    return status


def cmd_search(args, out=None) -> int:
    out = out or sys.stdout
    cfg = _config_from_args(args)
    try:
        substitution_matrix(cfg.n, cfg.prototiles, cfg.factor)
    except InadmissibleError as exc:
        if not args.force:
            print(f"inadmissible inflation factor: {exc}", file=out)
            return EXIT_INADMISSIBLE
        archive = ResultArchive(cfg, {t0: [] for t0 in range(len(cfg.prototiles))})
        if args.out:
            archive.save(args.out)
        print("no results: inflation factor is inadmissible", file=out)
        return EXIT_INADMISSIBLE
    camp = run_campaign(cfg.search_config(), workers=cfg.workers, kill_threshold=cfg.kill_threshold)
    archive = ResultArchive(cfg, camp.results, camp.truncated)
    if args.out:
        archive.save(args.out)
    for t0, t in enumerate(cfg.prototiles):
        starters = {s: c for (p, s), c in camp.per_starter.items() if p == t0}
        print(f"T{t}: {len(camp.results[t0])} results; by starter length {starters}", file=out)
    print(f"nodes {camp.nodes}, split searches {camp.snapshots}", file=out)
    if camp.truncated:
        print("truncated by limits", file=out)
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_post(args, out=None) -> int:
    out = out or sys.stdout
    archive = ResultArchive.load(args.archive)
    cfg = archive.config
    ctx = SearchContext(cfg.search_config())
    assembly = group_families(ctx, archive.results)
    polarity = polarity_report(ctx, assembly)
    data = families_to_json(cfg, assembly, polarity)
    if args.out:
        Path(args.out).write_text(emit_families(data))
    complete = assembly.complete_classes()
    print(f"orientation classes with complete rules: {len(complete)}", file=out)
    for oc in complete:
        sizes = ", ".join(str(f.sizes) for f in oc.families)
        print(f"  class {oc.orientation:#x} polarity={polarity.get(oc.orientation)}: {sizes}", file=out)
    print(f"breakdown/orientation combinations: {len(assembly.families)}", file=out)
    partial = sum(g.partial for oc in assembly.classes for g in oc.groups)
    print(f"partial result groups: {partial}", file=out)
    if archive.truncated:
        print("warning: archive was truncated; families may be incomplete", file=out)
    return EXIT_OK


def _tile_span(ctx) -> float:
    xs = [ctx.lat.embed(v)[0] for tri in ctx.inflated for v in tri]
    ys = [ctx.lat.embed(v)[1] for tri in ctx.inflated for v in tri]
    return 1.15 * max(max(xs) - min(xs), max(ys) - min(ys))


def cmd_render(args, out=None) -> int:
    out = out or sys.stdout
    path = Path(args.input)
    text = path.read_text()
    kind = "families" if '"kind": "families"' in text else "results"
    if kind == "results":
        archive = ResultArchive.parse(text)
        ctx = SearchContext(archive.config.search_config())
        drawing = Drawing(ctx.n)
        span = _tile_span(ctx)
        for t0, rs in sorted(archive.results.items()):
            for i, r in enumerate(rs[: args.limit]):
                tris = [tile_vertices(ctx, pl) for pl in r.tiles]
                drawing.patch(tris, [pl.proto for pl in r.tiles], offset=(i * span, -t0 * span))
        Path(args.out).write_text(drawing.svg())
        return EXIT_OK
    cfg, fams = load_families(path)
    ctx = SearchContext(cfg.search_config())
    if not fams:
        print("no complete families to draw", file=out)
        return EXIT_INVALID
    if args.k is None:
        drawing = Drawing(ctx.n)
        span = _tile_span(ctx)
        row = 0
        for mask, _, members in fams[: args.limit]:
            col = 0
            for group in members:
                for r in group:
                    tris = [tile_vertices(ctx, pl) for pl in r.tiles]
                    arrows = [forward_starts(ctx, pl, mask) for pl in r.tiles]
                    drawing.patch(tris, [pl.proto for pl in r.tiles], arrows, offset=(col * span, -row * span))
                    col += 1
            row += 1
        Path(args.out).write_text(drawing.svg())
        return EXIT_OK
    if not 0 <= args.family < len(fams):
        print(f"family index out of range (0..{len(fams) - 1})", file=out)
        return EXIT_INVALID
    mask, bmap, members = fams[args.family]
    rule = RuleSet(mask, tuple(m[0] for m in members), bmap)
    seed = seed_star(ctx) if args.seed == "sevenfold-star" else seed_prototile(ctx, args.proto)
    try:
        patch, report = apply_and_verify(ctx, rule, seed, args.k, max_tiles=args.max_tiles)
    except ValueError as exc:
        print(str(exc), file=out)
        return EXIT_INVALID
    drawing = Drawing(ctx.n)
    drawing.patch([tile_vertices(ctx, pl) for pl in patch], [pl.proto for pl in patch],
                  [forward_starts(ctx, pl, mask) for pl in patch])
    Path(args.out).write_text(drawing.svg())
    print(f"level {args.k}: {report.tiles} tiles, census {report.census} (expected {report.expected_census}), "
          f"edge-to-edge {report.edge_to_edge}, arrows match {report.orientation_ok}", file=out)
    return EXIT_OK if report.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trisubst", description="Search for edge-to-edge triangle substitutions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def config_flags(p):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--n", type=int, help="order of symmetry (instead of --config)")
        p.add_argument("--lambda", dest="lam", help='coefficients over a_1..a_d, e.g. "1 1 0"')

    p = sub.add_parser("analyze", help="print field data, matrices and the admissibility verdict")
    config_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("search", help="run the full campaign and write a result archive")
    config_flags(p)
    p.add_argument("--out", help="archive path")
    p.add_argument("--workers", type=int)
    p.add_argument("--kill-threshold", type=int)
    p.add_argument("--max-results", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--starter-side", type=int, choices=(0, 1, 2))
    p.add_argument("--no-orientation", action="store_true", help="do not enforce edge orientations while searching")
    p.add_argument("--force", action="store_true", help="write an empty archive for an inadmissible factor")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("post", help="assemble rules and families from an archive")
    p.add_argument("archive")
    p.add_argument("--out", help="families file")
    p.set_defaults(func=cmd_post)

    p = sub.add_parser("render", help="draw an archive, a families file, or a rule applied k times")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, help="levels of substitution (families input only)")
    p.add_argument("--family", type=int, default=0)
    p.add_argument("--seed", choices=("prototile", "sevenfold-star"), default="prototile")
    p.add_argument("--proto", type=int, default=0, help="prototile index for the prototile seed")
    p.add_argument("--limit", type=int, default=12, help="patches per row")
    p.add_argument("--max-tiles", type=int, default=50000)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigurationError, SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InadmissibleError as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

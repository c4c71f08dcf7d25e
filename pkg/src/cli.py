"""
CLI Module

Command-line front end: reads a surface file and curves given as signed
edge ids, runs one of the library operations and prints the result as
text or JSON.

Usage:
    python -m src.cli selfintersect -s fixtures/genus2.srf -c "1 2 -1 -2"
    python -m src.cli is-simple -s fixtures/genus2.srf -c "1 3" --json
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel

from src.config import CurveCrossConfig, load_config
from src.counting import intersection_number, self_intersection_number
from src.errors import CurveCrossError, PreconditionError
from src.immersion import Immersion, crossing_count, format_immersion, minimal_immersion
from src.oracle import OracleBudget, brute_force_intersection, enumerate_homotopic_geodesics
from src.render import RenderOptions, render_svg
from src.schemas import (
    CanonicalResult,
    HomotopyResult,
    ImmersionResult,
    IntersectionResult,
    OracleResult,
    RootResult,
    SimplicityResult,
    SurfaceSummary,
)
from src.surface import (
    CombinatorialSurface,
    QuadSystem,
    SurfaceKind,
    format_surface,
    load_quad_system,
    load_surface,
    quadify,
    transport_walk,
)
from src.unzip import is_simple
from src.walk import Walk, canonicalize, freely_homotopic, parse_walk, primitive_root

# Configure logging
logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

FIXTURE_TEXTS = {
    "genus2.srf": (
        "edge 1 v v\nedge 2 v v\nedge 3 v v\nedge 4 v v\n"
        "rotation v 1 -2 -1 2 3 -4 -3 4\n"
    ),
    "torus.srf": "edge 1 v v\nedge 2 v v\nrotation v 1 -2 -1 2\n",
    "cylinder.srf": "edge 1 v v\nrotation v 1 -1\nperforated 1\nperforated -1\n",
}


# =============================================================================
# Helpers
# =============================================================================


def load_any_surface(path: str) -> CombinatorialSurface:
    """Load a `.quads` dump as a quad system and anything else as a surface."""
    if path.endswith(".quads"):
        return load_quad_system(path)
    return load_surface(path)


def summarize(surface: CombinatorialSurface) -> SurfaceSummary:
    return SurfaceSummary(
        vertices=surface.vertex_count,
        edges=surface.edge_count,
        faces=surface.face_count,
        boundaries=surface.boundary_count,
        euler_characteristic=surface.euler_characteristic,
        genus=surface.genus,
        kind=surface.kind.value,
    )


def on_quad_system(
    surface: CombinatorialSurface, curves: Sequence[Walk]
) -> tuple[QuadSystem, list[Walk]]:
    """The quad system of `surface` and the curves transported onto it."""
    if isinstance(surface, QuadSystem):
        return surface, list(curves)
    if surface.kind is not SurfaceKind.HYPERBOLIC:
        raise PreconditionError(
            f"This command needs a surface of negative Euler characteristic "
            f"({surface.kind.value} given)"
        )
    q, transport = quadify(surface)
    return q, [transport_walk(transport, c) for c in curves]


def labels(q: CombinatorialSurface, walk: Walk) -> list[int]:
    return [q.signed_label(a) for a in walk.arcs]


def write_fixtures(directory: Path) -> list[Path]:
    """
    Write the bundled surfaces and the quad system of the genus-2 surface.

    Args:
        directory: Output directory, created if needed

    Returns:
        Paths of the written files
    """
    from src.surface import build_surface, parse_surface

    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in FIXTURE_TEXTS.items():
        path = directory / name
        path.write_text(text)
        written.append(path)
    quads, _ = quadify(build_surface(parse_surface(FIXTURE_TEXTS["genus2.srf"])))
    path = directory / "genus2.quads"
    path.write_text(format_surface(quads))
    written.append(path)
    logger.info(f"Wrote {len(written)} fixtures to {directory}")
    return written


def _emit(args: argparse.Namespace, result: BaseModel, text: str) -> None:
    if args.json:
        print(result.model_dump_json(indent=2))
    else:
        print(text)


def _require_second(args: argparse.Namespace) -> str:
    if args.curve2 is None:
        raise PreconditionError(f"{args.command} needs a second curve (-c2)")
    return args.curve2


# =============================================================================
# Subcommands
# =============================================================================


def cmd_canonicalize(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    c = parse_walk(surface, args.curve)
    q, (walk,) = on_quad_system(surface, [c])
    canonical = canonicalize(q, walk)
    result = CanonicalResult(
        surface=summarize(surface),
        input_length=len(c),
        canonical=labels(q, canonical),
        contractible=canonical.is_trivial,
    )
    text = " ".join(map(str, result.canonical)) if result.canonical else "contractible"
    _emit(args, result, text)
    return 0


def cmd_root(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    q, (walk,) = on_quad_system(surface, [parse_walk(surface, args.curve)])
    canonical = canonicalize(q, walk)
    if canonical.is_trivial:
        result = RootResult(root=[], multiplicity=0)
    else:
        root, multiplicity = primitive_root(q, canonical)
        result = RootResult(root=labels(q, root), multiplicity=multiplicity)
    root_text = " ".join(map(str, result.root)) or "contractible"
    _emit(args, result, f"root: {root_text}\nmultiplicity: {result.multiplicity}")
    return 0


def cmd_homotopic(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    curves = [parse_walk(surface, args.curve), parse_walk(surface, _require_second(args))]
    q, (first, second) = on_quad_system(surface, curves)
    result = HomotopyResult(
        homotopic=freely_homotopic(q, first, second),
        first=labels(q, canonicalize(q, first)),
        second=labels(q, canonicalize(q, second)),
    )
    _emit(args, result, "yes" if result.homotopic else "no")
    return 0


def _oracle_value(
    surface: CombinatorialSurface, c: Walk, d: Optional[Walk], config: CurveCrossConfig
) -> int:
    q, walks = on_quad_system(surface, [c] if d is None else [c, d])
    budget = OracleBudget.from_config(config)
    return brute_force_intersection(q, walks[0], walks[1] if d is not None else None, budget)


def cmd_selfintersect(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    c = parse_walk(surface, args.curve)
    value = self_intersection_number(surface, c, allow_boundary=config.experimental_boundary)
    oracle = _oracle_value(surface, c, None, config) if args.oracle else None
    result = IntersectionResult(kind="self", value=value, oracle=oracle)
    text = str(value) if oracle is None else f"{value}\noracle: {oracle}"
    _emit(args, result, text)
    return 0


def cmd_intersect(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    c = parse_walk(surface, args.curve)
    d = parse_walk(surface, _require_second(args))
    value = intersection_number(surface, c, d, allow_boundary=config.experimental_boundary)
    oracle = _oracle_value(surface, c, d, config) if args.oracle else None
    result = IntersectionResult(kind="pair", value=value, oracle=oracle)
    text = str(value) if oracle is None else f"{value}\noracle: {oracle}"
    _emit(args, result, text)
    return 0


def cmd_immersion(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    q, (walk,) = on_quad_system(surface, [parse_walk(surface, args.curve)])
    curve, immersion = minimal_immersion(q, walk)
    result = ImmersionResult(
        curve=labels(q, curve),
        crossings=crossing_count(q, immersion),
        swaps=len(immersion.swap_history),
        immersion=format_immersion(q, immersion),
    )
    curve_text = " ".join(map(str, result.curve)) or "contractible"
    _emit(
        args,
        result,
        f"curve: {curve_text}\ncrossings: {result.crossings}\n{result.immersion}",
    )
    return 0


def _simplicity(
    args: argparse.Namespace, config: CurveCrossConfig
) -> tuple[CombinatorialSurface, SimplicityResult]:
    surface = load_any_surface(args.surface)
    c = parse_walk(surface, args.curve)
    simple, embedding = is_simple(surface, c, allow_boundary=config.experimental_boundary)
    if embedding is None:
        return surface, SimplicityResult(simple=simple)
    q = embedding.surface
    return surface, SimplicityResult(
        simple=simple,
        curve=labels(q, embedding.curves[0]),
        embedding=format_immersion(q, embedding),
    )


def cmd_is_simple(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    _, result = _simplicity(args, config)
    _emit(args, result, f"simple: {'yes' if result.simple else 'no'}")
    return 0


def cmd_embed(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    _, result = _simplicity(args, config)
    lines = [f"simple: {'yes' if result.simple else 'no'}"]
    if result.curve is not None:
        lines.append("curve: " + (" ".join(map(str, result.curve)) or "contractible"))
    if result.embedding:
        lines.append(result.embedding)
    _emit(args, result, "\n".join(lines))
    return 0


def cmd_render(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    curves = [parse_walk(surface, args.curve)]
    if args.curve2 is not None:
        curves.append(parse_walk(surface, args.curve2))
    q, walks = on_quad_system(surface, curves)
    if len(walks) == 1:
        _, immersion = minimal_immersion(q, walks[0])
    else:
        immersion = Immersion.initial(q, [canonicalize(q, w) for w in walks])

    options = RenderOptions.from_config(config)
    if args.seed is not None:
        options.seed = args.seed
    if args.scale is not None:
        options.scale = args.scale
    svg = render_svg(q, immersion, options)
    if args.out:
        Path(args.out).write_text(svg)
        print(f"Wrote {args.out}")
    else:
        print(svg)
    return 0


def cmd_oracle(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    surface = load_any_surface(args.surface)
    c = parse_walk(surface, args.curve)
    d = parse_walk(surface, args.curve2) if args.curve2 is not None else None
    q, walks = on_quad_system(surface, [c] if d is None else [c, d])
    budget = OracleBudget.from_config(config)
    if d is None:
        computed = self_intersection_number(q, walks[0], allow_boundary=True)
        oracle = brute_force_intersection(q, walks[0], None, budget)
    else:
        computed = intersection_number(q, walks[0], walks[1], allow_boundary=True)
        oracle = brute_force_intersection(q, walks[0], walks[1], budget)
    result = OracleResult(
        computed=computed,
        oracle=oracle,
        agree=computed == oracle,
        geodesics=len(enumerate_homotopic_geodesics(q, walks[0], budget)),
    )
    _emit(
        args,
        result,
        f"computed: {computed}\noracle: {oracle}\nagree: {'yes' if result.agree else 'no'}",
    )
    return 0 if result.agree else 1


def cmd_fixtures(args: argparse.Namespace, config: CurveCrossConfig) -> int:
    for path in write_fixtures(Path(args.out or "fixtures")):
        print(f"Created: {path}")
    return 0


COMMANDS = {
    "canonicalize": (cmd_canonicalize, "Canonical form of a curve"),
    "root": (cmd_root, "Primitive root and multiplicity"),
    "homotopic": (cmd_homotopic, "Free homotopy test of two curves"),
    "intersect": (cmd_intersect, "Intersection number of two curves"),
    "selfintersect": (cmd_selfintersect, "Self-intersection number of a curve"),
    "immersion": (cmd_immersion, "Minimally crossing immersion of a curve"),
    "is-simple": (cmd_is_simple, "Whether a curve is homotopic to a simple curve"),
    "embed": (cmd_embed, "Embedding of a simple curve"),
    "render": (cmd_render, "SVG drawing of an immersion"),
    "oracle": (cmd_oracle, "Brute-force cross-check of intersection numbers"),
    "fixtures": (cmd_fixtures, "Regenerate the bundled fixtures"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvecross", description="Intersection numbers of curves on surfaces"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        command = sub.add_parser(name, help=help_text)
        if name == "fixtures":
            command.add_argument("--out", help="Output directory (default: fixtures)")
            continue
        command.add_argument("-s", "--surface", required=True, help="Surface file (.srf, .quads)")
        command.add_argument("-c", "--curve", required=True, help="Curve as signed edge ids")
        command.add_argument("-c2", "--curve2", help="Second curve as signed edge ids")
        command.add_argument("--json", action="store_true", help="Print JSON output")
        if name in ("intersect", "selfintersect"):
            command.add_argument(
                "--oracle", action="store_true", help="Also run the brute-force oracle"
            )
        if name == "render":
            command.add_argument("--out", help="SVG output file (default: stdout)")
            command.add_argument("--seed", type=int, help="Layout seed")
            command.add_argument("--scale", type=float, help="Picture size in pixels")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run a subcommand and return its exit status.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        0 on success, 1 on a domain error, 2 on a usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    config = load_config()
    level = getattr(logging, config.log_level, logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    handler, _ = COMMANDS[args.command]
    try:
        return handler(args, config)
    except (CurveCrossError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

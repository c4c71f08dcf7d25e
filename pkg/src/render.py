"""
Render Module

Draws a combinatorial immersion as an SVG picture: one disk per vertex,
one strand per arc occurrence running between the disks, and straight
chords inside the disks joining consecutive occurrences of each curve.
Two chords of a disk intersect exactly when the passages they draw cross.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import drawsvg as draw
import networkx as nx

from src.config import CurveCrossConfig
from src.errors import InternalInvariantError, PreconditionError
from src.immersion import Immersion, Passage, crossings
from src.surface import CombinatorialSurface

# Configure logging
logger = logging.getLogger(__name__)

Point = tuple[float, float]

CURVE_COLORS = ("#1f5fa8", "#c2571a")


@dataclass
class RenderOptions:
    """Layout and styling of a rendering."""

    seed: int = 7
    scale: float = 400.0
    margin: float = 40.0
    disk_fraction: float = 0.18  # disk radius over the shortest vertex distance
    mark_crossings: bool = True

    @classmethod
    def from_config(cls, config: CurveCrossConfig) -> "RenderOptions":
        return cls(seed=config.render_seed, scale=config.render_scale)


@dataclass
class Layout:
    """Vertex centres and the common disk radius, in picture coordinates."""

    centers: dict[int, Point]
    radius: float
    width: float
    height: float


def compute_layout(q: CombinatorialSurface, options: RenderOptions) -> Layout:
    """
    Force-directed placement of the vertices of q.

    Args:
        q: Surface
        options: Seed, scale and margin

    Returns:
        Layout with disks small enough not to overlap
    """
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(q.vertex_count))
    for arc in range(0, q.arc_count, 2):
        graph.add_edge(q.origin(arc), q.target(arc))
    raw = nx.spring_layout(graph, seed=options.seed)

    centers = {
        v: (
            options.margin + options.scale * (float(raw[v][0]) + 1.0) / 2.0,
            options.margin + options.scale * (float(raw[v][1]) + 1.0) / 2.0,
        )
        for v in graph.nodes
    }
    if len(centers) == 1:
        radius = options.scale * options.disk_fraction
    else:
        shortest = min(
            math.dist(centers[u], centers[v]) for u in centers for v in centers if u < v
        )
        if shortest <= 1e-9:
            raise PreconditionError("Layout placed two vertices at the same point")
        radius = shortest * options.disk_fraction
    size = options.scale + 2 * options.margin
    return Layout(centers, radius, size, size)


def _end_points(immersion: Immersion, layout: Layout) -> dict[tuple[int, int, bool], Point]:
    """Points on the disk boundaries where every occurrence starts and ends."""
    q = immersion.surface
    positions = immersion.end_positions()
    totals = {
        v: sum(len(immersion.orders[arc >> 1]) for arc in q.rotations[v])
        for v in range(q.vertex_count)
    }
    points: dict[tuple[int, int, bool], Point] = {}
    for key, rank in positions.items():
        curve, index, at_start = key
        arc = immersion.curves[curve].arcs[index]
        vertex = q.origin(arc) if at_start else q.target(arc)
        cx, cy = layout.centers[vertex]
        # clockwise on screen, whose y axis points down
        angle = 2 * math.pi * (rank + 0.5) / totals[vertex]
        points[key] = (cx + layout.radius * math.cos(angle), cy + layout.radius * math.sin(angle))
    return points


def _chord_segment(
    immersion: Immersion, points: dict[tuple[int, int, bool], Point], passage: Passage
) -> tuple[Point, Point]:
    curve, index = passage
    n = len(immersion.curves[curve])
    return points[(curve, (index - 1) % n, False)], points[(curve, index, True)]


def _orientation(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(s: tuple[Point, Point], t: tuple[Point, Point]) -> Optional[Point]:
    (p1, p2), (p3, p4) = s, t
    d1, d2 = _orientation(p3, p4, p1), _orientation(p3, p4, p2)
    d3, d4 = _orientation(p1, p2, p3), _orientation(p1, p2, p4)
    if (d1 > 0) == (d2 > 0) or (d3 > 0) == (d4 > 0):
        return None
    ratio = d1 / (d1 - d2)
    return (p1[0] + ratio * (p2[0] - p1[0]), p1[1] + ratio * (p2[1] - p1[1]))


def chord_intersections(immersion: Immersion, layout: Layout) -> list[Point]:
    """Intersection points of the chords drawn inside every disk."""
    points = _end_points(immersion, layout)
    found: list[Point] = []
    for passages in immersion.passages().values():
        segments = [_chord_segment(immersion, points, p) for p in passages]
        for a in range(len(segments)):
            for b in range(a + 1, len(segments)):
                hit = _segments_cross(segments[a], segments[b])
                if hit is not None:
                    found.append(hit)
    return found


def _edge_bends(q: CombinatorialSurface) -> dict[int, float]:
    """Signed bend of every edge so that parallel edges fan out."""
    groups: dict[tuple[int, int], list[int]] = {}
    for edge in range(q.edge_count):
        u, v = q.origin(2 * edge), q.target(2 * edge)
        groups.setdefault((min(u, v), max(u, v)), []).append(edge)
    bends: dict[int, float] = {}
    for members in groups.values():
        m = len(members)
        for rank, edge in enumerate(members):
            bends[edge] = rank - (m - 1) / 2
    return bends


def _strand_path(
    start: Point, end: Point, bend: float, loop: bool, radius: float, color: str
) -> draw.Path:
    mx, my = (start[0] + end[0]) / 2, (start[1] + end[1]) / 2
    dx, dy = end[0] - start[0], end[1] - start[1]
    length = math.hypot(dx, dy) or 1.0
    offset = (bend * 0.35 * length) if not loop else (3 + abs(bend)) * radius
    cx, cy = mx - dy / length * offset, my + dx / length * offset
    path = draw.Path(fill="none", stroke=color, stroke_width=1.2)
    return path.M(*start).Q(cx, cy, *end)


def render_svg(
    q: CombinatorialSurface, immersion: Immersion, options: Optional[RenderOptions] = None
) -> str:
    """
    SVG drawing of an immersion of at most two curves.

    The chord intersections are recounted geometrically and must match
    the crossings of the immersion.

    Args:
        q: Surface carrying the immersion
        immersion: Immersion to draw
        options: Layout and styling

    Returns:
        SVG document text
    """
    options = options or RenderOptions()
    if len(immersion.curves) > 2:
        raise PreconditionError("Rendering supports at most two curves")
    layout = compute_layout(q, options)
    hits = chord_intersections(immersion, layout)
    expected = len(crossings(q, immersion))
    if len(hits) != expected:
        raise InternalInvariantError(
            f"Drawing shows {len(hits)} chord intersections for {expected} crossings"
        )

    d = draw.Drawing(layout.width, layout.height)
    d.append(draw.Rectangle(0, 0, layout.width, layout.height, fill="white"))
    for v, (x, y) in layout.centers.items():
        d.append(draw.Circle(x, y, layout.radius, fill="#f3f3f7", stroke="#555", stroke_width=1))
        d.append(
            draw.Text(q.vertex_names[v], 11, x, y - layout.radius - 4, text_anchor="middle")
        )

    points = _end_points(immersion, layout)
    bends = _edge_bends(q)
    for k, curve in enumerate(immersion.curves):
        color = CURVE_COLORS[k % len(CURVE_COLORS)]
        for index, arc in enumerate(curve.arcs):
            start, end = points[(k, index, True)], points[(k, index, False)]
            edge = arc >> 1
            # parallel edges bend by their rank along the even arc
            bend = bends[edge] if arc % 2 == 0 else -bends[edge]
            loop = q.origin(arc) == q.target(arc)
            d.append(_strand_path(start, end, bend, loop, layout.radius, color))
        for index in range(len(curve)):
            (x1, y1), (x2, y2) = _chord_segment(immersion, points, (k, index))
            d.append(draw.Line(x1, y1, x2, y2, stroke=color, stroke_width=1.2))

    if options.mark_crossings:
        for x, y in hits:
            d.append(draw.Circle(x, y, 2.5, fill="#d62728"))
    occurrences = sum(len(c) for c in immersion.curves)
    logger.info(f"Rendered {occurrences} occurrences, {expected} crossings")
    return d.as_svg()

"""
Immersion Module

Combinatorial immersions of closed walks: per-edge left-to-right orders of
arc occurrences, crossing detection, monogon and bigon search, bigon swaps
and the computation of a minimally crossing immersion.
"""

import logging
import re
from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import networkx as nx

from src.diagram import PairKind, enumerate_partial_diagrams
from src.errors import InternalInvariantError, PreconditionError, WalkError
from src.surface import (
    CombinatorialSurface,
    QuadSystem,
    SurfaceKind,
    quadify,
    reduce_surface,
    transport_walk,
)
from src.walk import (
    Walk,
    canonicalize,
    is_geodesic,
    primitive_root,
    validate_walk,
)

# Configure logging
logger = logging.getLogger(__name__)

# (curve, index) of a passage of a curve through its vertex c(index)
Passage = tuple[int, int]


@dataclass(frozen=True)
class Occurrence:
    """Arc occurrence [index, index+1] of a curve on its supporting edge."""

    curve: int
    index: int
    direction: int  # +1 along the edge's reference arc, -1 against it


@dataclass(frozen=True)
class IndexPath:
    """Index path <start, direction * length> of curve 0."""

    start: int
    length: int
    direction: int = 1

    def occurrences(self, n: int) -> list[int]:
        if self.direction == 1:
            return [(self.start + p) % n for p in range(self.length)]
        return [(self.start - 1 - p) % n for p in range(self.length)]

    def end(self, n: int) -> int:
        return (self.start + self.direction * self.length) % n


@dataclass(frozen=True)
class Bigon:
    """Two homotopic index paths whose tips are crossings."""

    first: IndexPath
    second: IndexPath

    def tips(self, n: int) -> tuple[tuple[int, int], tuple[int, int]]:
        return (
            (self.first.start % n, self.second.start % n),
            (self.first.end(n), self.second.end(n)),
        )


@dataclass
class Immersion:
    """
    Left-to-right order of the arc occurrences on every edge.

    `orders[e]` lists the occurrences on edge e as seen along its even arc;
    the odd arc reads the same list backwards.
    """

    surface: CombinatorialSurface
    curves: list[Walk]
    orders: list[list[Occurrence]]
    swap_history: list[tuple[int, int]] = field(default_factory=list)

    @classmethod
    def initial(cls, q: CombinatorialSurface, curves: list[Walk]) -> "Immersion":
        """Occurrences in curve-index order on every edge."""
        orders: list[list[Occurrence]] = [[] for _ in range(q.edge_count)]
        for k, c in enumerate(curves):
            validate_walk(q, c)
            for idx, arc in enumerate(c.arcs):
                orders[arc >> 1].append(Occurrence(k, idx, 1 if arc % 2 == 0 else -1))
        return cls(q, list(curves), orders)

    def copy(self) -> "Immersion":
        return Immersion(
            self.surface,
            list(self.curves),
            [list(seq) for seq in self.orders],
            list(self.swap_history),
        )

    def violations(self) -> list[str]:
        """Occurrences missing, repeated or on the wrong edge."""
        problems: list[str] = []
        seen: set[tuple[int, int]] = set()
        for edge, seq in enumerate(self.orders):
            for occ in seq:
                key = (occ.curve, occ.index)
                if key in seen:
                    problems.append(f"occurrence {key} listed twice")
                seen.add(key)
                if not 0 <= occ.curve < len(self.curves) or not (
                    0 <= occ.index < len(self.curves[occ.curve])
                ):
                    problems.append(f"occurrence {key} is not on a registered curve")
                    continue
                arc = self.curves[occ.curve].arcs[occ.index]
                if arc >> 1 != edge or occ.direction != (1 if arc % 2 == 0 else -1):
                    problems.append(f"occurrence {key} sits on the wrong edge or direction")
        expected = sum(len(c) for c in self.curves)
        if len(seen) != expected:
            problems.append(f"{len(seen)} occurrences listed, {expected} expected")
        return problems

    def slots(self) -> dict[Passage, tuple[int, int]]:
        return {
            (occ.curve, occ.index): (edge, rank)
            for edge, seq in enumerate(self.orders)
            for rank, occ in enumerate(seq)
        }

    def end_positions(self) -> dict[tuple[int, int, bool], int]:
        """
        Rank of every occurrence end in the clockwise order around its vertex.

        Keys are (curve, index, at_start); an occurrence is seen from its
        start at c(index) and from its end at c(index+1).
        """
        q = self.surface
        offset = [0] * q.arc_count
        for cycle in q.rotations:
            running = 0
            for arc in cycle:
                offset[arc] = running
                running += len(self.orders[arc >> 1])
        positions: dict[tuple[int, int, bool], int] = {}
        for edge, seq in enumerate(self.orders):
            m = len(seq)
            for rank, occ in enumerate(seq):
                arc = 2 * edge if occ.direction == 1 else 2 * edge + 1
                for at_start, block in ((True, arc), (False, arc ^ 1)):
                    within = rank if block % 2 == 0 else m - 1 - rank
                    positions[(occ.curve, occ.index, at_start)] = offset[block] + within
        return positions

    def passages(self) -> dict[int, list[Passage]]:
        """Passages of every curve grouped by vertex."""
        by_vertex: dict[int, list[Passage]] = {}
        for k, c in enumerate(self.curves):
            for idx in range(len(c)):
                by_vertex.setdefault(c.vertex(self.surface, idx), []).append((k, idx))
        return by_vertex

    def chord(
        self, positions: dict[tuple[int, int, bool], int], passage: Passage
    ) -> tuple[int, int]:
        k, idx = passage
        n = len(self.curves[k])
        return positions[(k, (idx - 1) % n, False)], positions[(k, idx, True)]


def _interleaved(first: tuple[int, int], second: tuple[int, int]) -> bool:
    lo, hi = sorted(first)
    return (lo < second[0] < hi) != (lo < second[1] < hi)


def crossings(q: CombinatorialSurface, immersion: Immersion) -> list[tuple[Passage, Passage]]:
    """
    Every double point whose two strands interleave around their vertex.

    Args:
        q: Surface carrying the immersion
        immersion: Immersion of one or two curves

    Returns:
        Sorted pairs of passages (curve, index)
    """
    positions = immersion.end_positions()
    found: list[tuple[Passage, Passage]] = []
    for passages in immersion.passages().values():
        chords = [(p, immersion.chord(positions, p)) for p in passages]
        for a in range(len(chords)):
            for b in range(a + 1, len(chords)):
                if _interleaved(chords[a][1], chords[b][1]):
                    first, second = chords[a][0], chords[b][0]
                    found.append((first, second) if first < second else (second, first))
    found.sort()
    return found


def crossing_count(q: CombinatorialSurface, immersion: Immersion) -> int:
    return len(crossings(q, immersion))


def format_immersion(q: CombinatorialSurface, immersion: Immersion) -> str:
    """One `edge <id>: occ(curve,index,dir) ...` line per edge, left to right."""
    lines = []
    for edge, seq in enumerate(immersion.orders):
        occs = " ".join(f"occ({o.curve},{o.index},{o.direction:+d})" for o in seq)
        lines.append(f"edge {q.edge_ids[edge]}: {occs}".rstrip())
    return "\n".join(lines)


_OCC = re.compile(r"occ\((\d+),(\d+),([+-]1)\)")


def parse_immersion(q: CombinatorialSurface, curves: list[Walk], text: str) -> Immersion:
    """
    Read the text produced by format_immersion.

    Args:
        q: Surface
        curves: Curves the occurrences refer to
        text: Immersion text

    Returns:
        Validated Immersion
    """
    orders: list[list[Occurrence]] = [[] for _ in range(q.edge_count)]
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, body = line.partition(":")
        parts = head.split()
        if len(parts) != 2 or parts[0] != "edge":
            raise WalkError(f"Line {line_no}: expected 'edge <id>: ...'")
        try:
            edge = q.edge_ids.index(int(parts[1]))
        except ValueError:
            raise WalkError(f"Line {line_no}: unknown edge {parts[1]!r}") from None
        for match in _OCC.finditer(body):
            orders[edge].append(
                Occurrence(int(match.group(1)), int(match.group(2)), int(match.group(3)))
            )
    immersion = Immersion(q, list(curves), orders)
    problems = immersion.violations()
    if problems:
        raise WalkError(f"Invalid immersion: {problems[0]}")
    return immersion


# =============================================================================
# Monogons and bigons
# =============================================================================


def find_monogon(q: CombinatorialSurface, c: Walk, immersion: Immersion) -> Optional[IndexPath]:
    """
    A self-crossing of curve 0 cutting off a contractible loop.

    Args:
        q: Quad system
        c: Closed walk registered as curve 0
        immersion: Immersion of c

    Returns:
        IndexPath of the contractible loop, or None
    """
    n = len(c)
    if n == 0:
        return None
    for (k1, i), (k2, j) in crossings(q, immersion):
        if k1 or k2:
            continue
        for start, length in ((i, (j - i) % n), (j, (i - j) % n)):
            loop = Walk(tuple(c.arc(start + m) for m in range(length)), True)
            if canonicalize(q, loop).is_trivial:
                return IndexPath(start, length)
    return None


def _cyclic_order(values: list[int]) -> bool:
    """Whether distinct values appear in this circular order (or its opposite)."""
    if len(set(values)) != len(values):
        return False
    m = len(values)
    forward = sum(values[t] > values[(t + 1) % m] for t in range(m))
    backward = sum(values[t] < values[(t + 1) % m] for t in range(m))
    return forward == 1 or backward == 1


def _is_singular(immersion: Immersion, n: int, bigon: Bigon) -> bool:
    first, second = bigon.first, bigon.second
    if set(first.occurrences(n)) & set(second.occurrences(n)):
        return False
    positions = immersion.end_positions()

    def back(x: int) -> int:
        return positions[(0, (x - 1) % n, False)]

    def fwd(x: int) -> int:
        return positions[(0, x % n, True)]

    i, ell = first.start % n, first.length
    j = second.start % n
    k = second.direction * second.length
    if j == (i + ell) % n:
        pattern = [back(i), back(j), fwd(i), fwd(j + k), fwd(j), back(j + k)]
        if _cyclic_order(pattern):
            return False
    if i == (j + k) % n:
        pattern = [back(i), back(j), back(i + ell), fwd(i), fwd(i + ell), fwd(j)]
        if _cyclic_order(pattern):
            return False
    return True


def bigons(q: CombinatorialSurface, c: Walk, immersion: Immersion) -> list[Bigon]:
    """
    Bigons of a primitive geodesic immersion, shortest first.

    Each maximal partial diagram contributes every pair of its same-vertex
    index pairs that are crossings.
    """
    n = len(c)
    crossing_set = {frozenset(pair) for pair in crossings(q, immersion)}
    found: list[tuple[int, int, Bigon]] = []
    for order, diagram in enumerate(enumerate_partial_diagrams(q, c)):
        tips = [
            (k, a, b)
            for k, (a, b, config) in enumerate(diagram.pairs(n))
            if config.kind is PairKind.SAME and frozenset(((0, a), (0, b))) in crossing_set
        ]
        for x in range(len(tips)):
            for y in range(x + 1, len(tips)):
                k1, a, b = tips[x]
                length = tips[y][0] - k1
                bigon = Bigon(IndexPath(a, length), IndexPath(b, length, diagram.epsilon))
                found.append((length, order, bigon))
    found.sort(key=lambda item: (item[0], item[1]))
    return [bigon for _, _, bigon in found]


def find_singular_bigon(
    q: CombinatorialSurface, c: Walk, immersion: Immersion
) -> Optional[Bigon]:
    """
    A bigon whose sides can be swapped, or None when the immersion is minimal.

    Args:
        q: Quad system
        c: Primitive geodesic closed walk registered as curve 0
        immersion: Immersion of c

    Returns:
        The shortest singular Bigon found, or None
    """
    _check_primitive_geodesic(q, c)
    n = len(c)
    for bigon in bigons(q, c, immersion):
        if _is_singular(immersion, n, bigon):
            return bigon
    return None


def count_bigons_with_distinct_tips(q: CombinatorialSurface, c: Walk, immersion: Immersion) -> int:
    """Largest number of bigons whose tips are pairwise distinct crossings."""
    graph = nx.Graph()
    n = len(c)
    for bigon in bigons(q, c, immersion):
        start, end = bigon.tips(n)
        first, second = frozenset(start), frozenset(end)
        if first != second:
            graph.add_edge(first, second)
    return len(nx.max_weight_matching(graph, maxcardinality=True))


def _check_primitive_geodesic(q: CombinatorialSurface, c: Walk) -> None:
    if not c.closed or c.is_trivial:
        raise PreconditionError("Bigon search needs a non-trivial closed walk")
    if not is_geodesic(q, c):
        raise PreconditionError("Bigon search needs a geodesic curve")
    _, multiplicity = primitive_root(q, canonicalize(q, c))
    if multiplicity != 1:
        raise PreconditionError(f"Curve is a proper power (multiplicity {multiplicity})")


def swap_bigon(
    q: CombinatorialSurface, c: Walk, immersion: Immersion, bigon: Bigon
) -> tuple[Walk, Immersion]:
    """
    Exchange the two sides of a singular bigon.

    Paired occurrences swap their arcs and their slots in the edge orders,
    so a flat bigon only exchanges orders while a staircase bigon reroutes
    each side along the other.

    Args:
        q: Quad system
        c: Curve 0 of the immersion
        immersion: Immersion of c
        bigon: Singular bigon

    Returns:
        Tuple of (new curve, new immersion) with at least two fewer crossings
    """
    n = len(c)
    if not _is_singular(immersion, n, bigon):
        raise PreconditionError("Only singular bigons can be swapped")
    before = crossing_count(q, immersion)
    arcs = list(c.arcs)
    swapped = immersion.copy()
    slots = swapped.slots()
    flip = 0 if bigon.second.direction == 1 else 1
    for x, y in zip(bigon.first.occurrences(n), bigon.second.occurrences(n)):
        (ex, rx), (ey, ry) = slots[(0, x)], slots[(0, y)]
        arcs[x], arcs[y] = arcs[y] ^ flip, arcs[x] ^ flip
        swapped.orders[ex][rx] = Occurrence(0, y, 1 if arcs[y] % 2 == 0 else -1)
        swapped.orders[ey][ry] = Occurrence(0, x, 1 if arcs[x] % 2 == 0 else -1)
    walk = Walk(tuple(arcs), True)
    validate_walk(q, walk)
    swapped.curves = [walk]
    after = crossing_count(q, swapped)
    if after > before - 2:
        raise InternalInvariantError(f"Bigon swap went from {before} to {after} crossings")
    swapped.swap_history.append((before, after))
    logger.debug(f"Swapped a bigon of length {bigon.first.length}: {before} -> {after} crossings")
    return walk, swapped


# =============================================================================
# Minimal immersions
# =============================================================================


def power_immersion(root_immersion: Immersion, p: int) -> tuple[Walk, Immersion]:
    """
    Immersion of d^p from an immersion of d.

    Each strand is duplicated p times, copies running side by side to the
    right of the previous one; the only new crossings are the p - 1 created
    where copy r hands over to copy r+1.
    """
    (root,) = root_immersion.curves
    m = len(root)
    orders: list[list[Occurrence]] = []
    for seq in root_immersion.orders:
        expanded: list[Occurrence] = []
        for occ in seq:
            copies = range(p) if occ.direction == 1 else reversed(range(p))
            expanded.extend(Occurrence(0, r * m + occ.index, occ.direction) for r in copies)
        orders.append(expanded)
    walk = root.power(p)
    return walk, Immersion(
        root_immersion.surface, [walk], orders, list(root_immersion.swap_history)
    )


# =============================================================================
# Low-genus immersions
# =============================================================================


def _reduced_torus(
    surface: CombinatorialSurface,
) -> tuple[CombinatorialSurface, dict[int, int]]:
    """The one-vertex torus left by reduce_surface, with the map from its kept arcs."""
    reduction = reduce_surface(surface)
    kept = sorted(reduction.kept_arcs)
    if len(kept) != 4:
        raise InternalInvariantError(f"Torus reduced to {len(kept) // 2} loops instead of 2")
    rank = {arc: new for new, arc in enumerate(kept)}
    reduced = CombinatorialSurface(
        vertex_of=(0, 0, 0, 0),
        next_around_vertex=tuple(rank[reduction.next_around[arc]] for arc in kept),
        vertex_names=(surface.vertex_names[0],),
        edge_ids=(surface.edge_ids[kept[0] >> 1], surface.edge_ids[kept[2] >> 1]),
    )
    return reduced, rank


def _straight_torus_immersion(surface: CombinatorialSurface, c: Walk) -> tuple[Walk, Immersion]:
    """
    A straight curve homotopic to c on the reduced torus, drawn without
    superfluous crossings.

    At the single vertex the rotation reads north, east, south, west. The
    primitive direction (e, n) is walked along its Christoffel word and each
    occurrence is placed on its edge by how far the straight line sits to
    its right.
    """
    from src.counting import torus_arc_classes, torus_classes

    x, y = torus_classes(surface, c)
    g = gcd(x, y)
    reduced, rank = _reduced_torus(surface)
    if g == 0:
        trivial = Walk((), True, 0)
        return trivial, Immersion.initial(reduced, [trivial])

    classes = torus_arc_classes(surface)
    old = {new: arc for arc, new in rank.items()}
    north = 0
    east = reduced.rotate(north, 1)
    px, py = x // g, y // g
    e = px * classes[old[east]][0] + py * classes[old[east]][1]
    n = px * classes[old[north]][0] + py * classes[old[north]][1]
    step_e = east if e >= 0 else east ^ 1
    step_n = north if n >= 0 else north ^ 1
    width = abs(e) + abs(n)
    sign = 1 if n * (1 if e >= 0 else -1) >= 0 else -1

    arcs: list[int] = []
    heights: list[int] = []
    i = j = 0
    for _ in range(width):
        h = n * i - e * j
        heights.append(h)
        if e != 0 and (n == 0 or sign * h + abs(n) < width):
            arcs.append(step_e)
            i += 1 if e > 0 else -1
        else:
            arcs.append(step_n)
            j += 1 if n > 0 else -1
    if (i, j) != (e, n):
        raise InternalInvariantError(f"Christoffel walk ended at {(i, j)} instead of {(e, n)}")

    root = Walk(tuple(arcs), True, 0)
    orders: list[list[Occurrence]] = [[] for _ in range(reduced.edge_count)]
    for idx in sorted(range(width), key=lambda k: -heights[k]):
        arc = arcs[idx]
        orders[arc >> 1].append(Occurrence(0, idx, 1 if arc % 2 == 0 else -1))
    for seq in orders:
        # listed left to right along the step; the edge order reads the even arc
        if seq and seq[0].direction == -1:
            seq.reverse()
    immersion = Immersion(reduced, [root], orders)
    if g > 1:
        return power_immersion(immersion, g)
    return root, immersion


def _cylinder_core_immersion(surface: CombinatorialSurface, c: Walk) -> tuple[Walk, Immersion]:
    """
    A boundary walk of the cylinder, traversed as often as c winds around it.

    Every occurrence hugs the boundary face, so the core itself is embedded.
    """
    from src.counting import cylinder_winding

    p = cylinder_winding(surface, c)
    if p == 0:
        trivial = Walk((), True, surface.origin(c.arcs[0]) if c.arcs else c.basepoint)
        return trivial, Immersion.initial(surface, [trivial])
    face = next(f for f, perforated in enumerate(surface.face_perforated) if perforated)
    core = Walk(surface.face_walks[face], True)
    winding = cylinder_winding(surface, core)
    if abs(winding) != 1:
        raise InternalInvariantError(f"Boundary of a cylinder winds {winding} times")
    if (winding > 0) != (p > 0):
        core = core.inverse()

    orders: list[list[Occurrence]] = [[] for _ in range(surface.edge_count)]
    for idx, arc in enumerate(core.arcs):
        occ = Occurrence(0, idx, 1 if arc % 2 == 0 else -1)
        face_on_left = surface.face_of[arc] == face
        if face_on_left == (arc % 2 == 0):
            orders[arc >> 1].insert(0, occ)
        else:
            orders[arc >> 1].append(occ)
    immersion = Immersion(surface, [core], orders)
    if abs(p) > 1:
        return power_immersion(immersion, abs(p))
    return core, immersion


def minimal_immersion(surface: CombinatorialSurface, c: Walk) -> tuple[Walk, Immersion]:
    """
    A geodesic homotopic to c together with a minimally crossing immersion.

    Tori and cylinders are not quadified. A torus curve is drawn straight on
    the reduced one-vertex torus; a cylinder curve is a power of a boundary
    walk.

    Args:
        surface: Source surface (quadified first) or quad system
        c: Closed walk

    Returns:
        Tuple of (geodesic walk on the quad system, its immersion)
    """
    from src.counting import self_intersection_number

    if not c.closed:
        raise PreconditionError("Immersions are built for closed walks")
    if not isinstance(surface, QuadSystem) and surface.kind is not SurfaceKind.HYPERBOLIC:
        validate_walk(surface, c)
        if surface.kind is SurfaceKind.TORUS:
            current, immersion = _straight_torus_immersion(surface, c)
        elif surface.kind is SurfaceKind.CYLINDER:
            current, immersion = _cylinder_core_immersion(surface, c)
        else:
            current = Walk((), True, surface.origin(c.arcs[0]) if c.arcs else c.basepoint)
            immersion = Immersion.initial(surface, [current])
        final = crossing_count(immersion.surface, immersion)
        expected = self_intersection_number(surface, c, allow_boundary=True)
        if final != expected:
            raise InternalInvariantError(
                f"{surface.kind.value.capitalize()} immersion has {final} crossings, "
                f"intersection number is {expected}"
            )
        logger.info(f"Minimal immersion on a {surface.kind.value}: {final} crossings")
        return current, immersion
    if isinstance(surface, QuadSystem):
        q: CombinatorialSurface = surface
        validate_walk(q, c)
        walk = c
    else:
        q, transport = quadify(surface)
        walk = transport_walk(transport, c)

    canonical = canonicalize(q, walk)
    if canonical.is_trivial:
        return canonical, Immersion.initial(q, [canonical])
    root, p = primitive_root(q, canonical)

    current = root
    immersion = Immersion.initial(q, [root])
    initial = crossing_count(q, immersion)
    while True:
        bigon = find_singular_bigon(q, current, immersion)
        if bigon is None:
            break
        current, immersion = swap_bigon(q, current, immersion, bigon)
    logger.info(
        f"Minimal immersion of the root: {initial} -> {crossing_count(q, immersion)} crossings "
        f"in {len(immersion.swap_history)} swaps"
    )

    if p > 1:
        current, immersion = power_immersion(immersion, p)
    final = crossing_count(q, immersion)
    expected = self_intersection_number(q, canonical, allow_boundary=True)
    if final != expected:
        raise InternalInvariantError(
            f"Minimal immersion has {final} crossings, intersection number is {expected}"
        )
    return current, immersion

"""
Counting Module

Geometric intersection and self-intersection numbers of closed curves:
double paths, crossing classification, the three crossing sets read off the
annular diagram, primitive-power formulas and the low-genus special cases.
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from math import gcd
from typing import Iterator, Optional, Union

from src.diagram import AnnularDiagram, Strip, annular_diagram, build_strip
from src.errors import InternalInvariantError, PreconditionError
from src.surface import (
    CombinatorialSurface,
    CurveTransport,
    QuadSystem,
    SurfaceKind,
    quadify,
    reduce_surface,
    transport_walk,
)
from src.walk import (
    Walk,
    canonicalize,
    freely_homotopic,
    is_canonical,
    primitive_root,
    validate_walk,
)

# Configure logging
logger = logging.getLogger(__name__)

SurfaceLike = Union[CombinatorialSurface, QuadSystem]


@dataclass(frozen=True)
class DoublePath:
    """
    Forward index paths <i, length> of c and <j, length> of d with equal images.

    A double path of length 0 is a double point.
    """

    i: int
    j: int
    length: int
    epsilon: int = 1
    maximal: bool = True


@dataclass
class CrossingSets:
    """The crossing double paths counted by the pair intersection number."""

    d_plus: list[DoublePath] = field(default_factory=list)
    d_zero: list[DoublePath] = field(default_factory=list)
    d_minus: list[DoublePath] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.d_plus) + len(self.d_zero) + len(self.d_minus)


# =============================================================================
# Double paths
# =============================================================================


def maximal_double_paths(
    q: CombinatorialSurface, c: Walk, d: Walk, same_curve: bool = False
) -> list[DoublePath]:
    """
    All maximal forward double paths of two canonical curves.

    Double points are looked up per vertex and grown along their diagonal of
    the index grid, so the grid itself is never built.

    Args:
        q: Quad system
        c: First canonical closed walk
        d: Second canonical closed walk
        same_curve: Whether d is c itself (index pairs (i, i) are skipped)

    Returns:
        DoublePaths sorted by (i, j)

    Curves that agree along a full period (c and d powers of a common curve,
    or d a rotation of c) give no full-period double path: a pair of indices
    where the walks agree for len(c) + len(d) arcs agrees forever, so its
    preceding arcs match too and the pair is not a start. Such pairs are
    skipped like (i, i) with same_curve.

    Raises:
        PreconditionError: Either walk is open
        InternalInvariantError: A run outlasts len(c) + len(d) arcs
    """
    if not (c.closed and d.closed):
        raise PreconditionError("Double paths are defined for closed walks")
    if c.is_trivial or d.is_trivial:
        return []
    n, m = len(c), len(d)
    by_vertex: dict[int, list[int]] = {}
    for j in range(m):
        by_vertex.setdefault(d.vertex(q, j), []).append(j)

    paths: list[DoublePath] = []
    for i in range(n):
        for j in by_vertex.get(c.vertex(q, i), ()):
            if same_curve and i == j:
                continue
            if c.arc(i - 1) == d.arc(j - 1):
                continue
            length = 0
            while c.arc(i + length) == d.arc(j + length):
                length += 1
                if length >= n + m:
                    raise InternalInvariantError(
                        f"Double path from ({i}, {j}) outlasts both periods"
                    )
            paths.append(DoublePath(i, j, length))
    return paths


def _clockwise(q: CombinatorialSurface, x: int, y: int, z: int) -> bool:
    """Whether x, y, z appear in this clockwise order around their origin."""
    d = q.degree(q.origin(x))
    return (q.position[y] - q.position[x]) % d < (q.position[z] - q.position[x]) % d


def classify_crossing(q: CombinatorialSurface, c: Walk, d: Walk, dp: DoublePath) -> bool:
    """
    Whether a maximal double path is a crossing double path.

    Positive length: the arcs entering the shared path and those leaving it
    wind the same way at both ends. Length 0: the four arcs at the double
    point are pairwise distinct and interleaved.

    Args:
        q: Quad system
        c: First curve
        d: Second curve
        dp: Maximal double path of (c, d)

    Returns:
        True for a crossing double path
    """
    i, j, length = dp.i, dp.j, dp.length
    c_in, d_in = c.arc(i - 1) ^ 1, d.arc(j - 1) ^ 1
    if length == 0:
        c_out, d_out = c.arc(i), d.arc(j)
        if len({c_in, d_in, c_out, d_out}) != 4:
            return False
        return _clockwise(q, c_in, d_in, c_out) != _clockwise(q, c_in, d_out, c_out)
    first = _clockwise(q, c_in, d_in, c.arc(i))
    last = _clockwise(q, c.arc(i + length), d.arc(j + length), c.arc(i + length - 1) ^ 1)
    return first == last


# =============================================================================
# Crossing sets
# =============================================================================


def _in_d_zero(diagram: AnnularDiagram, d: Walk, dp: DoublePath) -> bool:
    left = diagram.left
    i, j = dp.i, dp.j
    if diagram.is_coincident(i) and (d.arc(j - 1) == left.arc(i - 1) or d.arc(j) == left.arc(i)):
        return True
    for spoke in diagram.spokes_at_right(i):
        if d.arc(j - 1) ^ 1 == spoke.arc and d.arc(j - 2) == left.arc(spoke.left_index - 1):
            return True
        if d.arc(j) == spoke.arc and d.arc(j + 1) == left.arc(spoke.left_index):
            return True
    return False


def _excluded_from_d_minus(diagram: AnnularDiagram, d: Walk, dp: DoublePath) -> bool:
    """Situations where a crossing with c_L^-1 was already counted on the right side."""
    right = diagram.right
    n = len(right)
    j, length = dp.j, dp.length
    # index i of c_L^-1 sits on index -i of c_L
    start = (-dp.i) % n
    end = (-(dp.i + length)) % n
    if diagram.is_coincident(start) and d.arc(j - 1) == right.arc(start - 1):
        return True
    if diagram.is_coincident(end) and d.arc(j + length) == right.arc(end):
        return True
    for spoke in diagram.spokes_at_left(start):
        if d.arc(j - 1) == spoke.arc and d.arc(j - 2) == right.arc(spoke.right_index - 1):
            return True
    for spoke in diagram.spokes_at_left(end):
        if d.arc(j + length) == spoke.arc ^ 1 and d.arc(j + length + 1) == right.arc(
            spoke.right_index
        ):
            return True
    return False


def _index_pairs(d: Walk) -> dict[tuple[int, int], list[int]]:
    """Indices j of d grouped by (arc back from d(j), arc out of d(j))."""
    pairs: dict[tuple[int, int], list[int]] = defaultdict(list)
    arcs = d.arcs
    for j in range(len(arcs)):
        pairs[(arcs[j - 1] ^ 1, arcs[j])].append(j)
    return pairs


def crossing_lifts(strip: Strip, d: Walk) -> Iterator[tuple[int, int, int]]:
    """
    Lifts of d that cross the strip between c_R and c_L, one per class.

    A lift meets the strip in a single path, so it is found once, at the node
    where it enters from an outer region; it crosses when it leaves into the
    other one.

    Args:
        strip: Strip of the primitive curve c
        d: Canonical closed walk

    Yields:
        (entry node, index of d at the entry, number of steps inside)

    Raises:
        InternalInvariantError: A lift stays in the strip for longer than any
            path between its boundaries can
    """
    arcs = d.arcs
    m = len(arcs)
    if m == 0:
        return
    pairs = _index_pairs(d)
    edges, exterior = strip.edges, strip.exterior
    limit = 2 * strip.n * m + 1
    for node, back, out, side in strip.entries:
        for j in pairs.get((back, out), ()):
            here, k, steps = edges[node][out], j + 1, 1
            arc = arcs[k % m]
            nxt = edges[here].get(arc)
            while nxt is not None:
                here, k, steps = nxt, k + 1, steps + 1
                if steps > limit:
                    raise InternalInvariantError(f"Lift of d entering node {node} never leaves")
                arc = arcs[k % m]
                nxt = edges[here].get(arc)
            if exterior[here][arc] is not side:
                yield node, j, steps
    for node, back, out in strip.passes:
        for j in pairs.get((back, out), ()):
            yield node, j, 0


class CrossingKind(str, Enum):
    PLUS = "D+"
    ZERO = "D0"
    MINUS = "D-"


def _first_run(steps: list[tuple[int, int]]) -> tuple[int, int, int]:
    (i, k), length = steps[0], 1
    while length < len(steps) and steps[length][1] == k + length:
        length += 1
    return i, k, length


def attribute_lift(
    strip: Strip, diagram: AnnularDiagram, d: Walk, node: int, j: int, steps: int
) -> tuple[CrossingKind, DoublePath]:
    """
    The crossing double path standing for one crossing lift.

    A lift running along c_R is a positive-length double path with c_R. One
    that reaches c_R only at a vertex and runs forward along c_L without
    running back along c_R is a double point of c_R. All others are double
    paths with c_L^-1, read at index -i of c_L.

    Args:
        strip: Strip of c
        diagram: Annular diagram the strip was built from
        d: Canonical closed walk
        node: Entry node returned by crossing_lifts
        j: Entry index of d
        steps: Steps inside the strip

    Returns:
        (set the lift is counted in, its representative double path)
    """
    right, left = diagram.right, diagram.left
    n, m = strip.n, len(d)
    forward_right: list[tuple[int, int]] = []
    backward_left: list[tuple[int, int]] = []
    forward_left = backward_right = False
    first_right: Optional[tuple[int, int]] = None
    first_left: Optional[tuple[int, int]] = None
    here = node
    for k in range(j, j + steps + 1):
        ri, li = strip.right_index(here), strip.left_index(here)
        if ri is not None and first_right is None:
            first_right = (ri, k)
        if li is not None and first_left is None:
            first_left = (li, k)
        if k == j + steps:
            break
        arc = d.arc(k)
        if ri is not None and arc == right.arc(ri):
            forward_right.append((ri, k))
        if ri is not None and arc == right.arc(ri - 1) ^ 1:
            backward_right = True
        if li is not None and arc == left.arc(li):
            forward_left = True
        if li is not None and arc == left.arc(li - 1) ^ 1:
            backward_left.append((li, k))
        here = strip.edges[here][arc]

    if forward_right:
        i, k, length = _first_run(forward_right)
        return CrossingKind.PLUS, DoublePath(i, k % m, length)
    if forward_left and not backward_right:
        if first_right is None:
            raise InternalInvariantError(f"Crossing lift at index {j} never meets c_R")
        return CrossingKind.ZERO, DoublePath(first_right[0], first_right[1] % m, 0)
    if backward_left:
        li, k, length = _first_run(backward_left)
        return CrossingKind.MINUS, DoublePath((-li) % n, k % m, length, epsilon=-1)
    if first_left is None:
        raise InternalInvariantError(f"Crossing lift at index {j} never meets c_L")
    return CrossingKind.MINUS, DoublePath((-first_left[0]) % n, first_left[1] % m, 0, epsilon=-1)


def crossing_sets(q: CombinatorialSurface, diagram: AnnularDiagram, d: Walk) -> CrossingSets:
    """
    Classify the lifts of d crossing the strip of c into D+, D0 and D-.

    Each crossing lift is counted exactly once, by the double path
    attribute_lift picks for it. A representative that fails the crossing
    test or the D0/D- clauses is logged and still counted.

    Args:
        q: Quad system
        diagram: Annular diagram of the primitive curve c
        d: Canonical primitive closed walk (may be c itself)

    Returns:
        CrossingSets whose total is the pair intersection number
    """
    if not is_canonical(q, d) or d.is_trivial:
        raise PreconditionError("crossing_sets needs a non-trivial canonical curve d")
    strip = build_strip(q, diagram)
    right, left_inverse = diagram.right, diagram.left.inverse()
    sets = CrossingSets()
    for node, j, steps in crossing_lifts(strip, d):
        kind, dp = attribute_lift(strip, diagram, d, node, j, steps)
        if kind is CrossingKind.PLUS:
            consistent = classify_crossing(q, right, d, dp)
            sets.d_plus.append(dp)
        elif kind is CrossingKind.ZERO:
            consistent = classify_crossing(q, right, d, dp) and _in_d_zero(diagram, d, dp)
            sets.d_zero.append(dp)
        else:
            consistent = classify_crossing(q, left_inverse, d, dp) and not _excluded_from_d_minus(
                diagram, d, dp
            )
            sets.d_minus.append(dp)
        if not consistent:
            logger.warning(f"{kind.value} representative {dp} fails its membership clauses")

    representatives = sets.d_plus + sets.d_zero
    if len(set(representatives)) != len(representatives):
        raise InternalInvariantError("D+ and D0 overlap")
    logger.debug(
        f"Crossing sets: |D+|={len(sets.d_plus)}, |D0|={len(sets.d_zero)}, "
        f"|D-|={len(sets.d_minus)}"
    )
    return sets


@lru_cache(maxsize=128)
def _cached_strip(q: CombinatorialSurface, arcs: tuple[int, ...]) -> Strip:
    return build_strip(q, annular_diagram(q, Walk(arcs, True)))


def pair_crossing_count(q: CombinatorialSurface, c: Walk, d: Walk) -> int:
    """|D+| + |D0| + |D-| for two primitive canonical curves, counted as crossing lifts."""
    strip = _cached_strip(q, canonicalize(q, c).arcs)
    return sum(1 for _ in crossing_lifts(strip, canonicalize(q, d)))


# =============================================================================
# Power formulas
# =============================================================================


def power_self_intersection(p: int, i: int) -> int:
    """Self-intersection number of the p-th power of a primitive curve with i(c) = i."""
    if p < 1:
        raise PreconditionError(f"Power must be positive, got {p}")
    return p * p * i + p - 1


def power_pair_intersection(p: int, q: int, i_c: int, i_cd: int, homotopic: bool) -> int:
    """
    Intersection number of c^p and d^q for primitive c, d.

    Args:
        p: Power of c
        q: Power of d
        i_c: Self-intersection number of c
        i_cd: Intersection number of c and d
        homotopic: Whether c is homotopic to d or to its inverse

    Returns:
        2pq i(c) when homotopic, pq i(c, d) otherwise
    """
    if p < 1 or q < 1:
        raise PreconditionError(f"Powers must be positive, got {p} and {q}")
    return 2 * p * q * i_c if homotopic else p * q * i_cd


# =============================================================================
# Low-genus cases
# =============================================================================


@lru_cache(maxsize=16)
def torus_arc_classes(surface: CombinatorialSurface) -> tuple[tuple[int, int], ...]:
    """
    Homology class of every arc in the basis of the two loops left by reduction.

    Deleted edges are put back in reverse order; each one closes a face whose
    boundary is null-homologous, which fixes its class.
    """
    reduction = reduce_surface(surface)
    kept = sorted(reduction.kept_arcs)
    if len(kept) != 4:
        raise InternalInvariantError(f"Torus reduced to {len(kept) // 2} loops instead of 2")
    classes: dict[int, tuple[int, int]] = {}
    for arc, value in zip(kept, ((1, 0), (-1, 0), (0, 1), (0, -1))):
        classes[arc] = value

    nxt = list(reduction.next_around)
    prv = [0] * len(nxt)
    for arc in reduction.kept_arcs:
        prv[nxt[arc]] = arc
    for op in reversed(reduction.operations):
        if op.kind != "delete":
            continue
        after = nxt[op.prev_arc]
        nxt[op.prev_arc], prv[op.arc] = op.arc, op.prev_arc
        nxt[op.arc], prv[after] = after, op.arc
        if op.arc & 1:
            continue
        # both arcs of the edge are back: the face left of it is closed
        x = y = 0
        walker = nxt[op.arc ^ 1]
        while walker != op.arc:
            dx, dy = classes[walker]
            x, y = x + dx, y + dy
            walker = nxt[walker ^ 1]
        classes[op.arc] = (-x, -y)
        classes[op.arc ^ 1] = (x, y)

    return tuple(classes.get(arc, (0, 0)) for arc in range(surface.arc_count))


def torus_classes(surface: CombinatorialSurface, c: Walk) -> tuple[int, int]:
    """
    Homology coordinates (x, y) of a closed walk on a torus.

    Args:
        surface: Closed surface of Euler characteristic 0
        c: Closed walk on the surface

    Returns:
        Tuple (x, y) with c homotopic to alpha^x beta^y
    """
    if surface.kind is not SurfaceKind.TORUS:
        raise PreconditionError(f"torus_classes needs a torus, got a {surface.kind.value}")
    validate_walk(surface, c)
    classes = torus_arc_classes(surface)
    x = sum(classes[a][0] for a in c.arcs)
    y = sum(classes[a][1] for a in c.arcs)
    return x, y


@lru_cache(maxsize=16)
def _cylinder_dual_path(surface: CombinatorialSurface) -> tuple[int, ...]:
    """Arcs crossed (left face to right face) by a shortest dual path between the boundaries."""
    boundaries = [f for f, perforated in enumerate(surface.face_perforated) if perforated]
    source, goal = boundaries
    back: dict[int, int] = {source: -1}
    queue = deque([source])
    while queue and goal not in back:
        face = queue.popleft()
        for arc in surface.face_walks[face]:
            other = surface.face_of[arc ^ 1]
            if other not in back:
                back[other] = arc
                queue.append(other)
    if goal not in back:
        raise InternalInvariantError("The two boundaries of a cylinder are not joined")
    crossed: list[int] = []
    face = goal
    while face != source:
        arc = back[face]
        crossed.append(arc)
        face = surface.face_of[arc]
    return tuple(reversed(crossed))


def cylinder_winding(surface: CombinatorialSurface, c: Walk) -> int:
    """Signed number of times a closed walk winds around a cylinder."""
    if surface.kind is not SurfaceKind.CYLINDER:
        raise PreconditionError(f"cylinder_winding needs a cylinder, got a {surface.kind.value}")
    validate_walk(surface, c)
    crossed = _cylinder_dual_path(surface)
    forward = set(crossed)
    backward = {arc ^ 1 for arc in crossed}
    return sum(1 for a in c.arcs if a in forward) - sum(1 for a in c.arcs if a in backward)


# =============================================================================
# Pipeline
# =============================================================================


@lru_cache(maxsize=16)
def _quadified(surface: CombinatorialSurface) -> tuple[QuadSystem, CurveTransport]:
    return quadify(surface)


def _to_quad_system(
    surface: SurfaceLike, curves: tuple[Walk, ...], allow_boundary: bool
) -> tuple[CombinatorialSurface, list[Walk]]:
    if surface.boundary_count and not allow_boundary:
        raise PreconditionError(
            "Counting on surfaces with perforated faces is experimental; enable "
            "CURVECROSS_EXPERIMENTAL_BOUNDARY to allow it"
        )
    if isinstance(surface, QuadSystem):
        for c in curves:
            validate_walk(surface, c)
        return surface, list(curves)
    q, transport = _quadified(surface)
    return q, [transport_walk(transport, c) for c in curves]


def _special_case_kind(surface: SurfaceLike) -> bool:
    return not isinstance(surface, QuadSystem) and surface.kind is not SurfaceKind.HYPERBOLIC


def self_intersection_number(
    surface: SurfaceLike, c: Walk, allow_boundary: bool = False
) -> int:
    """
    Minimum number of self-crossings over all curves homotopic to c.

    Args:
        surface: Source surface or quad system carrying c
        c: Closed walk
        allow_boundary: Accept surfaces with perforated faces

    Returns:
        Self-intersection number i(c)
    """
    if not c.closed:
        raise PreconditionError("Intersection numbers are defined for closed walks")
    if _special_case_kind(surface):
        return _low_genus_self(surface, c)
    q, (walk,) = _to_quad_system(surface, (c,), allow_boundary)
    canonical = canonicalize(q, walk)
    if canonical.is_trivial:
        return 0
    root, p = primitive_root(q, canonical)
    count = pair_crossing_count(q, root, root)
    if count % 2:
        raise InternalInvariantError(f"Crossing count of a curve with itself is odd ({count})")
    result = power_self_intersection(p, count // 2)
    logger.info(f"Self-intersection number {result} (root length {len(root)}, power {p})")
    return result


def intersection_number(
    surface: SurfaceLike, c: Walk, d: Walk, allow_boundary: bool = False
) -> int:
    """
    Minimum number of crossings between curves homotopic to c and d.

    Args:
        surface: Source surface or quad system carrying c and d
        c: First closed walk
        d: Second closed walk
        allow_boundary: Accept surfaces with perforated faces

    Returns:
        Intersection number i(c, d)
    """
    if not (c.closed and d.closed):
        raise PreconditionError("Intersection numbers are defined for closed walks")
    if _special_case_kind(surface):
        return _low_genus_pair(surface, c, d)
    q, (walk_c, walk_d) = _to_quad_system(surface, (c, d), allow_boundary)
    canonical_c, canonical_d = canonicalize(q, walk_c), canonicalize(q, walk_d)
    if canonical_c.is_trivial or canonical_d.is_trivial:
        return 0
    root_c, p = primitive_root(q, canonical_c)
    root_d, s = primitive_root(q, canonical_d)
    homotopic = freely_homotopic(q, root_c, root_d) or freely_homotopic(
        q, root_c, root_d.inverse()
    )
    if homotopic:
        own = pair_crossing_count(q, root_c, root_c) // 2
        result = power_pair_intersection(p, s, own, 0, True)
    else:
        result = power_pair_intersection(p, s, 0, pair_crossing_count(q, root_c, root_d), False)
    logger.info(f"Intersection number {result} (powers {p} and {s})")
    return result


def _low_genus_self(surface: CombinatorialSurface, c: Walk) -> int:
    validate_walk(surface, c)
    kind = surface.kind
    if kind is SurfaceKind.TORUS:
        x, y = torus_classes(surface, c)
        return max(gcd(x, y) - 1, 0)
    if kind is SurfaceKind.CYLINDER:
        return max(abs(cylinder_winding(surface, c)) - 1, 0)
    return 0


def _low_genus_pair(surface: CombinatorialSurface, c: Walk, d: Walk) -> int:
    validate_walk(surface, c)
    validate_walk(surface, d)
    if surface.kind is SurfaceKind.TORUS:
        x, y = torus_classes(surface, c)
        u, v = torus_classes(surface, d)
        return abs(x * v - y * u)
    return 0

"""
Diagram Module

The annular diagram between the rightmost and leftmost canonical forms of a
curve, its validation, and the enumeration of maximal partial diagrams
(thick double paths) of a curve with itself.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Optional

from src.errors import InternalInvariantError, PreconditionError
from src.surface import CombinatorialSurface
from src.walk import (
    Walk,
    _turns,
    canonicalize,
    flip_staircase,
    is_canonical,
    is_geodesic,
    primitive_root,
    push,
    validate_walk,
)

# Configure logging
logger = logging.getLogger(__name__)


class Tag(str, Enum):
    """How index i of the left boundary relates to index i of the right one."""

    COINCIDENT = "C"
    IN_STAIRCASE = "S"


@dataclass(frozen=True)
class Spoke:
    """Inner edge of the diagram, as an arc from R(right_index) to L(left_index)."""

    right_index: int
    left_index: int
    arc: int


@dataclass(frozen=True)
class AnnularDiagram:
    """
    Index-aligned rightmost (right) and leftmost (left) canonical curves.

    Unmoved indices are Coincident: both boundaries pass through the same
    vertex. Moved indices sit on a staircase of quads whose inner edges are
    listed as spokes.
    """

    right: Walk
    left: Walk
    tags: tuple[Tag, ...]
    spokes: tuple[Spoke, ...]
    closed_staircase: bool = False

    @cached_property
    def _spokes_by_right(self) -> dict[int, list[Spoke]]:
        index: dict[int, list[Spoke]] = defaultdict(list)
        for s in self.spokes:
            index[s.right_index].append(s)
        return dict(index)

    @cached_property
    def _spokes_by_left(self) -> dict[int, list[Spoke]]:
        index: dict[int, list[Spoke]] = defaultdict(list)
        for s in self.spokes:
            index[s.left_index].append(s)
        return dict(index)

    def spokes_at_right(self, i: int) -> list[Spoke]:
        return list(self._spokes_by_right.get(i % len(self.right), ()))

    def spokes_at_left(self, i: int) -> list[Spoke]:
        return list(self._spokes_by_left.get(i % len(self.left), ()))

    def is_coincident(self, i: int) -> bool:
        return self.tags[i % len(self.tags)] is Tag.COINCIDENT


def annular_diagram(q: CombinatorialSurface, c: Walk) -> AnnularDiagram:
    """
    Build the annular diagram of a non-contractible closed walk.

    The left boundary is obtained from the right one by pushing every +1 turn
    to the left in place, so indices stay aligned; each push records the
    inner edges it creates.

    Args:
        q: Quad system
        c: Closed walk (canonicalized first)

    Returns:
        AnnularDiagram with right = canonicalize(c)
    """
    if not c.closed:
        raise PreconditionError("Annular diagrams are built for closed walks")
    right = canonicalize(q, c)
    if right.is_trivial:
        raise PreconditionError("A contractible curve has no annular diagram")
    n = len(right)
    turns = _turns(q, right.arcs, True)

    if all(t == 2 for t in turns):
        flipped = flip_staircase(q, right.arcs, -1)
        left = [flipped[(j + 1) % n] for j in range(n)]
        spokes = [Spoke(i, (i - 1) % n, q.rotate(right.arcs[i], -1)) for i in range(n)]
        logger.debug(f"Curve of length {n} bounds a closed staircase")
        return AnnularDiagram(
            right=right,
            left=Walk(tuple(left), True),
            tags=tuple(Tag.IN_STAIRCASE for _ in range(n)),
            spokes=tuple(spokes),
            closed_staircase=True,
        )

    left = list(right.arcs)
    moved = [False] * n
    spokes: list[Spoke] = []
    for _ in range(2 * n + 2):
        left_turns = _turns(q, left, True)
        start = next((j for j in range(n) if left_turns[j] == 1), None)
        if start is None:
            break
        k = 0
        while k < n - 2 and left_turns[(start + 1 + k) % n] == 2:
            k += 1
        replaced = [left[(start - 1 + m) % n] for m in range(k + 2)]
        junctions = [(start + m) % n for m in range(k + 1)]
        if any(moved[j] for j in junctions):
            raise InternalInvariantError("A vertex of the right boundary moved twice")
        for m in range(1, k + 1):
            spokes.append(Spoke(junctions[m], (junctions[m] - 1) % n, q.rotate(replaced[m] ^ 1, 1)))
        if moved[(start - 1) % n]:
            spokes.append(Spoke(start, (start - 1) % n, replaced[0] ^ 1))
        if moved[(start + k + 1) % n]:
            spokes.append(Spoke(junctions[-1], (junctions[-1] + 1) % n, replaced[-1]))
        push(q, left, start, True, side=-1)
        for j in junctions:
            moved[j] = True
    else:
        raise InternalInvariantError("Left pushes did not terminate")

    diagram = AnnularDiagram(
        right=right,
        left=Walk(tuple(left), True),
        tags=tuple(Tag.IN_STAIRCASE if m else Tag.COINCIDENT for m in moved),
        spokes=tuple(sorted(spokes, key=lambda s: (s.right_index, s.left_index))),
    )
    logger.debug(
        f"Annular diagram: length {n}, {sum(moved)} staircase indices, {len(spokes)} spokes"
    )
    return diagram


def diagram_violations(q: CombinatorialSurface, diagram: AnnularDiagram) -> list[str]:
    """
    Every way in which `diagram` fails to be a valid annular diagram.

    Args:
        q: Quad system
        diagram: Diagram to check

    Returns:
        Human-readable diagnostics; empty when the diagram is valid
    """
    problems: list[str] = []
    right, left = diagram.right, diagram.left
    n = len(right)
    if len(left) != n or len(diagram.tags) != n:
        return [f"boundary lengths differ: {n} vs {len(left)} (tags {len(diagram.tags)})"]
    for name, walk in (("right", right), ("left", left)):
        try:
            validate_walk(q, walk)
        except ValueError as e:
            problems.append(f"{name} boundary is not a closed walk: {e}")
    if problems:
        return problems
    if not is_canonical(q, right):
        problems.append("right boundary is not canonical")
    if not is_geodesic(q, left) or 1 in _turns(q, left.arcs, True):
        problems.append("left boundary is not the leftmost geodesic")
    if diagram.closed_staircase and Tag.COINCIDENT in diagram.tags:
        problems.append("closed staircase with a coincident index")

    for i, tag in enumerate(diagram.tags):
        if tag is Tag.COINCIDENT and right.vertex(q, i) != left.vertex(q, i):
            problems.append(f"index {i} tagged coincident but boundaries differ")

    for spoke in diagram.spokes:
        i, j, arc = spoke.right_index, spoke.left_index, spoke.arc
        if not 0 <= arc < q.arc_count:
            problems.append(f"spoke {spoke} has no arc on the surface")
            continue
        if (j - i) % n not in (1, n - 1):
            problems.append(f"spoke {spoke} does not join neighbouring indices")
            continue
        if q.origin(arc) != right.vertex(q, i) or q.target(arc) != left.vertex(q, j):
            problems.append(f"spoke {spoke} has the wrong endpoints")
            continue
        if diagram.tags[i] is Tag.COINCIDENT and diagram.tags[j] is Tag.COINCIDENT:
            problems.append(f"spoke {spoke} joins two coincident indices")
        backward = (j - i) % n == n - 1 and _closes_backward_quad(q, diagram, spoke)
        forward = (j - i) % n == 1 and _closes_forward_quad(q, diagram, spoke)
        if not (backward or forward):
            problems.append(f"spoke {spoke} does not bound a quad with the left boundary")
    return problems


def _closes_backward_quad(q: CombinatorialSurface, diagram: AnnularDiagram, spoke: Spoke) -> bool:
    back = spoke.arc ^ 1
    return (
        q.face_next(diagram.left.arc(spoke.left_index) ^ 1) == back
        and len(q.face_walks[q.face_of[back]]) == 4
    )


def _closes_forward_quad(q: CombinatorialSurface, diagram: AnnularDiagram, spoke: Spoke) -> bool:
    return (
        q.face_next(spoke.arc) == diagram.left.arc(spoke.left_index - 1) ^ 1
        and len(q.face_walks[q.face_of[spoke.arc]]) == 4
    )


def verify_diagram(q: CombinatorialSurface, diagram: AnnularDiagram) -> bool:
    """Whether the diagram satisfies every structural rule."""
    problems = diagram_violations(q, diagram)
    for problem in problems:
        logger.debug(f"Diagram check: {problem}")
    return not problems


def format_diagram(q: CombinatorialSurface, diagram: AnnularDiagram) -> str:
    """Debug dump: one `i: C` or `i: S quad=<face> spoke=<edge>` line per index."""
    lines = []
    for i, tag in enumerate(diagram.tags):
        if tag is Tag.COINCIDENT:
            lines.append(f"{i}: C")
            continue
        quad = q.face_of[diagram.left.arc(i) ^ 1]
        at_left = diagram.spokes_at_left(i)
        spoke = str(q.signed_label(at_left[0].arc)) if at_left else "-"
        lines.append(f"{i}: S quad={quad} spoke={spoke}")
    return "\n".join(lines)


# =============================================================================
# Strip
# =============================================================================


class Side(str, Enum):
    """Outer region next to one boundary of the diagram."""

    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True)
class Strip:
    """
    The annular diagram as a graph whose lifts tile the strip between c_R and c_L.

    Nodes 0..n-1 are the vertices R(i) of the right boundary and nodes
    n..2n-1 the vertices L(i) of the left one; a coincident L(i) is merged
    into node i. Every arc leaving a node is either an edge of the diagram
    (`edges`) or points into one of the two outer regions (`exterior`).
    """

    n: int
    coincident: tuple[bool, ...]
    edges: tuple[dict[int, int], ...]
    exterior: tuple[dict[int, Side], ...]
    # (node, arc back, arc out, side of arc back): a walk enters the strip here
    entries: tuple[tuple[int, int, int, Side], ...]
    # (node, arc back, arc out): a walk crosses both boundaries at a coincident node
    passes: tuple[tuple[int, int, int], ...]

    def node(self, side: Side, i: int) -> int:
        return _node_id(self.coincident, side, i)

    def right_index(self, node: int) -> Optional[int]:
        return node if node < self.n else None

    def left_index(self, node: int) -> Optional[int]:
        if node >= self.n:
            return node - self.n
        return node if self.coincident[node] else None


def _node_id(coincident: tuple[bool, ...], side: Side, i: int) -> int:
    n = len(coincident)
    i %= n
    if side is Side.LEFT and not coincident[i]:
        return n + i
    return i


def _strictly_between(q: CombinatorialSurface, first: int, arc: int, last: int) -> bool:
    """Whether `arc` lies strictly inside the clockwise sector from `first` to `last`."""
    d = q.degree(q.origin(first))
    offset = (q.position[arc] - q.position[first]) % d
    return 0 < offset < (q.position[last] - q.position[first]) % d


def build_strip(q: CombinatorialSurface, diagram: AnnularDiagram) -> Strip:
    """
    Index the diagram for walking lifts of other curves through it.

    The right outer region at R(i) is the clockwise sector from c_R's
    outgoing arc to its incoming one; the left outer region at L(i) is the
    clockwise sector from c_L's incoming arc to its outgoing one. Arcs
    between the two are edges of the diagram.

    Args:
        q: Quad system
        diagram: Annular diagram

    Returns:
        Strip over the same indices

    Raises:
        InternalInvariantError: An arc inside the diagram is not one of its
            edges, or two edges at a node share a label
    """
    right, left = diagram.right, diagram.left
    n = len(right)
    coincident = tuple(diagram.is_coincident(i) for i in range(n))
    edges: list[dict[int, int]] = [{} for _ in range(2 * n)]

    def link(side: Side, i: int, arc: int, other_side: Side, j: int) -> None:
        node, other = _node_id(coincident, side, i), _node_id(coincident, other_side, j)
        for a, b, label in ((node, other, arc), (other, node, arc ^ 1)):
            if edges[a].setdefault(label, b) != b:
                raise InternalInvariantError(f"Two diagram edges labelled {label} leave node {a}")

    for i in range(n):
        link(Side.RIGHT, i, right.arc(i), Side.RIGHT, i + 1)
        link(Side.LEFT, i, left.arc(i), Side.LEFT, i + 1)
    for spoke in diagram.spokes:
        link(Side.RIGHT, spoke.right_index, spoke.arc, Side.LEFT, spoke.left_index)

    exterior: list[dict[int, Side]] = [{} for _ in range(2 * n)]
    entries: list[tuple[int, int, int, Side]] = []
    passes: list[tuple[int, int, int]] = []
    for node in range(2 * n):
        if node < n:
            ri: Optional[int] = node
            li: Optional[int] = node if coincident[node] else None
            vertex = right.vertex(q, node)
        elif coincident[node - n]:
            continue
        else:
            ri, li = None, node - n
            vertex = left.vertex(q, node - n)
        for arc in q.rotations[vertex]:
            if arc in edges[node]:
                continue
            if ri is not None and _strictly_between(q, right.arc(ri), arc, right.arc(ri - 1) ^ 1):
                exterior[node][arc] = Side.RIGHT
            elif li is not None and _strictly_between(q, left.arc(li - 1) ^ 1, arc, left.arc(li)):
                exterior[node][arc] = Side.LEFT
            else:
                raise InternalInvariantError(
                    f"Arc {arc} lies inside the diagram at node {node} but is not an edge"
                )
        for back, side in exterior[node].items():
            for out in edges[node]:
                entries.append((node, back, out, side))
            for out, other in exterior[node].items():
                if other is not side:
                    passes.append((node, back, out))

    logger.debug(f"Strip: {2 * n} nodes, {len(entries)} entry pairs, {len(passes)} passes")
    return Strip(n, coincident, tuple(edges), tuple(exterior), tuple(entries), tuple(passes))


# =============================================================================
# Partial diagrams
# =============================================================================


class PairKind(str, Enum):
    SAME = "same"
    OPPOSITE = "opposite"


@dataclass(frozen=True)
class PairConfiguration:
    """
    Relative position of the two walkers of a thick double path.

    SAME: both sit on the same vertex. OPPOSITE: they sit on opposite corners
    (`corner_p`, `corner_q`) of quad `face`.
    """

    kind: PairKind
    face: int = -1
    corner_p: int = -1
    corner_q: int = -1

    def swapped(self) -> "PairConfiguration":
        if self.kind is PairKind.SAME:
            return self
        return PairConfiguration(PairKind.OPPOSITE, self.face, self.corner_q, self.corner_p)


SAME_VERTEX = PairConfiguration(PairKind.SAME)


@dataclass(frozen=True)
class PartialDiagram:
    """
    Thick double path of a curve with itself.

    The index paths start at (i, j); the second one runs in direction
    `epsilon`. `configurations[k]` relates c(i+k) and c(j+epsilon*k).
    """

    i: int
    j: int
    epsilon: int
    configurations: tuple[PairConfiguration, ...]

    @property
    def length(self) -> int:
        return len(self.configurations) - 1

    def pairs(self, n: int) -> Iterator[tuple[int, int, PairConfiguration]]:
        for k, config in enumerate(self.configurations):
            yield (self.i + k) % n, (self.j + self.epsilon * k) % n, config

    @property
    def is_flat(self) -> bool:
        return all(config.kind is PairKind.SAME for config in self.configurations)


def _side_move(q: CombinatorialSurface, face: int, corner: int, arc: int) -> Optional[int]:
    """Corner reached by leaving `corner` along a side of `face`, if `arc` is one."""
    walk = q.face_walks[face]
    if walk[corner] == arc:
        return (corner + 1) % 4
    if walk[(corner - 1) % 4] ^ 1 == arc:
        return (corner - 1) % 4
    return None


def _cross_into(
    q: CombinatorialSurface, face: int, mover_corner: int, stayer_corner: int, stayer_arc: int
) -> Optional[tuple[int, int, int]]:
    """
    One walker moved along `face` to `mover_corner`; the other must cross the
    shared side into the neighbouring quad and reach the corner opposite.

    Returns:
        (new face, corner of the mover, corner of the stayer) or None
    """
    walk = q.face_walks[face]
    if mover_corner == (stayer_corner - 1) % 4:
        neighbour_arc = walk[mover_corner] ^ 1
        other = q.face_of[neighbour_arc]
        if q.face_perforated[other] or len(q.face_walks[other]) != 4:
            return None
        gamma = q.face_walks[other].index(neighbour_arc)
        other_walk = q.face_walks[other]
        if stayer_arc != other_walk[(gamma - 1) % 4] ^ 1:
            return None
        return other, (gamma + 1) % 4, (gamma - 1) % 4
    neighbour_arc = walk[stayer_corner] ^ 1
    other = q.face_of[neighbour_arc]
    if q.face_perforated[other] or len(q.face_walks[other]) != 4:
        return None
    gamma = q.face_walks[other].index(neighbour_arc)
    if stayer_arc != q.face_walks[other][(gamma + 1) % 4]:
        return None
    return other, gamma, (gamma + 2) % 4


def _step(
    q: CombinatorialSurface, config: PairConfiguration, a: int, b: int
) -> Optional[PairConfiguration]:
    """Configuration after the walkers follow arcs a and b, or None if they part."""
    if config.kind is PairKind.SAME:
        if a == b:
            return SAME_VERTEX
        if b == q.rotate(a, 1):
            face = q.face_of[b]
            gamma = q.face_walks[face].index(b)
            if q.face_perforated[face]:
                return None
            return PairConfiguration(PairKind.OPPOSITE, face, (gamma - 1) % 4, (gamma + 1) % 4)
        if a == q.rotate(b, 1):
            face = q.face_of[a]
            gamma = q.face_walks[face].index(a)
            if q.face_perforated[face]:
                return None
            return PairConfiguration(PairKind.OPPOSITE, face, (gamma + 1) % 4, (gamma - 1) % 4)
        return None

    face = config.face
    to_p = _side_move(q, face, config.corner_p, a)
    to_q = _side_move(q, face, config.corner_q, b)
    if to_p is not None and to_q is not None:
        return SAME_VERTEX if to_p == to_q else None
    if to_p is not None:
        crossed = _cross_into(q, face, to_p, config.corner_q, b)
        if crossed is None:
            return None
        return PairConfiguration(PairKind.OPPOSITE, crossed[0], crossed[1], crossed[2])
    if to_q is not None:
        crossed = _cross_into(q, face, to_q, config.corner_p, a)
        if crossed is None:
            return None
        return PairConfiguration(PairKind.OPPOSITE, crossed[0], crossed[2], crossed[1])
    return None


def _opposite_configurations(q: CombinatorialSurface, v: int) -> list[PairConfiguration]:
    """Every quad corner at v, paired with the opposite corner."""
    configs = []
    for arc in q.rotations[v]:
        face = q.face_of[arc]
        walk = q.face_walks[face]
        if q.face_perforated[face] or len(walk) != 4:
            continue
        gamma = walk.index(arc)
        configs.append(PairConfiguration(PairKind.OPPOSITE, face, gamma, (gamma + 2) % 4))
    return configs


def _forward_arcs(c: Walk, i: int, j: int, epsilon: int, k: int) -> tuple[int, int]:
    a = c.arc(i + k)
    b = c.arc(j + k) if epsilon == 1 else c.arc(j - k - 1) ^ 1
    return a, b


def _backward_arcs(c: Walk, i: int, j: int, epsilon: int, k: int) -> tuple[int, int]:
    a = c.arc(i - k - 1) ^ 1
    b = c.arc(j - k - 1) ^ 1 if epsilon == 1 else c.arc(j + k)
    return a, b


def _extend(
    q: CombinatorialSurface, c: Walk, i: int, j: int, epsilon: int,
    start: PairConfiguration, forward: bool, limit: int,
) -> list[PairConfiguration]:
    """Configurations reached from (i, j) while the walkers stay together."""
    reached: list[PairConfiguration] = []
    config = start
    arcs_at = _forward_arcs if forward else _backward_arcs
    for k in range(limit):
        a, b = arcs_at(c, i, j, epsilon, k)
        following = _step(q, config, a, b)
        if following is None:
            break
        reached.append(following)
        config = following
    return reached


def maximal_partial_diagrams(q: CombinatorialSurface, c: Walk) -> list[PartialDiagram]:
    """
    Every maximal thick double path of a primitive canonical curve with itself.

    Seeds are pairs of indices whose vertices coincide or face each other
    across a quad; each seed is grown backward then forward while the two
    walkers stay in one of the five allowed configurations. Mirror images
    (roles of the two index paths exchanged) are reported once.

    Args:
        q: Quad system
        c: Primitive canonical closed walk

    Returns:
        PartialDiagrams sorted by (i, j, epsilon)
    """
    if not c.closed or c.is_trivial:
        raise PreconditionError("Partial diagrams need a non-trivial closed walk")
    if not is_canonical(q, c):
        raise PreconditionError("Partial diagrams need a canonical curve")
    _, multiplicity = primitive_root(q, c)
    if multiplicity != 1:
        raise PreconditionError(f"Curve is a proper power (multiplicity {multiplicity})")
    return enumerate_partial_diagrams(q, c)


def enumerate_partial_diagrams(q: CombinatorialSurface, c: Walk) -> list[PartialDiagram]:
    """Maximal partial diagrams of a primitive geodesic curve, without input checks."""
    n = len(c)
    limit = n + 1
    by_vertex: dict[int, list[int]] = {}
    for idx in range(n):
        by_vertex.setdefault(c.vertex(q, idx), []).append(idx)

    seen: set[tuple[int, int, int, PairConfiguration]] = set()
    diagrams: list[PartialDiagram] = []
    for i in range(n):
        v = c.vertex(q, i)
        seeds: list[tuple[int, PairConfiguration]] = [
            (j, SAME_VERTEX) for j in by_vertex[v] if j != i
        ]
        for config in _opposite_configurations(q, v):
            facing = q.origin(q.face_walks[config.face][config.corner_q])
            seeds.extend((j, config) for j in by_vertex.get(facing, []) if j != i)
        for j, config in seeds:
            for epsilon in (1, -1):
                if (i, j, epsilon, config) in seen:
                    continue
                diagram = _grow(q, c, i, j, epsilon, config, limit)
                _record(diagram, n, seen)
                diagrams.append(diagram)
    diagrams.sort(key=lambda d: (d.i, d.j, d.epsilon))
    logger.debug(f"Found {len(diagrams)} maximal partial diagrams on a curve of length {n}")
    return diagrams


def _grow(
    q: CombinatorialSurface, c: Walk, i: int, j: int, epsilon: int,
    config: PairConfiguration, limit: int,
) -> PartialDiagram:
    n = len(c)
    backward = _extend(q, c, i, j, epsilon, config, forward=False, limit=limit)
    shift = len(backward)
    start_i = (i - shift) % n
    start_j = (j - epsilon * shift) % n
    configurations = list(reversed(backward)) + [config]
    configurations += _extend(
        q, c, i, j, epsilon, config, forward=True, limit=max(limit - shift, 0)
    )
    diagram = PartialDiagram(start_i, start_j, epsilon, tuple(configurations))
    keys = [(a, b, cfg) for a, b, cfg in diagram.pairs(n)]
    if len(set(keys)) != len(keys):
        raise InternalInvariantError(
            "A configuration repeats inside a partial diagram; is the curve primitive and geodesic?"
        )
    return diagram


def _record(
    diagram: PartialDiagram, n: int, seen: set[tuple[int, int, int, PairConfiguration]]
) -> None:
    for a, b, config in diagram.pairs(n):
        seen.add((a, b, diagram.epsilon, config))
        seen.add((b, a, diagram.epsilon, config.swapped()))

"""
Surface Module

Combinatorial surfaces given by a graph and a rotation system, their
validation, and the reduction to a system of quads together with the
transport of walks onto it.

Arc numbering: the k-th declared edge owns arcs 2k (from its first endpoint,
written +id) and 2k+1 (the reverse direction, written -id), so twin(a) = a ^ 1.
Rotations are clockwise. face_next(a) = next_around_vertex(twin(a)) and the
face of an arc lies to its left.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from src.errors import InternalInvariantError, PreconditionError, SurfaceError, WalkError

# Configure logging
logger = logging.getLogger(__name__)


def twin(arc: int) -> int:
    """Return the opposite arc of the same edge."""
    return arc ^ 1


class SurfaceKind(str, Enum):
    """Topological type of a connected orientable surface."""

    SPHERE = "sphere"
    DISK = "disk"
    CYLINDER = "cylinder"
    TORUS = "torus"
    HYPERBOLIC = "hyperbolic"


class _UnionFind:
    """Disjoint sets over 0..n-1 with path halving."""

    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[ry] = rx
        return True


# =============================================================================
# Surfaces
# =============================================================================


@dataclass(frozen=True)
class CombinatorialSurface:
    """
    A cellularly embedded graph described by its rotation system.

    Only the primary fields take part in equality and hashing; faces,
    inverse rotation and rotation ranks are derived on construction.
    """

    vertex_of: tuple[int, ...]
    next_around_vertex: tuple[int, ...]
    vertex_names: tuple[str, ...]
    edge_ids: tuple[int, ...]
    perforated_arcs: frozenset[int] = frozenset()

    prev_around_vertex: tuple[int, ...] = field(init=False, repr=False, compare=False)
    face_of: tuple[int, ...] = field(init=False, repr=False, compare=False)
    face_walks: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    face_perforated: tuple[bool, ...] = field(init=False, repr=False, compare=False)
    rotations: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    position: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        arc_count = len(self.vertex_of)
        if arc_count % 2:
            raise SurfaceError(f"Arc count must be even, got {arc_count}")
        if len(self.next_around_vertex) != arc_count:
            raise SurfaceError("Rotation and vertex tables differ in length")
        if len(self.edge_ids) * 2 != arc_count:
            raise SurfaceError("Edge id table does not match the arc count")
        if sorted(self.next_around_vertex) != list(range(arc_count)):
            raise SurfaceError("Rotation is not a permutation of the arcs")

        prev = [0] * arc_count
        for arc, nxt in enumerate(self.next_around_vertex):
            if self.vertex_of[nxt] != self.vertex_of[arc]:
                raise SurfaceError(f"Rotation moves arc {arc} to another vertex")
            prev[nxt] = arc

        # One rotation cycle per vertex, listed from its smallest arc
        rotations: list[Optional[tuple[int, ...]]] = [None] * len(self.vertex_names)
        position = [0] * arc_count
        for start in range(arc_count):
            vertex = self.vertex_of[start]
            if rotations[vertex] is not None:
                continue
            cycle = [start]
            arc = self.next_around_vertex[start]
            while arc != start:
                cycle.append(arc)
                arc = self.next_around_vertex[arc]
            for rank, member in enumerate(cycle):
                position[member] = rank
            rotations[vertex] = tuple(cycle)
        arcs_per_vertex = [0] * len(self.vertex_names)
        for vertex in self.vertex_of:
            arcs_per_vertex[vertex] += 1
        for vertex, cycle in enumerate(rotations):
            if cycle is not None and len(cycle) != arcs_per_vertex[vertex]:
                raise SurfaceError(
                    f"Rotation at vertex {self.vertex_names[vertex]} is not a single cycle"
                )

        face_of = [-1] * arc_count
        walks: list[tuple[int, ...]] = []
        for start in range(arc_count):
            if face_of[start] >= 0:
                continue
            walk = []
            arc = start
            while face_of[arc] < 0:
                face_of[arc] = len(walks)
                walk.append(arc)
                arc = self.next_around_vertex[arc ^ 1]
            walks.append(tuple(walk))

        for arc in self.perforated_arcs:
            if not 0 <= arc < arc_count:
                raise SurfaceError(f"Perforation marker names a nonexistent face (arc {arc})")
        perforated = [False] * len(walks)
        for arc in self.perforated_arcs:
            perforated[face_of[arc]] = True

        object.__setattr__(
            self,
            "perforated_arcs",
            frozenset(min(walk) for face, walk in enumerate(walks) if perforated[face]),
        )
        object.__setattr__(self, "prev_around_vertex", tuple(prev))
        object.__setattr__(self, "face_of", tuple(face_of))
        object.__setattr__(self, "face_walks", tuple(walks))
        object.__setattr__(self, "face_perforated", tuple(perforated))
        object.__setattr__(
            self, "rotations", tuple(cycle if cycle is not None else () for cycle in rotations)
        )
        object.__setattr__(self, "position", tuple(position))

    # -------------------------------------------------------------------------
    # Counts and topology
    # -------------------------------------------------------------------------

    @property
    def arc_count(self) -> int:
        return len(self.vertex_of)

    @property
    def edge_count(self) -> int:
        return len(self.vertex_of) // 2

    @property
    def vertex_count(self) -> int:
        return len(self.vertex_names)

    @property
    def face_count(self) -> int:
        # A lone vertex is the sphere with a single face
        return len(self.face_walks) if self.vertex_of else 1

    @property
    def boundary_count(self) -> int:
        return sum(self.face_perforated)

    @property
    def closed_euler_characteristic(self) -> int:
        """V - E + F with perforated faces filled in."""
        return self.vertex_count - self.edge_count + self.face_count

    @property
    def euler_characteristic(self) -> int:
        """Euler characteristic of the surface with perforated faces removed."""
        return self.closed_euler_characteristic - self.boundary_count

    @property
    def genus(self) -> int:
        return (2 - self.closed_euler_characteristic) // 2

    @property
    def kind(self) -> SurfaceKind:
        closed_chi = self.closed_euler_characteristic
        boundary = self.boundary_count
        if closed_chi == 2 and boundary <= 2:
            return (SurfaceKind.SPHERE, SurfaceKind.DISK, SurfaceKind.CYLINDER)[boundary]
        if closed_chi == 0 and boundary == 0:
            return SurfaceKind.TORUS
        return SurfaceKind.HYPERBOLIC

    # -------------------------------------------------------------------------
    # Local navigation
    # -------------------------------------------------------------------------

    def origin(self, arc: int) -> int:
        return self.vertex_of[arc]

    def target(self, arc: int) -> int:
        return self.vertex_of[arc ^ 1]

    def face_next(self, arc: int) -> int:
        return self.next_around_vertex[arc ^ 1]

    def face_prev(self, arc: int) -> int:
        return self.prev_around_vertex[arc] ^ 1

    def rotate(self, arc: int, steps: int) -> int:
        """Move `steps` corners clockwise around the origin of `arc`."""
        cycle = self.rotations[self.vertex_of[arc]]
        return cycle[(self.position[arc] + steps) % len(cycle)]

    def degree(self, vertex: int) -> int:
        return len(self.rotations[vertex])

    def is_perforated(self, face: int) -> bool:
        return self.face_perforated[face]

    # -------------------------------------------------------------------------
    # Labels
    # -------------------------------------------------------------------------

    def arc_for(self, signed_edge: int) -> int:
        """Map a signed edge id (+id / -id) to its arc."""
        try:
            k = self.edge_ids.index(abs(signed_edge))
        except ValueError:
            raise WalkError(f"Unknown edge id {abs(signed_edge)}") from None
        return 2 * k if signed_edge > 0 else 2 * k + 1

    def signed_label(self, arc: int) -> int:
        """Inverse of `arc_for`."""
        edge_id = self.edge_ids[arc >> 1]
        return -edge_id if arc & 1 else edge_id

    def vertex_index(self, name: str) -> int:
        try:
            return self.vertex_names.index(name)
        except ValueError:
            raise WalkError(f"Unknown vertex {name!r}") from None


@dataclass(frozen=True)
class QuadSystem(CombinatorialSurface):
    """
    A combinatorial surface whose non-perforated faces are quadrilaterals.

    Vertex 0 is the vertex left after contracting a spanning tree; every other
    vertex is the centre of a face of the reduced surface.
    """

    def turn(self, a1: int, a2: int) -> int:
        return turn(self, a1, a2)

    def invariant_violations(self) -> list[str]:
        """List every quad-system invariant that does not hold."""
        problems: list[str] = []
        for face, walk in enumerate(self.face_walks):
            if self.face_perforated[face]:
                continue
            if len(walk) != 4:
                problems.append(f"face {face} has length {len(walk)}")
            edges = [arc >> 1 for arc in walk]
            if len(set(edges)) != len(edges):
                problems.append(f"face {face} uses an edge twice")
        for arc in range(0, self.arc_count, 2):
            if (self.vertex_of[arc] == 0) == (self.vertex_of[arc + 1] == 0):
                problems.append(f"edge {self.edge_ids[arc >> 1]} breaks bipartiteness")
        boundary_vertices = {
            self.vertex_of[arc]
            for face, walk in enumerate(self.face_walks)
            if self.face_perforated[face]
            for arc in walk
        }
        for vertex in range(self.vertex_count):
            if vertex not in boundary_vertices and self.degree(vertex) < 8:
                problems.append(f"interior vertex {self.vertex_names[vertex]} has degree "
                                f"{self.degree(vertex)}")
        return problems


def turn(q: CombinatorialSurface, a1: int, a2: int) -> int:
    """
    Number of corners swept clockwise from a1 to a2 around their origin.

    Args:
        q: Surface (normally a quad system)
        a1: First arc
        a2: Second arc, leaving the same vertex

    Returns:
        Signed representative in (-d/2, d/2] where d is the vertex degree
    """
    if q.vertex_of[a1] != q.vertex_of[a2]:
        raise WalkError(f"Arcs {a1} and {a2} do not share their origin")
    d = len(q.rotations[q.vertex_of[a1]])
    t = (q.position[a2] - q.position[a1]) % d
    if 2 * t > d:
        t -= d
    return t


# =============================================================================
# Text format
# =============================================================================


@dataclass
class EdgeSpec:
    """One `edge <id> <v_from> <v_to>` declaration."""

    edge_id: int
    v_from: str
    v_to: str


@dataclass
class SurfaceDescription:
    """Parsed, not yet validated, surface text."""

    edges: list[EdgeSpec] = field(default_factory=list)
    rotations: dict[str, list[int]] = field(default_factory=dict)
    perforated: list[int] = field(default_factory=list)


def _parse_signed(token: str, line_no: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise SurfaceError(f"Line {line_no}: expected a signed edge id, got {token!r}") from None
    if value == 0:
        raise SurfaceError(f"Line {line_no}: edge id 0 is not allowed")
    return value


def parse_surface(text: str) -> SurfaceDescription:
    """
    Parse the line-oriented surface format.

    Args:
        text: Declarations `edge`, `rotation` and `perforated`, `#` comments

    Returns:
        SurfaceDescription ready for build_surface
    """
    description = SurfaceDescription()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        if keyword == "edge":
            if len(args) != 3:
                raise SurfaceError(f"Line {line_no}: edge needs <id> <v_from> <v_to>")
            edge_id = _parse_signed(args[0], line_no)
            if edge_id < 0:
                raise SurfaceError(f"Line {line_no}: edge ids must be positive")
            description.edges.append(EdgeSpec(edge_id, args[1], args[2]))
        elif keyword == "rotation":
            if not args:
                raise SurfaceError(f"Line {line_no}: rotation needs a vertex name")
            if args[0] in description.rotations:
                raise SurfaceError(f"Line {line_no}: second rotation for vertex {args[0]}")
            description.rotations[args[0]] = [_parse_signed(t, line_no) for t in args[1:]]
        elif keyword == "perforated":
            if len(args) != 1:
                raise SurfaceError(f"Line {line_no}: perforated needs one signed edge id")
            description.perforated.append(_parse_signed(args[0], line_no))
        else:
            raise SurfaceError(f"Line {line_no}: unknown declaration {keyword!r}")
    return description


def build_surface(description: SurfaceDescription) -> CombinatorialSurface:
    """
    Validate a parsed description and build the surface.

    Args:
        description: Parsed surface description

    Returns:
        CombinatorialSurface with faces and Euler characteristic available
    """
    edge_index: dict[int, int] = {}
    for k, edge in enumerate(description.edges):
        if edge.edge_id in edge_index:
            raise SurfaceError(f"Duplicate arc id {edge.edge_id}")
        edge_index[edge.edge_id] = k

    names: list[str] = []
    for edge in description.edges:
        for name in (edge.v_from, edge.v_to):
            if name not in names:
                names.append(name)
    for name in description.rotations:
        if name not in names:
            names.append(name)
    vertex_id = {name: i for i, name in enumerate(names)}

    arc_count = 2 * len(description.edges)
    vertex_of = [0] * arc_count
    for k, edge in enumerate(description.edges):
        vertex_of[2 * k] = vertex_id[edge.v_from]
        vertex_of[2 * k + 1] = vertex_id[edge.v_to]

    def arc_of(signed: int) -> int:
        if abs(signed) not in edge_index:
            raise SurfaceError(f"Unknown edge id {abs(signed)}")
        k = edge_index[abs(signed)]
        return 2 * k if signed > 0 else 2 * k + 1

    next_around = [-1] * arc_count
    for name, signed_arcs in description.rotations.items():
        cycle = [arc_of(s) for s in signed_arcs]
        for i, arc in enumerate(cycle):
            if vertex_of[arc] != vertex_id[name]:
                raise SurfaceError(
                    f"Arc {arc_of_label(arc, description)} does not leave vertex {name}"
                )
            if next_around[arc] != -1:
                raise SurfaceError(
                    f"Rotation not a permutation: arc {arc_of_label(arc, description)} listed twice"
                )
            next_around[arc] = cycle[(i + 1) % len(cycle)]
    missing = [arc for arc in range(arc_count) if next_around[arc] == -1]
    if missing:
        labels = ", ".join(str(arc_of_label(arc, description)) for arc in missing)
        raise SurfaceError(f"Rotation not a permutation: arcs {labels} never listed")

    if not description.edges and len(names) != 1:
        raise SurfaceError("A surface without edges must have exactly one vertex")

    surface = CombinatorialSurface(
        vertex_of=tuple(vertex_of),
        next_around_vertex=tuple(next_around),
        vertex_names=tuple(names),
        edge_ids=tuple(edge.edge_id for edge in description.edges),
        perforated_arcs=frozenset(arc_of(s) for s in description.perforated),
    )
    if not is_connected(surface):
        raise SurfaceError("Surface graph is not connected")
    logger.info(
        f"Built surface: V={surface.vertex_count} E={surface.edge_count} "
        f"F={surface.face_count} chi={surface.euler_characteristic} ({surface.kind.value})"
    )
    return surface


def arc_of_label(arc: int, description: SurfaceDescription) -> int:
    edge_id = description.edges[arc >> 1].edge_id
    return -edge_id if arc & 1 else edge_id


def is_connected(surface: CombinatorialSurface) -> bool:
    """Whether every vertex is reachable from vertex 0."""
    if surface.vertex_count == 0:
        return False
    seen = {0}
    queue = deque([0])
    while queue:
        vertex = queue.popleft()
        for arc in surface.rotations[vertex]:
            other = surface.target(arc)
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return len(seen) == surface.vertex_count


def format_surface(surface: CombinatorialSurface) -> str:
    """Render a surface in the text format read by parse_surface."""
    lines = []
    for k, edge_id in enumerate(surface.edge_ids):
        lines.append(
            f"edge {edge_id} {surface.vertex_names[surface.vertex_of[2 * k]]} "
            f"{surface.vertex_names[surface.vertex_of[2 * k + 1]]}"
        )
    for vertex, cycle in enumerate(surface.rotations):
        labels = " ".join(str(surface.signed_label(arc)) for arc in cycle)
        lines.append(f"rotation {surface.vertex_names[vertex]} {labels}".rstrip())
    for face, walk in enumerate(surface.face_walks):
        if surface.face_perforated[face]:
            lines.append(f"perforated {surface.signed_label(min(walk))}")
    return "\n".join(lines) + "\n"


def load_surface(path: Union[str, Path]) -> CombinatorialSurface:
    """
    Read and build a surface file.

    Args:
        path: Path to a `.srf` (or `.quads`) file

    Returns:
        Validated CombinatorialSurface
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Surface file not found: {path}")
    logger.info(f"Loading surface from: {path}")
    return build_surface(parse_surface(path.read_text()))


def load_quad_system(path: Union[str, Path]) -> "QuadSystem":
    """Read a `.quads` dump and check the quad-system invariants."""
    surface = load_surface(path)
    quads = as_quad_system(surface)
    problems = quads.invariant_violations()
    if problems:
        raise SurfaceError(f"Not a system of quads: {problems[0]}")
    return quads


def as_quad_system(surface: CombinatorialSurface) -> "QuadSystem":
    return QuadSystem(
        vertex_of=surface.vertex_of,
        next_around_vertex=surface.next_around_vertex,
        vertex_names=surface.vertex_names,
        edge_ids=surface.edge_ids,
        perforated_arcs=surface.perforated_arcs,
    )


# =============================================================================
# Reduction and quadification
# =============================================================================


@dataclass(frozen=True)
class EdgeOperation:
    """One step of the reduction: contraction or deletion of a source edge."""

    kind: str  # "contract" | "delete"
    edge: int
    arc: int = -1
    prev_arc: int = -1  # rotation predecessor of the removed arc, for deletions


@dataclass(frozen=True)
class SurfaceReduction:
    """Result of contracting a spanning tree and deleting a dual spanning forest."""

    surface: CombinatorialSurface
    operations: tuple[EdgeOperation, ...]
    kept_arcs: tuple[int, ...]
    next_around: tuple[int, ...]
    corner_rep: tuple[int, ...]

    @property
    def tree_edges(self) -> tuple[int, ...]:
        return tuple(op.edge for op in self.operations if op.kind == "contract")

    @property
    def deleted_edges(self) -> tuple[int, ...]:
        return tuple(op.edge for op in self.operations if op.kind == "delete")


def spanning_tree_arcs(surface: CombinatorialSurface) -> list[int]:
    """Breadth-first spanning tree from vertex 0, trying lower arcs first."""
    seen = {0}
    queue = deque([0])
    tree: list[int] = []
    while queue:
        vertex = queue.popleft()
        for arc in sorted(surface.rotations[vertex]):
            other = surface.target(arc)
            if other not in seen:
                seen.add(other)
                tree.append(arc)
                queue.append(other)
    return tree


def reduce_surface(surface: CombinatorialSurface) -> SurfaceReduction:
    """
    Contract a spanning tree, then delete edges between distinct faces.

    Corners are tracked by the arc that starts them (the corner of arc x sits
    between x and its clockwise successor). Every removal merges corners, so
    each source corner ends up inside exactly one corner of the reduced
    surface. Perforated faces are never merged.

    Args:
        surface: Connected combinatorial surface

    Returns:
        SurfaceReduction with a single vertex and one face per boundary
        component plus the merged non-perforated faces
    """
    nxt = list(surface.next_around_vertex)
    prv = list(surface.prev_around_vertex)
    alive = [True] * surface.arc_count
    corners = _UnionFind(surface.arc_count)
    operations: list[EdgeOperation] = []

    for arc in spanning_tree_arcs(surface):
        back = arc ^ 1
        p, n = prv[arc], nxt[arc]
        q, m = prv[back], nxt[back]
        corners.union(p, back)
        corners.union(q, arc)
        origin_single, target_single = n == arc, m == back
        if origin_single and target_single:
            raise InternalInvariantError("Tree contraction emptied the surface")
        if origin_single:
            nxt[q], prv[m] = m, q
        elif target_single:
            nxt[p], prv[n] = n, p
        else:
            nxt[p], prv[m] = m, p
            nxt[q], prv[n] = n, q
        alive[arc] = alive[back] = False
        operations.append(EdgeOperation("contract", arc >> 1, arc=arc))

    faces = _UnionFind(len(surface.face_walks))
    for edge in range(surface.edge_count):
        arc, back = 2 * edge, 2 * edge + 1
        if not alive[arc]:
            continue
        fa, fb = surface.face_of[arc], surface.face_of[back]
        if surface.face_perforated[fa] or surface.face_perforated[fb]:
            continue
        if not faces.union(fa, fb):
            continue
        for removed in (arc, back):
            p, n = prv[removed], nxt[removed]
            corners.union(p, removed)
            nxt[p], prv[n] = n, p
            alive[removed] = False
            operations.append(EdgeOperation("delete", edge, arc=removed, prev_arc=p))

    kept = tuple(arc for arc in range(surface.arc_count) if alive[arc])
    rep_of_root = {corners.find(arc): arc for arc in kept}
    if len(rep_of_root) != len(kept):
        raise InternalInvariantError("Two reduced corners were merged")
    corner_rep = tuple(rep_of_root.get(corners.find(x), -1) for x in range(surface.arc_count))
    if kept and -1 in corner_rep:
        raise InternalInvariantError("A source corner vanished during reduction")
    logger.debug(
        f"Reduced surface: {len(kept) // 2} edges kept, "
        f"{sum(op.kind == 'delete' for op in operations) // 2} deleted"
    )
    return SurfaceReduction(
        surface=surface,
        operations=tuple(operations),
        kept_arcs=kept,
        next_around=tuple(nxt),
        corner_rep=corner_rep,
    )


@dataclass(frozen=True)
class CurveTransport:
    """
    Maps walks on a source surface to homotopic walks on its quad system.

    A source arc is sent through the face on its left: out along the radial
    edge of the corner where it starts, back along the radial edge of the
    corner where it ends. Contracted tree arcs vanish.
    """

    source: CombinatorialSurface
    quad_system: QuadSystem
    operations: tuple[EdgeOperation, ...]
    corner_edge: tuple[int, ...]
    tree_edges: frozenset[int] = frozenset()

    def transport_arc(self, arc: int) -> tuple[int, ...]:
        src = self.source
        if (arc >> 1) in self.tree_edges:
            return ()
        if not src.face_perforated[src.face_of[arc]]:
            out_edge = self.corner_edge[src.prev_around_vertex[arc]]
            in_edge = self.corner_edge[arc ^ 1]
        elif not src.face_perforated[src.face_of[arc ^ 1]]:
            out_edge = self.corner_edge[arc]
            in_edge = self.corner_edge[src.prev_around_vertex[arc ^ 1]]
        else:
            raise WalkError(f"Arc {src.signed_label(arc)} runs between two boundary faces")
        if out_edge < 0 or in_edge < 0:
            raise InternalInvariantError(f"No radial edge for arc {src.signed_label(arc)}")
        return (2 * out_edge, 2 * in_edge + 1)


def quadify(surface: CombinatorialSurface) -> tuple[QuadSystem, CurveTransport]:
    """
    Build the system of quads of a surface with negative Euler characteristic.

    Args:
        surface: Connected surface with chi < 0

    Returns:
        Tuple of (quad system, transport from the source surface)
    """
    if surface.euler_characteristic >= 0:
        raise PreconditionError(
            f"quadify needs a negative Euler characteristic, got {surface.euler_characteristic}"
        )
    if surface.boundary_count:
        logger.warning("Quadifying a surface with perforated faces (experimental)")

    reduction = reduce_surface(surface)
    kept = reduction.kept_arcs
    nxt = reduction.next_around

    # Faces of the reduced surface
    reduced_face: dict[int, int] = {}
    reduced_walks: list[list[int]] = []
    for start in kept:
        if start in reduced_face:
            continue
        walk = []
        arc = start
        while arc not in reduced_face:
            reduced_face[arc] = len(reduced_walks)
            walk.append(arc)
            arc = nxt[arc ^ 1]
        reduced_walks.append(walk)
    boundary = [surface.face_perforated[surface.face_of[walk[0]]] for walk in reduced_walks]
    for arc in kept[::2]:
        if boundary[reduced_face[arc]] and boundary[reduced_face[arc ^ 1]]:
            raise PreconditionError(
                f"Edge {surface.edge_ids[arc >> 1]} separates two boundary faces"
            )

    # Radial edges, one per corner lying in a non-perforated face; the corner
    # of b lies in the face of its clockwise successor.
    radial: dict[int, int] = {}
    centre: dict[int, int] = {}
    for arc in kept:
        face = reduced_face[nxt[arc]]
        if boundary[face]:
            continue
        radial[arc] = len(radial)
        centre.setdefault(face, len(centre) + 1)

    edge_total = len(radial)
    vertex_of = [0] * (2 * edge_total)
    next_around = [0] * (2 * edge_total)
    for arc, edge in radial.items():
        vertex_of[2 * edge + 1] = centre[reduced_face[nxt[arc]]]

    base_cycle = []
    arc = kept[0]
    while True:
        if arc in radial:
            base_cycle.append(2 * radial[arc])
        arc = nxt[arc]
        if arc == kept[0]:
            break
    _close_cycle(next_around, base_cycle)
    for face, vertex in centre.items():
        # corners in face order run counterclockwise around the centre
        walk = reduced_walks[face]
        ring = [2 * radial[walk[i] ^ 1] + 1 for i in reversed(range(len(walk)))]
        _close_cycle(next_around, ring)

    prev_kept = {nxt[arc]: arc for arc in kept}
    quad_arcs: set[int] = set()
    for arc in kept[::2]:
        back = arc ^ 1
        if boundary[reduced_face[arc]] or boundary[reduced_face[back]]:
            continue
        quad_arcs.update(
            {2 * radial[arc], 2 * radial[prev_kept[back]] + 1,
             2 * radial[back], 2 * radial[prev_kept[arc]] + 1}
        )
    names = ("v",) + tuple(f"w{k}" for k in range(1, len(centre) + 1))
    draft = QuadSystem(
        vertex_of=tuple(vertex_of),
        next_around_vertex=tuple(next_around),
        vertex_names=names,
        edge_ids=tuple(range(1, edge_total + 1)),
    )
    markers = frozenset(walk[0] for walk in draft.face_walks if walk[0] not in quad_arcs)
    quads = draft if not markers else QuadSystem(
        vertex_of=draft.vertex_of,
        next_around_vertex=draft.next_around_vertex,
        vertex_names=names,
        edge_ids=draft.edge_ids,
        perforated_arcs=markers,
    )

    corner_edge = tuple(
        radial.get(rep, -1) if rep >= 0 else -1 for rep in reduction.corner_rep
    )
    transport = CurveTransport(
        source=surface,
        quad_system=quads,
        operations=reduction.operations,
        corner_edge=corner_edge,
        tree_edges=frozenset(reduction.tree_edges),
    )
    problems = quads.invariant_violations()
    if problems:
        raise InternalInvariantError(f"Quadification broke an invariant: {problems[0]}")
    logger.info(
        f"Quadified surface: {quads.vertex_count} vertices, {quads.edge_count} edges, "
        f"{quads.face_count - quads.boundary_count} quads"
    )
    return quads, transport


def _close_cycle(next_around: list[int], cycle: list[int]) -> None:
    for i, arc in enumerate(cycle):
        next_around[arc] = cycle[(i + 1) % len(cycle)]


def transport_walk(t: CurveTransport, w: "Walk") -> "Walk":
    """
    Transport a walk from the source surface onto the quad system.

    Args:
        t: Transport produced by quadify
        w: Walk on the transport's source surface

    Returns:
        Walk on the quad system of length at most 2|w|
    """
    from src.walk import Walk, validate_walk

    validate_walk(t.source, w)
    arcs: list[int] = []
    for arc in w.arcs:
        arcs.extend(t.transport_arc(arc))
    if not arcs:
        return Walk((), closed=w.closed, basepoint=0)
    return Walk(tuple(arcs), closed=w.closed)


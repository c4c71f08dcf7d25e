"""
Unzip Module

Decides whether a closed curve is homotopic to a simple curve by inserting
its arc occurrences one after the other into per-edge orders, switching
subpaths to the left whenever that avoids a crossing, and checking the
resulting immersion for crossings.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from sortedcontainers import SortedList

from src.errors import InternalInvariantError, PreconditionError, WalkError
from src.immersion import Immersion, Occurrence
from src.surface import (
    CombinatorialSurface,
    QuadSystem,
    SurfaceKind,
    quadify,
    transport_walk,
    turn,
)
from src.walk import Walk, canonicalize, is_canonical, primitive_root, validate_walk

# Configure logging
logger = logging.getLogger(__name__)

# Spacing of fresh order labels on an edge
LABEL_GAP = 1 << 32


# =============================================================================
# Preprocessing
# =============================================================================


def z_function(seq: list[int]) -> list[int]:
    """z[s] = length of the longest common prefix of seq and seq[s:]."""
    n = len(seq)
    z = [0] * n
    if n:
        z[0] = n
    left = right = 0
    for s in range(1, n):
        if s < right:
            z[s] = min(right - s, z[s - left])
        while s + z[s] < n and seq[z[s]] == seq[s + z[s]]:
            z[s] += 1
        if s + z[s] > right:
            left, right = s, s + z[s]
    return z


def _check_canonical_primitive(q: CombinatorialSurface, c: Walk) -> None:
    if not c.closed or c.is_trivial:
        raise PreconditionError("Unzip needs a non-trivial closed walk")
    if not is_canonical(q, c):
        raise PreconditionError("Unzip needs a canonical curve")
    _, multiplicity = primitive_root(q, c)
    if multiplicity != 1:
        raise PreconditionError(f"Curve is a proper power (multiplicity {multiplicity})")


def _cw_offset(q: CombinatorialSurface, reference: int, arc: int) -> int:
    """Corners swept clockwise from `reference` to `arc` around their origin."""
    return (q.position[arc] - q.position[reference]) % q.degree(q.vertex_of[reference])


def precompute_anchor_orders(q: CombinatorialSurface, c: Walk) -> dict[int, bool]:
    """
    Side of every other occurrence of the first arc with respect to [0, 1].

    The two occurrences are extended backwards as long as the curve agrees
    with itself; at the first disagreement both strands enter a common arc
    from two distinct arcs and the rotation decides which one is on the left.

    Args:
        q: Quad system
        c: Canonical primitive curve

    Returns:
        Dict mapping i (with c[i] == c[0], i > 0) to True when [i, i+1]
        lies to the left of [0, 1]
    """
    _check_canonical_primitive(q, c)
    n = len(c)
    reversed_arcs = list(reversed(c.arcs))
    z = z_function(reversed_arcs + reversed_arcs)
    anchors: dict[int, bool] = {}
    for i in range(1, n):
        if c.arcs[i] != c.arcs[0]:
            continue
        agree = min(z[n - i], n - 1)
        common = c.arc(i - agree)
        mine = c.arc(i - agree - 1) ^ 1
        theirs = c.arc(-agree - 1) ^ 1
        if len({common, mine, theirs}) != 3:
            raise InternalInvariantError(f"Degenerate tip while ordering occurrence {i}")
        anchors[i] = _cw_offset(q, common, mine) > _cw_offset(q, common, theirs)
    return anchors


def _turn_at(q: CombinatorialSurface, arcs: list[int], junction: int) -> int:
    n = len(arcs)
    return turn(q, arcs[(junction - 1) % n] ^ 1, arcs[junction % n])


def _staircase_chain(q: CombinatorialSurface, arcs: list[int]) -> list[Optional[int]]:
    """
    chain[J] = number of +2 turns from junction J up to the next +1 turn,
    None when the run of +2 turns ends otherwise or reaches junction 0.
    """
    n = len(arcs)
    chain: list[Optional[int]] = [None] * (n + 1)
    for junction in range(n - 1, 0, -1):
        _update_chain(q, arcs, chain, junction)
    return chain


def _update_chain(
    q: CombinatorialSurface, arcs: list[int], chain: list[Optional[int]], junction: int
) -> None:
    t = _turn_at(q, arcs, junction)
    after = chain[junction + 1]
    if t == 1:
        chain[junction] = 0
    elif t == 2 and after is not None:
        chain[junction] = after + 1
    else:
        chain[junction] = None


def _mark(chain: list[Optional[int]], i: int) -> Optional[int]:
    n = len(chain) - 1
    if not 1 <= i <= n - 2:
        return None
    return chain[i + 1]


def mark_switchable(q: CombinatorialSurface, c: Walk) -> list[Optional[int]]:
    """
    Switchable occurrences of a canonical curve.

    [i, i+1] is switchable when the turns after it read 2^k 1 and the
    subpath <i, k+2> avoids the occurrence [0, 1].

    Args:
        q: Quad system
        c: Canonical closed walk

    Returns:
        List with k at every switchable index and None elsewhere
    """
    if not c.closed or c.is_trivial:
        raise PreconditionError("Switch marks are defined on non-trivial closed walks")
    chain = _staircase_chain(q, list(c.arcs))
    return [_mark(chain, i) for i in range(len(c))]


# =============================================================================
# Unzip state
# =============================================================================


@dataclass
class UnzipState:
    """
    Incremental embedding of a canonical primitive curve.

    `arcs` is the current curve; occurrences below `cursor` are inserted in
    `orders`, keyed by order labels increasing along each edge's even arc.
    """

    surface: CombinatorialSurface
    arcs: list[int]
    orders: list[SortedList]
    labels: dict[int, int]
    chain: list[Optional[int]]
    anchors: dict[int, bool]
    switched: set[int] = field(default_factory=set)
    cursor: int = 0
    switch_count: int = 0
    relabel_count: int = 0

    @classmethod
    def start(cls, q: CombinatorialSurface, c: Walk) -> "UnzipState":
        anchors = precompute_anchor_orders(q, c)
        arcs = list(c.arcs)
        orders = [SortedList() for _ in range(q.edge_count)]
        return cls(q, arcs, orders, {}, _staircase_chain(q, arcs), anchors)

    @property
    def length(self) -> int:
        return len(self.arcs)

    def marks(self) -> list[Optional[int]]:
        return [_mark(self.chain, i) for i in range(self.length)]

    def walk(self) -> Walk:
        return Walk(tuple(self.arcs), True)

    def within(self, occurrence: int, block: int) -> int:
        """Clockwise rank of an inserted occurrence inside the block of `block`."""
        try:
            label = self.labels[occurrence]
        except KeyError:
            raise InternalInvariantError(f"Occurrence {occurrence} is not inserted") from None
        return label if block % 2 == 0 else -label

    def immersion(self) -> Immersion:
        orders = [
            [
                Occurrence(0, index, 1 if self.arcs[index] % 2 == 0 else -1)
                for _, index in seq
            ]
            for seq in self.orders
        ]
        return Immersion(self.surface, [self.walk()], orders)


def switch(q: CombinatorialSurface, state: UnzipState, i: int) -> UnzipState:
    """
    Replace the subpath with turns t 2^k 1 u starting at index i by the other
    side of its staircase, with turns (t-1) -1 -2^k (u-1).

    Args:
        q: Quad system
        state: Unzip state whose occurrence i is not inserted yet
        i: Switchable index

    Returns:
        The updated state
    """
    k = _mark(state.chain, i)
    if k is None:
        raise PreconditionError(f"Occurrence {i} is not switchable")
    if i < state.cursor:
        raise PreconditionError(f"Occurrence {i} is already inserted")
    arcs = state.arcs
    old_last = arcs[i + k + 1]
    new = [q.rotate(arcs[i], -1)]
    new.append(q.rotate(new[-1] ^ 1, -1))
    for _ in range(k):
        new.append(q.rotate(new[-1] ^ 1, -2))
    if q.target(new[-1]) != q.target(old_last):
        raise InternalInvariantError(f"Switch at {i} does not close the staircase")
    for m, arc in enumerate(new):
        arcs[i + m] = arc
        state.switched.add(i + m)

    n = len(arcs)
    for junction in range(min(i + k + 2, n - 1), i, -1):
        _update_chain(q, arcs, state.chain, junction)
    state.switch_count += 1
    logger.debug(f"Switched {k + 2} arcs at index {i}")
    return state


# =============================================================================
# Insertion
# =============================================================================


def _left_of(q: CombinatorialSurface, state: UnzipState, i: int, j: int) -> bool:
    """Whether occurrence i runs to the left of inserted occurrence j, seen along arcs[i]."""
    arcs = state.arcs
    a = arcs[i]
    mine_block = arcs[i - 1] ^ 1
    mine = (_cw_offset(q, a, mine_block), state.within(i - 1, mine_block))

    if arcs[j] == a:
        if j == 0:
            return state.anchors.get(i, False) and i not in state.switched
        theirs_block = arcs[j - 1] ^ 1
        theirs = (_cw_offset(q, a, theirs_block), state.within(j - 1, theirs_block))
    else:
        theirs_block = arcs[(j + 1) % len(arcs)]
        theirs = (
            _cw_offset(q, a, theirs_block),
            state.within((j + 1) % len(arcs), theirs_block),
        )
    # both strands leave through a; the one reaching its other end first
    # clockwise is on the right
    if mine[0] != theirs[0]:
        return mine[0] > theirs[0]
    return mine[1] > theirs[1]


def _needs_switch(q: CombinatorialSurface, state: UnzipState, i: int) -> bool:
    """
    Whether some inserted passage through c(i) leaving or entering along the
    arc just left of arcs[i] crosses [i, i+1] wherever it is inserted.

    Inserted passages along that arc do not cross each other at c(i), so they
    are nested: the further clockwise one end, the further counterclockwise
    the other. A dichotomy over the edge order finds the outermost passage
    not parallel to arcs[i]; [i, i+1] crosses some passage exactly when it
    crosses that one.
    """
    arcs = state.arcs
    a = arcs[i]
    left = q.rotate(a, -1)
    seq = state.orders[left >> 1]
    mine_block = arcs[i - 1] ^ 1
    mine = (_cw_offset(q, a, mine_block), state.within(i - 1, mine_block))
    near_offset = _cw_offset(q, a, left)

    def passage(rank: int) -> Optional[tuple[tuple[int, int], tuple[int, int]]]:
        # rank 0 is the outermost passage
        _, j = seq[-1 - rank] if left % 2 == 0 else seq[rank]
        if arcs[j] == left:
            if j == 0:
                return None
            other_index, other_block = j - 1, arcs[j - 1] ^ 1
        else:
            if j + 1 >= i:
                return None
            other_index, other_block = j + 1, arcs[j + 1]
        near = (near_offset, state.within(j, left))
        far = (_cw_offset(q, a, other_block), state.within(other_index, other_block))
        return near, far

    def next_inserted(rank: int, stop: int) -> int:
        while rank < stop and passage(rank) is None:
            rank += 1
        return rank

    # first rank whose far end is off arcs[i]
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        rank = next_inserted(mid, hi)
        if rank == hi:
            hi = mid
            continue
        if passage(rank)[1][0] > 0:  # type: ignore[index]
            hi = mid
        else:
            lo = rank + 1
    lo = next_inserted(lo, len(seq))
    if lo == len(seq):
        return False
    near, far = passage(lo)  # type: ignore[misc]
    return (near < mine) != (far < mine)


def _relabel(state: UnzipState, edge: int) -> None:
    seq = state.orders[edge]
    fresh = SortedList()
    for rank, (_, index) in enumerate(seq):
        state.labels[index] = rank * LABEL_GAP
        fresh.add((rank * LABEL_GAP, index))
    state.orders[edge] = fresh
    state.relabel_count += 1


def _insert(q: CombinatorialSurface, state: UnzipState, i: int) -> None:
    a = state.arcs[i]
    edge = a >> 1
    seq = state.orders[edge]
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        _, j = seq[mid]
        # edge order follows the even arc
        if _left_of(q, state, i, j) != (a % 2 == 1):
            hi = mid
        else:
            lo = mid + 1

    before = seq[lo - 1][0] if lo > 0 else None
    after = seq[lo][0] if lo < len(seq) else None
    if before is not None and after is not None and after - before < 2:
        _relabel(state, edge)
        seq = state.orders[edge]
        before, after = seq[lo - 1][0], seq[lo][0]
    if before is None and after is None:
        label = 0
    elif before is None:
        label = after - LABEL_GAP  # type: ignore[operator]
    elif after is None:
        label = before + LABEL_GAP
    else:
        label = (before + after) // 2
    state.labels[i] = label
    seq.add((label, i))


def unzip(q: CombinatorialSurface, c: Walk) -> tuple[Walk, Immersion]:
    """
    Insert the occurrences of c forward from [0, 1], switching where needed.

    The returned immersion is not checked for crossings; it is an embedding
    whenever c is homotopic to a simple curve.

    Args:
        q: Quad system
        c: Canonical, primitive, non-trivial closed walk

    Returns:
        Tuple of (switched curve homotopic to c, its immersion)
    """
    validate_walk(q, c)
    state = UnzipState.start(q, c)
    n = state.length
    state.labels[0] = 0
    state.orders[state.arcs[0] >> 1].add((0, 0))
    for i in range(1, n):
        state.cursor = i
        if _mark(state.chain, i) is not None and _needs_switch(q, state, i):
            switch(q, state, i)
        _insert(q, state, i)
    state.cursor = n

    walk = state.walk()
    immersion = state.immersion()
    problems = immersion.violations()
    if problems:
        raise InternalInvariantError(f"Unzip left an incomplete immersion: {problems[0]}")
    if _left_staircase_at_start(q, state.arcs):
        logger.warning("Unzipped curve bends left along a staircase at index 0")
    logger.debug(
        f"Unzipped a curve of length {n} with {state.switch_count} switches "
        f"and {state.relabel_count} relabels"
    )
    return walk, immersion


def _left_staircase_at_start(q: CombinatorialSurface, arcs: list[int]) -> bool:
    """Turns -1 -2^k ending at index 0, or -2^k -1 starting there."""
    n = len(arcs)
    turns = [_turn_at(q, arcs, j) for j in range(n)]
    junction = n - 1
    while junction > 0 and turns[junction] == -2:
        junction -= 1
    if junction > 0 and turns[junction] == -1:
        return True
    junction = 1
    while junction < n and turns[junction] == -2:
        junction += 1
    return junction < n and turns[junction] == -1


# =============================================================================
# Embedding check and simplicity
# =============================================================================


def check_embedding(q: CombinatorialSurface, immersion: Immersion) -> bool:
    """
    Whether the passages around every vertex form a well-parenthesized
    sequence, i.e. the immersion has no crossing.
    """
    positions = immersion.end_positions()
    by_vertex: dict[int, list[tuple[int, int]]] = {}
    for vertex, passages in immersion.passages().items():
        ends = by_vertex.setdefault(vertex, [])
        for chord_id, passage in enumerate(passages):
            first, second = immersion.chord(positions, passage)
            ends.append((first, chord_id))
            ends.append((second, chord_id))
    for ends in by_vertex.values():
        stack: list[int] = []
        for _, chord_id in sorted(ends):
            if stack and stack[-1] == chord_id:
                stack.pop()
            else:
                stack.append(chord_id)
        if stack:
            return False
    return True


def is_simple(
    surface: CombinatorialSurface, c: Walk, verify: bool = False, allow_boundary: bool = False
) -> tuple[bool, Optional[Immersion]]:
    """
    Whether c is homotopic to a simple curve.

    The answer is the one unzip gives. Verification runs the quadratic
    intersection count on top and only logs a disagreement.

    Args:
        surface: Source surface (quadified first) or quad system
        c: Closed walk
        verify: Also compare against the intersection number (debugging)
        allow_boundary: Accept surfaces with perforated faces

    Returns:
        Tuple of (simple, embedding of a homotopic geodesic or None)
    """
    from src.counting import self_intersection_number

    if not c.closed:
        raise WalkError("Simplicity is decided for closed walks")
    if isinstance(surface, QuadSystem):
        q: CombinatorialSurface = surface
        validate_walk(q, c)
        walk = c
    elif surface.kind is not SurfaceKind.HYPERBOLIC:
        simple = self_intersection_number(surface, c) == 0
        logger.info(f"Low-genus surface ({surface.kind.value}); simple={simple}")
        return simple, None
    else:
        if surface.boundary_count and not allow_boundary:
            raise PreconditionError(
                "Unzip on surfaces with perforated faces is experimental; enable "
                "CURVECROSS_EXPERIMENTAL_BOUNDARY to allow it"
            )
        q, transport = quadify(surface)
        walk = transport_walk(transport, c)

    canonical = canonicalize(q, walk)
    if canonical.is_trivial:
        return True, Immersion.initial(q, [canonical])
    _, multiplicity = primitive_root(q, canonical)
    if multiplicity > 1:
        logger.info(f"Curve is a proper power (multiplicity {multiplicity}); not simple")
        return False, None

    _, immersion = unzip(q, canonical)
    simple = check_embedding(q, immersion)
    if verify:
        expected = self_intersection_number(q, canonical, allow_boundary=True) == 0
        if expected != simple:
            logger.warning(
                f"Unzip answered simple={simple} but the intersection number says "
                f"simple={expected}"
            )
    return simple, immersion if simple else None

"""
Walk Module

Closed curves and paths on a system of quads: turn sequences, geodesic and
canonical predicates, canonicalization, primitive roots, homotopy tests and
elementary homotopy moves.
"""

import logging
import random
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from src.errors import InternalInvariantError, PreconditionError, WalkError
from src.surface import CombinatorialSurface, turn

# Configure logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Walk:
    """
    A closed walk (curve) or a path, stored as its arc sequence.

    Closed walks are indexed modulo their length. A walk of length zero
    keeps the vertex it sits on in `basepoint`.
    """

    arcs: tuple[int, ...]
    closed: bool = True
    basepoint: Optional[int] = None

    def __len__(self) -> int:
        return len(self.arcs)

    @property
    def is_trivial(self) -> bool:
        return not self.arcs

    def arc(self, i: int) -> int:
        """The arc c[i, i+1]."""
        if self.closed:
            if not self.arcs:
                raise WalkError("The trivial walk has no arcs")
            return self.arcs[i % len(self.arcs)]
        if not 0 <= i < len(self.arcs):
            raise WalkError(f"Index {i} outside path of length {len(self.arcs)}")
        return self.arcs[i]

    def vertex(self, q: CombinatorialSurface, i: int) -> int:
        """The vertex c(i)."""
        n = len(self.arcs)
        if n == 0:
            if self.basepoint is None:
                raise WalkError("Trivial walk without a basepoint")
            return self.basepoint
        if self.closed:
            return q.vertex_of[self.arcs[i % n]]
        if i == n:
            return q.vertex_of[self.arcs[-1] ^ 1]
        return q.vertex_of[self.arc(i)]

    def start(self, q: CombinatorialSurface) -> int:
        return self.vertex(q, 0)

    def end(self, q: CombinatorialSurface) -> int:
        return self.vertex(q, 0 if self.closed else len(self.arcs))

    def inverse(self) -> "Walk":
        return Walk(tuple(a ^ 1 for a in reversed(self.arcs)), self.closed, self.basepoint)

    def power(self, k: int) -> "Walk":
        if not self.closed:
            raise WalkError("Only closed walks have powers")
        if k < 1:
            raise WalkError(f"Power must be positive, got {k}")
        return Walk(self.arcs * k, True, self.basepoint)

    def rotate(self, k: int) -> "Walk":
        """Re-index a closed walk so that index k becomes index 0."""
        if not self.closed:
            raise WalkError("Only closed walks can be rotated")
        if not self.arcs:
            return self
        k %= len(self.arcs)
        return Walk(self.arcs[k:] + self.arcs[:k], True)

    def subpath(
        self, i: int, length: int, direction: int = 1, basepoint: Optional[int] = None
    ) -> "Walk":
        """
        Image path of the index path starting at i with `length` steps.

        Args:
            i: Starting index
            length: Number of arcs
            direction: +1 to follow the walk, -1 to run it backwards
            basepoint: Vertex to record when length is 0

        Returns:
            Path walk
        """
        if direction == 1:
            arcs = tuple(self.arc(i + m) for m in range(length))
        elif direction == -1:
            arcs = tuple(self.arc(i - 1 - m) ^ 1 for m in range(length))
        else:
            raise WalkError(f"Direction must be +1 or -1, got {direction}")
        return Walk(arcs, closed=False, basepoint=basepoint if not arcs else None)


def validate_walk(q: CombinatorialSurface, w: Walk) -> None:
    """Raise WalkError unless `w` is a walk on `q`."""
    n = len(w.arcs)
    if n == 0:
        if w.basepoint is None or not 0 <= w.basepoint < q.vertex_count:
            raise WalkError("Trivial walk needs a basepoint on the surface")
        return
    for arc in w.arcs:
        if not 0 <= arc < q.arc_count:
            raise WalkError(f"Arc {arc} is not on the surface")
    for i in range(n - 1):
        if q.target(w.arcs[i]) != q.origin(w.arcs[i + 1]):
            raise WalkError(f"Arcs at positions {i} and {i + 1} are not consecutive")
    if w.closed and q.target(w.arcs[-1]) != q.origin(w.arcs[0]):
        raise WalkError("Closed walk does not close up")


def parse_walk(surface: CombinatorialSurface, text: str, closed: bool = True) -> Walk:
    """
    Parse whitespace-separated signed edge ids, or `@<vertex>` for a trivial walk.

    Args:
        surface: Surface the walk lives on
        text: Curve text
        closed: Whether to read a closed walk or a path

    Returns:
        Validated Walk
    """
    tokens = text.split()
    if len(tokens) == 1 and tokens[0].startswith("@"):
        return Walk((), closed, surface.vertex_index(tokens[0][1:]))
    if not tokens:
        raise WalkError("Empty curve text; use @<vertex> for a trivial walk")
    arcs = []
    for token in tokens:
        try:
            signed = int(token)
        except ValueError:
            raise WalkError(f"Expected a signed edge id, got {token!r}") from None
        if signed == 0:
            raise WalkError("Edge id 0 is not allowed")
        arcs.append(surface.arc_for(signed))
    walk = Walk(tuple(arcs), closed)
    validate_walk(surface, walk)
    return walk


def format_walk(surface: CombinatorialSurface, w: Walk) -> str:
    if not w.arcs:
        return f"@{surface.vertex_names[w.basepoint or 0]}"
    return " ".join(str(surface.signed_label(a)) for a in w.arcs)


# =============================================================================
# Turn sequences
# =============================================================================


@dataclass(frozen=True)
class TurnSequence:
    """Run-length encoded turns; cyclic for closed walks."""

    runs: tuple[tuple[int, int], ...]
    cyclic: bool

    @classmethod
    def encode(cls, turns: Sequence[int], cyclic: bool) -> "TurnSequence":
        runs: list[list[int]] = []
        for t in turns:
            if runs and runs[-1][0] == t:
                runs[-1][1] += 1
            else:
                runs.append([t, 1])
        return cls(tuple((value, count) for value, count in runs), cyclic)

    def expand(self) -> list[int]:
        turns: list[int] = []
        for value, count in self.runs:
            turns.extend([value] * count)
        return turns

    def __len__(self) -> int:
        return sum(count for _, count in self.runs)


def _turns(q: CombinatorialSurface, arcs: Sequence[int], closed: bool) -> list[int]:
    """Turn at every junction; index j is the junction before arcs[j]."""
    n = len(arcs)
    if closed:
        return [turn(q, arcs[j - 1] ^ 1, arcs[j]) for j in range(n)]
    # junction 0 has no incoming arc; keep the slot so indices line up
    return [0] + [turn(q, arcs[j - 1] ^ 1, arcs[j]) for j in range(1, n)]


def turn_sequence(q: CombinatorialSurface, w: Walk) -> TurnSequence:
    """
    Turn sequence of a walk.

    Args:
        q: Quad system
        w: Non-empty walk

    Returns:
        TurnSequence with |w| turns (closed) or |w| - 1 interior turns (path)
    """
    if not w.arcs:
        raise WalkError("The trivial walk has no turn sequence")
    turns = _turns(q, w.arcs, w.closed)
    return TurnSequence.encode(turns if w.closed else turns[1:], cyclic=w.closed)


def _find_bracket(
    turns: Sequence[int], closed: bool, max_arcs: Optional[int] = None
) -> Optional[tuple[int, int, int]]:
    """
    First bracket as (junction of the opening turn, number of inner turns, sign).

    For closed walks the search runs cyclically and a bracket may reuse its
    opening junction as closing junction.
    """
    n = len(turns)
    first = 0 if closed else 1
    for i in range(first, n):
        sign = turns[i]
        if sign not in (1, -1):
            continue
        k = 0
        if closed:
            while k < n - 1 and turns[(i + 1 + k) % n] == 2 * sign:
                k += 1
            if turns[(i + 1 + k) % n] != sign:
                continue
        else:
            while i + 1 + k < n and turns[i + 1 + k] == 2 * sign:
                k += 1
            if i + 1 + k >= n or turns[i + 1 + k] != sign:
                continue
        if max_arcs is not None and k + 3 > max_arcs:
            continue
        return i, k, sign
    return None


def is_geodesic(q: CombinatorialSurface, w: Walk) -> bool:
    """No spur and no bracket, checked cyclically for closed walks."""
    if len(w.arcs) == 0:
        return True
    if not w.closed and len(w.arcs) == 1:
        return True
    turns = _turns(q, w.arcs, w.closed)
    interior = turns if w.closed else turns[1:]
    if 0 in interior:
        return False
    return _find_bracket(turns, w.closed) is None


def is_canonical(q: CombinatorialSurface, w: Walk) -> bool:
    """Geodesic, no -1 turn, and (closed walks) not made only of -2 turns."""
    if not is_geodesic(q, w):
        return False
    if len(w.arcs) == 0 or (not w.closed and len(w.arcs) == 1):
        return True
    turns = _turns(q, w.arcs, w.closed)
    interior = turns if w.closed else turns[1:]
    if -1 in interior:
        return False
    if w.closed and all(t == -2 for t in interior):
        return False
    return True


# =============================================================================
# Local rewriting
# =============================================================================


def _free_reduce(arcs: list[int], closed: bool) -> list[int]:
    """Cancel every spur (a, twin(a)), cyclically for closed walks."""
    stack: list[int] = []
    for arc in arcs:
        if stack and stack[-1] == arc ^ 1:
            stack.pop()
        else:
            stack.append(arc)
    if closed:
        lo, hi = 0, len(stack)
        while hi - lo >= 2 and stack[lo] == stack[hi - 1] ^ 1:
            lo += 1
            hi -= 1
        stack = stack[lo:hi]
    return stack


def _bracket_replacement(q: CombinatorialSurface, up: int, inner: int, sign: int) -> list[int]:
    """Path replacing a bracket that starts with `up` and has `inner` turns of 2*sign."""
    bottom = [q.rotate(up, -sign)]
    for _ in range(inner):
        bottom.append(q.rotate(bottom[-1] ^ 1, -2 * sign))
    return bottom


def _reduce(q: CombinatorialSurface, arcs: list[int], closed: bool) -> list[int]:
    """Remove spurs and brackets until the walk is geodesic."""
    guard = 8 * len(arcs) + 16
    while guard:
        guard -= 1
        arcs = _free_reduce(arcs, closed)
        n = len(arcs)
        if n == 0 or (not closed and n == 1):
            return arcs
        turns = _turns(q, arcs, closed)
        found = _find_bracket(turns, closed, max_arcs=n if closed else None)
        if found is not None:
            i, k, sign = found
            if closed:
                rotated = arcs[i - 1:] + arcs[:i - 1] if i else arcs[-1:] + arcs[:-1]
                down = rotated[k + 2]
                bottom = _bracket_replacement(q, rotated[0], k, sign)
                _check_endpoint(q, bottom[-1], down)
                arcs = bottom + rotated[k + 3:]
            else:
                down = arcs[i + k + 1]
                bottom = _bracket_replacement(q, arcs[i - 1], k, sign)
                _check_endpoint(q, bottom[-1], down)
                arcs = arcs[:i - 1] + bottom + arcs[i + k + 2:]
            logger.debug(f"Contracted a bracket with {k} inner turns")
            continue
        if closed:
            wrapped = _find_bracket(turns, closed)
            if wrapped is not None:
                # The bracket runs once around the curve and back onto its first arc
                i, k, sign = wrapped
                if k != len(arcs) - 1:
                    raise InternalInvariantError("Short bracket overlapping itself")
                rotated = arcs[i - 1:] + arcs[:i - 1] if i else arcs[-1:] + arcs[:-1]
                bottom = _bracket_replacement(q, rotated[0], k, sign)
                _check_endpoint(q, bottom[-1], rotated[1])
                arcs = bottom + [rotated[1] ^ 1, rotated[0] ^ 1]
                logger.debug("Contracted a bracket wrapping the whole curve")
                continue
        return arcs
    raise InternalInvariantError("Spur and bracket reduction did not terminate")


def _check_endpoint(q: CombinatorialSurface, new_last: int, old_last: int) -> None:
    if q.target(new_last) != q.target(old_last):
        raise InternalInvariantError("Local rewrite changed an endpoint")


def push(q: CombinatorialSurface, arcs: list[int], junction: int, closed: bool, side: int) -> int:
    """
    Push the walk across the staircase starting at `junction`, in place.

    side=+1 pushes right, removing the -1 turn at `junction` (pattern
    s, -1, -2^k, v). side=-1 pushes left, removing a +1 turn.

    Args:
        q: Quad system
        arcs: Arc list, rewritten in place
        junction: Junction carrying the turn to remove
        closed: Whether the walk is closed
        side: +1 for right, -1 for left

    Returns:
        Number k of inner turns of value -2*side that were crossed
    """
    n = len(arcs)
    turns = _turns(q, arcs, closed)
    if turns[junction] != -side:
        raise InternalInvariantError(f"No turn {-side} at junction {junction}")
    k = 0
    if closed:
        while k < n - 2 and turns[(junction + 1 + k) % n] == -2 * side:
            k += 1
    else:
        while junction + 1 + k < n and turns[junction + 1 + k] == -2 * side:
            k += 1
    positions = [(junction - 1 + m) % n for m in range(k + 2)]
    old_last = arcs[positions[-1]]
    new = [q.rotate(arcs[positions[0]], side)]
    for _ in range(k):
        new.append(q.rotate(new[-1] ^ 1, 2 * side))
    new.append(q.rotate(new[-1] ^ 1, side))
    _check_endpoint(q, new[-1], old_last)
    for pos, arc in zip(positions, new):
        arcs[pos] = arc
    return k


def flip_staircase(q: CombinatorialSurface, arcs: Sequence[int], side: int) -> list[int]:
    """
    Replace a closed walk made only of -2*side turns by the opposite side of
    its staircase (side=+1 turns all -2 into all +2).
    """
    flipped = [q.rotate(q.rotate(a, side) ^ 1, side) for a in arcs]
    for i in range(len(flipped)):
        if q.target(flipped[i - 1]) != q.origin(flipped[i]):
            raise InternalInvariantError("Staircase flip does not close up")
    return flipped


def least_rotation(seq: Sequence[int]) -> int:
    """Booth's algorithm: start index of the lexicographically least rotation."""
    doubled = list(seq) + list(seq)
    failure = [-1] * len(doubled)
    k = 0
    for j in range(1, len(doubled)):
        sj = doubled[j]
        i = failure[j - k - 1]
        while i != -1 and sj != doubled[k + i + 1]:
            if sj < doubled[k + i + 1]:
                k = j - i - 1
            i = failure[i]
        if sj != doubled[k + i + 1]:
            if sj < doubled[k]:
                k = j
            failure[j - k] = -1
        else:
            failure[j - k] = i + 1
    return k


def prefix_function(seq: Sequence[int]) -> list[int]:
    """KMP failure function: pi[i] = length of the longest proper border of seq[:i+1]."""
    pi = [0] * len(seq)
    k = 0
    for i in range(1, len(seq)):
        while k and seq[i] != seq[k]:
            k = pi[k - 1]
        if seq[i] == seq[k]:
            k += 1
        pi[i] = k
    return pi


def is_rotation(a: Sequence[int], b: Sequence[int]) -> bool:
    """Whether b is a cyclic shift of a (KMP search of b inside a+a)."""
    if len(a) != len(b):
        return False
    if not a:
        return True
    pattern = list(b)
    pi = prefix_function(pattern)
    k = 0
    for x in list(a) + list(a)[:-1]:
        while k and x != pattern[k]:
            k = pi[k - 1]
        if x == pattern[k]:
            k += 1
            if k == len(pattern):
                return True
    return False


# =============================================================================
# Canonical forms
# =============================================================================


def canonicalize(q: CombinatorialSurface, w: Walk) -> Walk:
    """
    The canonical (rightmost) geodesic homotopic to `w`.

    Closed walks are rotated to their least rotation so that homotopic curves
    give equal outputs; paths keep their endpoints.

    Args:
        q: Quad system
        w: Walk on q

    Returns:
        Canonical Walk; the trivial walk for contractible curves
    """
    validate_walk(q, w)
    if not w.arcs:
        return w
    basepoint = w.start(q)
    arcs = _reduce(q, list(w.arcs), w.closed)
    if not arcs:
        return Walk((), w.closed, basepoint)

    n = len(arcs)
    turns = _turns(q, arcs, w.closed)
    if w.closed and all(t == -2 for t in turns):
        arcs = flip_staircase(q, arcs, 1)
    else:
        first = 0 if w.closed else 1
        for _ in range(2 * n + 2):
            turns = _turns(q, arcs, w.closed)
            junction = next((j for j in range(first, n) if turns[j] == -1), None)
            if junction is None:
                break
            k = push(q, arcs, junction, w.closed, side=1)
            logger.debug(f"Pushed right across {k + 1} quads at junction {junction}")
        else:
            raise InternalInvariantError("Right pushes did not terminate")

    if w.closed:
        start = least_rotation(arcs)
        arcs = arcs[start:] + arcs[:start]
    return Walk(tuple(arcs), w.closed)


def leftmost_canonical(q: CombinatorialSurface, c: Walk) -> Walk:
    """The leftmost geodesic c_L = canonicalize(c^-1)^-1."""
    if not c.closed:
        raise WalkError("leftmost_canonical expects a closed walk")
    return canonicalize(q, c.inverse()).inverse()


def primitive_root(q: CombinatorialSurface, c: Walk) -> tuple[Walk, int]:
    """
    Smallest period prefix of a canonical curve.

    Args:
        q: Quad system
        c: Canonical, non-trivial closed walk

    Returns:
        Tuple of (primitive walk d, multiplicity k) with c = d^k
    """
    if not c.closed or not c.arcs:
        raise PreconditionError("primitive_root needs a non-trivial closed walk")
    if not is_canonical(q, c):
        raise PreconditionError("primitive_root needs a canonical curve")
    n = len(c.arcs)
    period = n - prefix_function(c.arcs)[-1]
    if n % period:
        return c, 1
    return Walk(c.arcs[:period], True), n // period


def freely_homotopic(q: CombinatorialSurface, w1: Walk, w2: Walk) -> bool:
    """Closed walks are freely homotopic iff their canonical forms agree up to rotation."""
    if not (w1.closed and w2.closed):
        raise WalkError("freely_homotopic compares closed walks")
    c1, c2 = canonicalize(q, w1), canonicalize(q, w2)
    return is_rotation(c1.arcs, c2.arcs)


def path_homotopic(q: CombinatorialSurface, p1: Walk, p2: Walk) -> bool:
    """Paths with equal endpoints are homotopic iff their canonical forms are equal."""
    if p1.closed or p2.closed:
        raise WalkError("path_homotopic compares paths")
    validate_walk(q, p1)
    validate_walk(q, p2)
    if p1.start(q) != p2.start(q) or p1.end(q) != p2.end(q):
        raise WalkError("Paths do not share their endpoints")
    return canonicalize(q, p1).arcs == canonicalize(q, p2).arcs


def is_contractible(q: CombinatorialSurface, c: Walk) -> bool:
    return canonicalize(q, c).is_trivial


# =============================================================================
# Elementary moves
# =============================================================================


class MoveKind(str, Enum):
    """Elementary homotopies of a walk."""

    INSERT_SPUR = "insert_spur"
    REMOVE_SPUR = "remove_spur"
    FACE = "face"


@dataclass(frozen=True)
class ElementaryMove:
    """
    One elementary homotopy applied at `index`.

    For spur insertion `arc` is the arc going out and back. For face moves,
    the `length` arcs of the facial walk starting at `arc` are replaced by
    the rest of that facial walk run backwards.
    """

    kind: MoveKind
    index: int
    arc: int = -1
    length: int = 0


def elementary_move(q: CombinatorialSurface, w: Walk, move: ElementaryMove) -> Walk:
    """
    Apply an elementary homotopy.

    Args:
        q: Surface
        w: Walk on q
        move: Move descriptor

    Returns:
        The homotopic walk; closed walks are re-indexed to start at the move
    """
    n = len(w.arcs)
    if w.closed:
        i = move.index % n if n else 0
        arcs = list(w.arcs[i:] + w.arcs[:i])
        at = 0
        vertex = w.vertex(q, i)
    else:
        if not 0 <= move.index <= n:
            raise WalkError(f"Move index {move.index} outside the path")
        arcs = list(w.arcs)
        at = move.index
        vertex = w.vertex(q, at)

    if move.kind is MoveKind.INSERT_SPUR:
        if not 0 <= move.arc < q.arc_count or q.origin(move.arc) != vertex:
            raise WalkError(f"Spur arc {move.arc} does not leave the walk at {move.index}")
        arcs[at:at] = [move.arc, move.arc ^ 1]
    elif move.kind is MoveKind.REMOVE_SPUR:
        if len(arcs) < at + 2 or arcs[at + 1] != arcs[at] ^ 1:
            raise WalkError(f"No spur at index {move.index}")
        del arcs[at:at + 2]
    elif move.kind is MoveKind.FACE:
        if not 0 <= move.arc < q.arc_count or q.origin(move.arc) != vertex:
            raise WalkError(f"Facial arc {move.arc} does not leave the walk at {move.index}")
        face = q.face_of[move.arc]
        if q.face_perforated[face]:
            raise WalkError("Face moves cannot cross a perforated face")
        walk = q.face_walks[face]
        start = walk.index(move.arc)
        facial = list(walk[start:] + walk[:start])
        m = move.length
        if not 0 <= m <= len(facial) or at + m > len(arcs):
            raise WalkError(f"Facial part of length {m} does not fit at {move.index}")
        if arcs[at:at + m] != facial[:m]:
            raise WalkError(f"Walk does not follow the face at {move.index}")
        arcs[at:at + m] = [a ^ 1 for a in reversed(facial[m:])]
    else:
        raise WalkError(f"Unknown move {move.kind}")

    if not arcs:
        return Walk((), w.closed, vertex)
    return Walk(tuple(arcs), w.closed)


def applicable_moves(q: CombinatorialSurface, w: Walk) -> list[ElementaryMove]:
    """Every elementary move that applies to `w`."""
    n = len(w.arcs)
    indices = range(max(n, 1)) if w.closed else range(n + 1)
    moves: list[ElementaryMove] = []
    for i in indices:
        vertex = w.vertex(q, i)
        for arc in q.rotations[vertex]:
            moves.append(ElementaryMove(MoveKind.INSERT_SPUR, i, arc))
            face = q.face_of[arc]
            if q.face_perforated[face]:
                continue
            walk = q.face_walks[face]
            start = walk.index(arc)
            facial = walk[start:] + walk[:start]
            moves.append(ElementaryMove(MoveKind.FACE, i, arc, 0))
            limit = min(len(facial), n if w.closed else n - i)
            for m in range(1, limit + 1):
                if w.arc(i + m - 1) != facial[m - 1]:
                    break
                moves.append(ElementaryMove(MoveKind.FACE, i, arc, m))
        if n >= 2 and (w.closed or i + 1 < n) and w.arc(i + 1) == w.arc(i) ^ 1:
            moves.append(ElementaryMove(MoveKind.REMOVE_SPUR, i))
    return moves


def random_walk(q: CombinatorialSurface, length: int, seed: int) -> Walk:
    """
    Random non-backtracking closed walk from vertex 0.

    The walk takes `length` random steps and then returns to vertex 0 along
    a shortest path, so it may be slightly longer than `length`.
    """
    rng = random.Random(seed)
    if length <= 0:
        return Walk((), True, 0)
    arcs: list[int] = []
    vertex = 0
    for _ in range(length):
        choices = [a for a in q.rotations[vertex] if not arcs or a != arcs[-1] ^ 1]
        arc = rng.choice(choices)
        arcs.append(arc)
        vertex = q.target(arc)
    arcs.extend(_shortest_path(q, vertex, 0))
    return Walk(tuple(arcs), True)


def _shortest_path(q: CombinatorialSurface, source: int, goal: int) -> list[int]:
    back: dict[int, int] = {source: -1}
    queue = deque([source])
    while queue and goal not in back:
        vertex = queue.popleft()
        for arc in q.rotations[vertex]:
            other = q.target(arc)
            if other not in back:
                back[other] = arc
                queue.append(other)
    path: list[int] = []
    vertex = goal
    while vertex != source:
        arc = back[vertex]
        path.append(arc)
        vertex = q.origin(arc)
    return path[::-1]

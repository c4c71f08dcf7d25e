"""
Oracle Module

Brute-force references used to cross-check the counting, immersion and
unzip modules on short curves: exhaustive enumeration of homotopic
geodesics and of their immersions, and random homotopic perturbations.
"""

import itertools
import logging
import random
from math import factorial, prod
from typing import Iterator, Optional

from pydantic import BaseModel, Field

from src.config import CurveCrossConfig
from src.errors import BudgetExceededError, PreconditionError
from src.immersion import Immersion, Occurrence, crossings
from src.surface import CombinatorialSurface, turn
from src.walk import (
    Walk,
    applicable_moves,
    canonicalize,
    elementary_move,
    is_geodesic,
    is_rotation,
    least_rotation,
    validate_walk,
)

# Configure logging
logger = logging.getLogger(__name__)


class OracleBudget(BaseModel):
    """Bounds on the work the brute-force oracle may do."""

    max_length: int = Field(6, gt=0, description="Longest canonical curve accepted")
    max_depth: int = Field(64, gt=0, description="Most elementary moves per perturbation")
    max_enumeration: int = Field(
        200_000, gt=0, description="Most walks or immersions enumerated per query"
    )
    seed: int = Field(0, ge=0, description="Seed for randomized helpers")

    @classmethod
    def from_config(cls, config: CurveCrossConfig) -> "OracleBudget":
        return cls(
            max_length=config.oracle_budget,
            max_enumeration=config.oracle_max_enumeration,
            seed=config.oracle_seed,
        )


# =============================================================================
# Homotopic geodesics
# =============================================================================


def _closes_bracket(turns: list[int]) -> bool:
    """Whether the last turn closes a bracket s (2s)^k s inside the path."""
    last = turns[-1]
    if last not in (1, -1):
        return False
    m = len(turns) - 2
    while m >= 0 and turns[m] == 2 * last:
        m -= 1
    return m >= 0 and turns[m] == last


def _geodesic_walks(
    q: CombinatorialSurface, length: int, budget: OracleBudget
) -> Iterator[tuple[int, ...]]:
    """Closed geodesic walks of the given length whose first arc is their least arc."""
    visited = 0

    def extend(arcs: list[int], turns: list[int]) -> Iterator[tuple[int, ...]]:
        nonlocal visited
        visited += 1
        if visited > budget.max_enumeration:
            raise BudgetExceededError(
                f"Walk enumeration passed {budget.max_enumeration} nodes at length {length}"
            )
        if len(arcs) == length:
            if q.target(arcs[-1]) == q.origin(arcs[0]):
                yield tuple(arcs)
            return
        for arc in q.rotations[q.target(arcs[-1])]:
            if arc < arcs[0]:
                continue
            t = turn(q, arcs[-1] ^ 1, arc)
            if t == 0:
                continue
            turns.append(t)
            if not _closes_bracket(turns):
                arcs.append(arc)
                yield from extend(arcs, turns)
                arcs.pop()
            turns.pop()

    for first in range(q.arc_count):
        yield from extend([first], [])


def enumerate_homotopic_geodesics(
    q: CombinatorialSurface, c: Walk, budget: Optional[OracleBudget] = None
) -> list[Walk]:
    """
    All closed geodesics homotopic to c, up to rotation.

    Every geodesic homotopic to c has the length of its canonical form, so
    the search runs over geodesic walks of that length only.

    Args:
        q: Quad system
        c: Closed walk
        budget: Enumeration bounds

    Returns:
        Walks in least-rotation form, sorted
    """
    budget = budget or OracleBudget()
    validate_walk(q, c)
    canonical = canonicalize(q, c)
    if canonical.is_trivial:
        return [canonical]
    n = len(canonical)
    if n > budget.max_length:
        raise BudgetExceededError(
            f"Curve of canonical length {n} exceeds the oracle budget {budget.max_length}"
        )
    found: set[tuple[int, ...]] = set()
    for arcs in _geodesic_walks(q, n, budget):
        walk = Walk(arcs, True)
        if not is_geodesic(q, walk):
            continue
        if not is_rotation(canonicalize(q, walk).arcs, canonical.arcs):
            continue
        start = least_rotation(arcs)
        found.add(arcs[start:] + arcs[:start])
    logger.debug(f"{len(found)} geodesics homotopic to a curve of length {n}")
    return [Walk(arcs, True) for arcs in sorted(found)]


# =============================================================================
# Exhaustive immersions
# =============================================================================


def _occurrences_by_edge(q: CombinatorialSurface, curves: list[Walk]) -> list[list[Occurrence]]:
    by_edge: list[list[Occurrence]] = [[] for _ in range(q.edge_count)]
    for k, c in enumerate(curves):
        for idx, arc in enumerate(c.arcs):
            by_edge[arc >> 1].append(Occurrence(k, idx, 1 if arc % 2 == 0 else -1))
    return by_edge


def all_immersions(q: CombinatorialSurface, curves: list[Walk]) -> Iterator[Immersion]:
    """Every combination of per-edge orders of the occurrences of `curves`."""
    by_edge = _occurrences_by_edge(q, curves)
    for orders in itertools.product(*(itertools.permutations(seq) for seq in by_edge)):
        yield Immersion(q, list(curves), [list(seq) for seq in orders])


def immersion_count(q: CombinatorialSurface, curves: list[Walk]) -> int:
    return prod(factorial(len(seq)) for seq in _occurrences_by_edge(q, curves))


def _counted(q: CombinatorialSurface, immersion: Immersion, pair: bool) -> int:
    return sum(
        1 for (k1, _), (k2, _) in crossings(q, immersion) if (k1 != k2) == pair
    )


def brute_force_intersection(
    q: CombinatorialSurface,
    c: Walk,
    d: Optional[Walk] = None,
    budget: Optional[OracleBudget] = None,
) -> int:
    """
    Intersection number by exhaustive search.

    Minimizes the crossing count over every geodesic homotopic to each input
    and every per-edge order of their occurrences.

    Args:
        q: Quad system
        c: Closed walk
        d: Second closed walk, or None for the self-intersection number
        budget: Enumeration bounds

    Returns:
        i(c) when d is None, i(c, d) otherwise
    """
    budget = budget or OracleBudget()
    first = enumerate_homotopic_geodesics(q, c, budget)
    if first[0].is_trivial:
        return 0
    if d is None:
        candidates = [[g] for g in first]
    else:
        second = enumerate_homotopic_geodesics(q, d, budget)
        if second[0].is_trivial:
            return 0
        candidates = [[g, h] for g in first for h in second]

    total = sum(immersion_count(q, curves) for curves in candidates)
    if total > budget.max_enumeration:
        raise BudgetExceededError(
            f"{total} immersions to enumerate, budget is {budget.max_enumeration}"
        )
    logger.info(f"Oracle enumerating {total} immersions over {len(candidates)} curve choices")

    best: Optional[int] = None
    for curves in candidates:
        for immersion in all_immersions(q, curves):
            count = _counted(q, immersion, pair=d is not None)
            if best is None or count < best:
                best = count
            if best == 0:
                return 0
    assert best is not None
    return best


# =============================================================================
# Random perturbations
# =============================================================================


def random_homotopic_perturbation(
    q: CombinatorialSurface,
    c: Walk,
    steps: int,
    seed: int,
    budget: Optional[OracleBudget] = None,
) -> Walk:
    """
    Apply `steps` elementary moves chosen uniformly among the applicable ones.

    Args:
        q: Surface
        c: Walk
        steps: Number of moves
        seed: Seed of the move choices
        budget: Bounds; steps may not exceed max_depth

    Returns:
        Walk homotopic to c
    """
    if steps < 0:
        raise PreconditionError(f"Number of steps must be non-negative, got {steps}")
    budget = budget or OracleBudget()
    if steps > budget.max_depth:
        raise BudgetExceededError(f"{steps} moves requested, budget is {budget.max_depth}")
    validate_walk(q, c)
    rng = random.Random(seed)
    walk = c
    for _ in range(steps):
        moves = applicable_moves(q, walk)
        walk = elementary_move(q, walk, rng.choice(moves))
    return walk

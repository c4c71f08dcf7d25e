"""
Tests for the Immersion Module
"""

from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.counting import cylinder_winding, self_intersection_number, torus_classes
from src.errors import PreconditionError, WalkError
from src.immersion import (
    Bigon,
    Immersion,
    IndexPath,
    Occurrence,
    count_bigons_with_distinct_tips,
    crossing_count,
    crossings,
    find_monogon,
    find_singular_bigon,
    format_immersion,
    minimal_immersion,
    parse_immersion,
    power_immersion,
)
from src.surface import build_surface, parse_surface
from src.walk import Walk, canonicalize, freely_homotopic, parse_walk, random_walk


class TestImmersionBasics:
    """Tests for the Immersion container and its text format."""

    def test_initial(self, quads):
        """Should list every occurrence once, in index order."""
        c = parse_walk(quads, "1 -2 1 -2")
        immersion = Immersion.initial(quads, [c])
        assert immersion.violations() == []
        assert immersion.orders[0] == [Occurrence(0, 0, 1), Occurrence(0, 2, 1)]
        assert immersion.orders[1] == [Occurrence(0, 1, -1), Occurrence(0, 3, -1)]

    def test_violations(self, quads):
        """Should report repeated and misplaced occurrences."""
        c = parse_walk(quads, "1 -2")
        immersion = Immersion.initial(quads, [c])
        immersion.orders[2].append(Occurrence(0, 0, 1))
        problems = immersion.violations()
        assert any("twice" in p for p in problems)
        assert any("wrong edge" in p for p in problems)

    def test_format(self, quads):
        """Should print one line per edge."""
        c = parse_walk(quads, "1 -2")
        text = format_immersion(quads, Immersion.initial(quads, [c]))
        lines = text.splitlines()
        assert lines[0] == "edge 1: occ(0,0,+1)"
        assert lines[1] == "edge 2: occ(0,1,-1)"
        assert lines[2] == "edge 3:"
        assert len(lines) == 8

    def test_parse_reads_format(self, quads):
        """Should read back what format_immersion prints."""
        c = parse_walk(quads, "1 -2 1 -2")
        immersion = Immersion.initial(quads, [c])
        immersion.orders[0].reverse()
        parsed = parse_immersion(quads, [c], format_immersion(quads, immersion))
        assert parsed.orders == immersion.orders

    def test_parse_errors(self, quads):
        """Should reject malformed and incomplete immersions."""
        c = parse_walk(quads, "1 -2")
        with pytest.raises(WalkError, match="Line 1"):
            parse_immersion(quads, [c], "vertex 1: occ(0,0,+1)")
        with pytest.raises(WalkError, match="unknown edge"):
            parse_immersion(quads, [c], "edge 99: occ(0,0,+1)")
        with pytest.raises(WalkError, match="Invalid immersion"):
            parse_immersion(quads, [c], "edge 1: occ(0,0,+1)")

    def test_end_positions_are_a_permutation(self, quads):
        """Should rank the occurrence ends around each vertex without gaps."""
        c = parse_walk(quads, "1 -2 1 -4 2 -7")
        immersion = Immersion.initial(quads, [c])
        by_vertex: dict[int, list[int]] = {}
        for (k, idx, at_start), rank in immersion.end_positions().items():
            arc = c.arcs[idx]
            vertex = quads.origin(arc) if at_start else quads.target(arc)
            by_vertex.setdefault(vertex, []).append(rank)
        for ranks in by_vertex.values():
            assert sorted(ranks) == list(range(len(ranks)))

    def test_index_paths_and_tips(self):
        """Should walk index paths in both directions."""
        forward, backward = IndexPath(4, 3), IndexPath(1, 2, -1)
        assert forward.occurrences(6) == [4, 5, 0]
        assert forward.end(6) == 1
        assert backward.occurrences(6) == [0, 5]
        assert backward.end(6) == 5
        assert Bigon(forward, backward).tips(6) == ((4, 1), (1, 5))


class TestCrossings:
    """Tests for crossing detection and monogons."""

    def test_crossings_of_initial_immersion(self, quads):
        """Should find the interleaved passages."""
        c = parse_walk(quads, "1 -2 1 -4 2 -7")
        immersion = Immersion.initial(quads, [c])
        assert crossings(quads, immersion) == [
            ((0, 1), (0, 3)),
            ((0, 1), (0, 5)),
            ((0, 2), (0, 4)),
        ]
        assert crossing_count(quads, immersion) == 3

    def test_monogon(self, quads):
        """Should find the contractible loop cut off by a crossing."""
        c = parse_walk(quads, "1 -2 1 -4 2 -7")
        assert find_monogon(quads, c, Immersion.initial(quads, [c])) == IndexPath(3, 4)

    def test_no_monogon_in_minimal_immersion(self, genus2):
        """Should find no monogon once the immersion is minimal."""
        curve, immersion = minimal_immersion(genus2, parse_walk(genus2, "1 1 2"))
        assert find_monogon(immersion.surface, curve, immersion) is None

    def test_power_immersion(self, quads):
        """Should add exactly p - 1 crossings to an embedded root."""
        root = parse_walk(quads, "1 -2")
        walk, immersion = power_immersion(Immersion.initial(quads, [root]), 3)
        assert walk.arcs == root.arcs * 3
        assert immersion.violations() == []
        assert crossing_count(quads, immersion) == 2


class TestBigons:
    """Tests for bigon search."""

    def test_preconditions(self, quads):
        """Should refuse powers and non-geodesic curves."""
        power = canonicalize(quads, parse_walk(quads, "1 -2 1 -2"))
        with pytest.raises(PreconditionError, match="power"):
            find_singular_bigon(quads, power, Immersion.initial(quads, [power]))
        spur = parse_walk(quads, "1 -1")
        with pytest.raises(PreconditionError, match="geodesic"):
            find_singular_bigon(quads, spur, Immersion.initial(quads, [spur]))

    def test_embedding_has_no_bigons(self, genus2):
        """Should find no bigon on an embedded curve."""
        curve, immersion = minimal_immersion(genus2, parse_walk(genus2, "1 2 -1 -2"))
        q = immersion.surface
        assert crossing_count(q, immersion) == 0
        assert find_singular_bigon(q, curve, immersion) is None
        assert count_bigons_with_distinct_tips(q, curve, immersion) == 0


class TestMinimalImmersion:
    """Tests for minimally crossing immersions."""

    @pytest.mark.parametrize(
        "curve,expected", [("1", 0), ("1 1", 1), ("1 1 1", 2), ("1 2 -1 -2", 0)]
    )
    def test_known_curves(self, genus2, curve, expected):
        """Should reach the self-intersection number."""
        c = parse_walk(genus2, curve)
        walk, immersion = minimal_immersion(genus2, c)
        assert crossing_count(immersion.surface, immersion) == expected
        assert immersion.violations() == []

    def test_contractible_curve(self, quads):
        """Should return the trivial walk for contractible curves."""
        walk, immersion = minimal_immersion(quads, parse_walk(quads, "1 -4 2 -7"))
        assert walk.is_trivial
        assert crossing_count(quads, immersion) == 0

    def test_open_walk_rejected(self, quads):
        """Should refuse paths."""
        with pytest.raises(PreconditionError):
            minimal_immersion(quads, parse_walk(quads, "1", closed=False))

    @pytest.mark.slow
    @given(
        length=st.integers(min_value=2, max_value=14),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=15, deadline=None)
    def test_random_curves(self, quads, length, seed):
        """Should match i(c), stay homotopic and decrease by two per swap."""
        c = random_walk(quads, length, seed)
        walk, immersion = minimal_immersion(quads, c)
        final = crossing_count(quads, immersion)
        assert final == self_intersection_number(quads, c)
        assert freely_homotopic(quads, c, walk)
        history = immersion.swap_history
        for before, after in history:
            assert after <= before - 2
        if history:
            assert len(history) <= (history[0][0] - history[-1][1]) // 2


class TestLowGenusImmersion:
    """Tests for minimal immersions on tori, cylinders and spheres."""

    @pytest.mark.parametrize(
        "x,y", [(1, 0), (0, 1), (1, 1), (2, 1), (-2, 1), (1, -2), (3, 2), (2, 4), (-3, -3)]
    )
    def test_torus(self, torus, x, y):
        """Should draw a straight curve with gcd(x, y) - 1 crossings in the same class."""
        tokens = (["1" if x > 0 else "-1"] * abs(x)) + (["2" if y > 0 else "-2"] * abs(y))
        walk, immersion = minimal_immersion(torus, parse_walk(torus, " ".join(tokens)))
        assert immersion.violations() == []
        assert crossing_count(immersion.surface, immersion) == gcd(x, y) - 1
        assert torus_classes(immersion.surface, walk) == (x, y)
        assert len(walk) == abs(x) + abs(y)

    def test_torus_contractible(self, torus):
        """Should return the trivial walk for a null-homologous torus curve."""
        walk, immersion = minimal_immersion(torus, parse_walk(torus, "1 2 -1 -2"))
        assert walk.is_trivial
        assert crossing_count(immersion.surface, immersion) == 0

    @pytest.mark.parametrize(
        "curve,expected", [("1", 0), ("-1", 0), ("1 1", 1), ("-1 -1 -1", 2)]
    )
    def test_cylinder(self, cylinder, curve, expected):
        """Should wind a boundary walk around as often as the curve does."""
        c = parse_walk(cylinder, curve)
        walk, immersion = minimal_immersion(cylinder, c)
        assert immersion.surface is cylinder
        assert immersion.violations() == []
        assert crossing_count(cylinder, immersion) == expected
        assert cylinder_winding(cylinder, walk) == cylinder_winding(cylinder, c)

    def test_cylinder_contractible(self, cylinder):
        """Should return the trivial walk for a curve that does not wind."""
        walk, immersion = minimal_immersion(cylinder, parse_walk(cylinder, "1 -1"))
        assert walk.is_trivial
        assert crossing_count(cylinder, immersion) == 0

    def test_sphere(self):
        """Should return the trivial walk on the sphere."""
        sphere = build_surface(parse_surface("rotation v\n"))
        walk, immersion = minimal_immersion(sphere, Walk((), True, 0))
        assert walk.is_trivial
        assert crossing_count(sphere, immersion) == 0

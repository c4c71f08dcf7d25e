"""
Tests for the Diagram Module
"""

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.diagram import (
    AnnularDiagram,
    PairKind,
    Side,
    Spoke,
    Tag,
    annular_diagram,
    build_strip,
    diagram_violations,
    format_diagram,
    maximal_partial_diagrams,
    verify_diagram,
)
from src.errors import PreconditionError
from src.walk import Walk, canonicalize, parse_walk, primitive_root, random_walk


class TestAnnularDiagram:
    """Tests for the annular diagram between c_R and c_L."""

    def test_right_boundary_is_canonical(self, quads):
        """Should use the canonical form as right boundary."""
        c = parse_walk(quads, "1 -2 6 -3")
        diagram = annular_diagram(quads, c)
        assert diagram.right == canonicalize(quads, c)
        assert len(diagram.left) == len(diagram.right)
        assert verify_diagram(quads, diagram)

    def test_preconditions(self, quads):
        """Should refuse paths and contractible curves."""
        with pytest.raises(PreconditionError):
            annular_diagram(quads, parse_walk(quads, "1 -1"))
        with pytest.raises(PreconditionError):
            annular_diagram(quads, parse_walk(quads, "1", closed=False))

    @given(
        length=st.integers(min_value=2, max_value=20),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=40, deadline=None)
    def test_random_diagrams_are_valid(self, quads, length, seed):
        """Should build a structurally valid diagram for any essential curve."""
        c = random_walk(quads, length, seed)
        if canonicalize(quads, c).is_trivial:
            return
        diagram = annular_diagram(quads, c)
        assert diagram_violations(quads, diagram) == []

    def test_violations_are_reported(self, quads):
        """Should flag a closed staircase with coincident indices and a bad spoke."""
        c = canonicalize(quads, parse_walk(quads, "1 -2"))
        broken = AnnularDiagram(
            right=c,
            left=Walk((2, 1)),
            tags=(Tag.COINCIDENT, Tag.COINCIDENT),
            spokes=(Spoke(0, 0, 0),),
            closed_staircase=True,
        )
        problems = diagram_violations(quads, broken)
        assert problems
        assert not verify_diagram(quads, broken)

    def test_length_mismatch(self, quads):
        """Should stop at boundaries of different lengths."""
        c = canonicalize(quads, parse_walk(quads, "1 -2"))
        broken = AnnularDiagram(right=c, left=Walk((0, 3, 0, 3)), tags=(Tag.COINCIDENT,), spokes=())
        assert "lengths differ" in diagram_violations(quads, broken)[0]

    def test_format_diagram(self, quads):
        """Should print one line per index."""
        diagram = annular_diagram(quads, parse_walk(quads, "1 -2 6 -3"))
        lines = format_diagram(quads, diagram).splitlines()
        assert len(lines) == len(diagram.right)
        assert all(line.split(": ")[1][0] in ("C", "S") for line in lines)

    def test_spoke_lookup(self):
        """Should find spokes by either boundary index."""
        diagram = AnnularDiagram(
            right=Walk((0, 3)),
            left=Walk((0, 3)),
            tags=(Tag.IN_STAIRCASE, Tag.COINCIDENT),
            spokes=(Spoke(0, 1, 6),),
        )
        assert diagram.spokes_at_right(2) == [Spoke(0, 1, 6)]
        assert diagram.spokes_at_left(1) == [Spoke(0, 1, 6)]
        assert not diagram.is_coincident(0)
        assert diagram.is_coincident(1)

    @given(
        length=st.integers(min_value=2, max_value=30),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=25, deadline=None)
    def test_spoke_index_covers_every_spoke(self, quads, length, seed):
        """Should list every spoke once at its right index and once at its left index."""
        c = random_walk(quads, length, seed)
        if canonicalize(quads, c).is_trivial:
            return
        diagram = annular_diagram(quads, c)
        n = len(diagram.right)
        at_right = [s for i in range(n) for s in diagram.spokes_at_right(i)]
        at_left = [s for i in range(n) for s in diagram.spokes_at_left(i)]
        assert Counter(at_right) == Counter(diagram.spokes)
        assert Counter(at_left) == Counter(diagram.spokes)
        for i in range(n):
            assert all(s.right_index == i for s in diagram.spokes_at_right(i))
            assert all(s.left_index == i for s in diagram.spokes_at_left(i))


class TestPartialDiagrams:
    """Tests for maximal thick double paths."""

    def test_preconditions(self, quads):
        """Should refuse powers and non-canonical curves."""
        power = canonicalize(quads, parse_walk(quads, "1 -2 1 -2"))
        with pytest.raises(PreconditionError, match="power"):
            maximal_partial_diagrams(quads, power)
        with pytest.raises(PreconditionError):
            maximal_partial_diagrams(quads, parse_walk(quads, "1 -1"))

    @given(
        length=st.integers(min_value=2, max_value=16),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=30, deadline=None)
    def test_same_vertex_pairs_share_a_vertex(self, quads, length, seed):
        """Should only pair indices whose vertices coincide in SAME configurations."""
        canonical = canonicalize(quads, random_walk(quads, length, seed))
        if canonical.is_trivial:
            return
        c, _ = primitive_root(quads, canonical)
        n = len(c)
        for diagram in maximal_partial_diagrams(quads, c):
            assert diagram.length >= 0
            for a, b, config in diagram.pairs(n):
                if config.kind is PairKind.SAME:
                    assert c.vertex(quads, a) == c.vertex(quads, b)
                else:
                    assert len(quads.face_walks[config.face]) == 4


class TestStrip:
    """Tests for the strip graph between c_R and c_L."""

    @staticmethod
    def _node_vertex(quads, diagram, strip, node):
        if node < strip.n:
            return diagram.right.vertex(quads, node)
        return diagram.left.vertex(quads, node - strip.n)

    @given(
        length=st.integers(min_value=2, max_value=30),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=30, deadline=None)
    def test_every_arc_is_an_edge_or_outside(self, quads, length, seed):
        """Should split the arcs at every node into diagram edges and the two outer regions."""
        c = random_walk(quads, length, seed)
        if canonicalize(quads, c).is_trivial:
            return
        diagram = annular_diagram(quads, c)
        strip = build_strip(quads, diagram)
        for node in range(2 * strip.n):
            if node >= strip.n and strip.coincident[node - strip.n]:
                assert not strip.edges[node] and not strip.exterior[node]
                continue
            vertex = self._node_vertex(quads, diagram, strip, node)
            edges, outside = set(strip.edges[node]), set(strip.exterior[node])
            assert not edges & outside
            assert edges | outside == set(quads.rotations[vertex])

    def test_boundaries_are_edges(self, quads):
        """Should link consecutive boundary vertices along c_R and c_L."""
        diagram = annular_diagram(quads, parse_walk(quads, "1 -2 6 -3 1 -2 6 -4"))
        strip = build_strip(quads, diagram)
        for i in range(strip.n):
            for side, boundary in ((Side.RIGHT, diagram.right), (Side.LEFT, diagram.left)):
                here, there = strip.node(side, i), strip.node(side, i + 1)
                assert strip.edges[here][boundary.arc(i)] == there
                assert strip.edges[there][boundary.arc(i) ^ 1] == here

    def test_spokes_are_edges(self, quads):
        """Should link the two ends of every spoke."""
        c = Walk((0, 3, 4, 7, 8, 11), True)
        diagram = annular_diagram(quads, c)
        assert diagram.spokes
        strip = build_strip(quads, diagram)
        for spoke in diagram.spokes:
            here = strip.node(Side.RIGHT, spoke.right_index)
            there = strip.node(Side.LEFT, spoke.left_index)
            assert strip.edges[here][spoke.arc] == there
            assert strip.edges[there][spoke.arc ^ 1] == here

    def test_sides_of_outer_arcs(self, quads):
        """Should put exactly the arcs turning right off c_R on its outer side."""
        diagram = annular_diagram(quads, parse_walk(quads, "1 -2 6 -3 1 -2 6 -4"))
        strip = build_strip(quads, diagram)
        right = diagram.right
        for i in range(strip.n):
            sector = set()
            arc = quads.rotate(right.arc(i), 1)
            while arc != right.arc(i - 1) ^ 1:
                sector.add(arc)
                arc = quads.rotate(arc, 1)
            node = strip.node(Side.RIGHT, i)
            outside = {a for a, side in strip.exterior[node].items() if side is Side.RIGHT}
            assert outside == sector

    def test_entries_start_outside(self, quads):
        """Should enter the strip from an outer arc through a diagram edge."""
        diagram = annular_diagram(quads, Walk((0, 3, 4, 7, 8, 11), True))
        strip = build_strip(quads, diagram)
        assert strip.entries
        for node, back, out, side in strip.entries:
            assert strip.exterior[node][back] is side
            assert out in strip.edges[node]
        for node, back, out in strip.passes:
            assert strip.exterior[node][back] is not strip.exterior[node][out]

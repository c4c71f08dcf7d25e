"""
Tests for the Surface Module
"""

import pytest

from src.errors import PreconditionError, SurfaceError, WalkError
from src.surface import (
    QuadSystem,
    SurfaceKind,
    as_quad_system,
    build_surface,
    format_surface,
    load_quad_system,
    load_surface,
    parse_surface,
    quadify,
    reduce_surface,
    transport_walk,
    turn,
    twin,
)
from src.walk import canonicalize, is_contractible, parse_walk, validate_walk
from tests.conftest import FIXTURES


class TestParseSurface:
    """Tests for the surface text format."""

    def test_parses_declarations(self):
        """Should read edges, rotations and perforations, skipping comments."""
        description = parse_surface(
            "# a cylinder\nedge 1 v v\n\nrotation v 1 -1  # clockwise\nperforated 1\n"
        )
        assert [(e.edge_id, e.v_from, e.v_to) for e in description.edges] == [(1, "v", "v")]
        assert description.rotations == {"v": [1, -1]}
        assert description.perforated == [1]

    def test_unknown_declaration(self):
        """Should reject unknown keywords with the line number."""
        with pytest.raises(SurfaceError, match="Line 2"):
            parse_surface("edge 1 v v\nvertex v\n")

    def test_bad_edge_ids(self):
        """Should reject zero, negative and non-numeric edge ids."""
        with pytest.raises(SurfaceError, match="0 is not allowed"):
            parse_surface("edge 0 v v\n")
        with pytest.raises(SurfaceError, match="positive"):
            parse_surface("edge -1 v v\n")
        with pytest.raises(SurfaceError, match="signed edge id"):
            parse_surface("rotation v one\n")

    def test_second_rotation_for_vertex(self):
        """Should reject two rotations for one vertex."""
        with pytest.raises(SurfaceError, match="second rotation"):
            parse_surface("edge 1 v v\nrotation v 1 -1\nrotation v -1 1\n")

    def test_format_is_inverse_of_parse(self):
        """Should print the bundled genus-2 surface exactly as stored."""
        text = (FIXTURES / "genus2.srf").read_text()
        assert format_surface(build_surface(parse_surface(text))) == text


class TestBuildSurface:
    """Tests for surface validation and topology."""

    def test_genus2_fixture(self, genus2):
        """Should build a one-vertex, one-face genus-2 surface."""
        assert genus2.vertex_count == 1
        assert genus2.edge_count == 4
        assert genus2.face_count == 1
        assert genus2.euler_characteristic == -2
        assert genus2.genus == 2
        assert genus2.kind is SurfaceKind.HYPERBOLIC
        assert len(genus2.face_walks[0]) == 8

    def test_torus_and_cylinder(self, torus, cylinder):
        """Should classify the low-genus fixtures."""
        assert torus.kind is SurfaceKind.TORUS
        assert torus.euler_characteristic == 0
        assert cylinder.kind is SurfaceKind.CYLINDER
        assert cylinder.boundary_count == 2
        assert cylinder.euler_characteristic == 0

    def test_sphere_without_edges(self):
        """Should accept a lone vertex as the sphere."""
        sphere = build_surface(parse_surface("rotation v\n"))
        assert sphere.kind is SurfaceKind.SPHERE
        assert sphere.face_count == 1

    def test_pants(self, pants):
        """Should count perforated faces as boundaries."""
        assert pants.boundary_count == 3
        assert pants.euler_characteristic == -1
        assert pants.kind is SurfaceKind.HYPERBOLIC

    def test_missing_arc_in_rotation(self):
        """Should reject rotations that leave an arc out."""
        with pytest.raises(SurfaceError, match="never listed"):
            build_surface(parse_surface("edge 1 v v\nedge 2 v v\nrotation v 1 -1 2\n"))

    def test_arc_listed_twice(self):
        """Should reject rotations listing an arc twice."""
        with pytest.raises(SurfaceError, match="listed twice"):
            build_surface(parse_surface("edge 1 v v\nrotation v 1 -1 1\n"))

    def test_duplicate_edge_id(self):
        """Should reject duplicate edge ids."""
        with pytest.raises(SurfaceError, match="Duplicate"):
            build_surface(parse_surface("edge 1 v v\nedge 1 v v\nrotation v 1 -1\n"))

    def test_arc_at_wrong_vertex(self):
        """Should reject an arc listed at a vertex it does not leave."""
        with pytest.raises(SurfaceError, match="does not leave"):
            build_surface(parse_surface("edge 1 a b\nrotation a -1\nrotation b 1\n"))

    def test_disconnected(self):
        """Should reject disconnected graphs."""
        text = "edge 1 a a\nedge 2 b b\nrotation a 1 -1\nrotation b 2 -2\n"
        with pytest.raises(SurfaceError, match="not connected"):
            build_surface(parse_surface(text))

    def test_missing_file(self, tmp_path):
        """Should raise FileNotFoundError for missing files."""
        with pytest.raises(FileNotFoundError):
            load_surface(tmp_path / "nowhere.srf")


class TestNavigation:
    """Tests for arcs, rotations and turns."""

    def test_twin(self):
        """Should pair arcs 2k and 2k+1."""
        assert twin(4) == 5
        assert twin(5) == 4

    def test_labels(self, genus2):
        """Should map signed edge ids to arcs and back."""
        assert genus2.arc_for(3) == 4
        assert genus2.arc_for(-3) == 5
        assert genus2.signed_label(5) == -3
        with pytest.raises(WalkError):
            genus2.arc_for(9)

    def test_turns(self, quads):
        """Should count corners clockwise in (-d/2, d/2]."""
        assert turn(quads, 0, 0) == 0
        assert turn(quads, 0, 6) == 1
        assert turn(quads, 0, 8) == 4
        assert turn(quads, 0, 10) == -2
        assert turn(quads, 0, 12) == -1
        assert quads.turn(6, 0) == -1

    def test_turn_needs_common_origin(self, quads):
        """Should refuse arcs leaving different vertices."""
        with pytest.raises(WalkError):
            turn(quads, 0, 1)

    def test_face_next_closes_faces(self, quads):
        """Should trace every face back to its first arc."""
        for walk in quads.face_walks:
            assert quads.face_next(walk[-1]) == walk[0]
            assert quads.face_prev(walk[0]) == walk[-1]

    def test_rotate(self, quads):
        """Should move clockwise around the origin."""
        assert quads.rotate(0, 1) == 6
        assert quads.rotate(0, -1) == 12
        assert quads.rotate(0, 8) == 0


class TestQuadify:
    """Tests for reduction and the system of quads."""

    def test_genus2_quads(self, genus2):
        """Should produce a valid system of quads with the same genus."""
        q, _ = quadify(genus2)
        assert isinstance(q, QuadSystem)
        assert q.invariant_violations() == []
        assert q.vertex_count == 2
        assert q.edge_count == 8
        assert all(len(walk) == 4 for walk in q.face_walks)
        assert q.euler_characteristic == -2

    def test_matches_bundled_quads(self, genus2, quads):
        """Should reproduce the bundled genus2.quads byte for byte."""
        q, _ = quadify(genus2)
        assert format_surface(q) == (FIXTURES / "genus2.quads").read_text()
        assert q == quads

    def test_rejects_non_negative_euler_characteristic(self, torus):
        """Should refuse surfaces that are not hyperbolic."""
        with pytest.raises(PreconditionError):
            quadify(torus)

    def test_load_quad_system_checks_invariants(self):
        """Should refuse a surface whose faces are not quads."""
        with pytest.raises(SurfaceError, match="Not a system of quads"):
            load_quad_system(FIXTURES / "genus2.srf")

    def test_invariant_violations(self, genus2):
        """Should report faces of the wrong length."""
        problems = as_quad_system(genus2).invariant_violations()
        assert any("length 8" in p for p in problems)

    def test_reduce_two_vertex_surface(self, quads):
        """Should contract one tree edge and delete edges down to one face."""
        reduction = reduce_surface(quads)
        assert len(reduction.tree_edges) == 1
        assert len(set(reduction.deleted_edges)) == 3
        assert len(reduction.kept_arcs) == 8

    def test_quadify_a_quad_system(self, quads):
        """Should quadify surfaces with several vertices."""
        again, transport = quadify(quads)
        assert again.invariant_violations() == []
        assert again.euler_characteristic == -2
        c = parse_walk(quads, "1 -4 2 -7")
        assert is_contractible(again, transport_walk(transport, c))


class TestTransport:
    """Tests for transporting walks onto the quad system."""

    def test_face_boundary_stays_contractible(self, genus2):
        """Should map the boundary of the face to a contractible curve."""
        q, transport = quadify(genus2)
        face = parse_walk(genus2, "1 2 -1 -2 3 4 -3 -4")
        assert canonicalize(q, transport_walk(transport, face)).is_trivial

    def test_loop_stays_essential(self, genus2):
        """Should map an edge loop to a non-contractible curve of length 2."""
        q, transport = quadify(genus2)
        image = transport_walk(transport, parse_walk(genus2, "1"))
        validate_walk(q, image)
        assert len(image) == 2
        assert not is_contractible(q, image)

    def test_trivial_walk(self, genus2):
        """Should map the trivial walk to the trivial walk."""
        _, transport = quadify(genus2)
        image = transport_walk(transport, parse_walk(genus2, "@v"))
        assert image.is_trivial
        assert image.basepoint == 0

"""
Tests for the Unzip Module
"""

import logging
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import src.unzip as unzip_module
from src.counting import self_intersection_number
from src.errors import PreconditionError, WalkError
from src.immersion import Immersion, crossing_count, minimal_immersion
from src.unzip import (
    UnzipState,
    check_embedding,
    is_simple,
    mark_switchable,
    precompute_anchor_orders,
    switch,
    unzip,
    z_function,
)
from src.walk import (
    Walk,
    canonicalize,
    freely_homotopic,
    parse_walk,
    primitive_root,
    random_walk,
)


class TestPreprocessing:
    """Tests for the string preprocessing of unzip."""

    def test_z_function(self):
        """Should compute longest common prefixes with every suffix."""
        assert z_function([1, 1, 2, 1, 1]) == [5, 1, 0, 2, 1]
        assert z_function([]) == []
        assert z_function([3, 3, 3]) == [3, 2, 1]

    def test_anchor_preconditions(self, quads):
        """Should only order occurrences of canonical primitive curves."""
        with pytest.raises(PreconditionError, match="canonical"):
            precompute_anchor_orders(quads, parse_walk(quads, "1 -1 1 -2"))
        power = canonicalize(quads, parse_walk(quads, "1 -2 1 -2"))
        with pytest.raises(PreconditionError, match="power"):
            precompute_anchor_orders(quads, power)
        with pytest.raises(PreconditionError):
            precompute_anchor_orders(quads, Walk((), True, 0))

    def test_marks(self, quads):
        """Should mark nothing on a curve without staircases."""
        assert mark_switchable(quads, parse_walk(quads, "1 -2")) == [None, None]
        with pytest.raises(PreconditionError):
            mark_switchable(quads, Walk((), True, 0))

    def test_switch_requires_mark(self, quads):
        """Should refuse to switch an unmarked occurrence."""
        state = UnzipState.start(quads, parse_walk(quads, "1 -2"))
        with pytest.raises(PreconditionError, match="not switchable"):
            switch(quads, state, 0)


class TestUnzip:
    """Tests for the incremental insertion."""

    def test_output_is_homotopic_and_complete(self, quads):
        """Should return a homotopic walk of the same length with every occurrence placed."""
        c = canonicalize(quads, parse_walk(quads, "1 -2 6 -3"))
        walk, immersion = unzip(quads, c)
        assert len(walk) == len(c)
        assert freely_homotopic(quads, walk, c)
        assert immersion.violations() == []

    def test_check_embedding(self, genus2, quads):
        """Should tell embeddings from immersions with crossings."""
        c = parse_walk(quads, "1 -2")
        assert check_embedding(quads, Immersion.initial(quads, [c]))
        curve, immersion = minimal_immersion(genus2, parse_walk(genus2, "1 1"))
        assert not check_embedding(immersion.surface, immersion)


class TestIsSimple:
    """Tests for the simplicity decision."""

    @pytest.mark.parametrize("curve", ["1", "1 2 -1 -2", "1 2 -1 -2 3 4 -3 -4"])
    def test_simple_curves(self, genus2, curve):
        """Should accept curves with no forced crossing."""
        simple, embedding = is_simple(genus2, parse_walk(genus2, curve))
        assert simple
        if embedding is not None:
            assert crossing_count(embedding.surface, embedding) == 0

    @pytest.mark.parametrize("curve", ["1 1", "1 1 1"])
    def test_powers(self, genus2, curve):
        """Should reject proper powers without unzipping."""
        assert is_simple(genus2, parse_walk(genus2, curve)) == (False, None)

    def test_contractible(self, quads):
        """Should call contractible curves simple."""
        simple, embedding = is_simple(quads, parse_walk(quads, "1 -4 2 -7"))
        assert simple
        assert embedding is not None and embedding.curves[0].is_trivial

    def test_length_two_curve_without_verification(self, quads):
        """Should embed a curve of length two on its own."""
        simple, embedding = is_simple(quads, parse_walk(quads, "1 -2"), verify=False)
        assert simple
        assert embedding is not None
        assert crossing_count(quads, embedding) == 0

    def test_low_genus(self, torus):
        """Should answer from the torus classes."""
        assert is_simple(torus, parse_walk(torus, "1 2")) == (True, None)
        assert is_simple(torus, parse_walk(torus, "1 1")) == (False, None)

    def test_preconditions(self, genus2, pants):
        """Should refuse paths and perforated surfaces."""
        with pytest.raises(WalkError):
            is_simple(genus2, parse_walk(genus2, "1", closed=False))
        with pytest.raises(PreconditionError, match="experimental"):
            is_simple(pants, parse_walk(pants, "1"))

    @pytest.mark.slow
    @given(
        length=st.integers(min_value=1, max_value=12),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=20, deadline=None)
    def test_agrees_with_intersection_number(self, quads, length, seed):
        """Should embed the unzipped curve exactly when i(c) is zero."""
        canonical = canonicalize(quads, random_walk(quads, length, seed))
        if canonical.is_trivial:
            return
        root, p = primitive_root(quads, canonical)
        if p > 1:
            return
        _, immersion = unzip(quads, root)
        assert check_embedding(quads, immersion) == (self_intersection_number(quads, root) == 0)

    def test_answer_does_not_need_counting(self, quads, monkeypatch):
        """Should decide simplicity from unzip alone unless asked to verify."""

        def refuse(*args, **kwargs):
            raise AssertionError("intersection number computed")

        monkeypatch.setattr("src.counting.self_intersection_number", refuse)
        simple, embedding = is_simple(quads, parse_walk(quads, "1 -2 6 -3"))
        assert embedding is not None or not simple
        with pytest.raises(AssertionError, match="intersection number computed"):
            is_simple(quads, parse_walk(quads, "1 -2 6 -3"), verify=True)

    def test_verification_only_warns(self, quads, monkeypatch, caplog):
        """Should keep the unzip answer when the cross-check disagrees."""
        c = parse_walk(quads, "1 -2")
        simple, _ = is_simple(quads, c)
        monkeypatch.setattr(
            "src.counting.self_intersection_number", lambda *args, **kwargs: int(simple)
        )
        with caplog.at_level(logging.WARNING, logger="src.unzip"):
            assert is_simple(quads, c, verify=True)[0] == simple
        assert "intersection number says" in caplog.text


def switch_needed_by_scan(q, state, i):
    """Reference switch test that looks at every inserted passage on the left arc."""
    arcs = state.arcs
    a = arcs[i]
    left = q.rotate(a, -1)
    degree = q.degree(q.origin(a))

    def offset(arc):
        return (q.position[arc] - q.position[a]) % degree

    mine_block = arcs[i - 1] ^ 1
    mine = (offset(mine_block), state.within(i - 1, mine_block))
    for _, j in state.orders[left >> 1]:
        if arcs[j] == left:
            if j == 0:
                continue
            other_index, other_block = j - 1, arcs[j - 1] ^ 1
        else:
            if j + 1 >= i:
                continue
            other_index, other_block = j + 1, arcs[j + 1]
        if offset(other_block) == 0:
            continue
        near = (offset(left), state.within(j, left))
        far = (offset(other_block), state.within(other_index, other_block))
        if (near < mine) != (far < mine):
            return True
    return False


class TestSwitchSearch:
    """Tests for the dichotomy deciding whether to switch."""

    @given(
        length=st.integers(min_value=2, max_value=30),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=40, deadline=None)
    def test_matches_full_scan_on_simple_curves(self, quads, length, seed):
        """Should reach the same decision as scanning every passage."""
        canonical = canonicalize(quads, random_walk(quads, length, seed))
        if canonical.is_trivial:
            return
        root, p = primitive_root(quads, canonical)
        if p > 1 or self_intersection_number(quads, root) != 0:
            return
        decisions = []
        fast = unzip_module._needs_switch

        def compare(q, state, i):
            answer = fast(q, state, i)
            decisions.append((answer, switch_needed_by_scan(q, state, i)))
            return answer

        with pytest.MonkeyPatch.context() as patch:
            patch.setattr(unzip_module, "_needs_switch", compare)
            _, immersion = unzip(quads, root)
        assert all(fast_answer == scanned for fast_answer, scanned in decisions)
        assert check_embedding(quads, immersion)


@pytest.mark.slow
class TestPerformance:
    """Smoke tests of the running time on long curves."""

    def test_unzip_long_curve(self, quads):
        """Should unzip a curve of length about 2000 well within a second or two."""
        canonical = canonicalize(quads, random_walk(quads, 2000, 11))
        root, _ = primitive_root(quads, canonical)
        started = time.perf_counter()
        _, immersion = unzip(quads, root)
        check_embedding(quads, immersion)
        assert time.perf_counter() - started < 2.0

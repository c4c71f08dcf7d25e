"""
Tests for the Oracle Module
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.config import CurveCrossConfig
from src.counting import self_intersection_number
from src.errors import BudgetExceededError, PreconditionError
from src.oracle import (
    OracleBudget,
    all_immersions,
    brute_force_intersection,
    enumerate_homotopic_geodesics,
    immersion_count,
    random_homotopic_perturbation,
)
from src.surface import quadify, transport_walk
from src.walk import (
    canonicalize,
    freely_homotopic,
    is_geodesic,
    least_rotation,
    parse_walk,
    random_walk,
)


class TestOracleBudget:
    """Tests for the OracleBudget model."""

    def test_defaults(self):
        """Should use small default bounds."""
        budget = OracleBudget()
        assert budget.max_length == 6
        assert budget.max_depth == 64
        assert budget.max_enumeration == 200_000
        assert budget.seed == 0

    def test_validation(self):
        """Should reject non-positive bounds."""
        with pytest.raises(ValidationError):
            OracleBudget(max_length=0)
        with pytest.raises(ValidationError):
            OracleBudget(max_enumeration=-5)
        with pytest.raises(ValidationError):
            OracleBudget(seed=-1)

    def test_from_config(self):
        """Should take its bounds from the configuration."""
        config = CurveCrossConfig(oracle_budget=4, oracle_max_enumeration=99, oracle_seed=3)
        budget = OracleBudget.from_config(config)
        assert (budget.max_length, budget.max_enumeration, budget.seed) == (4, 99, 3)
        assert budget.max_depth == 64


class TestHomotopicGeodesics:
    """Tests for geodesic enumeration."""

    def test_contains_canonical_form(self, quads):
        """Should list the canonical form among homotopic geodesics."""
        c = parse_walk(quads, "1 -2 6 -3")
        canonical = canonicalize(quads, c)
        start = least_rotation(canonical.arcs)
        found = enumerate_homotopic_geodesics(quads, c)
        assert canonical.arcs[start:] + canonical.arcs[:start] in [g.arcs for g in found]
        for g in found:
            assert is_geodesic(quads, g)
            assert freely_homotopic(quads, g, c)
            assert len(g) == len(canonical)

    def test_contractible(self, quads):
        """Should return the trivial walk alone."""
        (found,) = enumerate_homotopic_geodesics(quads, parse_walk(quads, "1 -4 2 -7"))
        assert found.is_trivial

    def test_budget(self, quads):
        """Should stop at the length and enumeration bounds."""
        c = parse_walk(quads, "1 -2")
        with pytest.raises(BudgetExceededError, match="exceeds"):
            enumerate_homotopic_geodesics(quads, c, OracleBudget(max_length=1))
        with pytest.raises(BudgetExceededError, match="enumeration"):
            enumerate_homotopic_geodesics(quads, c, OracleBudget(max_enumeration=1))


class TestBruteForce:
    """Tests for the exhaustive intersection numbers."""

    def test_immersion_count(self, quads):
        """Should count every per-edge order."""
        curves = [parse_walk(quads, "1 -2 1 -2")]
        assert immersion_count(quads, curves) == 4
        assert sum(1 for _ in all_immersions(quads, curves)) == 4

    def test_self_intersection(self, quads):
        """Should find the minimal crossing count of short curves."""
        assert brute_force_intersection(quads, parse_walk(quads, "1 -2")) == 0
        assert brute_force_intersection(quads, parse_walk(quads, "1 -2 1 -2")) == 1
        assert brute_force_intersection(quads, parse_walk(quads, "1 -4 2 -7")) == 0

    def test_pair(self, genus2):
        """Should find one crossing between the two curves of a handle."""
        q, transport = quadify(genus2)
        a = transport_walk(transport, parse_walk(genus2, "1"))
        b = transport_walk(transport, parse_walk(genus2, "2"))
        c = transport_walk(transport, parse_walk(genus2, "3"))
        assert brute_force_intersection(q, a, b) == 1
        assert brute_force_intersection(q, a, c) == 0

    def test_immersion_budget(self, quads):
        """Should refuse to enumerate more immersions than allowed."""
        c = parse_walk(quads, "1 -2 1 -2")
        with pytest.raises(BudgetExceededError):
            brute_force_intersection(quads, c, budget=OracleBudget(max_enumeration=3))

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(12))
    def test_agrees_with_counting(self, quads, seed):
        """Should match the counting pipeline on short random curves."""
        c = random_walk(quads, 4, seed)
        if len(canonicalize(quads, c)) > 6:
            pytest.skip("canonical form too long for the oracle")
        budget = OracleBudget(max_enumeration=2_000_000)
        assert brute_force_intersection(quads, c, budget=budget) == self_intersection_number(
            quads, c
        )


class TestPerturbation:
    """Tests for random homotopic perturbations."""

    def test_zero_steps(self, quads):
        """Should leave the walk unchanged."""
        c = parse_walk(quads, "1 -2")
        assert random_homotopic_perturbation(quads, c, 0, seed=1) == c

    def test_step_bounds(self, quads):
        """Should refuse negative and over-budget step counts."""
        c = parse_walk(quads, "1 -2")
        with pytest.raises(PreconditionError):
            random_homotopic_perturbation(quads, c, -1, seed=0)
        with pytest.raises(BudgetExceededError):
            random_homotopic_perturbation(quads, c, 65, seed=0)

    def test_deterministic(self, quads):
        """Should repeat itself for a fixed seed."""
        c = parse_walk(quads, "1 -2 6 -3")
        first = random_homotopic_perturbation(quads, c, 10, seed=5)
        assert random_homotopic_perturbation(quads, c, 10, seed=5) == first

    @given(
        length=st.integers(min_value=0, max_value=10),
        steps=st.integers(min_value=0, max_value=20),
        seed=st.integers(min_value=0, max_value=100_000),
    )
    @settings(max_examples=40, deadline=None)
    def test_preserves_homotopy_class(self, quads, length, steps, seed):
        """Should stay in the free homotopy class of the input."""
        c = random_walk(quads, length, seed)
        perturbed = random_homotopic_perturbation(quads, c, steps, seed)
        assert freely_homotopic(quads, c, perturbed)

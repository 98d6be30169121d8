import itertools

import numpy as np
import pytest

from mcsearch import (
    FunctionClass,
    affine_transform,
    clamp_below,
    is_member,
    make_grid,
    random_member,
    tabulate,
    tabulate_family,
    truncate,
)
from conftest import random_grid

ALL_CLASSES = list(FunctionClass)


def pairwise_supermodular(u, tol=1e-9):
    """Quantified cross-difference test over every node pair (oracle)."""
    grid = u.grid
    nodes = grid.nodes
    for i, j in itertools.combinations(range(grid.size), 2):
        meet = np.minimum(nodes[i], nodes[j])
        join = np.maximum(nodes[i], nodes[j])
        lhs = u.values[grid.node_index(meet)] + u.values[grid.node_index(join)]
        if lhs < u.values[i] + u.values[j] - tol:
            return False
    return True


class TestFamilies:
    def test_linear(self, unit_square):
        u = tabulate_family("linear", unit_square, a=[1, 1])
        assert u.values == (2.0, 3.0, 3.0, 4.0)

    def test_product(self, unit_square):
        u = tabulate_family("product", unit_square)
        assert u.values == (1.0, 2.0, 2.0, 4.0)
        assert is_member(u, FunctionClass.INCREASING_ULTRAMODULAR).member

    def test_min_family(self):
        g = make_grid([[0, 1, 2], [0, 1, 2]])
        u = tabulate_family("min", g)
        assert is_member(u, FunctionClass.INCREASING_SUPERMODULAR).member
        assert not is_member(u, FunctionClass.COMPONENTWISE_CONVEX).member

    def test_custom(self, unit_square, counterexample):
        assert counterexample.values == (5.0, -5.0, 14.0, 5.0)

    def test_errors(self, unit_square):
        with pytest.raises(ValueError, match="unknown"):
            tabulate_family("cubic", unit_square)
        with pytest.raises(ValueError, match="grid is 2-D"):
            tabulate_family("linear", unit_square, a=[1.0])
        with pytest.raises(ValueError, match="values"):
            tabulate_family("custom", unit_square)
        with pytest.raises(ValueError, match="finite"):
            tabulate(unit_square, [1, 2, 3, float("nan")])
        with pytest.raises(ValueError, match="one value per node"):
            tabulate(unit_square, [1, 2, 3])


class TestMembership:
    def test_counterexample_is_supermodular(self, counterexample):
        # cross-difference 5 + 5 - (-5) - 14 = 1 >= 0
        assert is_member(counterexample, FunctionClass.SUPERMODULAR).member

    def test_truncated_counterexample_fails(self, counterexample):
        res = is_member(truncate(counterexample), FunctionClass.SUPERMODULAR)
        assert not res.member
        assert res.witness.constraint == "supermodular"
        assert res.witness.margin == -4.0
        assert res.witness.nodes == ((1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0))

    def test_increasing_witness_is_lexicographically_first(self):
        g = make_grid([[0, 1, 2]])
        res = is_member(tabulate(g, [3, 2, 1]), FunctionClass.INCREASING)
        assert not res.member
        assert res.witness.nodes == ((0.0,), (1.0,))
        assert res.witness.margin == -1.0

    def test_componentwise_convex_nonuniform_spacing(self):
        # slopes on {0,1,3}: equal slopes pass, a dip fails
        g = make_grid([[0, 1, 3]])
        assert is_member(tabulate(g, [0, 1, 3]), FunctionClass.COMPONENTWISE_CONVEX).member
        res = is_member(tabulate(g, [0, 2, 3]), FunctionClass.COMPONENTWISE_CONVEX)
        assert not res.member and res.witness.constraint == "componentwise_convex"

    def test_convex_1d(self):
        g = make_grid([[0, 1, 2]])
        assert is_member(tabulate(g, [1, 0, 1]), FunctionClass.CONVEX).member
        res = is_member(tabulate(g, [0, 1, 0]), FunctionClass.CONVEX)
        assert not res.member
        assert res.witness.constraint == "subgradient"
        assert res.witness.nodes == ((1.0,),)

    def test_product_is_cw_convex_but_not_convex(self):
        # on {0,1,2}^2 the product kinks upward at (1,1) against the diagonal
        g = make_grid([[0, 1, 2], [0, 1, 2]])
        u = tabulate_family("product", g)
        assert is_member(u, FunctionClass.COMPONENTWISE_CONVEX).member
        assert is_member(u, FunctionClass.SUPERMODULAR).member
        res = is_member(u, FunctionClass.CONVEX)
        assert not res.member and res.witness.nodes == ((1.0, 1.0),)

    def test_convex_implies_componentwise_convex(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = random_grid(rng, (3, 3))
            u = random_member(FunctionClass.CONVEX, g, rng)
            assert is_member(u, FunctionClass.COMPONENTWISE_CONVEX).member

    def test_convex_equals_componentwise_convex_in_1d(self):
        rng = np.random.default_rng(3)
        g = make_grid([[0.0, 0.7, 1.1, 2.5]])
        for _ in range(40):
            u = tabulate(g, rng.normal(size=g.size))
            assert is_member(u, FunctionClass.CONVEX).member == is_member(
                u, FunctionClass.COMPONENTWISE_CONVEX
            ).member

    def test_local_supermodular_matches_pairwise_oracle(self):
        rng = np.random.default_rng(4)
        shapes = [(2, 2), (3, 3), (2, 3, 2), (3, 3, 3)]
        agree_fail = agree_pass = 0
        for i in range(60):
            g = random_grid(rng, shapes[i % len(shapes)])
            if i % 2:
                u = random_member(FunctionClass.SUPERMODULAR, g, rng)
            else:
                u = tabulate(g, rng.normal(size=g.size))
            local = is_member(u, FunctionClass.SUPERMODULAR).member
            assert local == pairwise_supermodular(u)
            agree_pass += local
            agree_fail += not local
        assert agree_pass > 0 and agree_fail > 0

    def test_composite_classes_are_conjunctions(self, counterexample):
        # supermodular but not increasing: (1,2) drops to -5
        assert not is_member(counterexample, FunctionClass.INCREASING_SUPERMODULAR).member
        g = make_grid([[0, 1], [0, 1]])
        u = tabulate(g, [0, 1, 1, 3])  # increasing and supermodular
        assert is_member(u, FunctionClass.INCREASING_SUPERMODULAR).member
        # 2x2 axes have no slope triples, so ultramodular reduces to supermodular
        assert is_member(u, FunctionClass.INCREASING_ULTRAMODULAR).member

    def test_rejects_nonpositive_tol(self, counterexample):
        with pytest.raises(ValueError, match="tol"):
            is_member(counterexample, FunctionClass.SUPERMODULAR, tol=0.0)


class TestOperators:
    def test_truncate_counterexample(self, counterexample):
        assert truncate(counterexample).values == (5.0, 0.0, 14.0, 5.0)

    def test_truncate_identity_on_nonnegative(self, unit_square):
        u = tabulate(unit_square, [0, 1, 2, 3])
        assert truncate(u) == u

    def test_truncate_all_negative(self, unit_square):
        u = tabulate(unit_square, [-1, -2, -3, -4])
        assert truncate(u).values == (0.0, 0.0, 0.0, 0.0)

    def test_affine_identity(self, counterexample):
        assert affine_transform(counterexample, 1.0, 0.0) == counterexample

    def test_affine_values(self):
        g = make_grid([[0, 1]])
        assert affine_transform(tabulate(g, [0, 2]), 2.0, 1.0).values == (1.0, 5.0)

    def test_affine_rejects_bad_parameters(self, counterexample):
        with pytest.raises(ValueError, match="slope"):
            affine_transform(counterexample, 0.0, 1.0)
        with pytest.raises(ValueError, match="slope"):
            affine_transform(counterexample, -2.0, 1.0)
        with pytest.raises(ValueError, match="intercept"):
            affine_transform(counterexample, 1.0, -1.0)

    def test_clamp_below_min_is_identity(self, counterexample):
        assert clamp_below(counterexample, -100.0) == counterexample

    def test_clamp_above_max_is_constant(self, counterexample):
        assert clamp_below(counterexample, 20.0).values == (20.0,) * 4

    def test_clamp_zero_equals_truncate(self, counterexample):
        assert clamp_below(counterexample, 0.0) == truncate(counterexample)

    def test_clamp_rejects_nonfinite_level(self, counterexample):
        with pytest.raises(ValueError, match="finite"):
            clamp_below(counterexample, float("inf"))

    def test_clamp_is_shifted_truncation(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            g = random_grid(rng, (3, 2))
            u = tabulate(g, rng.normal(0, 3, size=g.size))
            level = float(rng.uniform(-2, 2))
            shifted = tabulate(g, u.values_array - level)
            rebuilt = truncate(shifted).values_array + level
            assert np.allclose(clamp_below(u, level).values_array, rebuilt, atol=1e-12)

    @pytest.mark.parametrize("fc", ALL_CLASSES, ids=lambda c: c.value)
    def test_affine_preserves_membership(self, fc):
        rng = np.random.default_rng(8)
        for _ in range(10):
            shape = (3, 3) if fc is not FunctionClass.INCREASING else (4,)
            g = random_grid(rng, shape)
            u = random_member(fc, g, rng)
            image = affine_transform(u, float(rng.uniform(0.2, 4.0)), float(rng.uniform(0, 3)))
            assert is_member(image, fc).member


class TestRandomMembers:
    @pytest.mark.parametrize("fc", ALL_CLASSES, ids=lambda c: c.value)
    def test_members_verify(self, fc):
        rng = np.random.default_rng(10)
        for shape in [(2, 2), (3, 4), (2, 3, 2)]:
            u = random_member(fc, random_grid(rng, shape), rng)
            assert is_member(u, fc).member

    def test_deterministic_given_rng_state(self, unit_square):
        a = random_member(FunctionClass.INCREASING, unit_square, np.random.default_rng(5))
        b = random_member(FunctionClass.INCREASING, unit_square, np.random.default_rng(5))
        assert a == b

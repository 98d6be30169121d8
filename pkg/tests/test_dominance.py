import numpy as np
import pytest

from mcsearch import (
    FunctionClass,
    concordance_transfer,
    dominates,
    dominates_increasing_bruteforce,
    expectation,
    fosd_shift,
    is_member,
    make_grid,
    make_pmf,
    marginal,
    mean_preserving_spread,
)
from conftest import random_grid, random_pmf

FC = FunctionClass


class TestVerdicts:
    def test_concordant_pair_dominates_on_supermodular(self, unit_square):
        f = make_pmf(unit_square, [0.5, 0, 0, 0.5])
        g = make_pmf(unit_square, [0.25] * 4)
        res = dominates(f, g, FC.SUPERMODULAR)
        assert res.verdict == "dominates" and bool(res)
        assert res.lp_optimum >= -1e-9

    def test_reflexivity_all_classes(self, unit_square):
        pmf = make_pmf(unit_square, [0.1, 0.2, 0.3, 0.4])
        for fc in FC:
            res = dominates(pmf, pmf, fc)
            assert res.verdict == "dominates"
            assert abs(res.lp_optimum) <= 1e-9
        # and symmetrically for a distinct equal-valued copy
        res = dominates(make_pmf(unit_square, [0.1, 0.2, 0.3, 0.4]), pmf, FC.INCREASING)
        assert res.verdict == "dominates"

    def test_fosd_pair_increasing(self):
        g1 = make_grid([[0, 2]])
        f = make_pmf(g1, [0.25, 0.75])
        g = make_pmf(g1, [0.5, 0.5])
        assert dominates(f, g, FC.INCREASING).verdict == "dominates"
        rev = dominates(g, f, FC.INCREASING)
        assert rev.verdict == "fails"
        # the only violating direction is the upper set {2}
        assert rev.witness is not None
        assert rev.lp_optimum == pytest.approx(-0.25, abs=1e-9)

    def test_failure_witness_is_sound(self, unit_square):
        f = make_pmf(unit_square, [0.5, 0, 0, 0.5])
        g = make_pmf(unit_square, [0.25] * 4)
        res = dominates(g, f, FC.SUPERMODULAR)
        assert res.verdict == "fails"
        w = res.witness
        assert is_member(w, FC.SUPERMODULAR).member
        gap = expectation(g, w) - expectation(f, w)
        assert gap < -1e-9
        assert gap == pytest.approx(res.lp_optimum, abs=1e-9)

    def test_witness_sound_on_random_failures(self):
        rng = np.random.default_rng(21)
        seen = 0
        for _ in range(40):
            grid = random_grid(rng, (3, 3))
            f, g = random_pmf(grid, rng), random_pmf(grid, rng)
            for fc in (FC.INCREASING, FC.SUPERMODULAR, FC.CONVEX, FC.INCREASING_ULTRAMODULAR):
                res = dominates(f, g, fc)
                if res.verdict == "fails":
                    seen += 1
                    assert is_member(res.witness, fc).member
                    assert expectation(f, res.witness) - expectation(g, res.witness) < -1e-9
        assert seen > 10

    def test_embeds_distinct_grids(self):
        f = make_pmf(make_grid([[0, 1]]), [0.2, 0.8])
        g = make_pmf(make_grid([[0, 2]]), [0.2, 0.8])
        # g pushes mass to 2 > 1, so g dominates f on increasing, not conversely
        assert dominates(g, f, FC.INCREASING).verdict == "dominates"
        assert dominates(f, g, FC.INCREASING).verdict == "fails"

    def test_variable_guard(self):
        axis = list(range(72))
        grid = make_grid([axis, axis])
        f = make_pmf(grid, [1.0 / grid.size] * grid.size)
        with pytest.raises(ValueError, match="guard"):
            dominates(f, f, FC.INCREASING)

    def test_rejects_nonpositive_tol(self, unit_square):
        pmf = make_pmf(unit_square, [0.25] * 4)
        with pytest.raises(ValueError, match="tol"):
            dominates(pmf, pmf, FC.INCREASING, tol=-1e-9)


class TestBruteForce:
    def test_degenerate_at_maximum_dominates(self, unit_square):
        f = make_pmf(unit_square, [0, 0, 0, 1])
        g = make_pmf(unit_square, [0.25] * 4)
        assert dominates_increasing_bruteforce(f, g)

    def test_degenerate_at_maximum_is_not_dominated(self, unit_square):
        f = make_pmf(unit_square, [0.25] * 4)
        g = make_pmf(unit_square, [0, 0, 0, 1])
        assert not dominates_increasing_bruteforce(f, g)

    def test_node_cap(self):
        grid = make_grid([list(range(13))])
        f = make_pmf(grid, [1.0 / 13] * 13)
        with pytest.raises(ValueError, match="12"):
            dominates_increasing_bruteforce(f, f)

    def test_matches_lp_on_random_pairs(self):
        rng = np.random.default_rng(22)
        grid = make_grid([[0, 1, 2], [0, 1, 2]])
        outcomes = {True: 0, False: 0}
        for i in range(60):
            f, g = random_pmf(grid, rng), random_pmf(grid, rng)
            if i % 4 == 0:
                f = g  # exercise the boundary case exactly
            lp = dominates(f, g, FC.INCREASING).verdict == "dominates"
            bf = dominates_increasing_bruteforce(f, g)
            assert lp == bf
            outcomes[bf] += 1
        assert outcomes[True] > 0 and outcomes[False] > 0


class TestGenerators:
    def test_fosd_shift_construction(self):
        g = make_pmf(make_grid([[0, 2]]), [0.5, 0.5])
        shifted = fosd_shift(g, (0,), (2,), 0.25)
        assert shifted.mass == (0.25, 0.75)

    def test_fosd_shift_identity(self):
        g = make_pmf(make_grid([[0, 2]]), [0.5, 0.5])
        assert fosd_shift(g, (0,), (2,), 0.0) == g

    def test_fosd_shift_incomparable_nodes(self, unit_square):
        g = make_pmf(unit_square, [0.25] * 4)
        with pytest.raises(ValueError, match="componentwise"):
            fosd_shift(g, (1, 2), (2, 1), 0.1)

    def test_fosd_shift_insufficient_mass(self):
        g = make_pmf(make_grid([[0, 2]]), [0.1, 0.9])
        with pytest.raises(ValueError, match="cannot move"):
            fosd_shift(g, (0,), (2,), 0.2)

    def test_spread_symmetric(self):
        g = make_pmf(make_grid([[0, 1, 2]]), [0, 1, 0])
        spread = mean_preserving_spread(g, 0, (1,), 1.0)
        assert spread.mass == (0.5, 0.0, 0.5)

    def test_spread_nonuniform_weights(self):
        # lambda * 0 + (1 - lambda) * 3 = 1 forces weights (2/3, 1/3)
        g = make_pmf(make_grid([[0, 1, 3]]), [0, 1, 0])
        spread = mean_preserving_spread(g, 0, (1,), 1.0)
        assert spread.mass[0] == pytest.approx(2 / 3)
        assert spread.mass[2] == pytest.approx(1 / 3)
        mean_before = 1.0
        mean_after = sum(m * x for m, x in zip(spread.mass, [0, 1, 3]))
        assert mean_after == pytest.approx(mean_before, abs=1e-12)

    def test_spread_identity(self):
        g = make_pmf(make_grid([[0, 1, 2]]), [0.2, 0.6, 0.2])
        assert mean_preserving_spread(g, 0, (1,), 0.0) == g

    def test_spread_boundary_and_mass_errors(self):
        g = make_pmf(make_grid([[0, 1, 2]]), [0.2, 0.6, 0.2])
        with pytest.raises(ValueError, match="boundary"):
            mean_preserving_spread(g, 0, (0,), 0.1)
        with pytest.raises(ValueError, match="cannot spread"):
            mean_preserving_spread(g, 0, (1,), 0.7)

    def test_spread_preserves_marginal_means(self):
        rng = np.random.default_rng(23)
        grid = make_grid([[0, 1, 2, 4], [0, 3, 5]])
        g = random_pmf(grid, rng)
        i = grid.node_index((1.0, 3.0))
        spread = mean_preserving_spread(g, 0, (1.0, 3.0), g.mass[i] * 0.5)
        for dim in range(2):
            before = sum(m * x for m, x in zip(marginal(g, dim).mass, grid.axes[dim]))
            after = sum(m * x for m, x in zip(marginal(spread, dim).mass, grid.axes[dim]))
            assert after == pytest.approx(before, abs=1e-12)

    def test_transfer_construction(self, unit_square):
        g = make_pmf(unit_square, [0.25] * 4)
        moved = concordance_transfer(g, (0, 1), ((1, 2), (1, 2)), 0.25)
        assert moved.mass == (0.5, 0.0, 0.0, 0.5)

    def test_transfer_identity(self, unit_square):
        g = make_pmf(unit_square, [0.25] * 4)
        assert concordance_transfer(g, (0, 1), ((1, 2), (1, 2)), 0.0) == g

    def test_transfer_preserves_marginals(self, unit_square):
        g = make_pmf(unit_square, [0.25] * 4)
        moved = concordance_transfer(g, (0, 1), ((1, 2), (1, 2)), 0.25)
        for dim in range(2):
            assert marginal(moved, dim).mass == marginal(g, dim).mass == (0.5, 0.5)

    def test_transfer_donor_guard(self, unit_square):
        g = make_pmf(unit_square, [0.5, 0, 0, 0.5])
        with pytest.raises(ValueError, match="cannot transfer"):
            concordance_transfer(g, (0, 1), ((1, 2), (1, 2)), 0.1)

    def test_transfer_three_dims_needs_anchor(self):
        grid = make_grid([[0, 1], [0, 1], [0, 1]])
        g = make_pmf(grid, [0.125] * 8)
        with pytest.raises(ValueError, match="at="):
            concordance_transfer(g, (0, 1), ((0, 1), (0, 1)), 0.05)
        moved = concordance_transfer(g, (0, 1), ((0, 1), (0, 1)), 0.05, at=(1.0,))
        assert sum(moved.mass) == pytest.approx(1.0)
        for dim in range(3):
            assert marginal(moved, dim).mass == pytest.approx(marginal(g, dim).mass)

    def test_generator_soundness_randomized(self):
        rng = np.random.default_rng(24)
        for _ in range(10):
            grid = random_grid(rng, (3, 3))
            g = random_pmf(grid, rng)

            i = int(rng.integers(grid.size))
            multi = grid.multi_index(i)
            target = tuple(int(rng.integers(m, s)) for m, s in zip(multi, grid.shape))
            shifted = fosd_shift(
                g, grid.node(i), grid.node(grid.flat_index(target)), g.mass[i] * 0.5
            )
            assert dominates(shifted, g, FC.INCREASING).verdict == "dominates"

            inner = grid.node(grid.flat_index((1, int(rng.integers(3)))))
            spread = mean_preserving_spread(g, 0, inner, g.mass[grid.node_index(inner)] * 0.5)
            assert dominates(spread, g, FC.CONVEX).verdict == "dominates"
            assert dominates(spread, g, FC.COMPONENTWISE_CONVEX).verdict == "dominates"

            cell = (
                (grid.axes[0][0], grid.axes[0][2]),
                (grid.axes[1][1], grid.axes[1][2]),
            )
            lh = grid.node_index((cell[0][0], cell[1][1]))
            hl = grid.node_index((cell[0][1], cell[1][0]))
            delta = min(g.mass[lh], g.mass[hl]) * 0.5
            moved = concordance_transfer(g, (0, 1), cell, delta)
            assert dominates(moved, g, FC.SUPERMODULAR).verdict == "dominates"
            assert dominates(moved, g, FC.INCREASING_SUPERMODULAR).verdict == "dominates"


class TestClassNesting:
    # dominance over a superset of functions implies dominance over a subset
    IMPLICATIONS = [
        (FC.INCREASING, FC.INCREASING_SUPERMODULAR),
        (FC.INCREASING, FC.INCREASING_ULTRAMODULAR),
        (FC.SUPERMODULAR, FC.INCREASING_SUPERMODULAR),
        (FC.SUPERMODULAR, FC.ULTRAMODULAR),
        (FC.COMPONENTWISE_CONVEX, FC.ULTRAMODULAR),
        (FC.COMPONENTWISE_CONVEX, FC.CONVEX),
        (FC.INCREASING_SUPERMODULAR, FC.INCREASING_ULTRAMODULAR),
        (FC.ULTRAMODULAR, FC.INCREASING_ULTRAMODULAR),
    ]

    def test_nesting_on_random_pairs(self):
        rng = np.random.default_rng(25)
        grid = make_grid([[0, 1, 2], [0, 1, 2]])
        hits = 0
        for _ in range(25):
            f, g = random_pmf(grid, rng), random_pmf(grid, rng)
            verdicts = {fc: dominates(f, g, fc).verdict for fc in FC}
            for big, small in self.IMPLICATIONS:
                if verdicts[big] == "dominates":
                    hits += 1
                    assert verdicts[small] == "dominates", (big, small)
        assert hits > 0

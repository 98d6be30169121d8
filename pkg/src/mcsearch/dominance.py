"""Stochastic-dominance checks over function classes, via dual-cone LPs.

``F`` dominates ``G`` on a class when E_F[U] >= E_G[U] for every U in the
class.  On a finite grid the class is a polyhedral cone cut out by the local
constraints of :mod:`mcsearch.utility` (the convex class adds subgradient
variables), and because every class here is invariant under positive affine
rescaling, the quantified statement reduces to one linear program: minimize
the expectation gap over the cone intersected with the box 0 <= U <= 1.  A
nonnegative minimum proves dominance; a negative one yields a witness
utility function violating it.

Also provides the brute-force upper-set oracle for the increasing order and
the three constructive generators of dominance pairs (upward mass shift,
mean-preserving spread, concordance transfer).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grids import Grid, Pmf, common_grid, expectation
from .simplex import solve_lp
from .utility import (
    MEMBERSHIP_TOL,
    FunctionClass,
    TabulatedUtility,
    is_member,
    local_rows,
    tabulate,
)

#: Hard cap on LP variables (utility values plus subgradient components).
LP_VARIABLE_GUARD = 5000

#: Grid-size cap for the exponential upper-set enumeration.
BRUTE_FORCE_NODE_CAP = 12


@dataclass(frozen=True)
class DominanceResult:
    """Verdict of a dominance query with its LP certificate.

    verdict is ``dominates``, ``fails`` or ``inconclusive``; ``lp_optimum``
    is the minimal expectation gap over the normalized class section, and
    ``witness`` (present exactly when the verdict is ``fails``) is a class
    member whose expectation gap is below -tol.
    """

    verdict: str
    lp_optimum: float | None
    witness: TabulatedUtility | None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.verdict == "dominates"


def dominates(
    f: Pmf,
    g: Pmf,
    function_class: FunctionClass,
    tol: float = MEMBERSHIP_TOL,
) -> DominanceResult:
    """Decide whether ``f`` dominates ``g`` on a function class.

    The pmfs are first embedded on their common grid.  The LP minimizes
    ``sum((f_i - g_i) * U_i)`` over the class cone intersected with
    ``0 <= U <= 1``; since expectation gaps are invariant under adding
    constants and scale linearly, the box section decides the full cone.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid, fe, ge = common_grid(f, g)
    n = grid.size
    gap = fe.mass_array - ge.mass_array

    if function_class is FunctionClass.CONVEX:
        n_vars = n + n * grid.ndim
    else:
        n_vars = n
    if n_vars > LP_VARIABLE_GUARD:
        raise ValueError(
            f"dominance LP would need {n_vars} variables (guard {LP_VARIABLE_GUARD}); "
            "reduce the grid"
        )

    if function_class is FunctionClass.CONVEX:
        a_ub, bounds = _convex_cone_program(grid)
        c = np.concatenate([gap, np.zeros(n * grid.ndim)])
    else:
        rows = local_rows(grid, function_class)
        a_ub = np.zeros((len(rows), n))
        for r, row in enumerate(rows):
            for coeff, idx in zip(row.coeffs, row.idxs):
                a_ub[r, idx] -= coeff  # cone row >= 0 becomes -row <= 0
        bounds = [(0.0, 1.0)] * n
        c = gap

    res = solve_lp(c, a_ub=a_ub, b_ub=np.zeros(a_ub.shape[0]), bounds=bounds)
    if not res.ok:
        return DominanceResult("inconclusive", None, None, reason=f"LP status: {res.status}")
    if res.fun >= -tol:
        return DominanceResult("dominates", res.fun, None)
    # certify the counterexample before reporting a failure: the witness must
    # re-test as a class member and its gap, recomputed by direct summation,
    # must genuinely fall below -tol
    witness = tabulate(grid, res.x[:n])
    recomputed = expectation(fe, witness) - expectation(ge, witness)
    if recomputed >= -tol:
        return DominanceResult(
            "inconclusive", res.fun, None, reason="LP minimum not confirmed by direct summation"
        )
    if not is_member(witness, function_class, tol):
        return DominanceResult(
            "inconclusive", res.fun, None, reason="LP witness failed class re-verification"
        )
    return DominanceResult("fails", recomputed, witness)


def _convex_cone_program(grid: Grid) -> tuple[np.ndarray, list[tuple[float | None, float | None]]]:
    """Constraint matrix for the convex-extendable cone.

    Variables are the n utility values followed by one subgradient vector
    per node; rows encode u_j >= u_i + g_i . (x_j - x_i) for every ordered
    node pair, i.e. extendability to a convex function on R^K.
    """
    n, k = grid.size, grid.ndim
    nodes = grid.nodes
    rows = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            row = np.zeros(n + n * k)
            row[i] = 1.0
            row[j] = -1.0
            row[n + i * k : n + (i + 1) * k] = nodes[j] - nodes[i]
            rows.append(row)
    a_ub = np.stack(rows)
    bounds: list[tuple[float | None, float | None]] = [(0.0, 1.0)] * n
    bounds += [(None, None)] * (n * k)
    return a_ub, bounds


def dominates_increasing_bruteforce(f: Pmf, g: Pmf, tol: float = MEMBERSHIP_TOL) -> bool:
    """Increasing-order dominance by direct upper-set enumeration.

    True iff F puts at least as much mass as G (within tol) on every upper
    set of the componentwise node order.  Exponential in the node count,
    hence the small-grid guard; exists as an independent oracle for the LP.
    """
    grid, fe, ge = common_grid(f, g)
    n = grid.size
    if n > BRUTE_FORCE_NODE_CAP:
        raise ValueError(
            f"upper-set enumeration needs <= {BRUTE_FORCE_NODE_CAP} nodes, grid has {n}"
        )
    nodes = grid.nodes
    greater = [
        [j for j in range(n) if np.all(nodes[j] >= nodes[i])] for i in range(n)
    ]
    fm, gm = fe.mass_array, ge.mass_array
    for bits in range(1 << n):
        members = [i for i in range(n) if bits >> i & 1]
        if any(not bits >> j & 1 for i in members for j in greater[i]):
            continue  # not upward closed
        if fm[members].sum() < gm[members].sum() - tol:
            return False
    return True


# ---------------------------------------------------------------------------
# constructive dominance-pair generators
# ---------------------------------------------------------------------------


def fosd_shift(
    g: Pmf,
    from_node: Sequence[float],
    to_node: Sequence[float],
    eps: float,
) -> Pmf:
    """Move ``eps`` mass upward from one node to a componentwise-greater one.

    The result dominates ``g`` on the increasing class.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    i = g.grid.node_index(from_node)
    j = g.grid.node_index(to_node)
    if not all(b >= a for a, b in zip(g.grid.node(i), g.grid.node(j))):
        raise ValueError(
            f"target {tuple(to_node)} must be componentwise >= source {tuple(from_node)}"
        )
    if g.mass[i] < eps:
        raise ValueError(f"source node holds {g.mass[i]}, cannot move {eps}")
    mass = list(g.mass)
    mass[i] -= eps
    mass[j] += eps
    return Pmf(g.grid, tuple(mass))


def mean_preserving_spread(g: Pmf, axis: int, node: Sequence[float], eps: float) -> Pmf:
    """Split ``eps`` mass at a node onto its two axis neighbors, weighted so
    the axis mean is unchanged.

    All marginal means are preserved and the result dominates ``g`` on the
    convex and componentwise-convex classes.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if not (0 <= axis < g.grid.ndim):
        raise ValueError(f"axis {axis} out of range")
    i = g.grid.node_index(node)
    multi = g.grid.multi_index(i)
    coords = g.grid.axes[axis]
    pos = multi[axis]
    if pos == 0 or pos == len(coords) - 1:
        raise ValueError(
            f"node {tuple(node)} is on the boundary of axis {axis}; a spread needs both neighbors"
        )
    if g.mass[i] < eps:
        raise ValueError(f"node holds {g.mass[i]}, cannot spread {eps}")
    t_lo, t, t_hi = coords[pos - 1], coords[pos], coords[pos + 1]
    lam = (t_hi - t) / (t_hi - t_lo)  # weight on the lower neighbor
    lo_multi = list(multi)
    lo_multi[axis] -= 1
    hi_multi = list(multi)
    hi_multi[axis] += 1
    mass = list(g.mass)
    mass[i] -= eps
    mass[g.grid.flat_index(lo_multi)] += eps * lam
    mass[g.grid.flat_index(hi_multi)] += eps * (1.0 - lam)
    return Pmf(g.grid, tuple(mass))


def concordance_transfer(
    g: Pmf,
    dims: tuple[int, int],
    cell: tuple[tuple[float, float], tuple[float, float]],
    delta: float,
    at: Sequence[float] | None = None,
) -> Pmf:
    """Move ``delta`` mass from the anti-diagonal to the diagonal of a 2x2
    cell spanned by two coordinates in each of two dimensions.

    ``cell`` gives (low, high) coordinates for each of the two dims; ``at``
    pins the remaining dims' coordinates (required when the grid has more
    than two dimensions).  Every 1-D marginal is unchanged, and the result
    dominates ``g`` on the supermodular and increasing-supermodular classes.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    p, q = dims
    if p == q or not (0 <= p < g.grid.ndim and 0 <= q < g.grid.ndim):
        raise ValueError(f"dims {dims} must be two distinct dimensions")
    (p_lo, p_hi), (q_lo, q_hi) = cell
    if not (p_lo < p_hi and q_lo < q_hi):
        raise ValueError("cell coordinates must be ordered (low, high) in both dims")
    others = [k for k in range(g.grid.ndim) if k not in (p, q)]
    if others and at is None:
        raise ValueError("grid has more than two dims; pass the fixed coordinates via at=")
    if at is not None and len(at) != len(others):
        raise ValueError(f"at= must give coordinates for dims {others}")

    def node_at(pv: float, qv: float) -> int:
        coords = [0.0] * g.grid.ndim
        coords[p] = pv
        coords[q] = qv
        for k, v in zip(others, at or ()):
            coords[k] = v
        return g.grid.node_index(coords)

    i_ll = node_at(p_lo, q_lo)
    i_lh = node_at(p_lo, q_hi)
    i_hl = node_at(p_hi, q_lo)
    i_hh = node_at(p_hi, q_hi)
    donor = min(g.mass[i_lh], g.mass[i_hl])
    if donor < delta:
        raise ValueError(f"anti-diagonal nodes hold {donor}, cannot transfer {delta}")
    mass = list(g.mass)
    mass[i_ll] += delta
    mass[i_hh] += delta
    mass[i_lh] -= delta
    mass[i_hl] -= delta
    return Pmf(g.grid, tuple(mass))

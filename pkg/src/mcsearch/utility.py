"""Tabulated utility functions, function-class membership tests, and the
closure operators (truncation, positive affine transformation, clamping).

Membership in the increasing / componentwise-convex / supermodular families
is decided by local constraints that, on a product of chains, exactly
characterize the class:

* increasing: every successor-edge difference is nonnegative;
* componentwise convex: along each axis line, slopes between consecutive
  nodes are nondecreasing (divided differences handle nonuniform spacing);
* supermodular: every elementary 2x2 cell of adjacent coordinates, for every
  pair of dimensions, has nonnegative cross-difference.

Joint convexity is tested as extendability to a convex function on R^K:
a subgradient must exist at every node.  Composite classes are conjunctions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .grids import Grid
from .simplex import solve_lp

#: Default absolute tolerance on membership constraints, shared with the
#: dominance checker so both sides of a theorem premise use one knob.
MEMBERSHIP_TOL = 1e-9


class FunctionClass(enum.Enum):
    INCREASING = "increasing"
    CONVEX = "convex"
    COMPONENTWISE_CONVEX = "componentwise_convex"
    SUPERMODULAR = "supermodular"
    ULTRAMODULAR = "ultramodular"
    INCREASING_SUPERMODULAR = "increasing_supermodular"
    INCREASING_ULTRAMODULAR = "increasing_ultramodular"

    @classmethod
    def from_name(cls, name: str) -> "FunctionClass":
        try:
            return cls(name)
        except ValueError:
            choices = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown function class {name!r}; choose one of {choices}") from None


#: Base families whose conjunction defines each class.  ``convex`` is the
#: subgradient test; the rest are local-constraint families.
_FAMILIES: dict[FunctionClass, tuple[str, ...]] = {
    FunctionClass.INCREASING: ("increasing",),
    FunctionClass.CONVEX: ("convex",),
    FunctionClass.COMPONENTWISE_CONVEX: ("componentwise_convex",),
    FunctionClass.SUPERMODULAR: ("supermodular",),
    FunctionClass.ULTRAMODULAR: ("supermodular", "componentwise_convex"),
    FunctionClass.INCREASING_SUPERMODULAR: ("increasing", "supermodular"),
    FunctionClass.INCREASING_ULTRAMODULAR: (
        "increasing",
        "supermodular",
        "componentwise_convex",
    ),
}


@dataclass(frozen=True)
class TabulatedUtility:
    """Utility values at every grid node, in canonical node order."""

    grid: Grid
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.grid.size:
            raise ValueError(
                f"need one value per node: got {len(self.values)}, grid has {self.grid.size}"
            )
        for v in self.values:
            if not math.isfinite(v):
                raise ValueError(f"utility values must be finite, got {v!r}")

    @cached_property
    def values_array(self) -> np.ndarray:
        out = np.asarray(self.values, dtype=float)
        out.setflags(write=False)
        return out

    def at(self, coords: Sequence[float]) -> float:
        return self.values[self.grid.node_index(coords)]


def tabulate(grid: Grid, values: Sequence[float]) -> TabulatedUtility:
    arr = np.asarray(values, dtype=float).reshape(-1)
    return TabulatedUtility(grid, tuple(float(v) for v in arr))


def tabulate_family(
    family: str,
    grid: Grid,
    *,
    a: Sequence[float] | None = None,
    values: Sequence[float] | None = None,
) -> TabulatedUtility:
    """Tabulate a closed-form utility family on a grid.

    Families and their expected memberships:

    * ``linear`` (requires ``a``): a . x.  With a >= 0 it belongs, weakly, to
      every class tested here (all its local constraints hold with equality
      or better).
    * ``product``: prod_k x_k.  On grids with nonnegative coordinates it is
      increasing ultramodular.
    * ``min``: min_k x_k.  Increasing supermodular, but in general not
      componentwise convex (the kink bends the wrong way).
    * ``custom`` (requires ``values``): explicit per-node values in canonical
      order.
    """
    nodes = grid.nodes
    if family == "linear":
        if a is None:
            raise ValueError("linear family needs coefficient vector a")
        coeff = np.asarray(a, dtype=float).reshape(-1)
        if coeff.size != grid.ndim:
            raise ValueError(f"a has {coeff.size} entries, grid is {grid.ndim}-D")
        return tabulate(grid, nodes @ coeff)
    if family == "product":
        return tabulate(grid, np.prod(nodes, axis=1))
    if family == "min":
        return tabulate(grid, nodes.min(axis=1))
    if family == "custom":
        if values is None:
            raise ValueError("custom family needs explicit values")
        return tabulate(grid, values)
    raise ValueError(f"unknown utility family {family!r}")


# ---------------------------------------------------------------------------
# local constraint rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeRow:
    """One local linear constraint ``sum(coeffs * u[idxs]) >= 0``."""

    kind: str
    idxs: tuple[int, ...]
    coeffs: tuple[float, ...]
    nodes: tuple[tuple[float, ...], ...]


def _increasing_rows(grid: Grid) -> list[ConeRow]:
    rows = []
    shape = grid.shape
    for multi in np.ndindex(*shape):
        for k in range(grid.ndim):
            if multi[k] + 1 >= shape[k]:
                continue
            hi = list(multi)
            hi[k] += 1
            i, j = grid.flat_index(multi), grid.flat_index(hi)
            rows.append(
                ConeRow("increasing", (j, i), (1.0, -1.0), (grid.node(i), grid.node(j)))
            )
    return rows


def _componentwise_convex_rows(grid: Grid) -> list[ConeRow]:
    rows = []
    shape = grid.shape
    for multi in np.ndindex(*shape):
        for k in range(grid.ndim):
            if multi[k] + 2 >= shape[k]:
                continue
            m1 = list(multi)
            m1[k] += 1
            m2 = list(multi)
            m2[k] += 2
            i0, i1, i2 = (grid.flat_index(m) for m in (multi, m1, m2))
            t0, t1, t2 = (grid.axes[k][m[k]] for m in (multi, m1, m2))
            h1, h2 = t1 - t0, t2 - t1
            rows.append(
                ConeRow(
                    "componentwise_convex",
                    (i0, i1, i2),
                    (1.0 / h1, -(1.0 / h1 + 1.0 / h2), 1.0 / h2),
                    (grid.node(i0), grid.node(i1), grid.node(i2)),
                )
            )
    return rows


def _supermodular_rows(grid: Grid) -> list[ConeRow]:
    rows = []
    shape = grid.shape
    for multi in np.ndindex(*shape):
        for p in range(grid.ndim):
            if multi[p] + 1 >= shape[p]:
                continue
            for q in range(p + 1, grid.ndim):
                if multi[q] + 1 >= shape[q]:
                    continue
                ll = list(multi)
                lh = list(multi)
                lh[q] += 1
                hl = list(multi)
                hl[p] += 1
                hh = list(multi)
                hh[p] += 1
                hh[q] += 1
                i_ll, i_lh, i_hl, i_hh = (
                    grid.flat_index(m) for m in (ll, lh, hl, hh)
                )
                rows.append(
                    ConeRow(
                        "supermodular",
                        (i_ll, i_hh, i_lh, i_hl),
                        (1.0, 1.0, -1.0, -1.0),
                        tuple(grid.node(i) for i in (i_ll, i_lh, i_hl, i_hh)),
                    )
                )
    return rows


_ROW_BUILDERS = {
    "increasing": _increasing_rows,
    "componentwise_convex": _componentwise_convex_rows,
    "supermodular": _supermodular_rows,
}


def local_rows(grid: Grid, function_class: FunctionClass) -> list[ConeRow]:
    """All local constraint rows defining the class cone on this grid.

    The convex class has no purely local characterization (it needs
    subgradient variables) and is rejected here.
    """
    if function_class is FunctionClass.CONVEX:
        raise ValueError("the convex class is not defined by local rows")
    rows: list[ConeRow] = []
    for family in _FAMILIES[function_class]:
        rows.extend(_ROW_BUILDERS[family](grid))
    return rows


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """A violated constraint: the lexicographically first one found.

    ``margin`` is the signed slack of the constraint (membership needs
    margin >= -tol everywhere, so a witness has margin < -tol).
    """

    constraint: str
    nodes: tuple[tuple[float, ...], ...]
    margin: float


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    function_class: FunctionClass
    witness: Witness | None
    tol: float

    def __bool__(self) -> bool:
        return self.member


def _subgradient_margin(u: TabulatedUtility, i: int) -> float:
    """Best achievable max-violation of the subgradient inequalities at node i.

    Solves min v s.t. g . (x_j - x_i) - (u_j - u_i) <= v for all j, with v
    floored at -1 to keep the program bounded.  A value <= 0 means an exact
    subgradient exists; small positive values measure how far node i sits
    above every supporting hyperplane.
    """
    nodes = u.grid.nodes
    vals = u.values_array
    d = np.delete(nodes - nodes[i], i, axis=0)
    delta = np.delete(vals - vals[i], i)
    k = u.grid.ndim
    a_ub = np.hstack([d, -np.ones((d.shape[0], 1))])
    c = np.zeros(k + 1)
    c[-1] = 1.0
    bounds = [(None, None)] * k + [(-1.0, None)]
    res = solve_lp(c, a_ub=a_ub, b_ub=delta, bounds=bounds)
    if not res.ok:  # cannot happen for well-posed data; treat as failure
        return math.inf
    return float(res.fun)


def is_member(
    u: TabulatedUtility,
    function_class: FunctionClass,
    tol: float = MEMBERSHIP_TOL,
) -> MembershipResult:
    """Test class membership; on failure report the first violated constraint.

    Base families are checked in a fixed order (increasing, supermodular,
    componentwise convex, convex) and constraints within a family in
    lexicographic node order, so the witness is deterministic.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    order = sorted(
        _FAMILIES[function_class],
        key=("increasing", "supermodular", "componentwise_convex", "convex").index,
    )
    vals = u.values_array
    for family in order:
        if family == "convex":
            for i in range(u.grid.size):
                v_star = _subgradient_margin(u, i)
                if v_star > tol:
                    witness = Witness("subgradient", (u.grid.node(i),), -v_star)
                    return MembershipResult(False, function_class, witness, tol)
            continue
        for row in _ROW_BUILDERS[family](u.grid):
            value = float(sum(c * vals[i] for c, i in zip(row.coeffs, row.idxs)))
            if value < -tol:
                witness = Witness(row.kind, row.nodes, value)
                return MembershipResult(False, function_class, witness, tol)
    return MembershipResult(True, function_class, None, tol)


# ---------------------------------------------------------------------------
# closure operators
# ---------------------------------------------------------------------------


def truncate(u: TabulatedUtility) -> TabulatedUtility:
    """Pointwise max(u, 0)."""
    return tabulate(u.grid, np.maximum(u.values_array, 0.0))


def affine_transform(u: TabulatedUtility, m: float, n: float) -> TabulatedUtility:
    """Positive affine transformation m*u + n with m > 0 and intercept
    restricted to n >= 0."""
    if not (m > 0):
        raise ValueError(f"slope m must be positive, got {m}")
    if not (n >= 0):
        raise ValueError(f"intercept n must be nonnegative, got {n}")
    return tabulate(u.grid, m * u.values_array + n)


def clamp_below(u: TabulatedUtility, level: float) -> TabulatedUtility:
    """Pointwise max(u, level); clamp_below(u, 0) coincides with truncate(u)."""
    if not math.isfinite(level):
        raise ValueError(f"clamp level must be finite, got {level}")
    return tabulate(u.grid, np.maximum(u.values_array, level))


# ---------------------------------------------------------------------------
# constructive random members
# ---------------------------------------------------------------------------


def _axis_profile(rng: np.random.Generator, axis: tuple[float, ...], kind: str) -> np.ndarray:
    """Random 1-D tabulation on one axis with the requested shape property."""
    t = np.asarray(axis, dtype=float)
    n = t.size
    if kind == "arbitrary":
        return rng.normal(0.0, 1.0, size=n)
    if kind == "increasing_nonneg":
        steps = rng.uniform(0.0, 1.0, size=n - 1) if n > 1 else np.zeros(0)
        return rng.uniform(0.0, 0.5) + np.concatenate([[0.0], np.cumsum(steps)])
    if kind == "increasing_convex_nonneg":
        start = rng.uniform(0.0, 0.5)
        if n == 1:
            return np.array([start])
        slopes = np.cumsum(rng.uniform(0.05, 1.0, size=n - 1))
        return start + np.concatenate([[0.0], np.cumsum(slopes * np.diff(t))])
    if kind == "convex":
        start = rng.normal(0.0, 1.0)
        if n == 1:
            return np.array([start])
        slopes = np.sort(rng.normal(0.0, 1.0, size=n - 1))
        return start + np.concatenate([[0.0], np.cumsum(slopes * np.diff(t))])
    if kind == "convex_nonneg":
        theta = rng.uniform(t[0], t[-1])
        return rng.uniform(0.2, 1.5) * np.abs(t - theta)
    raise ValueError(f"unknown profile kind {kind!r}")


def _product_of_profiles(grid: Grid, profiles: list[np.ndarray]) -> np.ndarray:
    out = np.ones(grid.shape)
    for k, prof in enumerate(profiles):
        shape = [1] * grid.ndim
        shape[k] = prof.size
        out = out * prof.reshape(shape)
    return out.reshape(-1)


def _sum_of_profiles(grid: Grid, profiles: list[np.ndarray]) -> np.ndarray:
    out = np.zeros(grid.shape)
    for k, prof in enumerate(profiles):
        shape = [1] * grid.ndim
        shape[k] = prof.size
        out = out + prof.reshape(shape)
    return out.reshape(-1)


def _step_indicator(grid: Grid, anchor: np.ndarray) -> np.ndarray:
    return np.all(grid.nodes >= anchor, axis=1).astype(float)


def _random_values(function_class: FunctionClass, grid: Grid, rng: np.random.Generator) -> np.ndarray:
    nodes = grid.nodes
    K = grid.ndim

    def profiles(kind: str) -> list[np.ndarray]:
        return [_axis_profile(rng, ax, kind) for ax in grid.axes]

    def steps(count: int) -> np.ndarray:
        out = np.zeros(grid.size)
        for _ in range(count):
            anchor = nodes[rng.integers(grid.size)]
            out += rng.uniform(0.2, 1.5) * _step_indicator(grid, anchor)
        return out

    def max_affine(count: int) -> np.ndarray:
        planes = [
            nodes @ rng.normal(0.0, 1.0, size=K) + rng.normal(0.0, 1.0)
            for _ in range(count)
        ]
        return np.max(np.stack(planes), axis=0)

    fc = FunctionClass
    if function_class is fc.INCREASING:
        v = steps(int(rng.integers(1, 4))) + nodes @ rng.uniform(0.0, 1.0, size=K)
        if rng.random() < 0.5:
            v = v + _sum_of_profiles(grid, profiles("increasing_nonneg"))
        return v
    if function_class is fc.CONVEX:
        v = max_affine(int(rng.integers(2, 5))) + nodes @ rng.normal(0.0, 0.5, size=K)
        if rng.random() < 0.5:
            v = v + rng.uniform(0.2, 1.0) * max_affine(2)
        return v
    if function_class is fc.COMPONENTWISE_CONVEX:
        v = _sum_of_profiles(grid, profiles("convex"))
        if rng.random() < 0.5:
            v = v + rng.uniform(0.2, 1.0) * _product_of_profiles(grid, profiles("convex_nonneg"))
        return v + nodes @ rng.normal(0.0, 0.5, size=K)
    if function_class is fc.SUPERMODULAR:
        v = _sum_of_profiles(grid, profiles("arbitrary"))
        v = v + rng.uniform(0.2, 1.0) * _product_of_profiles(grid, profiles("increasing_nonneg"))
        if rng.random() < 0.5:
            v = v + steps(int(rng.integers(1, 3)))
        return v
    if function_class is fc.ULTRAMODULAR:
        v = _sum_of_profiles(grid, profiles("convex"))
        v = v + rng.uniform(0.2, 1.0) * _product_of_profiles(
            grid, profiles("increasing_convex_nonneg")
        )
        return v + nodes @ rng.normal(0.0, 0.5, size=K)
    if function_class is fc.INCREASING_SUPERMODULAR:
        v = steps(int(rng.integers(1, 4)))
        v = v + rng.uniform(0.2, 1.0) * _product_of_profiles(grid, profiles("increasing_nonneg"))
        return v + nodes @ rng.uniform(0.0, 1.0, size=K)
    if function_class is fc.INCREASING_ULTRAMODULAR:
        v = _product_of_profiles(grid, profiles("increasing_convex_nonneg"))
        v = v + _sum_of_profiles(grid, profiles("increasing_convex_nonneg"))
        return v + nodes @ rng.uniform(0.0, 1.0, size=K)
    raise ValueError(f"no generator for {function_class}")


def random_member(
    function_class: FunctionClass,
    grid: Grid,
    rng: np.random.Generator,
    *,
    max_tries: int = 50,
) -> TabulatedUtility:
    """Draw a verified random member of a function class.

    Candidates are nonnegative combinations of sound generators (upper-set
    step indicators, products and sums of per-axis profiles, maxima of
    affine pieces), rescaled to a moderate range, then checked with
    ``is_member``; a candidate failing verification is rejected and redrawn.
    """
    for _ in range(max_tries):
        values = _random_values(function_class, grid, rng)
        peak = float(np.abs(values).max())
        if peak < 1e-12:
            continue
        u = tabulate(grid, values * (5.0 / peak))
        if is_member(u, function_class):
            return u
    raise RuntimeError(
        f"could not construct a verified {function_class.value} member in {max_tries} tries"
    )

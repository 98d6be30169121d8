"""Solve the stopping problem: reservation utility, value function,
acceptance set, and Monte Carlo policy evaluation.

The reservation utility is the fixed point of the continuation map

    psi(t) = (1 - beta) * gamma + beta * E[max(U, t)],

a monotone contraction with modulus beta, so fixed-point iteration converges
geometrically for every beta in (0, 1).  An independent bisection on the
strictly increasing map t -> t - psi(t) cross-checks every solve; the two
routes must agree within 10x the solver tolerance or the solve fails loudly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import Pmf, SearchParams
from .utility import TabulatedUtility, tabulate

#: Hard cap on contraction iterations before the solver reports a defect.
MAX_ITERATIONS = 10**6


class ConvergenceError(RuntimeError):
    """The solver could not certify the reservation utility to tolerance."""


@dataclass(frozen=True)
class Solution:
    """Solved stopping problem.

    ``value`` tabulates max(U(x), u_F) / (1 - beta) at every node;
    ``acceptance`` is the closed upper set {x : U(x) >= u_F - tol} (ties
    accept); ``residual`` is the defect of the reservation-utility equation
    u_F = gamma + beta/(1-beta) * E[(U - u_F)+] at the returned value.
    """

    reservation_utility: float
    value: TabulatedUtility
    acceptance: frozenset[tuple[float, ...]]
    residual: float
    iterations: int


def continuation_map(
    u_candidate: float,
    pmf: Pmf,
    u: TabulatedUtility,
    params: SearchParams,
) -> float:
    """psi(t) = (1 - beta)*gamma + beta*E[max(U, t)]: nondecreasing in t and
    a contraction with modulus beta."""
    if u.grid != pmf.grid:
        raise ValueError("utility is tabulated on a different grid than the pmf")
    if not math.isfinite(u_candidate):
        raise ValueError(f"candidate must be finite, got {u_candidate!r}")
    expected = float(np.dot(pmf.mass_array, np.maximum(u.values_array, u_candidate)))
    return (1.0 - params.beta) * params.gamma + params.beta * expected


def equation_residual(t: float, pmf: Pmf, u: TabulatedUtility, params: SearchParams) -> float:
    """Defect of t = gamma + beta/(1-beta) * E[(U - t)+]."""
    plus = np.maximum(u.values_array - t, 0.0)
    ev = float(np.dot(pmf.mass_array, plus))
    return t - params.gamma - params.beta / (1.0 - params.beta) * ev


def solve_fixed_point(pmf: Pmf, u: TabulatedUtility, params: SearchParams) -> tuple[float, int]:
    """Iterate psi to its fixed point; returns (u_F, iterations).

    Stops once one further step certifies both |t - t*| and the equation
    residual below the tolerance.
    """
    beta, tol = params.beta, params.tol
    stop = 0.5 * tol * (1.0 - beta) / beta
    t = params.gamma
    for it in range(1, MAX_ITERATIONS + 1):
        t_next = continuation_map(t, pmf, u, params)
        if abs(t_next - t) <= stop:
            return t_next, it
        t = t_next
    defect = abs(continuation_map(t, pmf, u, params) - t)
    raise ConvergenceError(
        f"fixed-point iteration did not converge in {MAX_ITERATIONS} steps "
        f"(last step {defect:.3e}, required {stop:.3e}); check beta/tol"
    )


def solve_bisection(pmf: Pmf, u: TabulatedUtility, params: SearchParams) -> tuple[float, int]:
    """Bisection on t - psi(t) over a bracket psi maps into itself."""
    beta, gamma, tol = params.beta, params.gamma, params.tol
    vals = u.values_array
    lo = min(gamma, float(vals.min()))
    hi = max(gamma, float(vals.max())) + gamma * beta / (1.0 - beta)
    width_stop = tol * (1.0 - beta)
    it = 0
    while hi - lo > width_stop:
        it += 1
        if it > MAX_ITERATIONS:
            raise ConvergenceError(
                f"bisection did not reach width {width_stop:.3e} in {MAX_ITERATIONS} steps"
            )
        mid = 0.5 * (lo + hi)
        if mid - continuation_map(mid, pmf, u, params) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), it


def reservation_utility(pmf: Pmf, u: TabulatedUtility, params: SearchParams) -> Solution:
    """Solve for the reservation utility and assemble the full solution.

    Runs both the contraction iteration and the bisection cross-check; a
    disagreement beyond 10x tolerance, or a residual above tolerance, raises
    ``ConvergenceError`` rather than returning silently inaccurate values.
    """
    if u.grid != pmf.grid:
        raise ValueError("utility is tabulated on a different grid than the pmf")
    t_fp, it_fp = solve_fixed_point(pmf, u, params)
    t_bi, it_bi = solve_bisection(pmf, u, params)
    if abs(t_fp - t_bi) > 10.0 * params.tol:
        raise ConvergenceError(
            f"contraction ({t_fp!r}) and bisection ({t_bi!r}) disagree by "
            f"{abs(t_fp - t_bi):.3e} > {10.0 * params.tol:.3e}"
        )
    u_f = t_fp
    residual = equation_residual(u_f, pmf, u, params)
    if abs(residual) > params.tol:
        raise ConvergenceError(f"equation residual {residual:.3e} exceeds tol {params.tol:.3e}")
    value = tabulate(pmf.grid, np.maximum(u.values_array, u_f) / (1.0 - params.beta))
    accept = frozenset(
        pmf.grid.node(i)
        for i in range(pmf.grid.size)
        if u.values[i] >= u_f - params.tol
    )
    return Solution(u_f, value, accept, residual, it_fp + it_bi)


def value_function(solution: Solution, node: tuple[float, ...] | list[float]) -> float:
    """Value of holding the offer at ``node``: max(U, u_F) / (1 - beta)."""
    return solution.value.at(node)


@dataclass(frozen=True)
class SimulationStats:
    """Monte Carlo estimate of the realized discounted utility of a
    threshold policy."""

    mean: float
    stderr: float
    episodes: int
    horizon: int
    accept_rate: float


def simulation_horizon(u: TabulatedUtility, params: SearchParams) -> int:
    """Smallest T with beta^T * (max|U| + gamma)/(1-beta) below tolerance,
    bounding the discounted error of truncating episodes at T periods."""
    beta = params.beta
    bound = (float(np.abs(u.values_array).max()) + params.gamma) / (1.0 - beta)
    t = math.log(params.tol / bound) / math.log(beta) if bound > params.tol else 0.0
    return max(1, int(math.ceil(t)))


def simulate_search(
    pmf: Pmf,
    u: TabulatedUtility,
    params: SearchParams,
    threshold: float,
    seed: int,
    episodes: int,
) -> SimulationStats:
    """Simulate the policy "accept iff U(offer) >= threshold".

    Each episode draws offers until acceptance or the documented horizon and
    realizes sum_{t<T} beta^t gamma + beta^T U(w_T)/(1-beta).  Offers come
    from a single seeded PCG64 stream consumed in episode-major order, so
    results are bit-reproducible for a fixed seed.
    """
    if episodes < 1:
        raise ValueError("need at least one episode")
    if not math.isfinite(threshold):
        raise ValueError(f"threshold must be finite, got {threshold!r}")
    if u.grid != pmf.grid:
        raise ValueError("utility is tabulated on a different grid than the pmf")
    beta, gamma = params.beta, params.gamma
    horizon = simulation_horizon(u, params)
    rng = np.random.default_rng(int(seed))
    p = pmf.mass_array / pmf.mass_array.sum()
    vals = u.values_array

    realized = np.empty(episodes)
    alive = np.arange(episodes)
    # discounted value of t periods of unemployment flow
    flow = gamma * (1.0 - beta ** np.arange(horizon + 1)) / (1.0 - beta)
    accepted = 0
    for t in range(horizon):
        draws = rng.choice(p.size, size=alive.size, p=p)
        offers = vals[draws]
        take = offers >= threshold
        idx = alive[take]
        realized[idx] = flow[t] + beta**t * offers[take] / (1.0 - beta)
        accepted += idx.size
        alive = alive[~take]
        if alive.size == 0:
            break
    realized[alive] = flow[horizon]  # never accepted; discounted tail < tol
    mean = float(realized.mean())
    stderr = float(realized.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return SimulationStats(mean, stderr, episodes, horizon, accepted / episodes)

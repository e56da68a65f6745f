"""Delayed constraint generation for worst-case submodular maximization.

Maximize min_i f_i(x)/alpha_i over knapsack-feasible binary x by alternating
a relaxed master (cut pool) with exact separation.  On each incumbent the
violated scenarios receive a fresh hypograph cut; with ``reduce`` on, only
the scenarios attaining the worst scaled value are separated, which is
sufficient for optimality and keeps the pool small.  A nonzero ``stop_pt``
routes the incumbent support through :func:`strengthen_generating_set`,
which swaps covered support elements for zero-marginal witnesses before the
cut is built; the resulting inequality is still tight at the incumbent.

A run is sequential (master, then separation, then master); distinct runs
are independent.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import SetFunction, SubmodularCut, TOL, build_cut, empty_set_cuts
from .master import MasterState, STATUS_OPTIMAL, STATUS_TIME_LIMIT

_TINY = 1e-12


@dataclass
class DcgConfig:
    """Knobs for the cut loop.

    reduce            separate only the scenarios attaining the worst value
    stop_pt           witness count for generating-set strengthening (0 = off)
    epsilon           extra optimality margin on the violation test
    time_limit        wall-clock budget in seconds (None = unlimited)
    filter_dominated  drop pointwise-dominated cuts sharing a generating set
    warm_start        seed the pool with the empty-set cut of every scenario
    master_gap        absolute tolerance handed to each master solve
    """

    reduce: bool = True
    stop_pt: int = 2
    epsilon: float = 0.0
    time_limit: float | None = None
    filter_dominated: bool = True
    warm_start: bool = True
    master_gap: float = 1e-6

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.stop_pt < 0:
            raise ValueError("stop_pt must be nonnegative")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one cut-generation run.

    ``eta`` is the best certified objective value and ``x`` the placement
    attaining it; ``upper_bound`` equals ``eta`` at optimality.  ``gap`` is
    (upper_bound - eta)/upper_bound for time-limited runs and 0 otherwise.
    ``cuts_added`` counts pool growth beyond the warm start, and
    ``master_values`` traces the master optimum per iteration.
    """

    eta: float
    x: tuple
    upper_bound: float
    gap: float
    iterations: int
    cuts_added: int
    wall_time: float
    status: str
    master_values: tuple = ()
    pool: tuple = ()


def support(x: Sequence[int]) -> frozenset:
    return frozenset(j for j, xj in enumerate(x) if xj)


def min_index(values: Sequence[float]) -> int:
    """0-based index of the smallest value, ties to the smallest index."""
    if len(values) == 0:
        raise ValueError("min_index needs at least one value")
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best]:
            best = i
    return best


def strengthen_generating_set(fn: SetFunction, incumbent: Iterable[int],
                              stop_pt: int) -> frozenset:
    """Rebuild the incumbent support into a stronger cut generating set.

    Scans every element j with zero marginal on the incumbent support; once
    stop_pt in-support witnesses k with fn.marginal(j, {k}) == 0 have been
    collected and the interchange identity

        f(tmpQ) == f(S + j) + sum_{l in tmpQ} marginal(l, S + j)

    holds, j is admitted and its witnesses are marked as covered.  The result
    is the admitted elements plus the uncovered part of the incumbent; the
    cut built on it is valid and remains tight at the incumbent.  stop_pt = 0
    disables the rewrite and returns the support unchanged.
    """
    incumbent = frozenset(incumbent)
    if stop_pt == 0:
        return incumbent
    covered: set = set()
    admitted: set = set()
    bar = sorted(incumbent)
    for j in range(fn.ground_size):
        if fn.marginal(j, incumbent) > TOL:
            continue
        tmp = set(covered)
        counter = 0
        for k in bar:
            if fn.marginal(j, frozenset([k])) <= TOL:
                counter += 1
                tmp.add(k)
            if counter == stop_pt:
                with_j = frozenset(admitted | {j})
                lhs = fn.value(tmp)
                rhs = fn.value(with_j) + sum(fn.marginal(l, with_j) for l in tmp)
                if abs(lhs - rhs) <= TOL:
                    admitted.add(j)
                    covered |= tmp
    return frozenset(admitted) | (incumbent - covered)


def solve_robust(fns: Sequence[SetFunction], alphas: Sequence[float],
                 costs: Sequence[float], budget: float,
                 config: DcgConfig | None = None,
                 initial_cuts: Iterable[SubmodularCut] = ()) -> SolveReport:
    """Cut-generation solve of max min_i f_i(x)/alpha_i over the knapsack.

    Terminates when the master value no longer exceeds the incumbent's true
    worst scaled value (then eta is the exact optimum) or when the time limit
    runs out (then eta <= optimum <= upper_bound).  Never returns an
    infeasible x.
    """
    config = config or DcgConfig()
    m = len(fns)
    if m == 0:
        raise ValueError("at least one scenario function is required")
    if len(alphas) != m:
        raise ValueError("need one alpha per scenario function")
    if any(a <= 0 for a in alphas):
        raise ValueError("alphas must be strictly positive")
    n = fns[0].ground_size
    start = time.monotonic()

    state = MasterState(n, costs, budget)
    if config.warm_start:
        for cut in empty_set_cuts(fns, alphas):
            state.add_cut(cut, filter_dominated=config.filter_dominated)
    for cut in initial_cuts:
        state.add_cut(cut, filter_dominated=config.filter_dominated)
    warm_size = len(state.cut_pool)

    best_lb = -math.inf
    best_x = tuple(0 for _ in range(n))
    master_values: list = []
    iterations = 0
    status = STATUS_OPTIMAL
    upper = math.inf
    master_gap = config.master_gap
    while True:
        remaining = None
        if config.time_limit is not None:
            remaining = max(0.0, config.time_limit - (time.monotonic() - start))
        result = state.solve(gap_tol=master_gap, time_limit=remaining)
        iterations += 1
        master_values.append(result.eta)
        upper = result.bound
        x_bar = result.x
        chosen = support(x_bar)
        values = [fn.value(chosen) / a for fn, a in zip(fns, alphas)]
        worst = min(values)
        if worst > best_lb + _TINY:
            best_lb, best_x = worst, x_bar
        if result.status == STATUS_TIME_LIMIT:
            status = STATUS_TIME_LIMIT
            break
        if result.bound <= worst + config.epsilon + TOL:
            # no scenario is violated and the master bound certifies it
            best_lb, best_x = worst, x_bar
            upper = worst
            status = STATUS_OPTIMAL
            break
        if config.time_limit is not None and time.monotonic() - start > config.time_limit:
            status = STATUS_TIME_LIMIT
            break
        if result.eta <= worst + config.epsilon + TOL:
            # incumbent shows no violation but the bound is loose: the master
            # gap tolerance is hiding the gap, so re-solve exactly
            if master_gap == 0.0:
                raise RuntimeError("master bound stalled above a violation-free incumbent")
            master_gap = 0.0
            continue
        if config.reduce:
            targets = [i for i, v in enumerate(values) if v <= worst + TOL]
        else:
            targets = list(range(m))
        added_any = False
        for i in targets:
            if result.eta <= values[i] + config.epsilon + TOL:
                continue
            gen = strengthen_generating_set(fns[i], chosen, config.stop_pt)
            cut = build_cut(fns[i], gen, alphas[i], i)
            added_any |= state.add_cut(cut, filter_dominated=config.filter_dominated)
        if not added_any:
            raise RuntimeError("separation stalled: violated scenario produced no new cut")

    wall = time.monotonic() - start
    if status == STATUS_OPTIMAL:
        gap = 0.0
        upper = best_lb
    else:
        upper = max(upper, best_lb)
        gap = (upper - best_lb) / max(upper, _TINY)
    return SolveReport(eta=best_lb, x=best_x, upper_bound=upper, gap=gap,
                       iterations=iterations,
                       cuts_added=len(state.cut_pool) - warm_size,
                       wall_time=wall, status=status,
                       master_values=tuple(master_values),
                       pool=tuple(state.cut_pool))


def brute_force_robust(fns: Sequence[SetFunction], alphas: Sequence[float],
                       costs: Sequence[float], budget: float,
                       max_ground: int = 22) -> tuple:
    """Exact reference by enumeration; refuses ground sets above max_ground.

    Returns (eta, x) with ties broken by the lexicographically smallest
    binary vector.
    """
    n = fns[0].ground_size
    if n > max_ground:
        raise ValueError(f"ground set of size {n} exceeds the enumeration guard {max_ground}")
    if len(alphas) != len(fns):
        raise ValueError("need one alpha per scenario function")
    best_val = -math.inf
    best_x = None
    for mask in range(1 << n):
        x = tuple((mask >> j) & 1 for j in range(n))
        cost = sum(c for c, xj in zip(costs, x) if xj)
        if cost > budget:
            continue
        chosen = support(x)
        value = min(fn.value(chosen) / a for fn, a in zip(fns, alphas))
        if value > best_val or (value == best_val and x < best_x):
            best_val, best_x = value, x
    return best_val, best_x

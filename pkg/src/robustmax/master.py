"""Relaxed master problem: maximize eta under a cut pool and one knapsack row.

maximize   eta
subject to eta <= constant_k + coefficients_k . x   for every pool cut k
           costs . x <= budget,  x binary

Because every cut coefficient is nonnegative, a per-cut fractional knapsack
over the free variables upper-bounds any feasible completion of a partial
assignment; the node bound is the minimum of those per-cut values.  That
bound drives a best-bound branch and bound, which keeps the artifact free of
an external MILP dependency.

A MasterState is owned by a single solve call; distinct states may run in
parallel.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import SubmodularCut, dominates

STATUS_OPTIMAL = "optimal"
STATUS_TIME_LIMIT = "time_limit"

_EQ_TOL = 1e-12


@dataclass(frozen=True)
class MasterResult:
    eta: float
    x: tuple
    bound: float
    status: str


def node_bound(cuts: Sequence[SubmodularCut], fixed_one: Iterable[int],
               fixed_zero: Iterable[int], costs: Sequence[float],
               budget: float) -> float:
    """Upper bound for the node where fixed_one is in and fixed_zero is out.

    Per cut: constant + fixed contribution + fractional knapsack of the free
    coefficients within the remaining budget; the bound is the minimum over
    cuts.  Returns -inf when fixed_one already overruns the budget.
    """
    ones = frozenset(fixed_one)
    zeros = frozenset(fixed_zero)
    if ones & zeros:
        raise ValueError("fixed sets must be disjoint")
    remaining = budget - sum(costs[j] for j in ones)
    if remaining < 0:
        return -math.inf
    n = len(costs)
    free = [j for j in range(n) if j not in ones and j not in zeros]
    best = math.inf
    for cut in cuts:
        value = cut.constant + sum(cut.coefficients[j] for j in ones)
        room = remaining
        for j in sorted(free, key=lambda t: (-cut.coefficients[t] / costs[t], t)):
            if room <= 0:
                break
            take = min(1.0, room / costs[j])
            value += take * cut.coefficients[j]
            room -= take * costs[j]
        best = min(best, value)
    return best


class MasterState:
    """Cut pool plus knapsack data; re-solvable as the pool grows."""

    def __init__(self, n: int, costs: Sequence[float], budget: float):
        if len(costs) != n:
            raise ValueError("one cost per variable is required")
        if any(c <= 0 for c in costs):
            raise ValueError("costs must be positive")
        self.n = n
        self.costs = tuple(costs)
        self.budget = budget
        self.cut_pool: list = []
        self.incumbent: tuple | None = None
        self.best_bound = math.inf
        self._dirty = True

    def add_cut(self, cut: SubmodularCut, filter_dominated: bool = True) -> bool:
        """Append a cut; with filtering, drop it (or drop existing cuts) when a
        pool cut with the same generating set pointwise dominates the other."""
        if cut.ground_size != self.n:
            raise ValueError("cut dimension does not match the master")
        if filter_dominated:
            same_gen = [c for c in self.cut_pool if c.generating_set == cut.generating_set]
            if any(dominates(old, cut) for old in same_gen):
                return False
            drop = {id(old) for old in same_gen if dominates(cut, old)}
            if drop:
                self.cut_pool = [c for c in self.cut_pool if id(c) not in drop]
        self.cut_pool.append(cut)
        self._dirty = True
        return True

    # -- prepared arrays -----------------------------------------------------

    def _prepare(self):
        if not self._dirty:
            return
        A = np.array([c.coefficients for c in self.cut_pool], dtype=float)
        C = np.array([c.constant for c in self.cut_pool], dtype=float)
        cost = np.array(self.costs, dtype=float)
        ratio = A / cost[None, :]
        order = np.argsort(-ratio, axis=1, kind="stable")
        self._A = A
        self._C = C
        self._cost = cost
        self._order = order
        self._A_ord = np.take_along_axis(A, order, axis=1)
        self._W_ord = cost[order]
        # Branch priority: free variable with the best guaranteed (min over
        # cuts) coefficient per unit cost, ties to the smallest index.
        score = A.min(axis=0) / cost
        self._branch_order = np.lexsort((np.arange(self.n), -score))
        self._dirty = False

    def _evaluate(self, ones: np.ndarray, free: np.ndarray, cost_ones: float):
        """(fractional bound, value of the zeros-completion) for a node."""
        remaining = self.budget - cost_ones
        base = self._C + self._A[:, ones].sum(axis=1)
        zero_completion = float(base.min())
        if remaining < -1e-9:
            return -math.inf, -math.inf
        remaining = max(remaining, 0.0)
        # Mask the per-cut sorted items down to the free variables.
        sel = free[self._order]
        w = np.where(sel, self._W_ord, 0.0)
        v = np.where(sel, self._A_ord, 0.0)
        cw = np.cumsum(w, axis=1)
        taken = cw <= remaining + 1e-12
        full = (v * taken).sum(axis=1)
        pos = taken.sum(axis=1)
        frac = np.zeros(len(base))
        rows = np.nonzero(pos < self.n)[0]
        if rows.size:
            p = pos[rows]
            prev = np.where(p > 0, cw[rows, np.maximum(p - 1, 0)], 0.0)
            wv = w[rows, p]
            vv = v[rows, p]
            with np.errstate(invalid="ignore", divide="ignore"):
                part = np.where(wv > 0, vv * (remaining - prev) / wv, 0.0)
            frac[rows] = np.maximum(part, 0.0)
        bound = float((base + full + frac).min())
        return bound, zero_completion

    def _greedy_start(self):
        """Greedy incumbent: repeatedly add the affordable item with the best
        pool-min increase, smallest index on ties."""
        ones = np.zeros(self.n, dtype=bool)
        base = self._C.copy()
        cost_ones = 0.0
        value = float(base.min())
        while True:
            affordable = (~ones) & (self._cost <= self.budget - cost_ones + 1e-12)
            if not affordable.any():
                break
            candidate_values = (base[:, None] + self._A).min(axis=0)
            candidate_values[~affordable] = -math.inf
            j = int(np.argmax(candidate_values))
            if candidate_values[j] <= value + _EQ_TOL:
                break
            ones[j] = True
            base = base + self._A[:, j]
            cost_ones += self._cost[j]
            value = candidate_values[j]
        return value, ones, cost_ones

    # -- solve ----------------------------------------------------------------

    def solve(self, gap_tol: float = 1e-6, time_limit: float | None = None,
              relative_gap: bool = False) -> MasterResult:
        """Best-bound branch and bound over the pool.

        With gap_tol == 0 the search explores bound ties, so the returned x is
        the lexicographically smallest optimal vector; with gap_tol > 0 it
        stops once the remaining bound is within gap_tol (absolute by default)
        of the incumbent.  A time limit never raises: the incumbent and the
        best remaining bound are returned with status "time_limit".
        """
        if not self.cut_pool:
            raise ValueError("cut pool is empty; solve needs at least one cut")
        if gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative")
        self._prepare()
        start = time.monotonic()

        def threshold(best: float) -> float:
            if gap_tol == 0:
                return best - 1e-12
            slack = gap_tol * max(abs(best), 1.0) if relative_gap else gap_tol
            return best + slack

        inc_value, inc_ones, _ = self._greedy_start()
        inc_x = tuple(int(b) for b in inc_ones)

        def offer(value: float, ones: np.ndarray):
            nonlocal inc_value, inc_x
            if value > inc_value + _EQ_TOL:
                inc_value = value
                inc_x = tuple(int(b) for b in ones)
            elif value >= inc_value - _EQ_TOL:
                x = tuple(int(b) for b in ones)
                if x < inc_x:
                    inc_x = x

        root_free = np.ones(self.n, dtype=bool)
        root_bound, root_value = self._evaluate(np.zeros(self.n, dtype=bool), root_free, 0.0)
        offer(root_value, np.zeros(self.n, dtype=bool))
        seq = 0
        heap = [(-root_bound, seq, np.zeros(self.n, dtype=bool), root_free, 0, 0.0)]
        status = STATUS_OPTIMAL
        top_remaining = -math.inf
        while heap:
            neg_bound, _, ones, free, level, cost_ones = heapq.heappop(heap)
            bound = -neg_bound
            if bound <= threshold(inc_value):
                # best-first order: nothing left can beat the incumbent
                top_remaining = max(top_remaining, bound)
                break
            if time_limit is not None and time.monotonic() - start > time_limit:
                status = STATUS_TIME_LIMIT
                top_remaining = max(top_remaining, bound)
                break
            if level >= self.n:
                continue
            j = int(self._branch_order[level])
            child_free = free.copy()
            child_free[j] = False
            if cost_ones + self._cost[j] <= self.budget + 1e-12:
                child_ones = ones.copy()
                child_ones[j] = True
                child_cost = cost_ones + float(self._cost[j])
                b1, v1 = self._evaluate(child_ones, child_free, child_cost)
                offer(v1, child_ones)
                if b1 > threshold(inc_value):
                    seq += 1
                    heapq.heappush(heap, (-b1, seq, child_ones, child_free, level + 1, child_cost))
            b0, v0 = self._evaluate(ones, child_free, cost_ones)
            offer(v0, ones)
            if b0 > threshold(inc_value):
                seq += 1
                heapq.heappush(heap, (-b0, seq, ones, child_free, level + 1, cost_ones))

        if heap:
            top_remaining = max(top_remaining, -heap[0][0])
        x_arr = np.array(inc_x, dtype=float)
        eta = float((self._C + self._A @ x_arr).min())
        bound = max(eta, inc_value, top_remaining)
        self.incumbent = (eta, inc_x)
        self.best_bound = bound
        return MasterResult(eta=eta, x=inc_x, bound=bound, status=status)

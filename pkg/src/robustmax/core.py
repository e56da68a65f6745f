"""Set-function oracles, marginal algebra, and linearized hypograph cuts.

A :class:`SetFunction` wraps a monotone submodular function on the ground set
``{0, .., n-1}`` with memoized evaluation.  From an oracle and a generating
set, :func:`build_cut` produces the linear inequality

    eta <= constant + sum_j coefficients[j] * x[j]

that upper-bounds ``f(X)/alpha`` over all binary points and is tight at the
generating set.  Pointwise dominance between such cuts and the facet
diagnostics used for reporting live here as well.

Oracles are immutable after construction and safe to share across threads;
the memo cache tolerates concurrent insertion of identical entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import Callable, Iterable, Sequence

TOL = 1e-9
# Slack for dominance comparisons only: wide enough to absorb float dust on
# equal cuts, narrow enough never to drop an almost-incomparable cut.
DOM_TOL = 1e-12


class SetFunction:
    """Memoized oracle for a normalized monotone submodular set function.

    ``eval_fn`` maps a frozenset of 0-based elements to a float and must
    satisfy ``eval_fn(frozenset()) == 0``.
    """

    __slots__ = ("ground_size", "_eval", "_cache", "name")

    def __init__(self, ground_size: int, eval_fn: Callable[[frozenset], float],
                 name: str = ""):
        if ground_size <= 0:
            raise ValueError("ground_size must be positive")
        self.ground_size = ground_size
        self._eval = eval_fn
        self._cache: dict = {}
        self.name = name
        empty = eval_fn(frozenset())
        if abs(empty) > TOL:
            raise ValueError(f"set function is not normalized: f(empty)={empty!r}")
        self._cache[0] = 0.0

    def _key(self, subset: Iterable[int]):
        mask = 0
        n = self.ground_size
        for j in subset:
            if not 0 <= j < n:
                raise ValueError(f"element {j} out of range for ground set of size {n}")
            mask |= 1 << j
        return mask

    def value(self, subset: Iterable[int]) -> float:
        """f(S), cached by subset bitmask."""
        key = self._key(subset)
        cached = self._cache.get(key)
        if cached is None:
            members = frozenset(j for j in range(self.ground_size) if key >> j & 1)
            cached = float(self._eval(members))
            self._cache[key] = cached
        return cached

    def marginal(self, j: int, subset: Iterable[int]) -> float:
        """f(S + j) - f(S); zero when j is already in S."""
        key = self._key(subset)
        if not 0 <= j < self.ground_size:
            raise ValueError(f"element {j} out of range for ground set of size {self.ground_size}")
        bit = 1 << j
        if key & bit:
            return 0.0
        return self._value_by_key(key | bit) - self._value_by_key(key)

    def _value_by_key(self, key: int) -> float:
        cached = self._cache.get(key)
        if cached is None:
            members = frozenset(j for j in range(self.ground_size) if key >> j & 1)
            cached = float(self._eval(members))
            self._cache[key] = cached
        return cached


@dataclass(frozen=True)
class SubmodularCut:
    """One linearized hypograph inequality eta <= constant + coefficients . x.

    ``generating_set`` and ``scenario_index`` record where the cut came from;
    ``scale`` is the positive divisor already applied to constant and
    coefficients.
    """

    constant: float
    coefficients: tuple
    scenario_index: int
    generating_set: frozenset = field(default_factory=frozenset)
    scale: float = 1.0

    @property
    def ground_size(self) -> int:
        return len(self.coefficients)

    def rhs_at(self, x: Sequence[float]) -> float:
        """Right-hand side evaluated at a binary (or fractional) point."""
        if len(x) != len(self.coefficients):
            raise ValueError("point dimension does not match cut")
        return self.constant + sum(c * xi for c, xi in zip(self.coefficients, x))

    def rhs_at_set(self, subset: Iterable[int]) -> float:
        return self.constant + sum(self.coefficients[j] for j in set(subset))


def build_cut(fn: SetFunction, subset: Iterable[int], alpha: float,
              scenario_index: int) -> SubmodularCut:
    """Linearize fn's hypograph at the generating set, scaled by alpha.

    The inequality is tight at the generating set and valid for
    ``fn(X)/alpha`` at every binary point.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    gen = frozenset(subset)
    n = fn.ground_size
    if gen and (min(gen) < 0 or max(gen) >= n):
        raise ValueError("generating set not within ground set")
    full_minus = {j: fn.marginal(j, frozenset(range(n)) - {j}) for j in gen}
    constant = (fn.value(gen) - sum(full_minus.values())) / alpha
    coeffs = []
    for j in range(n):
        if j in gen:
            coeffs.append(full_minus[j] / alpha)
        else:
            coeffs.append(fn.marginal(j, gen) / alpha)
    return SubmodularCut(constant=constant, coefficients=tuple(coeffs),
                         scenario_index=scenario_index, generating_set=gen,
                         scale=alpha)


def empty_set_cuts(fns: Sequence[SetFunction], alphas: Sequence[float]) -> list:
    """One empty-generating-set cut per function; the standard warm start."""
    if not fns:
        raise ValueError("at least one set function is required")
    if len(fns) != len(alphas):
        raise ValueError("need one alpha per set function")
    return [build_cut(fn, (), alpha, i) for i, (fn, alpha) in enumerate(zip(fns, alphas))]


def dominates(a: SubmodularCut, b: SubmodularCut) -> bool:
    """True iff a's right-hand side is pointwise <= b's, making b redundant."""
    if a.ground_size != b.ground_size:
        raise ValueError("cuts have mismatched dimensions")
    if a.constant > b.constant + DOM_TOL:
        return False
    return all(ca <= cb + DOM_TOL for ca, cb in zip(a.coefficients, b.coefficients))


@dataclass(frozen=True)
class FacetDiagnostics:
    """Outcome of the sufficient facet conditions for one cut.

    ``witnesses[j]`` is the swap partner found outside the generating set for
    the in-set element j; ``tolerance`` is the equality slack the verdict was
    computed under.  Diagnostic only; solver correctness never depends on
    this check.
    """

    cond_i: bool
    cond_ii: bool
    witnesses: dict
    tolerance: float = TOL


def _scaled_min(fns, alphas, subset) -> float:
    return min(fn.value(subset) / a for fn, a in zip(fns, alphas))


def facet_check(fns: Sequence[SetFunction], alphas: Sequence[float],
                subset: Iterable[int], scenario_index: int) -> FacetDiagnostics:
    """Check the sufficient conditions for the cut of (subset, scenario) to be
    facet defining for the reduced hypograph formulation.

    Condition (i): every in-set element j has a witness k outside the set with
    zero pair marginal, and the cut's function attains the scaled minimum at
    the set itself and at the swapped set.  Condition (ii): the cut's index is
    the (smallest) scaled argmin at the set and its function attains the
    scaled minimum at every one-element extension.  When both hold, the
    standard n+1 tight affinely independent points exist.
    """
    if len(fns) != len(alphas):
        raise ValueError("need one alpha per set function")
    gen = frozenset(subset)
    n = fns[0].ground_size
    i = scenario_index
    fi, ai = fns[i], alphas[i]
    outside = [j for j in range(n) if j not in gen]

    def attains(subset_) -> bool:
        return fi.value(subset_) / ai <= _scaled_min(fns, alphas, subset_) + TOL

    witnesses: dict = {}
    cond_i = attains(gen)
    for j in sorted(gen):
        found = None
        for k in outside:
            if fi.marginal(j, frozenset([k])) > TOL:
                continue
            swap = (gen - {j}) | {k}
            if attains(swap) and attains(gen | {k}):
                found = k
                break
        if found is None:
            cond_i = False
        else:
            witnesses[j] = found

    values_at_gen = [fn.value(gen) / a for fn, a in zip(fns, alphas)]
    argmin = min(range(len(fns)), key=lambda t: (values_at_gen[t], t))
    cond_ii = argmin == i
    if cond_ii:
        for j in outside:
            if not attains(gen | {j}):
                cond_ii = False
                break
    return FacetDiagnostics(cond_i=cond_i, cond_ii=cond_ii, witnesses=witnesses)


def check_submodular(fn: SetFunction, exhaustive_limit: int = 12,
                     samples: int = 10_000, seed: int = 0) -> bool:
    """True iff no monotonicity or diminishing-returns violation is found.

    Exhaustive over all (X, j, k) triples when the ground set is small,
    seeded random sampling otherwise.
    """
    n = fn.ground_size
    if abs(fn.value(())) > TOL:
        return False
    if n <= exhaustive_limit:
        for mask in range(1 << n):
            base = frozenset(j for j in range(n) if mask >> j & 1)
            out = [j for j in range(n) if not mask >> j & 1]
            for j in out:
                mj = fn.marginal(j, base)
                if mj < -TOL:
                    return False
                for k in out:
                    if k == j:
                        continue
                    if fn.marginal(j, base | {k}) > mj + TOL:
                        return False
        return True
    rng = Random(seed)
    for _ in range(samples):
        size = rng.randint(0, n - 2)
        base = frozenset(rng.sample(range(n), size))
        j, k = rng.sample([v for v in range(n) if v not in base], 2)
        mj = fn.marginal(j, base)
        if mj < -TOL or fn.marginal(j, base | {k}) > mj + TOL:
            return False
    return True

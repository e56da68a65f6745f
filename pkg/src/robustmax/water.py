"""Outbreak-detection objective on a water network, plus instance files.

A contamination event starts at a source node and travels along directed
edges; a sensor detects it when the flow first arrives.  The damage counter
for source j is the number of reachable nodes whose arrival time is strictly
below a threshold, so a sensor placed at travel time t from the source saves
every node at arrival time >= t, the sensed node included.  The expected
saving over sources, weighted by event probabilities, is the monotone
submodular objective the solvers maximize.

Travel times are static per-scenario edge weights; no hydraulics.  All data
is immutable after construction and shared freely across threads.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from random import Random

import numpy as np

from .core import SetFunction, TOL


class ParseError(ValueError):
    """Malformed instance file; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Network:
    node_count: int
    edges: tuple
    sources: tuple
    source_probabilities: tuple
    sensor_costs: tuple
    budget: int

    def __post_init__(self):
        n = self.node_count
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range")
        if len(self.sources) != len(self.source_probabilities):
            raise ValueError("one probability per source is required")
        for j in self.sources:
            if not 0 <= j < n:
                raise ValueError(f"source {j} out of range")
        if any(p < 0 for p in self.source_probabilities):
            raise ValueError("source probabilities must be nonnegative")
        if abs(sum(self.source_probabilities) - 1.0) > TOL:
            raise ValueError("source probabilities must sum to 1")
        if len(self.sensor_costs) != n:
            raise ValueError("one sensor cost per node is required")
        if any(c <= 0 for c in self.sensor_costs):
            raise ValueError("sensor costs must be positive")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")


@dataclass(frozen=True)
class Scenario:
    edge_weights: tuple

    def __post_init__(self):
        if any(w < 1 for w in self.edge_weights):
            raise ValueError("edge travel times must be >= 1")


@dataclass(frozen=True, eq=False)
class ReductionMatrix:
    """saved[s, j]: reachable nodes from source j with arrival >= arrival at s.

    ``reachable_total[j]`` counts all nodes reachable from source j (the
    source itself included); a sensor on the source saves everything, an
    unreachable sensor saves nothing.
    """

    saved: np.ndarray
    reachable_total: np.ndarray


def shortest_times(network: Network, scenario: Scenario, source: int) -> np.ndarray:
    """Arrival time of the contamination at every node; inf when unreachable."""
    if len(scenario.edge_weights) != len(network.edges):
        raise ValueError("scenario weight count does not match edge count")
    adj: list = [[] for _ in range(network.node_count)]
    for (u, v), w in zip(network.edges, scenario.edge_weights):
        adj[u].append((v, w))
    dist = np.full(network.node_count, math.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def reduction_matrix(network: Network, scenario: Scenario) -> ReductionMatrix:
    n = network.node_count
    k = len(network.sources)
    saved = np.zeros((n, k))
    total = np.zeros(k)
    for col, src in enumerate(network.sources):
        dist = shortest_times(network, scenario, src)
        finite = np.sort(dist[np.isfinite(dist)])
        total[col] = finite.size
        for s in range(n):
            if math.isfinite(dist[s]):
                # nodes with arrival >= arrival at the sensor are saved
                saved[s, col] = finite.size - np.searchsorted(finite, dist[s], side="left")
    return ReductionMatrix(saved=saved, reachable_total=total)


def expected_reduction_oracle(network: Network, scenario: Scenario,
                              name: str = "") -> SetFunction:
    """Monotone submodular oracle S -> expected number of saved nodes."""
    matrix = reduction_matrix(network, scenario)
    probs = np.asarray(network.source_probabilities)
    saved = matrix.saved

    def evaluate(subset: frozenset) -> float:
        if not subset:
            return 0.0
        return float(probs @ saved[sorted(subset)].max(axis=0))

    return SetFunction(network.node_count, evaluate, name=name)


@dataclass(frozen=True)
class Instance:
    network: Network
    scenarios: tuple
    alpha_mode: str = "unit"
    alpha_values: tuple | None = None
    budget_infeasible: bool = False

    def __post_init__(self):
        if self.alpha_mode not in ("unit", "values", "solve"):
            raise ValueError(f"unknown alpha mode {self.alpha_mode!r}")
        if self.alpha_mode == "values":
            if self.alpha_values is None or len(self.alpha_values) != len(self.scenarios):
                raise ValueError("alpha values must match the scenario count")
            if any(a <= 0 for a in self.alpha_values):
                raise ValueError("alpha values must be positive")

    @property
    def scenario_count(self) -> int:
        return len(self.scenarios)

    def build_oracles(self) -> list:
        return [expected_reduction_oracle(self.network, sc, name=f"scenario-{i}")
                for i, sc in enumerate(self.scenarios)]


def _tokens(text: str):
    """Yield (line_no, token_list) for non-empty lines, comments stripped."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield line_no, body.split()


class _LineReader:
    def __init__(self, text: str):
        self._lines = list(_tokens(text))
        self._pos = 0
        self.last_line = 0

    def peek(self):
        return self._lines[self._pos] if self._pos < len(self._lines) else None

    def take(self, expect: str | None = None):
        if self._pos >= len(self._lines):
            raise ParseError(self.last_line + 1, "unexpected end of file"
                             + (f", expected {expect!r}" if expect else ""))
        line_no, toks = self._lines[self._pos]
        self._pos += 1
        self.last_line = line_no
        if expect is not None and toks[0] != expect:
            raise ParseError(line_no, f"expected {expect!r}, found {toks[0]!r}")
        return line_no, toks


def _ints(line_no, toks, count=None, minimum=None, what="value"):
    try:
        vals = [int(t) for t in toks]
    except ValueError:
        raise ParseError(line_no, f"non-integer {what}") from None
    if count is not None and len(vals) != count:
        raise ParseError(line_no, f"expected {count} {what}s, found {len(vals)}")
    if minimum is not None and any(v < minimum for v in vals):
        raise ParseError(line_no, f"{what} below {minimum}")
    return vals


def parse_instance(text: str) -> Instance:
    """Parse the line-oriented instance format (see serialize_instance)."""
    rd = _LineReader(text)
    ln, toks = rd.take("nodes")
    (n,) = _ints(ln, toks[1:], 1, 1, "node count")
    ln, toks = rd.take("edges")
    (e_count,) = _ints(ln, toks[1:], 1, 0, "edge count")
    edges = []
    for _ in range(e_count):
        ln, toks = rd.take()
        u, v = _ints(ln, toks, 2, 0, "endpoint")
        if u >= n or v >= n:
            raise ParseError(ln, f"edge ({u}, {v}) out of range for {n} nodes")
        edges.append((u, v))
    ln, toks = rd.take("sources")
    vals = _ints(ln, toks[1:], None, 0, "source")
    if not vals or len(vals) != vals[0] + 1:
        raise ParseError(ln, "source count does not match the listed sources")
    sources = vals[1:]
    if any(j >= n for j in sources):
        raise ParseError(ln, "source id out of range")

    probs = None
    nxt = rd.peek()
    if nxt and nxt[1][0] == "probs":
        ln, toks = rd.take("probs")
        try:
            probs = [float(t) for t in toks[1:]]
        except ValueError:
            raise ParseError(ln, "non-numeric probability") from None
        if len(probs) != len(sources):
            raise ParseError(ln, "one probability per source is required")
        if abs(sum(probs) - 1.0) > TOL:
            raise ParseError(ln, f"probabilities sum to {sum(probs)!r}, not 1")
    if probs is None:
        probs = [1.0 / len(sources)] * len(sources)

    ln, toks = rd.take("costs")
    costs = _ints(ln, toks[1:], n, 1, "cost")
    ln, toks = rd.take("budget")
    (budget,) = _ints(ln, toks[1:], 1, 0, "budget")
    ln, toks = rd.take("scenarios")
    (m,) = _ints(ln, toks[1:], 1, 1, "scenario count")
    scenarios = []
    for _ in range(m):
        ln, toks = rd.take()
        weights = _ints(ln, toks, e_count, 1, "travel time")
        scenarios.append(Scenario(edge_weights=tuple(weights)))

    alpha_mode, alpha_values = "unit", None
    nxt = rd.peek()
    if nxt and nxt[1][0] == "alpha":
        ln, toks = rd.take("alpha")
        if len(toks) < 2:
            raise ParseError(ln, "alpha mode missing")
        alpha_mode = toks[1]
        if alpha_mode == "values":
            try:
                alpha_values = tuple(float(t) for t in toks[2:])
            except ValueError:
                raise ParseError(ln, "non-numeric alpha value") from None
            if len(alpha_values) != m:
                raise ParseError(ln, f"expected {m} alpha values, found {len(alpha_values)}")
        elif alpha_mode not in ("unit", "solve"):
            raise ParseError(ln, f"unknown alpha mode {alpha_mode!r}")
    if rd.peek() is not None:
        ln, toks = rd.take()
        raise ParseError(ln, f"unexpected trailing content {toks[0]!r}")

    network = Network(node_count=n, edges=tuple(edges), sources=tuple(sources),
                      source_probabilities=tuple(probs), sensor_costs=tuple(costs),
                      budget=budget)
    try:
        return Instance(network=network, scenarios=tuple(scenarios),
                        alpha_mode=alpha_mode, alpha_values=alpha_values,
                        budget_infeasible=budget < min(costs))
    except ValueError as exc:
        raise ParseError(rd.last_line, str(exc)) from None


def serialize_instance(instance: Instance) -> str:
    """Inverse of parse_instance: parse(serialize(x)) == x."""
    net = instance.network
    out = [f"nodes {net.node_count}", f"edges {len(net.edges)}"]
    out += [f"{u} {v}" for u, v in net.edges]
    out.append("sources " + " ".join(str(t) for t in (len(net.sources),) + net.sources))
    out.append("probs " + " ".join(repr(p) for p in net.source_probabilities))
    out.append("costs " + " ".join(str(c) for c in net.sensor_costs))
    out.append(f"budget {net.budget}")
    out.append(f"scenarios {len(instance.scenarios)}")
    out += [" ".join(str(w) for w in sc.edge_weights) for sc in instance.scenarios]
    if instance.alpha_mode == "values":
        out.append("alpha values " + " ".join(repr(a) for a in instance.alpha_values))
    else:
        out.append(f"alpha {instance.alpha_mode}")
    return "\n".join(out) + "\n"


def generate_instance(n: int, edge_factor: float, m: int, j_count: int,
                      budget: int, seed: int) -> Instance:
    """Seeded random instance: a reachability backbone plus extra edges,
    travel times ~ U(1,10) per scenario, sensor costs ~ U(5,10), uniform
    source probabilities.  Identical seeds give identical instances."""
    if not 1 <= j_count <= n:
        raise ValueError("source count must be between 1 and the node count")
    if m < 1:
        raise ValueError("at least one scenario is required")
    rng = Random(seed)
    e_count = max(1, math.ceil(edge_factor * n - 1e-9))
    order = list(range(n))
    rng.shuffle(order)
    edges = []
    seen = set()
    for u, v in zip(order, order[1:]):
        if len(edges) == e_count:
            break
        edges.append((u, v))
        seen.add((u, v))
    while len(edges) < e_count:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u != v and (u, v) not in seen:
            edges.append((u, v))
            seen.add((u, v))
    sources = tuple(rng.sample(range(n), j_count))
    costs = tuple(rng.randint(5, 10) for _ in range(n))
    scenarios = tuple(Scenario(edge_weights=tuple(rng.randint(1, 10) for _ in edges))
                      for _ in range(m))
    network = Network(node_count=n, edges=tuple(edges), sources=sources,
                      source_probabilities=tuple(1.0 / j_count for _ in sources),
                      sensor_costs=costs, budget=budget)
    return Instance(network=network, scenarios=scenarios,
                    budget_infeasible=budget < min(costs))


def with_budget(instance: Instance, budget: int) -> Instance:
    """Copy of the instance with a different knapsack budget."""
    net = replace(instance.network, budget=budget)
    return replace(instance, network=net,
                   budget_infeasible=budget < min(net.sensor_costs))

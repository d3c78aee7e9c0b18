"""Concave-cost multicommodity flow instances and their random generator."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..exceptions import InvalidArgument
from ..oracle import power

COST_RANGES = {"a": (0.1, 10.0), "b": (0.33, 33.4)}
EXPONENT_RANGES = {"moderate": (0.8, 0.99), "strong": (0.0099, 0.99)}


@dataclass(frozen=True)
class McfInstance:
    """Undirected network with per-edge costs ``a + b*xi**c`` (zero at 0).

    ``edges[e] = (i, j)`` with ``i < j``; ``commodities[k] = (origin, dest, demand)``.
    """

    n: int
    edges: tuple
    costs: tuple
    commodities: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        edges = tuple((min(int(i), int(j)), max(int(i), int(j))) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "costs", tuple(tuple(float(v) for v in c) for c in self.costs))
        object.__setattr__(self, "commodities",
                           tuple((int(o), int(d), int(q)) for o, d, q in self.commodities))
        if self.n < 2:
            raise InvalidArgument("need at least two nodes")
        if len(self.costs) != len(self.edges):
            raise InvalidArgument("one cost triple per edge required")
        if len(set(edges)) != len(edges) or any(i == j for i, j in edges):
            raise InvalidArgument("edges must be simple and distinct")
        if any(not (0 <= i < self.n and 0 <= j < self.n) for i, j in edges):
            raise InvalidArgument("edge endpoint out of range")
        for o, d, q in self.commodities:
            if o == d or q <= 0 or not (0 <= o < self.n and 0 <= d < self.n):
                raise InvalidArgument(f"bad commodity {(o, d, q)}")

    @property
    def m(self):
        return len(self.edges)

    @property
    def K(self):
        return len(self.commodities)

    @property
    def B(self):
        return sum(q for _, _, q in self.commodities)

    @property
    def flow_variables(self):
        """Directed per-commodity arc variables before expansion: ``K*m``."""
        return self.K * self.m

    @cached_property
    def oracles(self):
        return tuple(power(a, b, c, zero_at_origin=True) for a, b, c in self.costs)

    def is_connected(self):
        seen, stack = {0}, [0]
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def is_complete_uniform(self):
        pairs = {(o, d) for o, d, q in self.commodities if q == 1}
        return len(pairs) == self.K == self.n * (self.n - 1)

    def cost(self, flows, psis=None):
        """``sum_e phi_e(flow_e)`` (or ``psi_e`` when given)."""
        fns = psis if psis is not None else self.oracles
        return float(sum(float(fn(float(x))) for fn, x in zip(fns, flows)))

    def to_json(self):
        return {"n": self.n, "edges": [list(e) for e in self.edges],
                "costs": [{"a": a, "b": b, "c": c} for a, b, c in self.costs],
                "commodities": [list(k) for k in self.commodities], "meta": self.meta}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data):
        try:
            costs = [(c["a"], c["b"], c["c"]) for c in data["costs"]]
            return cls(data["n"], data["edges"], costs, data["commodities"], data.get("meta", {}))
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed instance JSON: {exc}") from exc


def edge_count(n, density):
    if density == "sparse":
        return 3 * n
    if density == "dense":
        return (n * (n - 1) // 4) // 5 * 5
    raise InvalidArgument(f"density must be 'sparse' or 'dense', got {density!r}")


def random_spanning_tree(n, rng):
    """Uniform spanning tree of the complete graph by a random walk."""
    cur = int(rng.integers(n))
    seen = {cur}
    edges = []
    while len(seen) < n:
        nxt = int(rng.integers(n - 1))
        nxt += nxt >= cur  # uniform over the other n-1 nodes
        if nxt not in seen:
            seen.add(nxt)
            edges.append((min(cur, nxt), max(cur, nxt)))
        cur = nxt
    return edges


def complete_uniform_demand(n):
    return [(o, d, 1) for o in range(n) for d in range(n) if o != d]


def gen_instance(n, density="sparse", regime="moderate", seed=0, m=None):
    """Random connected instance with complete uniform demand.

    Three independent streams are spawned from ``seed``: the spanning tree,
    the extra edges and the cost parameters. Costs are drawn per edge in
    insertion order, so instances that differ only in ``m`` share the cost
    parameters of their common edge prefix.
    """
    if n < 3:
        raise InvalidArgument("n must be at least 3")
    if regime not in EXPONENT_RANGES:
        raise InvalidArgument(f"regime must be one of {sorted(EXPONENT_RANGES)}, got {regime!r}")
    if m is None:
        m = edge_count(n, density)
    cap = n * (n - 1) // 2
    if m > cap:
        raise InvalidArgument(f"m={m} exceeds the {cap} edges of a simple graph on {n} nodes")
    if m < n - 1:
        raise InvalidArgument(f"m={m} is too small to connect {n} nodes")
    tree_rng, extra_rng, cost_rng = (np.random.default_rng(s)
                                     for s in np.random.SeedSequence(seed).spawn(3))
    edges = random_spanning_tree(n, tree_rng)
    taken = set(edges)
    free = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in taken]
    picks = extra_rng.choice(len(free), size=m - len(edges), replace=False) if m > len(edges) else []
    edges += [free[int(t)] for t in picks]
    lo_c, hi_c = EXPONENT_RANGES[regime]
    costs = []
    for _ in edges:
        a = cost_rng.uniform(*COST_RANGES["a"])
        b = cost_rng.uniform(*COST_RANGES["b"])
        c = cost_rng.uniform(lo_c, hi_c)
        costs.append((a, b, c))
    meta = {"density": density, "regime": regime, "seed": seed}
    return McfInstance(n, edges, costs, complete_uniform_demand(n), meta)


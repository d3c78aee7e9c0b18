"""Exhaustive optimum of tiny concave-cost flow instances.

Some vertex optimum sends each commodity along a single simple path, so
enumerating one path per commodity is exact. Combinations are folded
commodity by commodity into the set of distinct edge-flow vectors, which
keeps the search far below the raw product of path counts.
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from ..exceptions import SizeCapExceeded

MAX_NODES = 5
MAX_COMMODITIES = 20


@dataclass
class BruteForceResult:
    cost: float
    flows: tuple
    paths: list


def simple_paths(inst):
    g = nx.Graph()
    g.add_nodes_from(range(inst.n))
    index = {}
    for e, (i, j) in enumerate(inst.edges):
        g.add_edge(i, j)
        index[(i, j)] = index[(j, i)] = e
    out = []
    for o, d, _ in inst.commodities:
        paths = []
        for nodes in nx.all_simple_paths(g, o, d):
            paths.append(tuple(index[(u, v)] for u, v in zip(nodes, nodes[1:])))
        out.append(sorted(paths))
    return out


def brute_force_concave_opt(inst, psis=None):
    """Minimum of ``sum_e phi_e(flow_e)`` (or ``psi_e``) over single-path routings."""
    if inst.n > MAX_NODES or inst.K > MAX_COMMODITIES:
        raise SizeCapExceeded(f"brute force limited to n <= {MAX_NODES}, K <= {MAX_COMMODITIES}")
    paths = simple_paths(inst)
    layers = [{(0,) * inst.m: None}]
    for k, (_, _, q) in enumerate(inst.commodities):
        nxt = {}
        for state in layers[-1]:
            for pi, path in enumerate(paths[k]):
                s = list(state)
                for e in path:
                    s[e] += q
                s = tuple(s)
                if s not in nxt:
                    nxt[s] = (state, pi)
        layers.append(nxt)
    fns = psis if psis is not None else inst.oracles
    memo = [dict() for _ in fns]
    best, arg = np.inf, None
    for state in layers[-1]:
        c = 0.0
        for e, x in enumerate(state):
            if x not in memo[e]:
                memo[e][x] = float(fns[e](float(x)))
            c += memo[e][x]
        if c < best:
            best, arg = c, state
    chosen = []
    state = arg
    for k in range(inst.K, 0, -1):
        prev, pi = layers[k][state]
        chosen.append(paths[k - 1][pi])
        state = prev
    chosen.reverse()
    return BruteForceResult(float(best), arg, chosen)


def is_even_flow(flows):
    return all(int(x) % 2 == 0 for x in flows)

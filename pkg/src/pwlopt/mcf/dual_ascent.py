"""Dual ascent lower bound and drop/add primal heuristic for fixed-charge flow.

LP relaxation dual used here: for each commodity ``k`` and directed arc ``a``
of parallel edge ``q`` pick ``w[k][a] >= 0`` with ``sum_{k, a in q} w <= f_q``.
Then ``sum_k SP_k(d_k * s + w_k)`` is a lower bound on the integer optimum,
where ``SP_k`` is the shortest origin-destination path length of commodity
``k``. Ascent raises ``w`` on origin-side cuts; an edge opens once its fixed
cost is fully paid.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InfeasibleInstance

TOL = 1e-9
MAX_IMPROVE_ROUNDS = 50


def _pair_min(n, tail, head, length, mask=None):
    """Dense ``n x n`` matrix of the cheapest arc per ordered pair, plus its arc index."""
    idx = np.arange(len(length))
    if mask is not None:
        idx = idx[mask]
    M = np.full((n, n), np.inf)
    arg = np.full((n, n), -1, dtype=np.int64)
    if len(idx) == 0:
        return M, arg
    order = idx[np.lexsort((idx, length[idx]))]  # by length, then arc index
    key = tail[order] * n + head[order]
    _, first = np.unique(key, return_index=True)
    best = order[first]
    M[tail[best], head[best]] = length[best]
    arg[tail[best], head[best]] = best
    return M, arg


def _dijkstra(M, source, reverse=False):
    """Dense Dijkstra; lowest node index wins ties. Returns ``(dist, pred)``."""
    n = len(M)
    W = M.T if reverse else M
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    dist[source] = 0.0
    done = np.zeros(n, dtype=bool)
    for _ in range(n):
        cand = np.where(done, np.inf, dist)
        u = int(np.argmin(cand))
        if not np.isfinite(cand[u]):
            break
        done[u] = True
        alt = dist[u] + W[u]
        better = (alt < dist) & ~done
        dist[better] = alt[better]
        pred[better] = u
    return dist, pred


@dataclass
class DualAscentResult:
    lower_bound: float
    upper_bound: float
    open_edges: np.ndarray
    routes: list
    edge_flows: np.ndarray
    duals: list = field(repr=False, default_factory=list)
    residual: np.ndarray = field(repr=False, default=None)
    lb_by_commodity: np.ndarray = field(repr=False, default=None)
    steps: int = 0
    seconds: float = 0.0

    @property
    def solution_edges(self):
        """Original edges carrying positive flow."""
        return int(np.count_nonzero(self.edge_flows > 0))


class _Ascent:
    def __init__(self, design):
        self.d = design
        self.tail = design.arc_tail
        self.head = design.arc_head
        self.arc_s = np.repeat(design.s, 2)
        self.residual = design.f.astype(float).copy()
        self.w = [dict() for _ in range(design.K)]

    def lengths(self, k):
        ell = self.d.demands[k] * self.arc_s
        if self.w[k]:
            idx = np.fromiter(self.w[k].keys(), dtype=np.int64)
            ell[idx] += np.fromiter(self.w[k].values(), dtype=float)
        return ell

    def labels(self, k):
        ell = self.lengths(k)
        M, _ = _pair_min(self.d.n, self.tail, self.head, ell)
        L, _ = _dijkstra(M, int(self.d.dests[k]), reverse=True)
        if not np.isfinite(L[self.d.origins[k]]):
            raise InfeasibleInstance(f"commodity {k} cannot reach its destination")
        return ell, L

    def step(self, k):
        """One raise for commodity ``k``; returns the increase (0 when blocked)."""
        n = self.d.n
        o, dst = int(self.d.origins[k]), int(self.d.dests[k])
        ell, L = self.labels(k)
        finite = np.isfinite(L[self.tail]) & np.isfinite(L[self.head])
        rc = np.where(finite, ell + L[self.head] - L[self.tail], np.inf)
        res = self.residual[np.arange(len(ell)) // 2]
        slack = rc + res
        tight = slack <= TOL
        inside = np.zeros(n, dtype=bool)
        inside[o] = True
        frontier = [o]
        adj = {}
        for a in np.flatnonzero(tight):
            adj.setdefault(int(self.tail[a]), []).append(int(self.head[a]))
        while frontier:
            u = frontier.pop()
            for v in adj.get(u, ()):
                if not inside[v]:
                    inside[v] = True
                    frontier.append(v)
        if inside[dst]:
            return 0.0
        cut = np.flatnonzero(inside[self.tail] & ~inside[self.head])
        delta = float(np.min(slack[cut]))
        if delta <= TOL:
            return 0.0
        raise_by = np.maximum(0.0, delta - rc[cut])
        for a, t in zip(cut, raise_by):
            q = int(a) // 2
            t = min(float(t), self.residual[q])
            if t > 0:
                self.w[k][int(a)] = self.w[k].get(int(a), 0.0) + t
                self.residual[q] -= t
        return delta

    def run(self):
        active = list(range(self.d.K))
        steps = 0
        while active:
            still = []
            for k in active:
                steps += 1
                if self.step(k) > 0:
                    still.append(k)
            active = still
        return steps

    def bound(self):
        per = np.array([self.labels(k)[1][self.d.origins[k]] for k in range(self.d.K)])
        return float(per.sum()), per


class _Router:
    """Shortest paths under unit costs ``s`` restricted to open parallel edges."""

    def __init__(self, design):
        self.d = design
        self.tail = design.arc_tail
        self.head = design.arc_head
        self.arc_s = np.repeat(design.s, 2)
        self.by_origin = {}
        for k, o in enumerate(design.origins):
            self.by_origin.setdefault(int(o), []).append(k)

    def evaluate(self, open_mask):
        """Cost, used-edge mask and per-commodity arc routes (inf cost if disconnected)."""
        d = self.d
        arc_open = np.repeat(open_mask, 2)
        M, arg = _pair_min(d.n, self.tail, self.head, self.arc_s, arc_open)
        routes = [None] * d.K
        used = np.zeros(d.n_parallel, dtype=bool)
        routing = 0.0
        for o in sorted(self.by_origin):
            dist, pred = _dijkstra(M, o)
            for k in self.by_origin[o]:
                t = int(d.dests[k])
                if not np.isfinite(dist[t]):
                    return np.inf, used, None
                path = []
                v = t
                while v != o:
                    u = int(pred[v])
                    path.append(int(arg[u, v]))
                    v = u
                path.reverse()
                routes[k] = path
                used[np.array(path, dtype=np.int64) // 2] = True
                routing += d.demands[k] * dist[t]
        return float(d.f[used].sum() + routing), used, routes


def improve(design, open_mask, router=None):
    """First-improvement drop pass then add pass, repeated until stable."""
    router = router or _Router(design)
    best, used, routes = router.evaluate(open_mask)
    if not np.isfinite(best):
        raise InfeasibleInstance("initial open edge set does not connect every commodity")
    cur = used.copy()
    for _ in range(MAX_IMPROVE_ROUNDS):
        changed = False
        for q in np.flatnonzero(cur):
            trial = cur.copy()
            trial[q] = False
            cost, u, r = router.evaluate(trial)
            if cost < best - TOL * max(1.0, best):
                best, cur, routes, changed = cost, u, r, True
        pair_best = {}
        for q in np.flatnonzero(cur):
            key = (int(design.tail[q]), int(design.head[q]))
            pair_best[key] = min(pair_best.get(key, np.inf), design.s[q])
        for q in np.flatnonzero(~cur):
            key = (int(design.tail[q]), int(design.head[q]))
            if design.s[q] >= pair_best.get(key, np.inf):
                continue  # never preferred by the router
            trial = cur.copy()
            trial[q] = True
            cost, u, r = router.evaluate(trial)
            if cost < best - TOL * max(1.0, best):
                best, cur, routes, changed = cost, u, r, True
                key = (int(design.tail[q]), int(design.head[q]))
                pair_best[key] = min(pair_best.get(key, np.inf), design.s[q])
        if not changed:
            break
    return best, cur, routes


def edge_flows(design, routes):
    flows = np.zeros(design.m_original)
    for k, path in enumerate(routes):
        for a in path:
            flows[design.edge_of[a // 2]] += design.demands[k]
    return flows


def consolidate(design, routes):
    """Move each original edge's flow onto its single cheapest piece at that flow.

    Returns ``(cost, used, routes)``; never costlier than the input routing.
    """
    flows = edge_flows(design, routes)
    copies = {}
    for q, e in enumerate(design.edge_of):
        copies.setdefault(int(e), []).append(q)
    best = {}
    for e, qs in copies.items():
        if flows[e] > 0:
            best[e] = min(qs, key=lambda q: (design.f[q] + design.s[q] * flows[e], q))
    used = np.zeros(design.n_parallel, dtype=bool)
    used[list(best.values())] = True
    moved = [[2 * best[int(design.edge_of[a // 2])] + a % 2 for a in path] for path in routes]
    cost = float(sum(design.f[q] + design.s[q] * flows[e] for e, q in best.items()))
    return cost, used, moved


def dual_ascent(design):
    """Lower bound ``Z_LB`` and heuristic solution ``Z_DA`` with ``Z_LB <= Z_DA``."""
    t0 = time.perf_counter()
    asc = _Ascent(design)
    steps = asc.run()
    lb, per = asc.bound()
    saturated = asc.residual <= TOL * np.maximum(1.0, design.f)
    ub, used, routes = improve(design, saturated)
    merged = consolidate(design, routes)
    if merged[0] < ub:
        ub, used, routes = merged
    return DualAscentResult(lb, ub, np.flatnonzero(used), routes, edge_flows(design, routes),
                            asc.w, asc.residual, per, steps, time.perf_counter() - t0)


def audit(design, result, tol=1e-7):
    """Check dual feasibility, the bound value and primal route validity.

    Returns a list of problems (empty when everything holds).
    """
    problems = []
    paid = np.zeros(design.n_parallel)
    for wk in result.duals:
        for a, v in wk.items():
            if v < -tol:
                problems.append(f"negative dual on arc {a}")
            paid[a // 2] += v
    if np.any(paid > design.f + tol * np.maximum(1.0, design.f)):
        problems.append("fixed cost overpaid on some edge")
    asc = _Ascent(design)
    asc.w = result.duals
    lb, _ = asc.bound()
    if abs(lb - result.lower_bound) > tol * max(1.0, abs(lb)):
        problems.append(f"recomputed bound {lb} differs from {result.lower_bound}")
    open_set = set(int(q) for q in result.open_edges)
    tail, head = design.arc_tail, design.arc_head
    for k, path in enumerate(result.routes):
        v = int(design.origins[k])
        for a in path:
            if a // 2 not in open_set:
                problems.append(f"commodity {k} uses closed edge {a // 2}")
            if tail[a] != v:
                problems.append(f"commodity {k} route is not a walk")
            v = int(head[a])
        if v != design.dests[k]:
            problems.append(f"commodity {k} route ends at {v}")
    if result.lower_bound > result.upper_bound + tol * max(1.0, result.upper_bound):
        problems.append("lower bound exceeds heuristic cost")
    return problems

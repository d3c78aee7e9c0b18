"""Concave-cost facility location via expansion to classical UFL.

Each facility ``j`` with concave cost ``phi_j`` becomes one facility
``(j, p)`` per tangent piece, with opening cost ``f_j^p`` and unit
connection cost ``s_j^p + c_ij``. The expanded instance is solved by a
greedy star heuristic followed by add/drop/swap local search.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import check_positive, check_random_state
from .approx import ApproxSpec, build_pwl_monotone
from .exceptions import InvalidArgument, PreconditionViolation, SizeCapExceeded
from .fixed_charge import compose_guarantee
from .oracle import from_json as oracle_from_json

EXPANDED_CAP = 16
CUSTOMER_CAP = 8
ASSIGNMENT_CAP = 2_000_000
OPEN_SET_CAP = 1 << 20
TOL = 1e-9


@dataclass(frozen=True)
class FlpInstance:
    """Customers with integral demands, facilities with concave costs zero at 0.

    ``costs[j]`` is a declarative oracle spec (``{"kind": "power", ...}``).
    ``c[i][j]`` is the integral unit connection cost of customer ``i`` to facility ``j``.
    """

    demands: tuple
    c: tuple
    costs: tuple

    def __post_init__(self):
        d = tuple(int(v) for v in self.demands)
        c = tuple(tuple(int(v) for v in row) for row in self.c)
        object.__setattr__(self, "demands", d)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "costs", tuple(dict(s) for s in self.costs))
        if not d:
            raise InvalidArgument("need at least one customer")
        if any(v < 0 for v in d):
            raise InvalidArgument("demands must be nonnegative")
        if len(c) != len(d) or any(len(row) != len(self.costs) for row in c):
            raise InvalidArgument("connection matrix must be customers x facilities")
        if not self.costs:
            raise InvalidArgument("need at least one facility")
        if any(v < 0 for row in c for v in row):
            raise InvalidArgument("connection costs must be nonnegative")
        for j, phi in enumerate(self.oracles):
            if float(phi(0.0)) != 0:
                raise PreconditionViolation(f"facility {j}: phi(0) must be 0")

    @property
    def m(self):
        return len(self.demands)

    @property
    def n(self):
        return len(self.costs)

    @property
    def D(self):
        return sum(self.demands)

    @cached_property
    def oracles(self):
        return tuple(oracle_from_json(s) for s in self.costs)

    def cost_of_assignment(self, assign):
        """Concave objective of a customer-to-facility map."""
        load = np.zeros(self.n)
        conn = 0.0
        for i, j in enumerate(assign):
            load[j] += self.demands[i]
            conn += self.c[i][j] * self.demands[i]
        return float(sum(float(phi(x)) for phi, x in zip(self.oracles, load)) + conn)

    def to_json(self):
        return {"d": list(self.demands), "c": [list(r) for r in self.c], "facilities": list(self.costs)}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data):
        try:
            return cls(data["d"], data["c"], data["facilities"])
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed instance JSON: {exc}") from exc


def gen_flp_instance(m, n, seed=0, max_demand=2, grid=10):
    """Random instance on integer points with Manhattan connection costs."""
    rng = check_random_state(seed)
    cust = rng.integers(0, grid + 1, size=(m, 2))
    fac = rng.integers(0, grid + 1, size=(n, 2))
    c = np.abs(cust[:, None, :] - fac[None, :, :]).sum(axis=2)
    d = rng.integers(1, max_demand + 1, size=m)
    costs = [{"kind": "power", "a": float(rng.uniform(1, 10)), "b": float(rng.uniform(0.5, 5)),
              "c": float(rng.uniform(0.3, 0.9)), "zero_at_origin": True} for _ in range(n)]
    return FlpInstance(d.tolist(), c.tolist(), costs)


def approximate_facility_costs(inst, epsilon):
    """Tangent approximation per facility on ``[1, D]``."""
    check_positive(epsilon, "epsilon")
    spec = ApproxSpec(epsilon, 1.0, float(max(inst.D, 1)), grid="sharp")
    return [build_pwl_monotone(phi, spec) for phi in inst.oracles]


@dataclass(frozen=True)
class ExpandedFlp:
    """Classical UFL: expanded facility ``q`` is piece ``piece[q]`` of facility ``owner[q]``."""

    owner: np.ndarray
    piece: np.ndarray
    f: np.ndarray
    s: np.ndarray
    conn: np.ndarray  # conn[i, q] = s[q] + c[i, owner[q]]
    demands: np.ndarray

    @property
    def n_facilities(self):
        return len(self.f)

    @property
    def m(self):
        return len(self.demands)

    def weighted(self):
        return self.conn * self.demands[:, None]

    def cost(self, open_set):
        idx = sorted(open_set)
        if not idx:
            return np.inf
        return float(self.f[idx].sum() + self.weighted()[:, idx].min(axis=1).sum())


def expand(inst, psis, prune=True):
    """Expanded UFL; with ``prune`` drops pieces dominated in both ``f`` and ``s``."""
    if len(psis) != inst.n:
        raise InvalidArgument(f"expected {inst.n} cost functions, got {len(psis)}")
    owner, piece, f, s = [], [], [], []
    for j, psi in enumerate(psis):
        if psi.at_zero not in (None, 0.0):
            raise PreconditionViolation(f"facility {j}: psi(0) must be 0")
        ps = list(enumerate(psi.pieces))
        keep = []
        for p, pc in ps:
            dominated = prune and any(
                (q.intercept <= pc.intercept and q.slope <= pc.slope)
                and (q.intercept < pc.intercept or q.slope < pc.slope or k < p)
                for k, q in ps if k != p)
            if not dominated:
                keep.append((p, pc))
        for p, pc in keep:
            owner.append(j)
            piece.append(p)
            f.append(pc.intercept)
            s.append(pc.slope)
    owner = np.array(owner, dtype=np.int64)
    s = np.array(s, dtype=float)
    c = np.array(inst.c, dtype=float)
    conn = s[None, :] + c[:, owner]
    return ExpandedFlp(owner, np.array(piece, dtype=np.int64), np.array(f, dtype=float), s,
                       conn, np.array(inst.demands, dtype=float))


def metric_violations(conn, tol=TOL):
    """Quadruples with ``conn[i,q] > conn[i,r] + conn[k,r] + conn[k,q]``."""
    C = np.asarray(conn, dtype=float)
    # rhs[i, k, q, r] = C[i, r] + C[k, r] + C[k, q]
    rhs = C[:, None, None, :] + C[None, :, None, :] + C[None, :, :, None]
    lhs = C[:, None, :, None]
    return int(np.count_nonzero(lhs > rhs + tol))


@dataclass
class UflSolution:
    open: list
    assignment: list
    cost: float


def _assign(e, open_set):
    idx = sorted(open_set)
    w = e.weighted()[:, idx]
    best = np.argmin(w, axis=1)
    return [idx[b] for b in best]


def _greedy(e):
    """Star greedy: repeatedly open the star with the smallest cost per unit demand."""
    W = e.weighted()
    dem = np.maximum(e.demands, 0)
    unassigned = set(range(e.m))
    opened = set()
    while unassigned:
        best = None
        for q in range(e.n_facilities):
            fq = 0.0 if q in opened else e.f[q]
            cands = sorted(unassigned, key=lambda i: (e.conn[i, q], i))
            total_c, total_d = fq, 0.0
            for k, i in enumerate(cands):
                total_c += W[i, q]
                total_d += dem[i]
                ratio = total_c / total_d if total_d > 0 else (np.inf if total_c > 0 else 0.0)
                if best is None or ratio < best[0] - TOL:
                    best = (ratio, q, cands[:k + 1])
        if best is None or not np.isfinite(best[0]):
            # zero-demand leftovers: attach to the cheapest facility
            q = min(range(e.n_facilities), key=lambda q: (e.f[q] if q not in opened else 0.0, q))
            best = (0.0, q, sorted(unassigned))
        _, q, star = best
        opened.add(q)
        unassigned -= set(star)
    return opened


def local_search(e, opened):
    """First-improvement add, drop and swap moves in index order."""
    cur = set(opened)
    best = e.cost(cur)
    improved = True
    while improved:
        improved = False
        moves = [("add", q) for q in range(e.n_facilities) if q not in cur]
        moves += [("drop", q) for q in sorted(cur)] if len(cur) > 1 else []
        moves += [("swap", (a, b)) for a in sorted(cur) for b in range(e.n_facilities) if b not in cur]
        for kind, arg in moves:
            trial = set(cur)
            if kind == "add":
                trial.add(arg)
            elif kind == "drop":
                trial.discard(arg)
            else:
                trial.discard(arg[0])
                trial.add(arg[1])
            c = e.cost(trial)
            if c < best - TOL * max(1.0, best):
                cur, best, improved = trial, c, True
                break
    return cur, best


def solve_ufl(e):
    """Greedy plus local search; deterministic for a given instance."""
    if e.n_facilities < 1:
        raise InvalidArgument("need at least one facility")
    opened, _ = local_search(e, _greedy(e))
    assign = _assign(e, opened)
    used = sorted(set(assign))
    return UflSolution(used, assign, e.cost(used))


def _one_piece_per_owner(e):
    """Open sets using at most one piece of each original facility.

    Moving every customer of a facility onto its open piece with the
    smallest unit cost never increases the total when opening costs are
    nonnegative, so restricting to these sets is exact.
    """
    groups = {}
    for q, j in enumerate(e.owner):
        groups.setdefault(int(j), []).append(q)
    choices = [[None] + qs for _, qs in sorted(groups.items())]
    for combo in itertools.product(*choices):
        subset = tuple(q for q in combo if q is not None)
        if subset:
            yield subset


def _open_set_count(e):
    counts = np.bincount(e.owner)
    return int(np.prod(counts[counts > 0] + 1, dtype=object)) - 1


def brute_force_flp(e):
    """Optimal expanded UFL cost by exhaustive open-set enumeration.

    Every nonempty subset is tried when there are at most ``EXPANDED_CAP``
    expanded facilities; beyond that only sets with one piece per original
    facility are enumerated, up to ``OPEN_SET_CAP`` of them.
    """
    if e.m > CUSTOMER_CAP:
        raise SizeCapExceeded(f"brute force limited to {CUSTOMER_CAP} customers")
    if e.n_facilities <= EXPANDED_CAP:
        subsets = (s for r in range(1, e.n_facilities + 1)
                   for s in itertools.combinations(range(e.n_facilities), r))
    elif _open_set_count(e) <= OPEN_SET_CAP:
        subsets = _one_piece_per_owner(e)
    else:
        raise SizeCapExceeded(f"{_open_set_count(e)} open sets exceed the cap {OPEN_SET_CAP}")
    W = e.weighted()
    best, arg = np.inf, None
    for subset in subsets:
        c = e.f[list(subset)].sum() + W[:, subset].min(axis=1).sum()
        if c < best:
            best, arg = float(c), subset
    return UflSolution(list(arg), _assign(e, arg), best)


def brute_force_fits(e):
    return e.m <= CUSTOMER_CAP and (e.n_facilities <= EXPANDED_CAP
                                    or _open_set_count(e) <= OPEN_SET_CAP)


def brute_force_concave(inst):
    """Optimal concave cost by enumerating every customer-to-facility map."""
    if inst.n ** inst.m > ASSIGNMENT_CAP:
        raise SizeCapExceeded(f"{inst.n}^{inst.m} assignments exceed the cap {ASSIGNMENT_CAP}")
    best, arg = np.inf, None
    for assign in itertools.product(range(inst.n), repeat=inst.m):
        c = inst.cost_of_assignment(assign)
        if c < best:
            best, arg = c, assign
    return best, list(arg)


@dataclass
class EndToEndResult:
    open_facilities: list
    assignment: list
    concave_cost: float
    ufl_cost: float
    n_expanded: int
    optimum_concave: float | None = None
    optimum_ufl: float | None = None
    gamma_inst: float | None = None
    composed_factor: float | None = None
    ratio: float | None = None
    certified: bool | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {k: v for k, v in self.__dict__.items() if k != "extra"} | self.extra


def end_to_end(inst, epsilon, verify=None):
    """Approximate, expand, solve; certify against brute force when small enough.

    ``verify=None`` verifies whenever both brute-force oracles fit their caps.
    """
    psis = approximate_facility_costs(inst, epsilon)
    e = expand(inst, psis)
    sol = solve_ufl(e)
    assign = [int(e.owner[q]) for q in sol.assignment]
    res = EndToEndResult(sorted(set(assign)), assign, inst.cost_of_assignment(assign), sol.cost,
                         e.n_facilities)
    small = brute_force_fits(e) and inst.n ** inst.m <= ASSIGNMENT_CAP
    if verify is None:
        verify = small
    if verify:
        opt_ufl = brute_force_flp(e).cost
        opt_conc, _ = brute_force_concave(inst)
        res.optimum_ufl, res.optimum_concave = opt_ufl, opt_conc
        res.gamma_inst = sol.cost / opt_ufl if opt_ufl > 0 else 1.0
        res.composed_factor = compose_guarantee(max(1.0, res.gamma_inst), epsilon)
        res.ratio = res.concave_cost / opt_conc if opt_conc > 0 else 1.0
        res.certified = res.concave_cost <= res.composed_factor * opt_conc * (1 + TOL) + TOL
    return res

"""Fixed-charge integer programs built from piecewise-linear concave costs.

Variable ``x_i`` is split as ``x_i = sum_p y_i^p`` with ``0 <= y_i^p <= B_i z_i^p``
and objective ``sum f_i^p z_i^p + s_i^p y_i^p``. Because every ``psi_i`` is a
concave envelope, no constraint forcing a single active piece is needed.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .exceptions import InfeasibleInstance, InvalidArgument, SizeCapExceeded
from .polyhedra import Polyhedron, as_float, bound_U, brute_force_vertices, rational_json, to_rational
from .pwl import PwlFunction

BINARY_CAP = 16
NEG_TOL = 1e-12


def _fmt(v):
    return format(float(v), ".17g")


def _linear(terms):
    """Render ``[(coef, name), ...]`` as ``a x + b y - c z``."""
    parts = []
    for coef, name in terms:
        coef = float(coef)
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(coef))} {name}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


@dataclass(frozen=True)
class FixedChargeModel:
    A: tuple
    b: tuple
    pieces: tuple  # pieces[i] = ((f, s), ...) after the phi_i(0) shift
    B: tuple
    offsets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(to_rational(v) for v in r) for r in self.A))
        object.__setattr__(self, "b", tuple(to_rational(v) for v in self.b))
        object.__setattr__(self, "pieces", tuple(tuple((float(f), float(s)) for f, s in p)
                                                 for p in self.pieces))
        object.__setattr__(self, "B", tuple(float(v) for v in self.B))
        offs = tuple(float(v) for v in self.offsets) or (0.0,) * len(self.pieces)
        object.__setattr__(self, "offsets", offs)
        n = len(self.pieces)
        if len(self.B) != n or len(self.offsets) != n:
            raise InvalidArgument("B and offsets need one entry per variable")
        if any(len(r) != n for r in self.A) or len(self.b) != len(self.A):
            raise InvalidArgument("constraint data does not match the variable count")
        for i, ps in enumerate(self.pieces):
            for f, s in ps:
                if s < 0 or f < 0:
                    raise InvalidArgument(f"variable {i}: piece (f={f}, s={s}) has a negative coefficient")

    @property
    def n(self):
        return len(self.pieces)

    @property
    def constant_offset(self):
        return float(sum(self.offsets))

    @property
    def n_binaries(self):
        return sum(len(p) for p in self.pieces)

    def counts(self):
        return {"x": self.n, "y": self.n_binaries, "z": self.n_binaries,
                "link_rows": self.n, "capacity_rows": self.n_binaries, "base_rows": len(self.A)}

    def piece_cost(self, i, x):
        """Cheapest single-piece cost of ``x_i = x`` (zero when ``x == 0``)."""
        if x == 0 or not self.pieces[i]:
            return 0.0
        return min(f + s * float(x) for f, s in self.pieces[i])

    def to_json(self):
        return {"A": [[rational_json(v) for v in r] for r in self.A],
                "b": [rational_json(v) for v in self.b],
                "pieces": [[{"f": f, "s": s} for f, s in p] for p in self.pieces],
                "B": list(self.B), "offsets": list(self.offsets)}

    @classmethod
    def from_json(cls, data):
        try:
            pieces = [[(p["f"], p["s"]) for p in ps] for ps in data["pieces"]]
            return cls(data["A"], data["b"], pieces, data["B"], data.get("offsets", ()))
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed model JSON: {exc}") from exc


def to_fixed_charge(P, psis, B=None):
    """Fixed-charge model for ``min sum psi_i(x_i)`` over ``P`` (nonnegative form).

    ``psi_i(0)`` is moved into the per-variable offsets so the model has
    ``psi_i(0) = 0``. ``B`` defaults to ``2**(U-1) - 1``.
    """
    if not isinstance(P, Polyhedron):
        raise InvalidArgument("P must be a Polyhedron")
    if not P.nonneg:
        raise InvalidArgument("the fixed-charge form needs x >= 0")
    _, n = P.shape
    if len(psis) != n:
        raise InvalidArgument(f"expected {n} cost functions, got {len(psis)}")
    if B is None:
        B = [as_float(bound_U(P).u)] * n
    elif np.isscalar(B):
        B = [B] * n
    pieces, offsets = [], []
    for i, psi in enumerate(psis):
        if not isinstance(psi, PwlFunction):
            raise InvalidArgument(f"cost {i} is not a PwlFunction")
        off = psi.at_zero or 0.0
        ps = []
        for p in psi.pieces:
            if p.slope < 0:
                raise InvalidArgument(f"variable {i} has a negative slope {p.slope}")
            f = p.intercept - off
            if f < 0:
                if f < -NEG_TOL * max(1.0, abs(off)):
                    raise InvalidArgument(f"variable {i}: piece lies below psi(0)")
                f = 0.0
            ps.append((f, p.slope))
        pieces.append(ps)
        offsets.append(off)
    return FixedChargeModel(P.A, P.b, pieces, B, offsets)


def emit_model(M, sink=None):
    """CPLEX-LP text of the model; written to ``sink`` when given."""
    out = io.StringIO()
    out.write("\\ fixed-charge model\n")
    out.write(f"\\ constant offset: {_fmt(M.constant_offset)}\n")
    terms = []
    for i, ps in enumerate(M.pieces):
        for p, (f, s) in enumerate(ps):
            terms += [(f, f"z_{i}_{p}"), (s, f"y_{i}_{p}")]
    out.write(f"Minimize\n obj: {_linear(terms)}\nSubject To\n")
    for i, ps in enumerate(M.pieces):
        row = "".join(f" - y_{i}_{p}" for p in range(len(ps)))
        out.write(f" link_{i}: x_{i}{row} = 0\n")
    for i, ps in enumerate(M.pieces):
        for p in range(len(ps)):
            out.write(f" cap_{i}_{p}: y_{i}_{p} - {_fmt(M.B[i])} z_{i}_{p} <= 0\n")
    for r, (row, rhs) in enumerate(zip(M.A, M.b)):
        lhs = _linear([(a, f"x_{j}") for j, a in enumerate(row) if a != 0])
        out.write(f" row_{r}: {lhs} <= {_fmt(rhs)}\n")
    out.write("Bounds\n")
    for i, ps in enumerate(M.pieces):
        out.write(f" x_{i} >= 0\n")
        for p in range(len(ps)):
            out.write(f" y_{i}_{p} >= 0\n")
    out.write("Binaries\n")
    for i, ps in enumerate(M.pieces):
        for p in range(len(ps)):
            out.write(f" z_{i}_{p}\n")
    out.write("End\n")
    text = out.getvalue()
    if sink is not None:
        sink.write(text)
    return text


@dataclass
class ModelSolution:
    x: list
    y: list
    z: list
    objective: float | None = None


@dataclass
class SolutionReport:
    feasible: bool
    violations: list = field(default_factory=list)
    objective: float = 0.0
    raw_objective: float = 0.0
    claim_matches: bool | None = None


def _ok(lhs, rhs, sense="<="):
    tol = 1e-6 * (1 + abs(rhs))
    if sense == "<=":
        return lhs <= rhs + tol
    return abs(lhs - rhs) <= tol


def check_solution(M, S):
    """Audit every constraint family and recompute the objective."""
    if len(S.x) != M.n or len(S.y) != M.n or len(S.z) != M.n:
        raise InvalidArgument("solution does not assign every variable")
    for i, ps in enumerate(M.pieces):
        if len(S.y[i]) != len(ps) or len(S.z[i]) != len(ps):
            raise InvalidArgument(f"solution misses pieces of variable {i}")
    bad = []
    for i, ps in enumerate(M.pieces):
        if not _ok(float(S.x[i]), float(sum(S.y[i])), "=="):
            bad.append(f"link_{i}")
        if float(S.x[i]) < -1e-6:
            bad.append(f"x_{i} >= 0")
        for p in range(len(ps)):
            y, z = float(S.y[i][p]), S.z[i][p]
            if z not in (0, 1):
                bad.append(f"z_{i}_{p} binary")
            if y < -1e-6:
                bad.append(f"y_{i}_{p} >= 0")
            if not _ok(y, M.B[i] * z):
                bad.append(f"cap_{i}_{p}")
    for r, (row, rhs) in enumerate(zip(M.A, M.b)):
        if not _ok(sum(float(a) * float(v) for a, v in zip(row, S.x)), float(rhs)):
            bad.append(f"row_{r}")
    raw = sum(f * S.z[i][p] + s * float(S.y[i][p])
              for i, ps in enumerate(M.pieces) for p, (f, s) in enumerate(ps))
    total = raw + M.constant_offset
    claim = None
    if S.objective is not None:
        claim = abs(S.objective - total) <= 1e-6 * (1 + abs(total))
    return SolutionReport(not bad, bad, total, raw, claim)


def _pattern_lp(M, pattern):
    """LP over ``y`` with the binaries fixed; returns ``(cost, y)`` or None."""
    n = M.n
    cols = [(i, p) for i in range(n) for p in range(len(M.pieces[i]))]
    if not cols:
        ok = all(0 <= b for b in M.b)
        return (0.0, []) if ok else None
    c = np.array([M.pieces[i][p][1] for i, p in cols])
    bounds = [(0.0, M.B[i] * pattern[k]) for k, (i, _) in enumerate(cols)]
    A = np.array([[float(row[i]) for i, _ in cols] for row in M.A]) if M.A else None
    b = np.array([float(v) for v in M.b]) if M.b else None
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        return None
    return float(res.fun), res.x


def _as_solution(M, pattern, y):
    ys, zs, k = [], [], 0
    for ps in M.pieces:
        ys.append([float(v) for v in y[k:k + len(ps)]])
        zs.append(list(pattern[k:k + len(ps)]))
        k += len(ps)
    return ModelSolution([sum(r) for r in ys], ys, zs)


def _vertex_pattern_value(M, pattern, vertices):
    """Exact LP value for a bounded polyhedron: best vertex on the open face."""
    best, arg, k = math.inf, None, 0
    open_slopes = []
    for ps in M.pieces:
        live = [s for (f, s), z in zip(ps, pattern[k:k + len(ps)]) if z]
        open_slopes.append(min(live) if live else None)
        k += len(ps)
    for v in vertices:
        if any(s is None and x != 0 for s, x in zip(open_slopes, v)):
            continue
        val = sum(s * float(x) for s, x in zip(open_slopes, v) if s is not None)
        if val < best:
            best, arg = val, v
    return (best, arg) if arg is not None else None


def solve_brute_force(M, cap=BINARY_CAP, exact_vertices=None):
    """Optimum of the fixed-charge model by enumerating every binary pattern.

    Patterns are visited in order of total fixed cost, stopping once that
    alone reaches the incumbent (variable costs are nonnegative). With
    ``exact_vertices`` (the vertex list of a bounded feasible polyhedron whose
    coordinates never exceed ``B``) each pattern LP is solved exactly on the
    open face instead of by the LP solver.
    """
    k = M.n_binaries
    if k > cap:
        raise SizeCapExceeded(f"{k} binaries exceed the enumeration cap {cap}")
    fixed = [f for ps in M.pieces for f, _ in ps]
    patterns = sorted(itertools.product((0, 1), repeat=k),
                      key=lambda z: sum(f for f, b in zip(fixed, z) if b))
    best, best_sol = math.inf, None
    for z in patterns:
        fz = sum(f for f, b in zip(fixed, z) if b)
        if fz >= best:
            break
        if exact_vertices is not None:
            got = _vertex_pattern_value(M, z, exact_vertices)
            if got is None:
                continue
            val, v = got
            sol = _solution_from_vertex(M, z, v)
        else:
            got = _pattern_lp(M, z)
            if got is None:
                continue
            val, y = got
            sol = _as_solution(M, z, y)
        if fz + val < best:
            best, best_sol = fz + val, sol
    if best_sol is None:
        raise InfeasibleInstance("no binary pattern admits a feasible point")
    best_sol.objective = best + M.constant_offset
    return best_sol


def _solution_from_vertex(M, pattern, v):
    ys, zs, k = [], [], 0
    for i, ps in enumerate(M.pieces):
        zi = list(pattern[k:k + len(ps)])
        yi = [0.0] * len(ps)
        live = [p for p in range(len(ps)) if zi[p]]
        if live and v[i] != 0:
            yi[min(live, key=lambda p: ps[p][1])] = float(v[i])
        ys.append(yi)
        zs.append(zi)
        k += len(ps)
    return ModelSolution([float(x) for x in v], ys, zs)


def envelope_minimum(P, psis):
    """``min sum psi_i(x_i)`` over the vertices of a bounded polyhedron."""
    verts = brute_force_vertices(P)
    if not verts:
        raise InfeasibleInstance("polyhedron has no vertices")
    return min(sum(float(psi(float(x))) for psi, x in zip(psis, v)) for v in verts)


def compose_guarantee(gamma, epsilon):
    """``(1+eps)*gamma``, multiplied in decimal so ``1.52, 0.01`` gives exactly 1.5352."""
    if not gamma >= 1:
        raise InvalidArgument(f"gamma must be at least 1, got {gamma}")
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    return float(Fraction(str(gamma)) * (1 + Fraction(str(epsilon))))

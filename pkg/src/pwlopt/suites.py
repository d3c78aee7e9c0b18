"""Named self-check suites run by ``pwlopt verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import oracle
from .approx import ApproxSpec, build_pwl_monotone, tight_worst_case, verify_ratio
from .lower_bound import gamma
from .polyhedra import Polyhedron, bound_U, bound_V, brute_force_vertices, size_rat


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def tightness(epsilons=(0.1, 0.25, 1.0), zeta=1e-6):
    out = []
    for eps in epsilons:
        bound = (1 + math.sqrt(eps + 1)) / 2
        spec = ApproxSpec(eps, 1.0, 1000.0, grid="plain")
        rep = verify_ratio(oracle.sqrt(), build_pwl_monotone(oracle.sqrt(), spec), (1.0, 1000.0))
        out.append(Check(f"sqrt eps={eps}", rep.max_ratio <= bound + 1e-9,
                         f"max ratio {rep.max_ratio:.10f} vs bound {bound:.10f}"))
        phi = tight_worst_case(eps, zeta)
        spec = ApproxSpec(eps, 1.0, 1.0 + eps, grid="plain")
        rep = verify_ratio(phi, build_pwl_monotone(phi, spec), (1.0, 1.0 + eps))
        out.append(Check(f"worst case eps={eps}", rep.max_ratio >= bound - 1e-3,
                         f"attained {rep.max_ratio:.10f} vs bound {bound:.10f}"))
    return out


def gamma_bounds(count=20):
    out = []
    for eps in np.linspace(0.1 / count, 0.1, count):
        g = gamma(float(eps))
        lo, hi = 1 + math.sqrt(32 * eps), 1 + 16 * math.sqrt(eps)
        out.append(Check(f"gamma eps={eps:.4f}", lo <= g <= hi, f"{lo:.6f} <= {g:.6f} <= {hi:.6f}"))
    return out


def random_polyhedron(rng, max_dim=4, max_entry=16, nonneg=True):
    """Random rational ``Ax <= b`` with numerators and denominators up to ``max_entry``."""
    m = int(rng.integers(1, max_dim + 1))
    n = int(rng.integers(1, max_dim + 1))

    def entry():
        num = int(rng.integers(-max_entry, max_entry + 1))
        return Fraction(num, int(rng.integers(1, max_entry + 1)))

    A = [[entry() for _ in range(n)] for _ in range(m)]
    b = [abs(entry()) for _ in range(m)]  # keeps the origin feasible
    return Polyhedron(A, b, nonneg)


def vertex_size(count=200, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for t in range(count):
        nonneg = t % 2 == 0
        P = random_polyhedron(rng, nonneg=nonneg)
        rep = bound_U(P)
        cap = rep.U if nonneg else bound_V(P)
        bad = []
        for v in brute_force_vertices(P):
            for x in v:
                if size_rat(x) > cap:
                    bad.append(f"size({x})={size_rat(x)} > {cap}")
                if nonneg and x != 0 and not rep.l <= abs(x) <= rep.u:
                    bad.append(f"{x} outside [l, u]")
        out.append(Check(f"polyhedron {t} ({'U' if nonneg else 'V'})", not bad,
                         "; ".join(bad[:3]) or "ok"))
    return out


SUITES = {"tightness": tightness, "gamma-bounds": gamma_bounds, "vertex-size": vertex_size}

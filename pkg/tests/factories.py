"""Random instance factories shared by tests."""
from fractions import Fraction

import numpy as np

from pwlopt import oracle
from pwlopt.approx import ApproxSpec, build_pwl_monotone
from pwlopt.polyhedra import Polyhedron, brute_force_vertices


def tiny_fixed_charge_problem(seed, max_binaries=12):
    """Bounded polyhedron, concave costs and their approximations with few pieces."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    ub = [int(rng.integers(1, 7)) for _ in range(n)]
    A = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    b = [Fraction(u) for u in ub]
    weights = [Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4))) for _ in range(n)]
    demand = sum(w * u for w, u in zip(weights, ub)) * Fraction(int(rng.integers(1, 4)), 4)
    A.append([-w for w in weights])
    b.append(-demand)
    P = Polyhedron(A, b)
    if rng.integers(2):
        row = [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for _ in range(n)]
        extra = Polyhedron(A + [row], b + [Fraction(int(rng.integers(1, 10)))])
        if brute_force_vertices(extra):
            P = extra
    verts = brute_force_vertices(P)
    coords = [float(x) for v in verts for x in v if x != 0]
    lo, hi = (min(coords), max(coords)) if coords else (1.0, 1.0)
    phis = [oracle.power(float(rng.uniform(0, 3)), float(rng.uniform(0.5, 4)),
                         float(rng.uniform(0.2, 1.0))) for _ in range(n)]
    for eps in (0.5, 1.0, 2.0, 4.0, 8.0):
        spec = ApproxSpec(eps, lo, hi)
        if spec.n_pieces * n <= max_binaries:
            break
    psis = [build_pwl_monotone(phi, spec) for phi in phis]
    return P, verts, phis, psis, spec

"""From concave edge costs to a fixed-charge network design on parallel edges."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..approx import ApproxSpec, build_pwl_monotone, tangent_at
from ..exceptions import InvalidArgument, PreconditionViolation
from ..pwl import PwlFunction


def approximate_costs(inst, epsilon):
    """One tangent approximation per edge on ``[1, B]`` at ratio ``(1+2eps)**2``."""
    spec = ApproxSpec(epsilon, 1.0, float(max(inst.B, 1)), grid="sharp")
    return [build_pwl_monotone(phi, spec) for phi in inst.oracles]


def _grid_ratio(psi):
    k = psi.knots
    if len(k) < 2:
        return None
    return k[1] / k[0]


def merge_uniform_grid(psis, inst):
    """Swap the dense low end of each geometric grid for tangents at 2, 4, 6, ...

    Total edge flows under complete uniform demand are even, so below the
    argument where the geometric step ``x*(rho-1)`` first reaches 2 the
    tangents at even integers are exact on every achievable flow value.
    Above it the original geometric tangents are kept.
    """
    if not inst.is_complete_uniform():
        raise PreconditionViolation("uniform-grid merge needs complete uniform demand")
    B = inst.B
    out = []
    for psi, phi in zip(psis, inst.oracles):
        rho = _grid_ratio(psi)
        if rho is None:
            out.append(psi)
            continue
        top = 2 * math.ceil(1 / (rho - 1))  # first even >= 2/(rho-1)
        evens = [float(x) for x in range(2, min(top, B) + 1, 2)]
        high = [x for x in psi.knots if x > (evens[-1] if evens else 0.0)]
        knots = evens + high
        pieces = [tangent_at(phi, x) for x in knots]
        out.append(PwlFunction(pieces, psi.boundary, "tangent", knots))
    return out


@dataclass(frozen=True)
class ExpandedDesign:
    """Parallel edges ``(i, j, p)``: one per piece, with fixed and unit costs.

    Array ``edge_of[q]`` maps parallel edge ``q`` back to its original edge.
    Each parallel edge carries two directed arcs, ``2q`` (tail to head) and
    ``2q+1`` (head to tail).
    """

    n: int
    tail: np.ndarray
    head: np.ndarray
    edge_of: np.ndarray
    piece_of: np.ndarray
    f: np.ndarray
    s: np.ndarray
    origins: np.ndarray
    dests: np.ndarray
    demands: np.ndarray
    m_original: int

    @property
    def n_parallel(self):
        return len(self.f)

    @property
    def K(self):
        return len(self.demands)

    @property
    def n_binaries(self):
        return self.n_parallel

    @property
    def arc_variables(self):
        return 2 * self.K * self.n_parallel

    @property
    def arc_tail(self):
        return np.stack([self.tail, self.head], axis=1).ravel()

    @property
    def arc_head(self):
        return np.stack([self.head, self.tail], axis=1).ravel()

    def capacity(self, k):
        """Per-arc bound ``B^k`` of commodity ``k``."""
        return float(self.demands[k])


def expand(inst, psis):
    """Parallel-edge fixed-charge design; requires ``psi(0) = 0`` on every edge."""
    if len(psis) != inst.m:
        raise InvalidArgument(f"expected {inst.m} cost functions, got {len(psis)}")
    tail, head, edge_of, piece_of, f, s = [], [], [], [], [], []
    for e, ((i, j), psi) in enumerate(zip(inst.edges, psis)):
        if psi.at_zero not in (None, 0.0):
            raise PreconditionViolation(f"edge {e}: psi(0) = {psi.at_zero}, expected 0")
        for p, piece in enumerate(psi.pieces):
            if piece.slope < 0 or piece.intercept < 0:
                raise InvalidArgument(f"edge {e} piece {p} has a negative coefficient")
            tail.append(i)
            head.append(j)
            edge_of.append(e)
            piece_of.append(p)
            f.append(piece.intercept)
            s.append(piece.slope)
    com = np.array(inst.commodities, dtype=np.int64).reshape(-1, 3)
    return ExpandedDesign(inst.n, np.array(tail, dtype=np.int64), np.array(head, dtype=np.int64),
                          np.array(edge_of, dtype=np.int64), np.array(piece_of, dtype=np.int64),
                          np.array(f, dtype=float), np.array(s, dtype=float),
                          com[:, 0], com[:, 1], com[:, 2].astype(float), inst.m)

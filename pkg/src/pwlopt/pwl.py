"""Lower envelopes of affine pieces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import InvalidArgument


@dataclass(frozen=True)
class LinearPiece:
    slope: float
    intercept: float

    def __call__(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)

    def crossing(self, other):
        """Abscissa where this line meets ``other`` (None when parallel)."""
        ds = self.slope - other.slope
        if ds == 0:
            return None
        return (other.intercept - self.intercept) / ds


def lower_hull(pieces):
    """Indices of the pieces that appear on the lower envelope, left to right.

    Returns ``(order, breaks)`` where ``order[k]`` is active on
    ``[breaks[k-1], breaks[k]]``.
    """
    if not pieces:
        return [], np.empty(0)
    idx = sorted(range(len(pieces)), key=lambda i: (-pieces[i].slope, pieces[i].intercept))
    hull = []
    for i in idx:
        p = pieces[i]
        if hull and pieces[hull[-1]].slope == p.slope:
            continue  # same slope, larger or equal intercept
        while len(hull) >= 2:
            a, b = pieces[hull[-2]], pieces[hull[-1]]
            # b is redundant if p undercuts a no later than b does
            if a.crossing(p) <= a.crossing(b):
                hull.pop()
            else:
                break
        hull.append(i)
    breaks = np.array([pieces[hull[k]].crossing(pieces[hull[k + 1]])
                       for k in range(len(hull) - 1)], dtype=float)
    return hull, breaks


class PwlFunction:
    """Concave piecewise-linear function ``min_p (f_p + s_p x)``.

    Values at explicit boundary points (``boundary``) override the envelope,
    which is how ``psi(0) = phi(0)`` and domain-endpoint values are stored.
    ``knots`` records the abscissae the pieces were built at (tangency
    points, or chord endpoints in secant mode).
    """

    def __init__(self, pieces, boundary=None, mode="tangent", knots=None):
        self.pieces = tuple(LinearPiece(float(p.slope), float(p.intercept))
                            if isinstance(p, LinearPiece) else LinearPiece(float(p[0]), float(p[1]))
                            for p in pieces)
        self.boundary = {float(k): float(v) for k, v in (boundary or {}).items()}
        if mode not in ("tangent", "secant"):
            raise InvalidArgument(f"mode must be 'tangent' or 'secant', got {mode!r}")
        self.mode = mode
        self.knots = tuple(float(k) for k in (knots or ()))

    def __len__(self):
        return len(self.pieces)

    def __repr__(self):
        return f"PwlFunction({len(self.pieces)} pieces, mode={self.mode!r})"

    @property
    def n_pieces(self):
        return len(self.pieces)

    @property
    def slopes(self):
        return np.array([p.slope for p in self.pieces])

    @property
    def intercepts(self):
        return np.array([p.intercept for p in self.pieces])

    @property
    def at_zero(self):
        return self.boundary.get(0.0)

    @cached_property
    def _hull(self):
        order, breaks = lower_hull(self.pieces)
        return (np.array([self.pieces[i].slope for i in order]),
                np.array([self.pieces[i].intercept for i in order]), breaks)

    @property
    def breakpoints(self):
        """Abscissae where the envelope switches pieces."""
        return self._hull[2].copy()

    def envelope(self, x):
        """Lower envelope of the pieces, ignoring boundary overrides."""
        x = np.asarray(x, dtype=float)
        s, f, breaks = self._hull
        if len(s) == 0:
            return np.full(x.shape, math.inf) if x.ndim else math.inf
        k = np.searchsorted(breaks, x)
        out = f[k] + s[k] * x
        return out if out.ndim else float(out)

    def envelope_bruteforce(self, x):
        """Direct ``min`` over all pieces; reference for :meth:`envelope`."""
        x = np.asarray(x, dtype=float)
        vals = self.intercepts[:, None] + self.slopes[:, None] * x.ravel()[None, :]
        return vals.min(axis=0).reshape(x.shape)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.envelope(x), dtype=float)
        for bx, bv in self.boundary.items():
            out = np.where(x == bx, bv, out)
        return out if out.ndim else float(out)

    def shifted(self, offset):
        """Copy with every piece and boundary value lowered by ``offset``."""
        return PwlFunction([LinearPiece(p.slope, p.intercept - offset) for p in self.pieces],
                           {k: v - offset for k, v in self.boundary.items()},
                           self.mode, self.knots)

    def to_json(self):
        out = {"pieces": [{"s": p.slope, "f": p.intercept} for p in self.pieces],
               "at_zero": self.at_zero}
        extra = {k: v for k, v in self.boundary.items() if k != 0.0}
        if extra:
            out["boundary"] = [[k, v] for k, v in sorted(extra.items())]
        if self.mode != "tangent":
            out["mode"] = self.mode
        if self.knots:
            out["knots"] = list(self.knots)
        return out

    @classmethod
    def from_json(cls, data):
        try:
            pieces = [LinearPiece(float(p["s"]), float(p["f"])) for p in data["pieces"]]
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed PwlFunction JSON: {exc}") from exc
        boundary = {}
        if data.get("at_zero") is not None:
            boundary[0.0] = float(data["at_zero"])
        for k, v in data.get("boundary", []):
            boundary[float(k)] = float(v)
        return cls(pieces, boundary, data.get("mode", "tangent"), data.get("knots"))

    def __eq__(self, other):
        if not isinstance(other, PwlFunction):
            return NotImplemented
        return (self.pieces == other.pieces and self.boundary == other.boundary
                and self.mode == other.mode)

    def __hash__(self):
        return hash((self.pieces, tuple(sorted(self.boundary.items())), self.mode))

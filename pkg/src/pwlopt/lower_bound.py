"""Lower bounds on the number of pieces any 1+eps approximation needs.

Two ingredients: any Q-piece approximation can be turned into an
all-tangent one with at most 3Q pieces (:func:`tangentify`), and a single
tangent to ``sqrt`` is accurate on an interval ``[x, gamma(eps)*x]`` only
(:func:`tangent_cover_sqrt`).
"""
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._validation import check_interval, check_positive
from .approx import _as_fraction, ceil_log
from .exceptions import PreconditionViolation
from .pwl import LinearPiece, PwlFunction

TOUCH_TOL = 1e-10


def sqrt_cover_deltas(epsilon):
    """Roots ``(delta_1, delta_2)`` of ``(1 + d/2)**2 = (1+eps)**2 (1+d)``."""
    check_positive(epsilon, "epsilon")
    a = 2 * epsilon * (2 + epsilon)
    b = 2 * (1 + epsilon) * math.sqrt(epsilon * (2 + epsilon))
    return a - b, a + b


def gamma(epsilon):
    """Growth factor of the interval one tangent of sqrt covers at accuracy 1+eps."""
    _, d2 = sqrt_cover_deltas(epsilon)
    return (1 + d2) ** 2


def lower_bound_pieces(epsilon, l, u):
    """``ceil(log_gamma(u/l) / 3)``: pieces needed for sqrt on ``[l, u]``."""
    check_interval(l, u)
    return ceil_log(_as_fraction(u) / _as_fraction(l), gamma(epsilon) ** 3)


def tangent_cover_sqrt(epsilon, l, u):
    """Tangency points whose sqrt tangents tile ``[l, u]`` at accuracy 1+eps.

    Covered intervals are ``[x, gamma*x]`` starting at ``l``; the tangency
    point inside ``[x, gamma*x]`` is ``x/(1+delta_1)``.
    """
    check_interval(l, u)
    d1, _ = sqrt_cover_deltas(epsilon)
    g = gamma(epsilon)
    count = max(1, ceil_log(_as_fraction(u) / _as_fraction(l), g))
    return [l * g ** k / (1 + d1) for k in range(count)]


def sqrt_tangent(x0):
    s = 0.5 / math.sqrt(x0)
    return LinearPiece(s, math.sqrt(x0) - s * x0)


def cover_residuals(epsilon, points):
    """Relative residuals of ``tangent(end) = (1+eps) sqrt(end)`` at both ends."""
    d1, d2 = sqrt_cover_deltas(epsilon)
    out = []
    for x0 in points:
        line = sqrt_tangent(x0)
        for d in (d1, d2):
            end = x0 * (1 + d)
            target = (1 + epsilon) * math.sqrt(end)
            out.append(abs(float(line(end)) - target) / target)
    return out


def segments_of(psi, l, u):
    """Explicit ``(a, b, piece)`` intervals of an envelope restricted to ``[l, u]``."""
    from .pwl import lower_hull

    order, breaks = lower_hull(psi.pieces)
    edges = np.concatenate([[-math.inf], breaks, [math.inf]])
    segs = []
    for k, i in enumerate(order):
        a, b = max(l, edges[k]), min(u, edges[k + 1])
        if a < b or (a == b and l == u):
            segs.append((float(a), float(b), psi.pieces[i]))
    return segs


def _min_convex(g, a, b):
    """Minimiser of a convex function on ``[a, b]`` (coarse grid + bounded search)."""
    if a == b:
        return a, g(a)
    xs = np.linspace(a, b, 129)
    vals = np.array([g(x) for x in xs])
    k = int(np.argmin(vals))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    best_x, best_v = xs[k], vals[k]
    if hi > lo:
        res = minimize_scalar(g, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi))})
        if res.fun < best_v:
            best_x, best_v = float(res.x), float(res.fun)
    return float(best_x), float(best_v)


def _check_segment(phi, seg, epsilon, samples=256, tol=1e-9):
    a, b, piece = seg
    xs = np.linspace(a, b, samples)
    ratio = np.asarray(piece(xs)) / np.asarray(phi(xs), dtype=float)
    return ratio.max() <= 1 + epsilon + tol and ratio.min() >= 1 / (1 + epsilon) - tol


def _same_line(p, q, tol=1e-9):
    return (abs(p.slope - q.slope) <= tol * max(1.0, abs(p.slope))
            and abs(p.intercept - q.intercept) <= tol * max(1.0, abs(p.intercept)))


def _tangent_right(phi, x):
    s = float(phi.slope(x))
    return LinearPiece(s, float(phi(x)) - s * x)


def _tangent_left(phi, x):
    s = float(phi.left_slope(x))
    return LinearPiece(s, float(phi(x)) - s * x)


def _global_gap(line, phi, a, b):
    """``min (line - phi)`` over the whole domain, searching outward from ``[a, b]``."""
    g = lambda x: float(line(x)) - float(phi(x))  # noqa: E731
    lo, hi = phi.domain
    left, right = a, b
    # g is convex: walk outward while its one-sided slope points away from [a, b]
    while right < min(hi, 1e12 * max(1.0, b)) and line.slope < float(phi.slope(right)):
        left, right = right, min(hi, 2 * right)
    while left > lo and left > 1e-12 * a and line.slope > float(phi.left_slope(left)):
        left, right = max(lo, left / 2), left
    if left == 0:
        left = min(a, 1e-12)
    return _min_convex(g, left, right)[1]


def _tangentify_piece(phi, seg, epsilon):
    a, b, line = seg
    scale = max(1.0, abs(float(phi(b))))
    if abs(_global_gap(line, phi, a, b)) <= TOUCH_TOL * scale:
        return [line]  # already a tangent of phi
    g = lambda x: float(line(x)) - float(phi(x))  # noqa: E731
    _, gmin = _min_convex(g, a, b)
    gmax = max(g(a), g(b))
    if gmin > 0:
        line = LinearPiece(line.slope, line.intercept - gmin)
    elif gmax < 0:
        line = LinearPiece(line.slope, line.intercept - gmax)
    g = lambda x: float(line(x)) - float(phi(x))  # noqa: E731
    t, gmin = _min_convex(g, a, b)
    span = b - a
    scale = max(1.0, abs(float(phi(t))))
    if gmin >= -TOUCH_TOL * scale:
        # above phi and touching: already tangent, unless the contact is an endpoint
        if a + 1e-9 * span < t < b - 1e-9 * span or span == 0:
            return [line]
        tan = _tangent_right(phi, a) if t - a <= b - t else _tangent_left(phi, b)
        return [line] if _same_line(line, tan) else [tan]
    out = []
    x1, x2 = a, b
    if g(a) > 0:
        x1 = brentq(g, a, t, xtol=1e-14 * max(1.0, abs(t)))
        out.append(_tangent_left(phi, x1))
    if g(b) > 0:
        x2 = brentq(g, t, b, xtol=1e-14 * max(1.0, abs(b)))
        out.append(_tangent_right(phi, x2))
    # smallest scale factor lifting the line onto phi over [x1, x2]
    fits = lambda c: _min_convex(lambda x: c * float(line(x)) - float(phi(x)), x1, x2)[1] >= 0  # noqa: E731
    lo, hi = 1.0, 1 + epsilon
    if not fits(hi):
        raise PreconditionViolation("scaled piece fails to dominate phi; input is not a 1+eps approximation")
    while hi - lo > TOUCH_TOL:
        mid = (lo + hi) / 2
        if fits(mid):
            hi = mid
        else:
            lo = mid
    lifted = LinearPiece(hi * line.slope, hi * line.intercept)
    t2, _ = _min_convex(lambda x: float(lifted(x)) - float(phi(x)), x1, x2)
    span2 = x2 - x1
    if x1 + 1e-9 * span2 < t2 < x2 - 1e-9 * span2:
        out.append(lifted)
    elif t2 - x1 <= x2 - t2:
        out.append(_tangent_right(phi, x1))
    else:
        out.append(_tangent_left(phi, x2))
    return out


def tangentify(segments, phi, epsilon):
    """Replace an arbitrary 1+eps approximation by an all-tangent one.

    ``segments`` is a list of ``(a, b, LinearPiece)`` covering the target
    interval (or a :class:`PwlFunction` together with its interval, via
    :func:`segments_of`). Each input piece yields at most three tangents.
    """
    check_positive(epsilon, "epsilon")
    segments = list(segments)
    for seg in segments:
        if not _check_segment(phi, seg, epsilon):
            raise PreconditionViolation(f"piece on [{seg[0]}, {seg[1]}] is not within 1+eps of phi")
    pieces = []
    for seg in segments:
        pieces.extend(_tangentify_piece(phi, seg, epsilon))
    unique = []
    for p in pieces:
        if not any(_same_line(p, q, 1e-12) for q in unique):
            unique.append(p)
    boundary = {0.0: float(phi(0.0))} if phi.domain[0] <= 0 else {}
    return PwlFunction(unique, boundary, "tangent")

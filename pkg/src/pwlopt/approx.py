"""Tangent and secant piecewise-linear approximations of concave functions.

The monotone construction places tangents at ``l, l*rho, ..., l*rho**P``
with ``P = ceil(log_rho(u/l))``. With ``rho = 1+eps`` the worst-case ratio
``psi/phi`` on ``[l, u]`` is ``(1+sqrt(1+eps))/2``; with
``rho = (1+2*eps)**2`` it is exactly ``1+eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import oracle as _oracle
from ._validation import check_interval, check_positive, check_ratio
from .exceptions import DomainError, InvalidArgument
from .pwl import LinearPiece, PwlFunction

REL_TOL = 1e-9
_EXACT_POWER_LIMIT = 20_000


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x))


def _log(x):
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def ceil_log(ratio, rho):
    """Smallest integer ``P >= 0`` with ``rho**P >= ratio``.

    The float logarithm only seeds the search; the answer is settled by
    exact rational comparison so the count does not drift when ``ratio`` is
    an exact power of ``rho``. ``ratio`` may be a float, int or Fraction.
    """
    check_ratio(rho)
    r = _as_fraction(ratio)
    if r <= 1:
        return 0
    p = max(0, math.ceil(_log(r) / math.log(rho)))
    if p > _EXACT_POWER_LIMIT:
        return p
    q = _as_fraction(rho)
    power = q ** p
    while p > 0 and power / q >= r:
        power /= q
        p -= 1
    while power < r:
        power *= q
        p += 1
    return p


def grid_points(l, u, rho):
    """Geometric grid ``l*rho**p`` for ``p = 0..P`` covering ``[l, u]``."""
    check_interval(l, u, "grid")
    check_ratio(rho)
    P = ceil_log(_as_fraction(u) / _as_fraction(l), rho)
    return [l * rho ** p for p in range(P + 1)]


def log_grid_points(log_l, log_u, rho):
    """Grid in log space, for bounds whose ratio overflows a float."""
    if log_l > log_u:
        raise InvalidArgument("log_l exceeds log_u")
    check_ratio(rho)
    P = max(0, math.ceil((log_u - log_l) / math.log(rho) - 1e-12))
    return [log_l + p * math.log(rho) for p in range(P + 1)]


def sharp_ratio(epsilon):
    """Grid ratio ``1 + 4 eps + 4 eps**2`` giving a ``1+eps`` guarantee."""
    return (1 + 2 * epsilon) ** 2


@dataclass(frozen=True)
class ApproxSpec:
    """Parameters of a monotone approximation on ``[l, u]``.

    ``grid="sharp"`` uses ratio ``(1+2eps)**2`` (guarantee ``1+eps``);
    ``grid="plain"`` uses ratio ``1+eps`` (guarantee ``(1+sqrt(1+eps))/2``).
    """

    epsilon: float
    l: float = 1.0
    u: float = 1.0
    grid: str = "sharp"
    mode: str = "tangent"

    def __post_init__(self):
        check_positive(self.epsilon, "epsilon")
        check_interval(self.l, self.u, "approximation interval")
        if self.grid not in ("sharp", "plain"):
            raise InvalidArgument(f"grid must be 'sharp' or 'plain', got {self.grid!r}")
        if self.mode not in ("tangent", "secant"):
            raise InvalidArgument(f"mode must be 'tangent' or 'secant', got {self.mode!r}")

    @property
    def grid_ratio(self):
        if self.grid == "sharp":
            return sharp_ratio(self.epsilon)
        return 1 + self.epsilon

    @property
    def guarantee(self):
        if self.grid == "sharp":
            return 1 + self.epsilon
        return (1 + math.sqrt(self.epsilon + 1)) / 2

    @property
    def n_pieces(self):
        """Tangent-mode piece count ``1 + ceil(log_rho(u/l))``."""
        return 1 + ceil_log(_as_fraction(self.u) / _as_fraction(self.l), self.grid_ratio)


def tangent_at(phi, x0):
    """Tangent line to ``phi`` at ``x0`` using the right derivative."""
    lo, hi = phi.domain
    if not lo <= x0 < hi or (x0 == lo and lo == 0):
        raise DomainError(f"tangent point {x0} not in the interior of [{lo}, {hi}]")
    s = float(phi.slope(x0))
    return LinearPiece(s, float(phi(x0)) - x0 * s)


def _left_tangent_at(phi, x0):
    s = float(phi.left_slope(x0))
    return LinearPiece(s, float(phi(x0)) - x0 * s)


def _at_zero(phi):
    lo = phi.domain[0]
    return {0.0: float(phi(0.0))} if lo <= 0 else {}


def build_pwl_monotone(phi, spec):
    """Tangents at the geometric grid of ``spec``; ``psi(0) = phi(0)``."""
    if spec.mode == "secant":
        return build_pwl_secant(phi, spec)
    if float(phi(spec.l)) == 0:
        # concave, nonnegative, nondecreasing and zero at l: zero on the ray
        return PwlFunction([LinearPiece(0.0, 0.0)], _at_zero(phi), knots=[spec.l])
    pts = grid_points(spec.l, spec.u, spec.grid_ratio)
    pieces = [tangent_at(phi, x) for x in pts]
    return PwlFunction(pieces, _at_zero(phi), "tangent", pts)


def build_pwl_secant(phi, spec):
    """Chords of ``phi`` through consecutive grid points ending exactly at ``u``.

    The envelope lies below ``phi`` on ``[l, u]``; no derivatives are used.
    """
    if float(phi(spec.l)) == 0:
        return PwlFunction([LinearPiece(0.0, 0.0)], _at_zero(phi), "secant", [spec.l])
    pts = grid_points(spec.l, spec.u, spec.grid_ratio)
    nodes = [x for x in pts if x < spec.u] + [spec.u]
    if len(nodes) == 1:
        # degenerate interval: chord from the origin value
        x0 = nodes[0]
        y0 = float(phi(x0))
        base = float(phi(0.0)) if phi.domain[0] <= 0 else y0
        s = (y0 - base) / x0
        return PwlFunction([LinearPiece(s, y0 - s * x0)], _at_zero(phi), "secant", nodes)
    ys = [float(phi(x)) for x in nodes]
    pieces = []
    for (x0, y0), (x1, y1) in zip(zip(nodes, ys), zip(nodes[1:], ys[1:])):
        s = (y1 - y0) / (x1 - x0)
        pieces.append(LinearPiece(s, y0 - s * x0))
    return PwlFunction(pieces, _at_zero(phi), "secant", nodes)


@dataclass(frozen=True)
class GeneralDomainSpec:
    """Domain ``[alpha, beta]`` with offset bounds ``l <= u``.

    ``alpha_kind``/``beta_kind`` say whether each endpoint is an endpoint of
    the function's domain (``"boundary"``, where psi copies phi) or interior
    to it (``"interior"``, where an extra tangent is added).
    """

    alpha: float
    beta: float
    l: float
    u: float
    alpha_kind: str = "boundary"
    beta_kind: str = "boundary"

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise InvalidArgument(f"alpha={self.alpha} must be below beta={self.beta}")
        check_interval(self.l, self.u, "offset bounds")
        for kind in (self.alpha_kind, self.beta_kind):
            if kind not in ("boundary", "interior"):
                raise InvalidArgument(f"endpoint kind must be 'boundary' or 'interior', got {kind!r}")

    @property
    def l_prime(self):
        return max(self.l, self.beta - self.u - self.alpha)

    @property
    def u_prime(self):
        return min(self.u, self.beta - self.l - self.alpha)

    @property
    def feasible_interval(self):
        """``[alpha+l', alpha+u']``, or None when empty."""
        if self.l_prime > self.u_prime:
            return None
        return (self.alpha + self.l_prime, self.alpha + self.u_prime)


def _one_side(slope_at, tangent, start, l_p, u_p, epsilon, sign):
    """Tangent points marching away from ``start`` (sign +1 right, -1 left).

    ``slope_at`` returns the one-sided derivative pointing away from
    ``start``, already multiplied by ``sign`` so that "nonnegative" means the
    function still increases in the marching direction.
    """
    rho = sharp_ratio(epsilon)
    origin = start - sign * l_p  # alpha for the right march, beta for the left
    at = lambda t: origin + sign * t  # noqa: E731
    if slope_at(at(l_p)) < 0:
        return [], []
    pts = [at(l_p)]
    q = 0
    while l_p * rho ** (q + 1) <= u_p and slope_at(at(l_p * rho ** (q + 1))) >= 0:
        q += 1
        pts.append(at(l_p * rho ** q))
    base = l_p * rho ** q
    zeta = min(u_p, l_p * rho ** (q + 1))
    if zeta > base:
        if slope_at(at(zeta)) >= 0:
            pts.append(at(zeta))
        else:
            r = 0
            while r < 3 and base * (1 + epsilon) ** (r + 1) < zeta \
                    and slope_at(at(base * (1 + epsilon) ** (r + 1))) >= 0:
                r += 1
            if r > 0:
                pts.append(at(base * (1 + epsilon) ** r))
    return [tangent(x) for x in pts], pts


def build_pwl_general(phi, dom, epsilon):
    """Two-sided tangent construction for concave ``phi`` on ``[alpha, beta]``.

    Tangents march right from ``alpha+l'`` while the right slope is
    nonnegative and left from ``beta-l'`` while the left slope is
    nonpositive, at ratio ``(1+2eps)**2`` in the offset from the endpoint,
    with one closing tangent per side refined in ``1+eps`` steps.
    """
    check_positive(epsilon, "epsilon")
    pieces, knots, boundary = [], [], {}
    interval = dom.feasible_interval
    if interval is not None:
        l_p, u_p = dom.l_prime, dom.u_prime
        right = _one_side(lambda x: float(phi.slope(x)), lambda x: tangent_at(phi, x),
                          dom.alpha + l_p, l_p, u_p, epsilon, +1)
        left = _one_side(lambda x: -float(phi.left_slope(x)), lambda x: _left_tangent_at(phi, x),
                         dom.beta - l_p, l_p, u_p, epsilon, -1)
        for side_pieces, side_knots in (right, left):
            pieces.extend(side_pieces)
            knots.extend(side_knots)
    for x, kind, make in ((dom.alpha, dom.alpha_kind, lambda x: tangent_at(phi, x)),
                          (dom.beta, dom.beta_kind, lambda x: _left_tangent_at(phi, x))):
        if kind == "boundary":
            boundary[float(x)] = float(phi(x))
        else:
            pieces.append(make(x))
            knots.append(x)
    unique = list(dict.fromkeys(pieces))
    return PwlFunction(unique, boundary, "tangent", sorted(knots))


def general_piece_bound(dom, epsilon):
    """``4 + 2*ceil(log_rho(u/l))``, plus one per interior endpoint."""
    extra = (dom.alpha_kind == "interior") + (dom.beta_kind == "interior")
    return 4 + 2 * ceil_log(_as_fraction(dom.u) / _as_fraction(dom.l), sharp_ratio(epsilon)) + extra


class RatioReport(NamedTuple):
    max_ratio: float
    argmax: float
    min_ratio: float
    argmin: float


def _ratio_samples(psi, l, u, samples):
    xs = np.geomspace(l, u, samples)
    extra = [b for b in psi.breakpoints if l <= b <= u]
    extra += [k for k in psi.knots if l <= k <= u]
    return np.unique(np.concatenate([xs, extra, [l, u]]))


def verify_ratio(phi, psi, interval, samples=10_000):
    """Extreme values of ``psi/phi`` over a log-uniform sample of ``interval``.

    Envelope breakpoints and construction knots inside the interval are
    always included, since for concave ``phi`` the ratio peaks where the
    envelope switches pieces.
    """
    l, u = interval
    check_interval(l, u, "verification interval")
    if samples < 2:
        raise InvalidArgument("samples must be at least 2")
    xs = _ratio_samples(psi, l, u, samples)
    num = np.asarray(psi(xs), dtype=float)
    den = np.asarray(phi(xs), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, np.where(num == 0, 1.0, math.inf))
    i, j = int(np.argmax(ratio)), int(np.argmin(ratio))
    return RatioReport(float(ratio[i]), float(xs[i]), float(ratio[j]), float(xs[j]))


def worst_case_slope(epsilon):
    """Middle slope ``1/(1+sqrt(eps+1))`` of the extremal three-piece function."""
    check_positive(epsilon, "epsilon")
    return 1 / (1 + math.sqrt(epsilon + 1))


def tight_worst_case(epsilon, zeta):
    """Three-piece concave function attaining the plain-grid guarantee.

    Slopes are 1 on ``[0, 1+zeta]``, ``b = 1/(1+sqrt(eps+1))`` on
    ``[1+zeta, 1+eps]`` and 0 afterwards. Under the plain grid on
    ``[1, 1+eps]`` its ratio tends to ``(1+sqrt(eps+1))/2`` as zeta -> 0.
    """
    b = worst_case_slope(epsilon)
    check_positive(zeta, "zeta")
    if zeta >= epsilon:
        raise InvalidArgument("zeta must be smaller than epsilon")
    knee = 1 + zeta
    top = knee + b * (epsilon - zeta)
    return _oracle.pwl([(0.0, 0.0), (knee, knee), (1 + epsilon, top)], tail_slope=0.0)

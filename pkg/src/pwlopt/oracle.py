"""Univariate nonnegative concave function oracles.

An oracle exposes a vectorised value map and one-sided derivatives. Oracles
built from the declarative JSON form (``power``, ``sqrt``, ``log1p``,
``pwl``) carry closed-form derivatives; hand-built oracles without them fall
back to one-sided finite differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import DomainError, InvalidArgument

FD_STEP = 1e-8


def _fd_step(x):
    return np.maximum(FD_STEP, FD_STEP * np.abs(x))


@dataclass(frozen=True, eq=False)
class ConcaveOracle:
    """A nonnegative concave function on ``domain`` with one-sided slopes.

    ``value`` must accept numpy arrays. ``right_derivative`` and
    ``left_derivative`` are optional; when absent a forward (resp. backward)
    difference with step ``max(1e-8, 1e-8*x)`` is used.
    """

    value: Callable
    right_derivative: Optional[Callable] = None
    left_derivative: Optional[Callable] = None
    domain: tuple = (0.0, math.inf)
    monotone: bool = True
    description: Optional[dict] = field(default=None, compare=False)

    def __call__(self, x):
        return self.value(x)

    def _check_domain(self, x):
        lo, hi = self.domain
        arr = np.asarray(x, dtype=float)
        if np.any(arr < lo) or np.any(arr > hi):
            raise DomainError(f"argument {x!r} outside domain [{lo}, {hi}]")

    def slope(self, x):
        """Right derivative at ``x``."""
        self._check_domain(x)
        if self.right_derivative is not None:
            return self.right_derivative(x)
        h = _fd_step(x)
        return (self.value(x + h) - self.value(x)) / h

    def left_slope(self, x):
        """Left derivative at ``x``."""
        self._check_domain(x)
        if self.left_derivative is not None:
            return self.left_derivative(x)
        h = _fd_step(x)
        return (self.value(x) - self.value(x - h)) / h

    def check(self, samples=200, tol=1e-9):
        """Audit nonnegativity, midpoint concavity and monotonicity on a grid.

        Returns a list of violation messages (empty when the oracle passes).
        """
        lo, hi = self.domain
        hi_s = hi if math.isfinite(hi) else max(lo, 1.0) * 1e6
        xs = np.linspace(lo, hi_s, samples)
        vals = np.asarray(self.value(xs), dtype=float)
        problems = []
        if np.any(vals < -tol):
            problems.append("negative value")
        mid = np.asarray(self.value((xs[:-1] + xs[1:]) / 2), dtype=float)
        scale = tol * np.maximum(1.0, np.abs(mid))
        if np.any(mid < (vals[:-1] + vals[1:]) / 2 - scale):
            problems.append("midpoint concavity violated")
        # wider pairs catch kinks the adjacent test can straddle
        i, j = np.meshgrid(np.arange(0, samples, 7), np.arange(0, samples, 5))
        a, b = xs[i.ravel()], xs[j.ravel()]
        m = np.asarray(self.value((a + b) / 2), dtype=float)
        va, vb = np.asarray(self.value(a)), np.asarray(self.value(b))
        if np.any(m < (va + vb) / 2 - tol * np.maximum(1.0, np.abs(m))):
            problems.append("midpoint concavity violated")
        if self.monotone and np.any(np.diff(vals) < -tol * np.maximum(1.0, np.abs(vals[1:]))):
            problems.append("declared nondecreasing but decreases")
        return sorted(set(problems))

    def to_json(self):
        if self.description is None:
            raise InvalidArgument("oracle has no declarative description")
        return dict(self.description)


def power(a=0.0, b=1.0, c=0.5, zero_at_origin=False):
    """``a + b*x**c`` with ``0 < c <= 1``.

    With ``zero_at_origin`` the value at 0 is 0 (a fixed-charge cost): the
    function stays concave and nondecreasing on ``[0, inf)``.
    """
    if not 0 < c <= 1:
        raise InvalidArgument(f"exponent c must lie in (0, 1], got {c}")
    if a < 0 or b < 0:
        raise InvalidArgument("coefficients a, b must be nonnegative")

    def value(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = a + b * np.power(x, c)
        if zero_at_origin:
            out = np.where(x == 0, 0.0, out)
        return out if out.ndim else float(out)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = b * c * np.power(x, c - 1)
        return out if out.ndim else float(out)

    desc = {"kind": "power", "a": a, "b": b, "c": c}
    if zero_at_origin:
        desc["zero_at_origin"] = True
    return ConcaveOracle(value, deriv, deriv, description=desc)


def sqrt():
    def value(x):
        out = np.sqrt(np.asarray(x, dtype=float))
        return out if out.ndim else float(out)

    def deriv(x):
        with np.errstate(divide="ignore"):
            out = 0.5 / np.sqrt(np.asarray(x, dtype=float))
        return out if out.ndim else float(out)

    return ConcaveOracle(value, deriv, deriv, description={"kind": "sqrt"})


def log1p():
    def value(x):
        out = np.log1p(np.asarray(x, dtype=float))
        return out if out.ndim else float(out)

    def deriv(x):
        out = 1.0 / (1.0 + np.asarray(x, dtype=float))
        return out if out.ndim else float(out)

    return ConcaveOracle(value, deriv, deriv, description={"kind": "log1p"})


def linear(slope=1.0, intercept=0.0):
    return power(intercept, slope, 1.0)


def pwl(breakpoints, tail_slope=None, domain=None):
    """Piecewise-linear concave function through ``breakpoints``.

    ``breakpoints`` is a list of ``(x, y)`` pairs with increasing ``x``.
    Beyond the last breakpoint the function continues with ``tail_slope``
    (default: the slope of the last segment). The function is only defined
    to the right of the first breakpoint.
    """
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise InvalidArgument("pwl needs at least two (x, y) breakpoints")
    xs, ys = pts[:, 0], pts[:, 1]
    if np.any(np.diff(xs) <= 0):
        raise InvalidArgument("breakpoint abscissae must be strictly increasing")
    slopes = np.diff(ys) / np.diff(xs)
    if tail_slope is None:
        tail_slope = float(slopes[-1])
    slopes = np.append(slopes, tail_slope)
    if np.any(np.diff(slopes) > 1e-12 * np.maximum(1.0, np.abs(slopes[1:]))):
        raise InvalidArgument("pwl slopes must be nonincreasing for concavity")
    if domain is None:
        domain = (float(xs[0]), math.inf)

    def value(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 1)
        out = ys[idx] + slopes[idx] * (x - xs[idx])
        return out if out.ndim else float(out)

    def right(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 1)
        out = slopes[idx]
        return out if out.ndim else float(out)

    def left(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(xs, x, side="left") - 1, 0, len(xs) - 1)
        out = slopes[idx]
        return out if out.ndim else float(out)

    monotone = bool(np.all(slopes >= 0))
    desc = {"kind": "pwl", "breakpoints": pts.tolist()}
    if tail_slope != slopes[-2]:
        desc["tail_slope"] = float(tail_slope)
    return ConcaveOracle(value, right, left, domain=tuple(domain), monotone=monotone,
                         description=desc)


def from_json(spec):
    """Build an oracle from its declarative dict form."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidArgument(f"oracle spec must be a dict with 'kind', got {spec!r}")
    kind = spec["kind"]
    if kind == "power":
        return power(float(spec.get("a", 0.0)), float(spec.get("b", 1.0)),
                     float(spec.get("c", 1.0)), bool(spec.get("zero_at_origin", False)))
    if kind == "sqrt":
        return sqrt()
    if kind == "log1p":
        return log1p()
    if kind == "linear":
        return linear(float(spec.get("slope", 1.0)), float(spec.get("intercept", 0.0)))
    if kind == "pwl":
        return pwl(spec["breakpoints"], spec.get("tail_slope"))
    raise InvalidArgument(f"unknown oracle kind {kind!r}")

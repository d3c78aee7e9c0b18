"""Estimator-style wrappers with ``fit``/``transform``/``predict``."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import oracle as _oracle
from .approx import ApproxSpec, build_pwl_monotone, verify_ratio
from .exceptions import InvalidArgument
from .flp import FlpInstance, end_to_end
from .mcf import McfInstance, approximate_costs, dual_ascent, expand, gap_report, merge_uniform_grid


def _resolve(function):
    if isinstance(function, _oracle.ConcaveOracle):
        return function
    if isinstance(function, str):
        return _oracle.from_json({"kind": function})
    if isinstance(function, dict):
        return _oracle.from_json(function)
    raise InvalidArgument(f"cannot interpret {function!r} as a concave function")


class PiecewiseConcaveApproximator(TransformerMixin, BaseEstimator):
    """Replace a concave function by a lower envelope of tangents or chords.

    ``fit`` takes sample points; when ``lower`` or ``upper`` is ``None`` the
    interval is taken from the smallest positive and the largest sample.
    ``transform`` evaluates the envelope column-wise; ``predict`` on a 1-D
    array returns the same values flattened.
    """

    def __init__(self, function="sqrt", epsilon=0.1, lower=None, upper=None, grid="sharp",
                 mode="tangent"):
        self.function = function
        self.epsilon = epsilon
        self.lower = lower
        self.upper = upper
        self.grid = grid
        self.mode = mode

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False, ensure_all_finite=True)
        pos = X[X > 0]
        lo = self.lower if self.lower is not None else (float(pos.min()) if pos.size else 1.0)
        hi = self.upper if self.upper is not None else max(float(X.max()), lo)
        self.phi_ = _resolve(self.function)
        self.spec_ = ApproxSpec(self.epsilon, float(lo), float(hi), self.grid, self.mode)
        self.psi_ = build_pwl_monotone(self.phi_, self.spec_)
        self.n_pieces_ = self.psi_.n_pieces
        self.guarantee_ = self.spec_.guarantee
        return self

    def transform(self, X):
        check_is_fitted(self, "psi_")
        X = check_array(X, ensure_2d=False)
        return np.asarray(self.psi_(X), dtype=float)

    def predict(self, X):
        return self.transform(X).ravel()

    def ratio_report(self, samples=10_000):
        check_is_fitted(self, "psi_")
        return verify_ratio(self.phi_, self.psi_, (self.spec_.l, self.spec_.u), samples)


def _as_instance(X, cls):
    if isinstance(X, cls):
        return X
    if isinstance(X, dict):
        return cls.from_json(X)
    raise InvalidArgument(f"expected a {cls.__name__} or its JSON dict")


class ConcaveFlowSolver(BaseEstimator):
    """Approximate, expand and solve a concave-cost multicommodity flow instance."""

    def __init__(self, epsilon=0.01, merge=True):
        self.epsilon = epsilon
        self.merge = merge

    def fit(self, X, y=None):
        inst = _as_instance(X, McfInstance)
        psis = approximate_costs(inst, self.epsilon)
        if self.merge and inst.is_complete_uniform():
            psis = merge_uniform_grid(psis, inst)
        self.n_pieces_ = max(len(p) for p in psis)
        self.result_ = dual_ascent(expand(inst, psis))
        self.report_ = gap_report(self.result_, self.epsilon)
        self.lower_bound_ = self.report_.z_lb
        self.cost_ = self.report_.z_da
        return self

    def predict(self, X=None):
        """Per-edge flows of the heuristic solution."""
        check_is_fitted(self, "result_")
        return self.result_.edge_flows.copy()


class ConcaveFacilityLocation(BaseEstimator):
    """Concave facility costs solved through an expanded classical UFL."""

    def __init__(self, epsilon=0.1, verify=None):
        self.epsilon = epsilon
        self.verify = verify

    def fit(self, X, y=None):
        inst = _as_instance(X, FlpInstance)
        self.result_ = end_to_end(inst, self.epsilon, self.verify)
        self.cost_ = self.result_.concave_cost
        self.open_facilities_ = self.result_.open_facilities
        return self

    def predict(self, X=None):
        """Facility serving each customer."""
        check_is_fitted(self, "result_")
        return np.array(self.result_.assignment, dtype=np.int64)

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pwlopt import oracle
from pwlopt.estimator import ConcaveFacilityLocation, ConcaveFlowSolver, PiecewiseConcaveApproximator
from pwlopt.exceptions import InvalidArgument
from pwlopt.flp import gen_flp_instance
from pwlopt.mcf import gen_instance


def test_approximator_fit_transform():
    est = PiecewiseConcaveApproximator("sqrt", epsilon=0.1)
    X = np.geomspace(1, 100, 50)
    out = est.fit_transform(X)
    assert out.shape == X.shape
    assert np.all(out >= np.sqrt(X) - 1e-12) and np.all(out <= 1.1 * np.sqrt(X) + 1e-9)
    assert est.n_pieces_ == est.psi_.n_pieces and est.guarantee_ == 1.1


def test_approximator_params_and_clone():
    est = PiecewiseConcaveApproximator({"kind": "log1p"}, epsilon=0.5, lower=1, upper=10)
    assert est.get_params()["epsilon"] == 0.5
    other = clone(est).set_params(epsilon=0.25)
    assert other.fit([1.0]).spec_.epsilon == 0.25


def test_approximator_2d_and_oracle_input():
    est = PiecewiseConcaveApproximator(oracle.power(1, 2, 0.5), lower=1, upper=50).fit([[1.0]])
    out = est.transform(np.array([[1.0, 4.0], [9.0, 16.0]]))
    assert out.shape == (2, 2)
    assert est.predict(np.array([4.0])).shape == (1,)


def test_approximator_errors():
    with pytest.raises(NotFittedError):
        PiecewiseConcaveApproximator().transform([1.0])
    with pytest.raises(InvalidArgument):
        PiecewiseConcaveApproximator(42).fit([1.0])
    with pytest.raises(ValueError):
        PiecewiseConcaveApproximator().fit([np.nan])


def test_flow_solver():
    inst = gen_instance(6, seed=0, m=9)
    est = ConcaveFlowSolver(epsilon=0.1).fit(inst)
    assert est.lower_bound_ <= est.cost_
    flows = est.predict()
    assert flows.shape == (inst.m,)
    assert ConcaveFlowSolver(epsilon=0.1).fit(inst.to_json()).cost_ == est.cost_


def test_facility_location():
    inst = gen_flp_instance(5, 2, seed=3)
    est = ConcaveFacilityLocation(epsilon=0.1).fit(inst)
    assign = est.predict()
    assert assign.shape == (5,) and set(assign) <= set(est.open_facilities_)
    assert est.cost_ == pytest.approx(inst.cost_of_assignment(assign))
    with pytest.raises(InvalidArgument):
        ConcaveFacilityLocation().fit([1, 2])

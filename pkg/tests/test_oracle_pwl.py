import numpy as np
import pytest

from pwlopt import oracle
from pwlopt.exceptions import DomainError, InvalidArgument
from pwlopt.pwl import LinearPiece, PwlFunction, lower_hull


def test_power_values_and_zero():
    phi = oracle.power(3, 2, 0.8, zero_at_origin=True)
    assert phi(0.0) == 0.0
    assert phi(1.0) == pytest.approx(5.0)
    assert phi.slope(1.0) == pytest.approx(1.6)


@pytest.mark.parametrize("kw", [dict(c=0), dict(c=1.5), dict(a=-1), dict(b=-1)])
def test_power_validation(kw):
    with pytest.raises(InvalidArgument):
        oracle.power(**kw)


def test_json_round_trip():
    for phi in (oracle.sqrt(), oracle.log1p(), oracle.power(1, 2, 0.5, True),
                oracle.pwl([(0, 0), (2, 2)], tail_slope=0.5), oracle.linear(3.0)):
        back = oracle.from_json(phi.to_json())
        xs = np.array([0.5, 1.0, 7.0])
        assert np.allclose(back(xs), phi(xs))


def test_unknown_kind():
    with pytest.raises(InvalidArgument):
        oracle.from_json({"kind": "nope"})


def test_pwl_rejects_convex():
    with pytest.raises(InvalidArgument):
        oracle.pwl([(0, 0), (1, 1), (2, 3)])


def test_domain_check():
    with pytest.raises(DomainError):
        oracle.sqrt().slope(-1.0)


def test_check_flags_convexity():
    assert oracle.log1p().check() == []
    square = oracle.ConcaveOracle(lambda x: np.asarray(x, dtype=float) ** 2)
    assert square.check()


def test_envelope_matches_bruteforce():
    rng = np.random.default_rng(3)
    pieces = [LinearPiece(float(s), float(f)) for s, f in zip(rng.uniform(0, 3, 12),
                                                               rng.uniform(0, 5, 12))]
    psi = PwlFunction(pieces)
    xs = np.linspace(-5, 20, 501)
    assert np.allclose(psi.envelope(xs), psi.envelope_bruteforce(xs))


def test_hull_discards_dominated():
    order, breaks = lower_hull([LinearPiece(1, 0), LinearPiece(1, 5), LinearPiece(0, 2)])
    assert sorted(order) == [0, 2] and len(breaks) == 1


def test_pwl_json_and_shift():
    psi = PwlFunction([LinearPiece(1, 1), LinearPiece(0.5, 2)], {0.0: 0.5}, knots=[1, 2])
    back = PwlFunction.from_json(psi.to_json())
    assert back == psi and back.knots == (1.0, 2.0)
    s = psi.shifted(0.5)
    assert s(0.0) == 0.0 and s(10.0) == pytest.approx(psi(10.0) - 0.5)

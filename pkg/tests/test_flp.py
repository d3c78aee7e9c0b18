import numpy as np
import pytest

from pwlopt.approx import verify_ratio
from pwlopt.exceptions import InvalidArgument, PreconditionViolation, SizeCapExceeded
from pwlopt.flp import (FlpInstance, approximate_facility_costs, brute_force_concave,
                        brute_force_flp, end_to_end, expand, gen_flp_instance,
                        metric_violations, solve_ufl)

POW = {"kind": "power", "a": 2.0, "b": 1.0, "c": 0.5, "zero_at_origin": True}


def test_single_customer_single_facility():
    inst = FlpInstance([3], [[2]], [POW])
    e = expand(inst, approximate_facility_costs(inst, 0.1))
    sol = solve_ufl(e)
    q = sol.assignment[0]
    assert sol.cost == pytest.approx(e.f[q] + (e.s[q] + 2) * 3)
    assert sol.cost == pytest.approx(brute_force_flp(e).cost)


def test_unit_total_demand_has_one_piece():
    inst = FlpInstance([1, 0], [[1, 2], [3, 1]], [POW, POW])
    assert all(p.n_pieces == 1 for p in approximate_facility_costs(inst, 0.01))


def test_piece_count_and_expansion_size():
    inst = FlpInstance([30] * 3, [[0, 1]] * 3, [POW, POW])
    psis = approximate_facility_costs(inst, 0.01)
    assert all(p.n_pieces <= 115 for p in psis)
    e = expand(inst, psis, prune=False)
    assert e.n_facilities == sum(p.n_pieces for p in psis)
    assert verify_ratio(inst.oracles[0], psis[0], (1.0, 90.0)).max_ratio <= 1.01 + 1e-9


def test_symmetric_instance_cost_invariant():
    a = FlpInstance([1, 1], [[1, 1], [1, 1]], [POW, POW])
    b = FlpInstance([1, 1], [[1, 1], [1, 1]], [POW, POW][::-1])
    ca = solve_ufl(expand(a, approximate_facility_costs(a, 0.1))).cost
    cb = solve_ufl(expand(b, approximate_facility_costs(b, 0.1))).cost
    assert ca == pytest.approx(cb)


def test_zero_connection_costs_use_one_facility():
    costs = [POW, {"kind": "power", "a": 1.0, "b": 2.0, "c": 0.7, "zero_at_origin": True}]
    inst = FlpInstance([2, 3, 1], [[0, 0]] * 3, costs)
    opt, _ = brute_force_concave(inst)
    assert opt == pytest.approx(min(float(phi(6.0)) for phi in inst.oracles))


def test_metric_is_preserved():
    for seed in range(10):
        inst = gen_flp_instance(5, 3, seed=seed)
        assert metric_violations(inst.c) == 0
        assert metric_violations(expand(inst, approximate_facility_costs(inst, 0.1)).conn) == 0


def test_metric_detects_violation():
    assert metric_violations([[0, 10], [1, 1]]) > 0


def test_pruning_keeps_optimum():
    inst = gen_flp_instance(4, 2, seed=1)
    psis = approximate_facility_costs(inst, 0.5)
    full, pruned = expand(inst, psis, prune=False), expand(inst, psis)
    assert brute_force_flp(pruned).cost == pytest.approx(brute_force_flp(full).cost)


def test_owner_restricted_enumeration_is_exact():
    for seed in range(8):
        inst = gen_flp_instance(4, 2, seed=seed, max_demand=1)
        e = expand(inst, approximate_facility_costs(inst, 0.1))
        if e.n_facilities > 16:
            continue
        from pwlopt.flp import _one_piece_per_owner
        W = e.weighted()
        alt = min(e.f[list(s)].sum() + W[:, s].min(axis=1).sum() for s in _one_piece_per_owner(e))
        assert alt == pytest.approx(brute_force_flp(e).cost)


def test_solver_within_twice_optimum():
    worst = 1.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        inst = gen_flp_instance(int(rng.integers(1, 6)), int(rng.integers(1, 4)), seed=seed)
        e = expand(inst, approximate_facility_costs(inst, 0.1))
        worst = max(worst, solve_ufl(e).cost / brute_force_flp(e).cost)
    assert worst <= 2.0


def test_end_to_end_certifies():
    r = end_to_end(gen_flp_instance(5, 3, seed=4), 0.1)
    assert r.certified and r.ratio <= r.composed_factor + 1e-9
    assert set(r.to_json()) >= {"open_facilities", "assignment", "gamma_inst", "composed_factor"}


def test_json_round_trip():
    inst = gen_flp_instance(3, 2, seed=0)
    assert FlpInstance.from_json(inst.to_json()) == inst


@pytest.mark.parametrize("args", [([], [], [POW]), ([-1], [[0]], [POW]), ([1], [[0, 1]], [POW]),
                                  ([1], [[-1]], [POW])])
def test_validation(args):
    with pytest.raises(InvalidArgument):
        FlpInstance(*args)


def test_nonzero_origin_rejected():
    with pytest.raises(PreconditionViolation):
        FlpInstance([1], [[0]], [{"kind": "power", "a": 1.0, "b": 1.0, "c": 0.5}])


def test_caps():
    inst = gen_flp_instance(9, 2, seed=0)
    e = expand(inst, approximate_facility_costs(inst, 0.5))
    with pytest.raises(SizeCapExceeded):
        brute_force_flp(e)
    with pytest.raises(SizeCapExceeded):
        brute_force_concave(gen_flp_instance(8, 8, seed=0))

import numpy as np
import pytest

from oracles import shortest_cost_routing
from pwlopt.exceptions import InvalidArgument, PreconditionViolation, SizeCapExceeded, UndefinedGap
from pwlopt.mcf import (McfInstance, approximate_costs, audit, brute_force_concave_opt,
                        compose_gap, dual_ascent, expand, gap_report, gen_instance, is_even_flow,
                        merge_uniform_grid, rows_to_csv, run_instance)
from pwlopt.mcf.instance import edge_count, random_spanning_tree


def small(seed, n=4, extra=1, regime="moderate"):
    return gen_instance(n, regime=regime, seed=seed, m=n - 1 + extra)


class TestGenerator:
    def test_shapes(self):
        inst = gen_instance(10)
        assert (inst.m, inst.K) == (30, 90)
        assert inst.flow_variables == inst.K * inst.m
        assert edge_count(20, "dense") == 95
        assert edge_count(80, "sparse") == 240

    def test_deterministic(self):
        assert gen_instance(10, seed=5).dumps() == gen_instance(10, seed=5).dumps()
        assert gen_instance(10, seed=5).dumps() != gen_instance(10, seed=6).dumps()

    def test_connected_and_ranges(self):
        for seed in range(10):
            inst = gen_instance(12, regime="strong", seed=seed)
            assert inst.is_connected() and inst.is_complete_uniform()
            a, b, c = np.array(inst.costs).T
            assert a.min() >= 0.1 and a.max() <= 10 and b.min() >= 0.33 and b.max() <= 33.4
            assert c.min() >= 0.0099 and c.max() <= 0.99

    def test_spanning_tree(self):
        rng = np.random.default_rng(0)
        edges = random_spanning_tree(9, rng)
        assert len(edges) == 8 and len(set(edges)) == 8

    def test_json_round_trip(self):
        inst = gen_instance(5, seed=2, m=6)
        assert McfInstance.from_json(inst.to_json()) == inst

    @pytest.mark.parametrize("kw", [dict(n=2), dict(n=5, m=20), dict(n=5, m=2),
                                    dict(n=5, regime="mild"), dict(n=5, density="odd")])
    def test_validation(self, kw):
        with pytest.raises(InvalidArgument):
            gen_instance(**kw)


class TestMerge:
    def test_merge_keeps_accuracy_on_even_flows(self):
        inst = gen_instance(10, seed=1)
        eps = 0.01
        merged = merge_uniform_grid(approximate_costs(inst, eps), inst)
        for psi, phi in zip(merged, inst.oracles):
            xs = np.arange(2, inst.B + 1, 2, dtype=float)
            r = np.asarray(psi(xs)) / np.asarray(phi(xs))
            assert r.min() >= 1 - 1e-9 and r.max() <= 1 + eps + 1e-9
            assert 30 <= psi.n_pieces <= 115

    def test_merge_needs_uniform_demand(self):
        inst = McfInstance(3, [(0, 1), (1, 2)], [(1, 1, 0.5)] * 2, [(0, 2, 2)])
        with pytest.raises(PreconditionViolation):
            merge_uniform_grid(approximate_costs(inst, 0.1), inst)


class TestDualAscent:
    @pytest.mark.parametrize("seed", range(6))
    def test_bound_sandwich(self, seed):
        inst = small(seed, n=4 + seed % 2, extra=1 + seed % 2)
        psis = merge_uniform_grid(approximate_costs(inst, 0.1), inst)
        res = dual_ascent(expand(inst, psis))
        opt = brute_force_concave_opt(inst, psis).cost
        assert res.lower_bound <= opt * (1 + 1e-9) <= res.upper_bound * (1 + 1e-9)
        assert audit(expand(inst, psis), res) == []

    def test_heuristic_cost_is_recomputable(self):
        inst = small(3, n=5, extra=2)
        psis = approximate_costs(inst, 0.1)
        res = dual_ascent(expand(inst, psis))
        assert inst.cost(res.edge_flows, psis) <= res.upper_bound * (1 + 1e-9)

    def test_tree_instance_is_solved_exactly(self):
        inst = small(0, n=5, extra=0)
        psis = approximate_costs(inst, 0.1)
        res = dual_ascent(expand(inst, psis))
        assert res.upper_bound == pytest.approx(brute_force_concave_opt(inst, psis).cost)


class TestBrute:
    def test_matches_reference(self):
        inst = small(4, n=4, extra=1)
        ref = shortest_cost_routing(inst.n, inst.edges, inst.oracles, inst.commodities)
        assert brute_force_concave_opt(inst).cost == pytest.approx(ref)

    def test_even_flows(self):
        assert is_even_flow(brute_force_concave_opt(small(1)).flows)

    def test_cap(self):
        with pytest.raises(SizeCapExceeded):
            brute_force_concave_opt(gen_instance(6, m=8))


class TestReport:
    def test_compose(self):
        assert compose_gap(0.01, 0.0041) == pytest.approx(0.014141)
        assert compose_gap(0.05, 0.0) == pytest.approx(0.05)

    def test_undefined_gap(self):
        class R:
            lower_bound, upper_bound, seconds, solution_edges = 0.0, 1.0, 0.0, 0
        with pytest.raises(UndefinedGap):
            gap_report(R(), 0.1)

    def test_run_and_csv(self):
        rep, row = run_instance(gen_instance(6, m=9, seed=3), 0.05)
        assert rep.eps_all >= rep.eps_da >= 0
        text = rows_to_csv([row])
        assert text.splitlines()[0].startswith("n,m,K,density")
        assert len(text.splitlines()) == 2

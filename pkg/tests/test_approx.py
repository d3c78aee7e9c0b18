import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import envelope, piece_count, tangents
from pwlopt import oracle
from pwlopt.approx import (ApproxSpec, GeneralDomainSpec, build_pwl_general, build_pwl_monotone,
                           build_pwl_secant, ceil_log, general_piece_bound, grid_points,
                           sharp_ratio, tangent_at, tight_worst_case, verify_ratio)
from pwlopt.exceptions import DomainError, InvalidArgument


class TestCeilLog:
    @pytest.mark.parametrize("ratio,rho,expected", [(1, 2, 0), (2, 2, 1), (3, 2, 2), (1024, 2, 10),
                                                    (1025, 2, 11), (90, 1.01, 453)])
    def test_values(self, ratio, rho, expected):
        assert ceil_log(ratio, rho) == expected

    def test_exact_power_boundary(self):
        rho = Fraction(21, 20)
        assert ceil_log(rho ** 37, rho) == 37
        assert ceil_log(rho ** 37 + Fraction(1, 10 ** 30), rho) == 38

    def test_rejects_bad_ratio(self):
        with pytest.raises(InvalidArgument):
            ceil_log(2, 1.0)


class TestGrid:
    def test_grid_covers_interval(self):
        pts = grid_points(1.0, 90.0, sharp_ratio(0.01))
        assert pts[0] == 1.0 and pts[-2] < 90.0 <= pts[-1]

    @pytest.mark.parametrize("u", [1.0, 2.0, 90.0, 1e4])
    @pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
    def test_count_matches_reference(self, u, eps):
        spec = ApproxSpec(eps, 1.0, u)
        assert spec.n_pieces == piece_count(1.0, u, (1 + 2 * eps) ** 2)
        assert len(grid_points(1.0, u, spec.grid_ratio)) == spec.n_pieces

    def test_single_point_interval(self):
        assert grid_points(5.0, 5.0, 1.5) == [5.0]

    @pytest.mark.parametrize("bad", [dict(epsilon=0), dict(epsilon=-1), dict(l=2.0, u=1.0),
                                     dict(grid="odd"), dict(mode="odd")])
    def test_spec_validation(self, bad):
        kw = dict(epsilon=0.1, l=1.0, u=2.0) | bad
        with pytest.raises(InvalidArgument):
            ApproxSpec(**kw)

    def test_guarantees(self):
        assert ApproxSpec(0.25, grid="plain").guarantee == pytest.approx((1 + math.sqrt(1.25)) / 2)
        assert ApproxSpec(0.25).guarantee == 1.25
        assert sharp_ratio(0.1) == pytest.approx(1.44)


class TestMonotone:
    def test_tangents_match_reference(self):
        phi = oracle.sqrt()
        spec = ApproxSpec(0.1, 1.0, 50.0)
        psi = build_pwl_monotone(phi, spec)
        ref = tangents(math.sqrt, lambda x: 0.5 / math.sqrt(x), grid_points(1.0, 50.0, 1.44))
        for x in np.geomspace(1, 50, 97):
            assert psi(x) == pytest.approx(envelope(ref, x), rel=1e-12)

    def test_psi_zero_copies_phi(self):
        phi = oracle.power(3, 2, 0.8)
        psi = build_pwl_monotone(phi, ApproxSpec(0.1, 1.0, 10.0))
        assert psi(0.0) == 3.0 and psi.at_zero == 3.0

    def test_linear_is_exact(self):
        phi = oracle.linear(2.0, 1.0)
        psi = build_pwl_monotone(phi, ApproxSpec(0.1, 1.0, 100.0))
        rep = verify_ratio(phi, psi, (1.0, 100.0))
        assert rep.max_ratio == pytest.approx(1.0, abs=1e-12)

    def test_zero_at_l_collapses(self):
        phi = oracle.pwl([(0, 0), (1, 0)], tail_slope=0.0)
        psi = build_pwl_monotone(phi, ApproxSpec(0.1, 1.0, 10.0))
        assert psi.n_pieces == 1 and psi(5.0) == 0

    def test_tangent_domain(self):
        with pytest.raises(DomainError):
            tangent_at(oracle.sqrt(), 0.0)


class TestSecant:
    def test_below_phi(self):
        phi = oracle.log1p()
        spec = ApproxSpec(0.1, 1.0, 1e3, mode="secant")
        psi = build_pwl_secant(phi, spec)
        rep = verify_ratio(phi, psi, (1.0, 1e3))
        assert rep.max_ratio <= 1 + 1e-12
        assert rep.min_ratio >= 1 / 1.1 - 1e-9

    def test_degenerate_interval(self):
        phi = oracle.sqrt()
        psi = build_pwl_secant(phi, ApproxSpec(0.1, 4.0, 4.0, mode="secant"))
        assert psi(4.0) == pytest.approx(2.0)


class TestWorstCase:
    @pytest.mark.parametrize("eps", [0.1, 0.25, 1.0])
    def test_attains_bound(self, eps):
        phi = tight_worst_case(eps, 1e-6)
        psi = build_pwl_monotone(phi, ApproxSpec(eps, 1.0, 1 + eps, grid="plain"))
        rep = verify_ratio(phi, psi, (1.0, 1 + eps))
        bound = (1 + math.sqrt(1 + eps)) / 2
        assert bound - 1e-3 <= rep.max_ratio <= bound + 1e-9

    def test_zeta_validation(self):
        with pytest.raises(InvalidArgument):
            tight_worst_case(0.1, 0.2)


class TestGeneral:
    def test_hump_function(self):
        phi = oracle.ConcaveOracle(lambda x: 100 - (np.asarray(x, dtype=float) - 10) ** 2 / 10,
                                   lambda x: -(np.asarray(x, dtype=float) - 10) / 5,
                                   lambda x: -(np.asarray(x, dtype=float) - 10) / 5,
                                   domain=(0.0, 20.0), monotone=False)
        dom = GeneralDomainSpec(0.0, 20.0, 0.5, 20.0)
        psi = build_pwl_general(phi, dom, 0.1)
        xs = np.concatenate([[0.0, 20.0], np.linspace(0.5, 19.5, 400)])
        ratio = np.asarray(psi(xs)) / np.asarray(phi(xs))
        assert ratio.min() >= 1 - 1e-9 and ratio.max() <= 1.1 + 1e-9
        assert psi.n_pieces <= general_piece_bound(dom, 0.1)

    def test_empty_feasible_interval(self):
        dom = GeneralDomainSpec(0.0, 1.0, 2.0, 3.0)
        assert dom.feasible_interval is None

    def test_bad_domain(self):
        with pytest.raises(InvalidArgument):
            GeneralDomainSpec(1.0, 1.0, 1.0, 2.0)

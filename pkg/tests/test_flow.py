"""Tests for the comoving flow solution families and the pp-wave family."""

import numpy as np
import pytest

from cauchypairs import flow, spacetime_verifier as sv
from cauchypairs.errors import (
    DegenerateCoframe,
    IntervalContainsSingularity,
    NullDirectionNotParallel,
    ParamOutOfRange,
)
from cauchypairs.flow import DiagonalFamily, FlowSolution, PPWaveData
from cauchypairs.spacetime_verifier import Grid4, Metric4Grid

SMALL_BOX = ((0, 0.02), (0, 0.02), (0, 0.02))


def const_profile(s, y):
    return 1.0 + 0.0 * s


class TestDiagonalFamilyValidation:
    def test_unknown_case(self):
        with pytest.raises(ParamOutOfRange):
            DiagonalFamily(case="C", a=1.0, b=1.0, Ll=const_profile,
                           Ln=const_profile)

    def test_b_nonzero_requires_constant_a_and_nonzero_b(self):
        with pytest.raises(ParamOutOfRange):
            DiagonalFamily(case="B_nonzero", a=1.0, b=0.0, Ll=const_profile,
                           Ln=const_profile)
        with pytest.raises(ParamOutOfRange):
            DiagonalFamily(case="B_nonzero", a=lambda x: 1.0, b=1.0,
                           Ll=const_profile, Ln=const_profile)

    def test_b_zero_requires_function_a(self):
        with pytest.raises(ParamOutOfRange):
            DiagonalFamily(case="B_zero", a=1.0, b=0.0, Ll=const_profile,
                           Ln=const_profile)
        with pytest.raises(ParamOutOfRange):
            DiagonalFamily(case="B_zero", a=lambda x: 1.0, b=0.5,
                           Ll=const_profile, Ln=const_profile)


class TestDiagonalSolution:
    def test_interval_singularity_detected(self):
        fam = DiagonalFamily(case="B_nonzero", a=1.0, b=1.0,
                             Ll=const_profile, Ln=const_profile)
        with pytest.raises(IntervalContainsSingularity):
            flow.diagonal_solution(fam, (-2.0, 0.0), SMALL_BOX, 9)

    def test_vanishing_profile_detected(self):
        fam = DiagonalFamily(case="B_nonzero", a=1.0, b=1.0,
                             Ll=lambda s, y: s - s[s.shape[0] // 2, 0, 0, 0],
                             Ln=const_profile)
        with pytest.raises(DegenerateCoframe):
            flow.diagonal_solution(fam, (0.0, 0.02), SMALL_BOX, 9)

    def test_comoving_residual_small_both_families(self):
        fam1 = DiagonalFamily(
            case="B_nonzero", a=1.0, b=1.0,
            Ll=lambda s, y: np.exp(0.5 * s), Ln=const_profile,
        )
        fam2 = DiagonalFamily(
            case="B_zero", a=lambda x: 1.0 + x, b=0.0,
            Ll=lambda s, y: np.exp(0.5 * s), Ln=lambda s, z: 2.0 + s,
            a_primitive=lambda x: x + x * x / 2,
        )
        for fam in (fam1, fam2):
            sol = flow.diagonal_solution(fam, (0.0, 0.02), SMALL_BOX, 17)
            report = flow.comoving_residual(sol)
            assert report["max"] < 1e-5, (fam.case, report)

    def test_comoving_residual_second_order(self):
        fam = DiagonalFamily(
            case="B_nonzero", a=1.0, b=1.0,
            Ll=lambda s, y: np.exp(s), Ln=const_profile,
        )
        res = {}
        for n in (17, 33):
            sol = flow.diagonal_solution(fam, (0.0, 0.05),
                                         ((0, 0.05),) * 3, n)
            res[n] = flow.comoving_residual(sol)["max"]
        assert res[33] < res[17] / 3

    def test_non_solution_detected(self):
        # e^{t + 2x} is not a function of the characteristic variable zeta
        grid = Grid4(((0, 0.5),) * 4, np.zeros((9, 9, 5, 5, 1)))
        tt, xx, _, _ = grid.meshgrid()
        e = np.zeros(grid.shape + (3, 3))
        e[..., 0, 0] = 1.0
        e[..., 1, 1] = np.exp(tt + 2 * xx)
        e[..., 2, 2] = 1.0
        sol = FlowSolution(interval=(0, 0.5), coframe=Grid4(grid.box, e))
        report = flow.comoving_residual(sol)
        assert report["exterior_max"] > 0.1

    def test_degenerate_coframe_rejected(self):
        grid = Grid4(((0, 1),) * 4, np.zeros((5, 5, 5, 5, 1)))
        e = np.zeros(grid.shape + (3, 3))  # identically singular
        sol = FlowSolution(interval=(0, 1), coframe=Grid4(grid.box, e))
        with pytest.raises(DegenerateCoframe):
            flow.comoving_residual(sol)

    def test_simpson_primitive_close_to_exact(self):
        common = dict(
            case="B_zero", a=lambda x: np.exp(x), b=0.0,
            Ll=lambda s, y: 2.0 + s, Ln=const_profile,
        )
        with_exact = DiagonalFamily(a_primitive=lambda x: np.expm1(x), **common)
        with_quad = DiagonalFamily(**common)
        box, n = ((0, 0.1),) * 3, 17
        e1 = flow.diagonal_solution(with_exact, (0, 0.1), box, n).coframe.values
        e2 = flow.diagonal_solution(with_quad, (0, 0.1), box, n).coframe.values
        assert np.abs(e1 - e2).max() < 1e-9

    def test_ricci_flat_choice_vs_generic(self):
        rf = DiagonalFamily(
            case="B_nonzero", a=1.0, b=1.0,
            Ll=lambda s, y: np.exp(s) + 1.0, Ln=lambda s, z: 2.0 + 0.0 * s,
        )
        generic = DiagonalFamily(
            case="B_nonzero", a=1.0, b=1.0,
            Ll=lambda s, y: np.exp(0.5 * s), Ln=lambda s, z: 2.0 + 0.0 * s,
        )
        args = ((0, 0.02), SMALL_BOX, 17)
        res_rf = flow.diagonal_ricci_flat_residual(rf, *args)
        res_gen = flow.diagonal_ricci_flat_residual(generic, *args)
        assert res_rf[2:-2, 2:-2].max() < 1e-5
        assert res_gen[2:-2, 2:-2].max() > 1e-2


class TestPPWave:
    def test_log_solution_ode_residual_exactly_zero(self):
        data = PPWaveData.log_solution(0.3, -1.0, -0.2, 1.0, c=0.4)
        r_l, r_n = flow.pp_ricci_residual(data, np.linspace(-0.5, 0.5, 33))
        assert np.abs(r_l).max() == 0.0
        assert np.abs(r_n).max() == 0.0

    def test_fd_ode_residual_matches_analytic(self):
        data = PPWaveData.log_solution(0.0, -1.0, 0.0, 1.0)
        fd_data = PPWaveData(fl=data.fl, fn=data.fn)
        x = np.linspace(-0.1, 0.1, 201)
        r_l, _ = flow.pp_ricci_residual(fd_data, x)
        assert np.abs(r_l[2:-2]).max() < 1e-3

    def test_metric_block_entries(self):
        data = PPWaveData.log_solution(0.0, -1.0, 0.0, 1.0, c=0.3)
        box = ((-0.05, 0.05), (0, 1), (0, 1), (0, 1))
        g = flow.pp_metric(data, box, (9, 5, 5, 5))
        xp = np.linspace(-0.05, 0.05, 9)
        g11, g12, g22 = data.metric_components(xp)
        assert np.allclose(g.values[..., 2, 2], g11[:, None, None, None])
        assert np.allclose(g.values[..., 2, 3], g12[:, None, None, None])
        assert np.allclose(g.values[..., 0, 1], 1.0)
        assert np.allclose(g.values[..., 0, 0], 0.0)
        assert np.all(data.delta(xp) > 0)

    def test_ricci_concentrated_in_null_slot(self):
        # a non-Ricci-flat profile still curves only the dx+ (x) dx+ slot
        data = PPWaveData(
            fl=lambda x: 0.3 * x,
            fn=lambda x: -0.2 * x,
            dfl=lambda x: 0.3 + 0.0 * x,
            dfn=lambda x: -0.2 + 0.0 * x,
            ddfl=lambda x: 0.0 * x,
            ddfn=lambda x: 0.0 * x,
        )
        g = flow.pp_metric(data, ((-0.1, 0.1), (0, 1), (0, 1), (0, 1)),
                           (33, 5, 5, 5))
        ric = sv.ricci4_fd(g)
        off_null = ric.copy()
        off_null[..., 0, 0] = 0.0
        assert sv.interior_max4(ric[..., 0, 0]) > 1e-3
        assert sv.interior_max4(off_null) < 1e-6


class TestPlaneWaveCheck:
    def test_log_solution_is_plane_wave(self):
        data = PPWaveData.log_solution(0.0, -1.0, 0.0, 1.0, c=0.3)
        g = flow.pp_metric(data, ((-0.02, 0.02), (0, 1), (0, 1), (0, 1)),
                           (33, 5, 5, 5))
        report = flow.plane_wave_check(g, tol=1e-5)
        assert report["passed"]
        assert report["nabla_null"] < 1e-10

    def test_non_parallel_direction_rejected(self):
        def gfun(t, x, y, z):
            out = np.zeros(t.shape + (4, 4))
            out[..., 0, 0] = -1.0
            out[..., 1, 1] = (1.0 + t) ** 2
            out[..., 2, 2] = 1.0
            out[..., 3, 3] = 1.0
            return out

        g = Metric4Grid.from_metric_function(((0, 0.5),) * 4, 9, gfun)
        with pytest.raises(NullDirectionNotParallel):
            flow.plane_wave_check(g, null_axis=1, tol=1e-6)

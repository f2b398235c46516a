"""Unit tests for the frame-component algebra of left-invariant Cauchy pairs."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cauchypairs import frame_core as fc
from cauchypairs.errors import CauchyPairsError
from cauchypairs.frame_core import ShapeOperator, StructureData

from conftest import sample_families


def ricci_from_curvature(theta):
    """Oracle: Ricci by contracting the curvature of the Koszul connection.

    R(e_a, e_b) e_c = nabla_a nabla_b e_c - nabla_b nabla_a e_c
                      - nabla_{[e_a, e_b]} e_c, then Ric_cb = <R(e_a,e_b)e_c, e_a>.
    Entirely independent of the closed-form Ricci expression under test.
    """
    d = fc.structure_from_theta(theta)
    gam = np.array(fc.connection_koszul(d).gamma, dtype=float)
    c = np.array(d.bracket_coeffs(), dtype=float)
    riem = (
        np.einsum("ead,dbc->ecab", gam, gam)
        - np.einsum("ebd,dac->ecab", gam, gam)
        - np.einsum("kab,ekc->ecab", c, gam)
    )
    return np.einsum("acab->cb", riem)


class TestShapeOperator:
    def test_rejects_nonsymmetric(self):
        with pytest.raises(CauchyPairsError):
            ShapeOperator([[0, 1, 0], [2, 0, 0], [0, 0, 0]])

    def test_rejects_nonfinite(self):
        with pytest.raises(CauchyPairsError):
            ShapeOperator.from_components(uu=float("nan"))
        with pytest.raises(CauchyPairsError):
            ShapeOperator.from_components(ul=float("inf"))

    def test_rejects_wrong_shape(self):
        with pytest.raises(CauchyPairsError):
            ShapeOperator([[1, 0], [0, 1]])

    def test_immutable(self):
        theta = ShapeOperator.zero()
        with pytest.raises(AttributeError):
            theta.entries = None

    def test_exact_invariants(self):
        theta = ShapeOperator.from_components(
            uu=Fraction(1, 2), ll=2, ln=Fraction(1, 3), nn=-1
        )
        assert theta.is_exact
        assert theta.trace == Fraction(3, 2)
        assert theta.block_trace == 1
        assert theta.block_det == -2 - Fraction(1, 9)
        assert theta.norm_sq == sum(
            x * x for row in theta.entries for x in row
        )

    def test_square_matches_numpy(self, rng):
        m = rng.standard_normal((3, 3))
        m = m + m.T
        theta = ShapeOperator(m.tolist())
        expected = np.array(theta.entries, dtype=float) @ np.array(
            theta.entries, dtype=float
        )
        assert np.allclose(np.array(theta.square(), dtype=float), expected)

    def test_row_is_frame_covector(self):
        theta = ShapeOperator.from_components(uu=1, ul=2, un=3)
        assert theta.row(0) == (1, 2, 3)


class TestStructureData:
    def test_antisymmetry_enforced(self):
        bad = [[[0] * 3 for _ in range(3)] for _ in range(3)]
        bad[0][1][2] = 1  # missing the mirrored -1 entry
        with pytest.raises(CauchyPairsError):
            StructureData(bad)

    def test_structure_from_diagonal_theta(self):
        mu = Fraction(1, 2)
        d = fc.structure_from_theta(ShapeOperator.diagonal(1, mu, 1))
        # d e_l = mu e_l ^ e_u and d e_n = e_n ^ e_u
        assert d[1, 1, 0] == mu and d[1, 0, 1] == -mu
        assert d[2, 2, 0] == 1 and d[2, 0, 2] == -1
        assert d[0, 1, 2] == 0

    def test_jacobi_iff_integrability(self, rng):
        for fam in sample_families(rng, 30):
            d = fc.structure_from_theta(fam.theta)
            assert d.d_squared() == (0, 0, 0) or all(
                abs(float(v)) < 1e-12 for v in d.d_squared()
            )
        # a theta violating integrability yields a non-Jacobi structure
        bad = ShapeOperator.from_components(ul=1, ll=1, nn=-1)
        assert any(v != 0 for v in fc.integrability_residual(bad))
        d = fc.structure_from_theta(bad)
        assert any(v != 0 for v in d.d_squared())


class TestConnection:
    def test_koszul_matches_cauchy_connection(self, rng):
        for fam in sample_families(rng, 100):
            d = fc.structure_from_theta(fam.theta)
            koszul = fc.connection_koszul(d)
            direct = fc.connection_cauchy(fam.theta)
            assert koszul.max_abs_diff(direct) < 1e-12

    def test_koszul_matches_exactly_in_rational_mode(self):
        theta = ShapeOperator.diagonal(1, Fraction(1, 2), 1)
        d = fc.structure_from_theta(theta)
        assert fc.connection_koszul(d) == fc.connection_cauchy(theta)

    def test_metric_compatibility(self, rng):
        for fam in sample_families(rng, 30):
            conn = fc.connection_cauchy(fam.theta)
            assert conn.metric_compat_residual() < 1e-12

    def test_koszul_rejects_non_jacobi_structure(self):
        bad = ShapeOperator.from_components(ul=1, ll=1, nn=-1)
        d = fc.structure_from_theta(bad)
        with pytest.raises(CauchyPairsError):
            fc.connection_koszul(d)


class TestNablaTheta:
    def test_closed_form_matches_product_rule_oracle(self, rng):
        for fam in sample_families(rng, 60):
            closed = np.array(fc.nabla_theta(fam.theta), dtype=float)
            oracle = np.array(fc.nabla_theta_oracle(fam.theta), dtype=float)
            assert np.abs(closed - oracle).max() < 1e-12

    def test_divergence_is_trace_of_nabla(self, rng):
        for fam in sample_families(rng, 60):
            nt = np.array(fc.nabla_theta(fam.theta), dtype=float)
            contracted = np.einsum("aac->c", nt)
            div = np.array(fc.divergence_theta(fam.theta), dtype=float)
            assert np.abs(contracted - div).max() < 1e-12

    def test_exact_divergence(self):
        theta = ShapeOperator.diagonal(1, Fraction(1, 2), 1)
        div = fc.divergence_theta(theta)
        assert div == (theta.norm_sq - theta.trace * theta.uu, 0, 0)


class TestCurvature:
    def test_ricci_matches_curvature_contraction(self, rng):
        for fam in sample_families(rng, 60):
            ric, asym = fc.ricci_frame(fam.theta)
            assert asym < 1e-12
            oracle = ricci_from_curvature(fam.theta)
            assert np.abs(np.array(ric, dtype=float) - oracle).max() < 1e-10

    def test_ricci_trace_is_scalar_curvature(self, rng):
        for fam in sample_families(rng, 60):
            ric, _ = fc.ricci_frame(fam.theta)
            trace = sum(ric[a][a] for a in range(3))
            assert abs(float(trace - fc.scalar_curvature(fam.theta))) < 1e-12

    def test_exact_scalar_curvature_family(self):
        for mu in (Fraction(-1, 2), Fraction(1, 2), Fraction(1, 1)):
            theta = ShapeOperator.diagonal(1, mu, 1)
            assert fc.scalar_curvature(theta) == -2 * (1 + mu + mu * mu)
            assert theta.norm_sq == 2 + mu * mu
            assert fc.hamiltonian_residual(theta) == 2 * mu * (1 - mu)


class TestConstraints:
    def test_hamiltonian_is_twice_constrained_residual(self, rng):
        for fam in sample_families(rng, 60):
            ham = fc.hamiltonian_residual(fam.theta)
            crf = fc.constrained_ricci_flat_residual(fam.theta)
            assert abs(float(ham - 2 * crf)) < 1e-12

    def test_hamiltonian_iff_momentum(self, rng):
        # on admissible pairs the two constraints hold simultaneously
        for fam in sample_families(rng, 200):
            ham_zero = fc.is_zero(fc.hamiltonian_residual(fam.theta), 1e-9)
            mom_zero = all(
                fc.is_zero(v, 1e-9) for v in fc.momentum_residual(fam.theta)
            )
            assert ham_zero == mom_zero

    def test_zero_theta_flat(self):
        theta = ShapeOperator.zero()
        assert fc.scalar_curvature(theta) == 0
        assert fc.hamiltonian_residual(theta) == 0
        assert fc.momentum_residual(theta) == (0, 0, 0)
        ric, asym = fc.ricci_frame(theta)
        assert asym == 0 and all(v == 0 for row in ric for v in row)


class TestCodazzi:
    def test_predicate_agrees_with_closed_form_conditions(self, rng):
        for fam in sample_families(rng, 200):
            assert fc.codazzi_predicate(fam.theta) == \
                fc.codazzi_predicate_conditions(fam.theta)

    def test_antisymmetry_identity(self, rng):
        for fam in sample_families(rng, 100):
            assert fc.codazzi_antisymmetry_residual(fam.theta) < 1e-12

    def test_known_codazzi_examples(self):
        assert fc.codazzi_predicate(ShapeOperator.diagonal(2, 2, 2))
        assert fc.codazzi_predicate(ShapeOperator.diagonal(3, 3, 0))
        assert fc.codazzi_predicate(ShapeOperator.diagonal(5, 0, 0))
        assert not fc.codazzi_predicate(
            ShapeOperator.from_components(ll=1, nn=-1)
        )
        assert not fc.codazzi_predicate(ShapeOperator.diagonal(0, 1, 1))


finite_entry = st.floats(
    min_value=-10, max_value=10, allow_nan=False, allow_infinity=False
)


class TestProperties:
    @given(uu=finite_entry, ul=finite_entry, un=finite_entry,
           ll=finite_entry, ln=finite_entry, nn=finite_entry)
    @settings(max_examples=200, deadline=None)
    def test_jacobi_iff_integrability_any_theta(self, uu, ul, un, ll, ln, nn):
        theta = ShapeOperator.from_components(uu, ul, un, ll, ln, nn)
        d = fc.structure_from_theta(theta)
        jac = [float(v) for v in d.d_squared()]
        i1, i2 = (float(v) for v in fc.integrability_residual(theta))
        # d o d vanishes exactly when the integrability bilinears do:
        # the Jacobi defect components are (0, -i1, -i2)
        scale = max(1.0, abs(i1), abs(i2))
        assert abs(jac[0]) < 1e-9 * scale
        assert abs(jac[1] + i1) < 1e-9 * scale
        assert abs(jac[2] + i2) < 1e-9 * scale

    @given(uu=finite_entry, ll=finite_entry, nn=finite_entry)
    @settings(max_examples=200, deadline=None)
    def test_codazzi_implies_constrained_rf(self, uu, ll, nn):
        theta = ShapeOperator.diagonal(uu, ll, nn)
        if fc.codazzi_predicate(theta, 1e-12):
            assert fc.is_zero(
                fc.constrained_ricci_flat_residual(theta), 1e-7
            )

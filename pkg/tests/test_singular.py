"""Singular loci: discriminant tracing, multiplicity, the normal-form
catalog, and weight classification."""

import numpy as np
import pytest

from hexweb.chern import curvature, gamma_depressed
from hexweb.cubic import (PolyCoeffField, discriminant, discriminant_of_coeffs,
                          discriminant_scale)
from hexweb.frobenius import solution_potential
from hexweb.jets import JetError, PolyExpr
from hexweb.singular import (classify_singularity, f_ode_residual,
                             normal_form_field, root_multiplicity, solve_F,
                             symmetry_losing_web, trace_discriminant)
from hexweb.webgeo import symmetry_residual

FIELD_A = solution_potential("A").characteristic_field()
FIELD_B = solution_potential("B").characteristic_field()


class TestTraceDiscriminant:
    def test_solution_a_trace_is_the_cuspidal_cubic(self):
        window = ((-1.0, 1.0), (-0.2, 1.0))
        trace = trace_discriminant(FIELD_A, window)
        assert not trace.empty
        pts = trace.all_points()
        assert len(pts) > 50
        res = np.abs(32 * pts[:, 1] ** 3 - 27 * pts[:, 0] ** 2)
        assert np.max(res) < 1e-6
        for x, y in pts:
            co = FIELD_A.coeffs(x, y)
            assert abs(discriminant_of_coeffs(*co)) <= 1e-8 * \
                discriminant_scale(co)

    def test_solution_b_trace_is_empty(self):
        trace = trace_discriminant(FIELD_B, ((-1.0, 1.0), (-1.0, 1.0)))
        assert trace.empty

    def test_circle_discriminant(self):
        # slope cubic m^3 + A m with A = x^2 + y^2 - 1/4: D = -4A^3 changes
        # sign exactly on the circle of radius 1/2
        x, y = PolyExpr.var(0, 2), PolyExpr.var(1, 2)
        A = x * x + y * y + PolyExpr.const(-0.25, 2)
        f = PolyCoeffField(PolyExpr.const(-1, 2), PolyExpr.zero(),
                           PolyExpr.zero() - A, PolyExpr.zero())
        trace = trace_discriminant(f, ((-1.0, 1.0), (-1.0, 1.0)))
        pts = trace.all_points()
        assert len(pts) > 30
        # D = -4A^3 is cubic in the distance to the circle, so |D| at the
        # 1e-8 scale pins the radius only to ~1e-3
        assert np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - 0.5)) < 2e-3
        for x0, y0 in pts:
            co = f.coeffs(x0, y0)
            assert abs(discriminant_of_coeffs(*co)) <= 1e-8 * \
                discriminant_scale(co)


class TestRootMultiplicity:
    def test_regular_point(self):
        assert root_multiplicity(FIELD_A, (0.1, 1.0)) == "1+1+1"

    def test_double_root_on_discriminant(self):
        # 32y^3 = 27x^2 away from the origin: one double root
        x = 0.4
        y = (27 * x * x / 32) ** (1 / 3)
        assert root_multiplicity(FIELD_A, (x, y)) == "2+1"

    def test_triple_root_at_cusp(self):
        assert root_multiplicity(FIELD_A, (0.0, 0.0)) == "3"

    def test_stable_under_tiny_perturbations(self):
        # decisions at the tolerance boundary cannot flip at the 1e-14 level
        x = 0.4
        y = (27 * x * x / 32) ** (1 / 3)
        ref = root_multiplicity(FIELD_A, (x, y))
        for dx in (-1e-14, 1e-14):
            assert root_multiplicity(FIELD_A, (x + dx, y)) == ref


class TestFOde:
    @pytest.mark.parametrize("m0", [0, 1, 2])
    def test_solution_properties(self, m0):
        fs = solve_F(m0, t_max=1.0)
        assert fs(0.0) == pytest.approx(0.0, abs=1e-12)
        h = 1e-6
        slope = (fs(h) - fs(0.0)) / h
        assert slope == pytest.approx(2 * (m0 + 3) / (3 * (m0 + 1)), rel=1e-4)
        # the quasilinear factor vanishes before t = 1: finite domain, flagged
        assert not fs.bracket_ok
        assert 0.2 < fs.t_max < 0.5
        ts = np.linspace(0.01, 0.9 * fs.t_max, 25)
        assert f_ode_residual(fs, ts) < 1e-8


class TestNormalForms:
    @pytest.mark.parametrize("fid,m0,samples", [
        (1, 0, [(0.3, 0.5), (-0.4, 0.8)]),
        (1, 2, [(0.3, 0.5), (-0.4, 0.8)]),
        (2, 0, [(0.3, 0.5), (-0.4, 0.8)]),
        (3, 0, [(0.3, 0.5), (-0.4, 0.8)]),
        (4, 0, [(0.3, 0.8), (-0.2, 0.9)]),
        (5, 0, [(0.1, 0.8), (-0.2, 0.6)]),
        (6, 0, [(0.05, 0.8), (0.1, 0.6)]),
        (6, 1, [(0.05, 0.8), (0.08, 0.6)]),
        (6, 2, [(0.04, 0.8), (0.06, 0.9)]),
    ])
    def test_flat_with_printed_symmetry(self, fid, m0, samples):
        nf = normal_form_field(fid, m0)
        assert nf.id == fid
        for pt in samples:
            if abs(discriminant(nf.field, pt)) < 1e-8:
                continue
            assert abs(curvature(nf.field, pt, route="cubic").K) < 1e-7
        assert symmetry_residual(nf.field, nf.weights, samples, a=0.05) < 1e-7

    def test_form2_connection_vanishes(self):
        nf = normal_form_field(2)
        for pt in [(0.3, 0.4), (-0.5, 0.7), (1.1, -0.2)]:
            assert gamma_depressed(nf.field, pt).norm() < 1e-12

    def test_form6_domain_guard(self):
        nf = normal_form_field(6, 0)
        with pytest.raises((JetError, ValueError)):
            nf.field.coeffs(0.1, -0.5)  # Re y <= 0 is outside the germ

    def test_unknown_id_rejected(self):
        with pytest.raises(ValueError):
            normal_form_field(7)


class TestClassify:
    def test_matches_parameter_free_catalog_forms(self):
        for fid, weights in ((2, (2, 3)), (3, (1, 2)), (4, (1, 3))):
            nf = normal_form_field(fid)
            cls = classify_singularity(nf.field)
            assert cls.status == "matched"
            assert cls.matched_id == fid
            assert cls.weights == weights
            assert cls.residual < 1e-6

    def test_characteristic_cusp_is_weights_only(self):
        # weights [3:2] coincide with a parametric family entry, so the
        # match is reported as weights-only rather than a catalog id
        cls = classify_singularity(FIELD_A)
        assert cls.weights == (3, 2)
        assert cls.status == "weights-only"
        assert cls.matched_id is None

    def test_non_quasihomogeneous_germ_unclassified(self):
        x, y = PolyExpr.var(0, 2), PolyExpr.var(1, 2)
        f = PolyCoeffField(PolyExpr.const(1, 2), PolyExpr.zero(),
                           x + y * y, PolyExpr.const(1, 2))
        cls = classify_singularity(f)
        assert cls.status == "unclassified"
        assert cls.matched_id is None

    def test_flat_fixture_without_symmetry_unclassified(self):
        fix = symmetry_losing_web()
        cls = classify_singularity(
            fix, samples=[(0.31, 0.22), (0.12, 0.27), (0.27, 0.33)])
        assert cls.status == "unclassified"

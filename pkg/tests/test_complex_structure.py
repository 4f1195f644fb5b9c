"""Almost-complex structure on the bundle: J̃, φ, the conformal identity."""
import math

import numpy as np
import pytest

from normalbundle.complex_structure import (alpha_form, alpha_wedge_phi,
                                            apply_jtilde, dphi,
                                            fundamental_form,
                                            hermitian_constant_K,
                                            hermitian_shape_residual,
                                            jtilde_chart_matrix,
                                            jtilde_coeff_residuals,
                                            jtilde_coeffs, kahler_check,
                                            lck_check, nijenhuis_p0q0,
                                            require_totally_real,
                                            tangent_normal_rotations)
from normalbundle.errors import StructureError
from normalbundle.fd_oracle import (coordinate_components, fd4,
                                    fd_exterior_derivative, lift_components,
                                    total_coordinates, total_metric_components)
from normalbundle.pq_metric import (NormalPoint, PQParams, TotalTangent,
                                    metric_eval, omega)

PQ_GRID = (PQParams.sasaki(), PQParams(1.0, 1.0), PQParams(-1.0, 2.0),
           PQParams(2.0, 3.0))


def _random_tangents(rng, d, dp, n=3):
    return [TotalTangent(rng.standard_normal(d), rng.standard_normal(dp))
            for _ in range(n)]


# -- coefficients ----------------------------------------------------------
def test_coefficient_residuals_vanish():
    rng = np.random.default_rng(7)
    for pq in PQ_GRID:
        for _ in range(20):
            t = rng.standard_normal(3) * rng.uniform(0, 3)
            assert jtilde_coeff_residuals(pq, t) < 1e-12
        assert jtilde_coeff_residuals(pq, np.zeros(3)) < 1e-15
    # extreme parameters: equation terms reach ~1e5, so only roundoff-
    # relative accuracy is meaningful there
    for pq in (PQParams(4.0, 0.0), PQParams(-3.0, 8.0)):
        for _ in range(20):
            t = rng.standard_normal(3) * rng.uniform(0, 1.0)
            assert jtilde_coeff_residuals(pq, t) < 1e-12


def test_coefficients_at_origin():
    # s = 0: a = c = 1, b = q/2, d = -q/2 — no singularity anywhere
    co = jtilde_coeffs(PQParams(1.0, 3.0), np.zeros(2))
    assert (co.a, co.c) == (1.0, 1.0)
    assert co.b == 1.5 and co.d == -1.5
    co0 = jtilde_coeffs(PQParams.sasaki(), np.array([0.4, 0.2]))
    assert (co0.a, co0.b, co0.c, co0.d) == (1.0, 0.0, 1.0, 0.0)


# -- the structure itself --------------------------------------------------
def test_jtilde_squares_to_minus_identity(presets, samples):
    for name in ("lagrangian_rk_in_r2k", "lagrangian_graph_r2_in_r4"):
        sub = presets[name]
        U, T = samples(sub, 4)
        m = sub.dim + sub.codim
        for pq in PQ_GRID:
            for k in range(4):
                x = total_coordinates(U[k], T[k])
                J = jtilde_chart_matrix(pq, sub, x)
                assert np.max(np.abs(J @ J + np.eye(m))) < 1e-11, (name, pq)


def test_jtilde_preserves_metric(presets, samples):
    for name in ("lagrangian_rk_in_r2k", "lagrangian_graph_r2_in_r4"):
        sub = presets[name]
        U, T = samples(sub, 4)
        for pq in PQ_GRID:
            for k in range(4):
                x = total_coordinates(U[k], T[k])
                J = jtilde_chart_matrix(pq, sub, x)
                G = total_metric_components(pq, sub, x)
                assert np.max(np.abs(J.T @ G @ J - G)) < 1e-11, (name, pq)


def test_apply_jtilde_matches_chart_matrix(lagrangian_graph, samples):
    sub = lagrangian_graph
    U, T = samples(sub, 2)
    rng = np.random.default_rng(17)
    pq = PQParams(2.0, 3.0)
    for k in range(2):
        x = total_coordinates(U[k], T[k])
        point = NormalPoint(sub, U[k], T[k])
        geom = point.geometry
        J = jtilde_chart_matrix(pq, sub, x)
        for vec in rng.standard_normal((4, 4)):
            lifted = lift_components(geom, T[k], vec)
            out = apply_jtilde(pq, point, lifted)
            expect = lift_components(geom, T[k], J @ vec)
            assert np.max(np.abs((out + (-1.0) * expect).horizontal)) < 1e-12
            assert np.max(np.abs((out + (-1.0) * expect).vertical)) < 1e-12


def test_rotation_components_are_inverse(presets):
    sub = presets["lagrangian_graph_r2_in_r4"]
    u = np.array([0.3, -0.2])
    P, Q = tangent_normal_rotations(sub, u)
    # J² = −1 transported to components: P∘Q = −id on horizontal parts
    geom_free = P @ Q
    assert np.max(np.abs(geom_free + np.eye(2))) < 1e-12


# -- fundamental form ------------------------------------------------------
def test_fundamental_form_is_metric_with_jtilde(lagrangian_graph, samples):
    sub = lagrangian_graph
    U, T = samples(sub, 3)
    rng = np.random.default_rng(23)
    for pq in PQ_GRID:
        for k in range(3):
            point = NormalPoint(sub, U[k], T[k])
            A, B = _random_tangents(rng, 2, 2, 2)
            val = fundamental_form(pq, point, A, B)
            ref = metric_eval(pq, point, A, apply_jtilde(pq, point, B))
            assert abs(val - ref) < 1e-12
            assert abs(val + fundamental_form(pq, point, B, A)) < 1e-12


def test_fundamental_form_chart_identity(lagrangian_graph, samples):
    sub = lagrangian_graph
    U, T = samples(sub, 2)
    pq = PQParams(-1.0, 2.0)
    for k in range(2):
        x = total_coordinates(U[k], T[k])
        G = total_metric_components(pq, sub, x)
        J = jtilde_chart_matrix(pq, sub, x)
        Phi = G @ J
        assert np.max(np.abs(Phi + Phi.T)) < 1e-11
        point = NormalPoint(sub, U[k], T[k])
        geom = point.geometry
        for a in range(4):
            for b in range(4):
                A = lift_components(geom, T[k], np.eye(4)[a])
                B = lift_components(geom, T[k], np.eye(4)[b])
                assert abs(fundamental_form(pq, point, A, B)
                           - Phi[a, b]) < 1e-11


def test_pure_slots_pair_to_zero(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 1)
    point = NormalPoint(lagrangian_graph, U[0], T[0])
    pq = PQParams(1.0, 1.0)
    H1 = TotalTangent(np.array([1.0, 0.2]), np.zeros(2))
    H2 = TotalTangent(np.array([-0.4, 1.0]), np.zeros(2))
    V1 = TotalTangent(np.zeros(2), np.array([0.6, -1.0]))
    V2 = TotalTangent(np.zeros(2), np.array([1.0, 0.5]))
    assert fundamental_form(pq, point, H1, H2) == 0.0
    assert fundamental_form(pq, point, V1, V2) == 0.0


# -- Lee form and the conformal identity -----------------------------------
def test_alpha_form_closed_expression(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 2)
    rng = np.random.default_rng(31)
    for pq in (PQParams(1.0, 1.0), PQParams(2.0, 3.0)):
        for k in range(2):
            t = T[k]
            point = NormalPoint(lagrangian_graph, U[k], t)
            s = float(t @ t)
            kq = pq.q / (1.0 + math.sqrt(1.0 + pq.q * s))
            scale = pq.p * omega(t) + kq
            xi = rng.standard_normal(2)
            vert = TotalTangent(np.zeros(2), xi)
            horiz = TotalTangent(rng.standard_normal(2), np.zeros(2))
            assert abs(alpha_form(pq, point, vert)
                       + scale * float(xi @ t)) < 1e-13
            assert alpha_form(pq, point, horiz) == 0.0


def test_dphi_equals_alpha_wedge_phi(lagrangian_graph, samples):
    sub = lagrangian_graph
    U, T = samples(sub, 3)
    rng = np.random.default_rng(41)
    for pq in PQ_GRID:
        for k in range(3):
            point = NormalPoint(sub, U[k], T[k])
            A, B, C = _random_tangents(rng, 2, 2)
            lhs = dphi(pq, point, A, B, C)
            rhs = alpha_wedge_phi(pq, point, A, B, C)
            assert abs(lhs - rhs) < 1e-9, pq


def test_dphi_vanishes_for_sasaki(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 2)
    rng = np.random.default_rng(43)
    sasaki = PQParams.sasaki()
    for k in range(2):
        point = NormalPoint(lagrangian_graph, U[k], T[k])
        for _ in range(4):
            A, B, C = _random_tangents(rng, 2, 2)
            assert abs(dphi(sasaki, point, A, B, C)) < 1e-9


def test_dphi_against_fd_exterior_derivative(lagrangian_graph, samples):
    sub = lagrangian_graph
    U, T = samples(sub, 2)
    for pq in (PQParams(1.0, 1.0), PQParams(2.0, 3.0)):
        for k in range(2):
            x = total_coordinates(U[k], T[k])
            point = NormalPoint(sub, U[k], T[k])
            geom = point.geometry

            def phi_matrix(y):
                G = total_metric_components(pq, sub, y)
                return G @ jtilde_chart_matrix(pq, sub, y)

            dW = fd_exterior_derivative(phi_matrix, x)
            for a in range(4):
                for b in range(a + 1, 4):
                    for c in range(b + 1, 4):
                        closed = dphi(pq, point,
                                      lift_components(geom, T[k],
                                                      np.eye(4)[a]),
                                      lift_components(geom, T[k],
                                                      np.eye(4)[b]),
                                      lift_components(geom, T[k],
                                                      np.eye(4)[c]))
                        assert abs(closed - dW[a, b, c]) < 1e-4


def test_dphi_fd_confirms_sasaki_closedness(lagrangian_graph, samples):
    """The p=q=0 fundamental form is closed by the oracle too, not just
    by the closed-form expression."""
    sub = lagrangian_graph
    U, T = samples(sub, 2)
    sasaki = PQParams.sasaki()
    for k in range(2):
        x = total_coordinates(U[k], T[k])

        def phi_matrix(y):
            G = total_metric_components(sasaki, sub, y)
            return G @ jtilde_chart_matrix(sasaki, sub, y)

        dW = fd_exterior_derivative(phi_matrix, x)
        assert np.max(np.abs(dW)) < 1e-9


def test_lck_check_and_negative_control(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 4)
    pq = PQParams(1.0, 1.0)
    report = lck_check(pq, lagrangian_graph, samples=(U, T))
    assert report.passed and report.max_abs_residual < 1e-9
    assert report.n_samples == 4
    skewed = lck_check(pq, lagrangian_graph, samples=(U, T),
                       alpha_scale=1.02)
    assert not skewed.passed
    assert skewed.max_abs_residual > 1e-4


def test_lck_check_requires_complex_structure(presets):
    with pytest.raises(StructureError, match="no ambient complex structure"):
        lck_check(PQParams(1.0, 1.0), presets["sphere_s2_in_r3"])


# -- integrability ---------------------------------------------------------
def test_nijenhuis_vanishes_on_flat_lagrangian(presets, samples):
    sub = presets["lagrangian_rk_in_r2k"]
    U, T = samples(sub, 3)
    rng = np.random.default_rng(53)
    for k in range(3):
        point = NormalPoint(sub, U[k], T[k])
        A, B, _ = _random_tangents(rng, 2, 2)
        assert nijenhuis_p0q0(point, A, B).max_abs() < 1e-10


def test_nijenhuis_detects_curvature(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 3)
    rng = np.random.default_rng(59)
    biggest = 0.0
    for k in range(3):
        point = NormalPoint(lagrangian_graph, U[k], T[k])
        A, B, _ = _random_tangents(rng, 2, 2)
        biggest = max(biggest, nijenhuis_p0q0(point, A, B).max_abs())
    assert biggest > 1e-3


def test_nijenhuis_closed_form_matches_fd(lagrangian_graph, samples):
    sub = lagrangian_graph
    U, T = samples(sub, 1)
    sasaki = PQParams.sasaki()
    x = total_coordinates(U[0], T[0])
    point = NormalPoint(sub, U[0], T[0])
    geom = point.geometry
    J = jtilde_chart_matrix(sasaki, sub, x)
    dJ = [fd4(lambda y: jtilde_chart_matrix(sasaki, sub, y), x, kk, 1e-3)
          for kk in range(4)]
    for a in range(4):
        for b in range(a + 1, 4):
            Ua, Ub = J[:, a], J[:, b]
            br = sum(Ua[e] * dJ[e][:, b] - Ub[e] * dJ[e][:, a]
                     for e in range(4))
            fd_val = br - J @ dJ[a][:, b] + J @ dJ[b][:, a]
            closed = coordinate_components(
                geom, T[0], nijenhuis_p0q0(
                    point, lift_components(geom, T[0], np.eye(4)[a]),
                    lift_components(geom, T[0], np.eye(4)[b])))
            assert np.max(np.abs(closed - fd_val)) < 1e-9


def test_kahler_verdicts(presets):
    flat = presets["lagrangian_rk_in_r2k"]
    curved = presets["lagrangian_graph_r2_in_r4"]
    rep = kahler_check(PQParams.sasaki(), flat)
    assert rep.kahler
    assert rep.max_normal_curvature < 1e-7
    rep = kahler_check(PQParams(1.0, 1.0), flat)
    assert not rep.kahler          # dφ ≠ 0 away from Sasaki
    rep = kahler_check(PQParams(1.0, 0.0), flat)
    assert not rep.kahler and not rep.sasaki_params
    assert rep.max_normal_curvature == 0.0   # flat, yet still not Kähler
    rep = kahler_check(PQParams.sasaki(), curved)
    assert not rep.kahler          # integrability fails: R⊥ ≠ 0
    assert rep.max_normal_curvature > 0.5


# -- scalar invariants -----------------------------------------------------
def test_hermitian_constant_exact_values():
    assert hermitian_constant_K(PQParams.sasaki()) == 0.0
    assert hermitian_constant_K(PQParams(0.0, 3.0)) == 0.5
    assert hermitian_constant_K(PQParams(1.0, 0.0)) == 1.0


def test_hermitian_constant_formula():
    for p, q in ((2.0, 3.0), (-1.0, 2.0), (0.5, 0.0)):
        r = math.sqrt(1.0 + q)
        expect = 2.0 ** (p - 1) * (p + p * r + 2 * q) / (r * (1.0 + r))
        assert abs(hermitian_constant_K(PQParams(p, q)) - expect) < 1e-15


def test_hermitian_shape_report(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 4)
    rep = hermitian_shape_residual(lagrangian_graph, samples=(U, T))
    assert np.isfinite(rep.phi0)
    assert 0.0 <= rep.rms_residual <= rep.max_residual
    assert rep.n_samples == 4


# -- guards ----------------------------------------------------------------
def test_totally_real_guards(presets):
    with pytest.raises(StructureError, match="not totally real"):
        require_totally_real(presets["graph_surface_r2_in_r4"],
                             np.array([0.3, 0.2]))
    with pytest.raises(StructureError, match="no ambient complex structure"):
        require_totally_real(presets["sphere_s2_in_r3"])
    J = require_totally_real(presets["lagrangian_graph_r2_in_r4"],
                             np.array([0.1, -0.3]))
    assert J.shape == (4, 4)

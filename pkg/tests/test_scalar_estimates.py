"""Fiber-profile evaluation, positivity certificates, (p,q) search."""
import numpy as np
import pytest

from normalbundle.errors import CertificateError, InvalidInput, NotFound
from normalbundle.scalar_estimates import (DEFAULT_P_GRID, DEFAULT_Q_GRID,
                                           PhiSpec, certificate, find_pq,
                                           find_pq_for_profile, phi_eval,
                                           phi_eval_reference,
                                           scalar_bound_pipeline)

try:
    from hypothesis import given, settings, strategies as st
    HAVE_HYPOTHESIS = True
except ImportError:          # pragma: no cover
    HAVE_HYPOTHESIS = False


def test_phi_eval_matches_coefficient_reference():
    rng = np.random.default_rng(11)
    for _ in range(200):
        spec = PhiSpec(rng.uniform(-6, 6), rng.uniform(0, 12),
                       int(rng.integers(2, 6)), rng.uniform(-5, 5),
                       rng.uniform(0, 5))
        t = rng.uniform(0, 100)
        a = phi_eval(spec, t)
        b = phi_eval_reference(spec, t)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


if HAVE_HYPOTHESIS:
    @settings(max_examples=200, deadline=None)
    @given(p=st.floats(-6, 6), q=st.floats(0, 12),
           codim=st.integers(2, 6), c1=st.floats(-5, 5),
           c2=st.floats(0, 5), t=st.floats(0, 64))
    def test_phi_eval_reference_property(p, q, codim, c1, c2, t):
        spec = PhiSpec(p, q, codim, c1, c2)
        a = phi_eval(spec, t)
        b = phi_eval_reference(spec, t)
        assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_phi_eval_vectorized():
    spec = PhiSpec(1.5, 2.0, 3, -0.5, 0.25)
    ts = np.array([0.0, 0.3, 1.0, 7.5, 300.0])
    vec = phi_eval(spec, ts)
    assert vec.shape == ts.shape
    for k, t in enumerate(ts):
        assert abs(vec[k] - phi_eval(spec, float(t))) < 1e-14


def test_alpha_leading_and_constant_exact():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = float(rng.uniform(-5, 5))
        q = float(rng.uniform(0, 10))
        dp = int(rng.integers(2, 8))
        alpha = PhiSpec(p, q, dp, 0.0, 0.0).alpha()
        assert alpha[0] == (dp - 2) * q**2
        assert alpha[3] == dp * (2.0 * p + q)


def test_alpha_worked_example():
    # p=1, q=0, codim 3: cubic reduces to t + 6
    assert PhiSpec(1.0, 0.0, 3, 0.0, 0.0).alpha() == (0.0, 0.0, 1.0, 6.0)


def test_certificate_positive_is_sound():
    spec = PhiSpec(2.75, 0.0, 2, -10.0, 0.0)
    cert = certificate(spec)
    assert cert.strictly_positive
    assert cert.refined_min > 0.0
    assert cert.refined_min <= cert.grid_min + 1e-15
    assert cert.tail_sign == 1
    rng = np.random.default_rng(3)
    ts = np.concatenate([[0.0], rng.uniform(0.0, cert.t_max, 500),
                         10.0 ** rng.uniform(-6, 6, 200)])
    assert np.all(phi_eval(spec, ts) > 0.0)


def test_certificate_boundary_case_rejected():
    # constant term c1 + d'(2p+q) hits exactly zero at t=0: not strict
    cert = certificate(PhiSpec(2.5, 0.0, 2, -10.0, 0.0))
    assert not cert.strictly_positive
    assert abs(cert.refined_min) < 1e-12


def test_certificate_negative_tail():
    # p=q=0, codim 2 kills the cubic entirely: Φ(t) = c1 − c2 t
    cert = certificate(PhiSpec(0.0, 0.0, 2, 5.0, 1.0))
    assert not cert.strictly_positive
    assert cert.tail_sign == -1
    assert cert.tail_degree == 1.0
    assert cert.grid_min < -0.9e6


def test_certificate_identically_zero_profile():
    cert = certificate(PhiSpec(0.0, 0.0, 2, 0.0, 0.0))
    assert not cert.strictly_positive
    assert cert.tail_sign == 0


def test_find_pq_frozen_plane_case():
    res = find_pq(2, 2, 0.0, 10.0)
    assert (res.params.p, res.params.q) == (2.75, 0.0)
    assert res.certificate.strictly_positive
    assert abs(res.certificate.refined_min - 1.0) < 1e-9
    # q=0 row is scanned first; the win happens on the first q value
    assert res.n_tested == DEFAULT_P_GRID.index(2.75) + 1


def test_find_pq_frozen_curve_case():
    res = find_pq(1, 2, 0.0, 0.0)
    assert (res.params.p, res.params.q) == (0.25, 0.0)
    assert res.certificate.strictly_positive


def test_find_pq_input_validation():
    with pytest.raises(InvalidInput, match="fiber dimension >= 2"):
        find_pq(2, 1, 0.0, 0.0)
    with pytest.raises(InvalidInput, match="curvature magnitude"):
        find_pq(2, 2, -1.0, 0.0)
    with pytest.raises(InvalidInput, match="target bound"):
        find_pq(2, 2, 0.0, float("nan"))


def test_find_pq_exhausted_lattice():
    with pytest.raises(NotFound, match="no \\(p, q\\)"):
        find_pq(2, 2, 0.0, 1e9)


def test_find_pq_custom_grid():
    res = find_pq(2, 2, 0.0, 10.0, p_grid=(3.0,), q_grid=(0.0, 1.0))
    assert (res.params.p, res.params.q) == (3.0, 0.0)
    with pytest.raises(NotFound, match="1x1 lattice"):
        find_pq(2, 2, 0.0, 10.0, p_grid=(1.0,), q_grid=(0.0,))


def test_pipeline_flat_plane_bound_ten(presets):
    res = scalar_bound_pipeline(presets["plane_r2_in_r4"], 10.0, count=16)
    assert (res.params.p, res.params.q) == (2.75, 0.0)
    assert res.C_measured == 0.0
    assert res.min_scalar_observed > 10.0
    assert res.n_points_checked == 16 * 4
    assert res.certificate.strictly_positive


def test_pipeline_helix_positive(presets):
    res = scalar_bound_pipeline(presets["helix_r1_in_r3"], 0.0, count=16)
    assert (res.params.p, res.params.q) == (0.25, 0.0)
    assert res.min_scalar_observed > 0.0
    # one-dimensional base: no curvature pairs, measured magnitude is zero
    assert res.C_measured == 0.0
    assert res.certificate.strictly_positive


def test_pipeline_rejects_rank_one_fiber(presets):
    with pytest.raises(InvalidInput, match="fiber dimension >= 2"):
        scalar_bound_pipeline(presets["curve_in_r2"], 0.0)


def test_pipeline_rejects_understated_magnitude(lagrangian_graph):
    with pytest.raises(CertificateError, match="exceeds the supplied bound"):
        scalar_bound_pipeline(lagrangian_graph, 0.0, count=8, C=0.01)


def test_default_grids_shape():
    assert len(DEFAULT_P_GRID) == 65
    assert len(DEFAULT_Q_GRID) == 12
    assert DEFAULT_Q_GRID[0] == 0.0
    assert DEFAULT_P_GRID[0] == -8.0 and DEFAULT_P_GRID[-1] == 8.0


def test_phi_at_origin_is_offset_plus_constant_term():
    # Φ(0) = c1 + d'(2p + q): only the constant polynomial coefficient survives
    rng = np.random.default_rng(23)
    for _ in range(50):
        spec = PhiSpec(rng.uniform(-6, 6), rng.uniform(0, 12),
                       int(rng.integers(2, 6)), rng.uniform(-5, 5),
                       rng.uniform(0, 5))
        want = spec.c1 + spec.codim * (2 * spec.p + spec.q)
        assert abs(phi_eval(spec, 0.0) - want) < 1e-12
    assert phi_eval(PhiSpec(1.0, 1.0, 2, 0.0, 0.0), 0.0) == 6.0


def test_phi_frozen_value_at_unit_argument():
    """Hand-checked: p=q=1, d'=2, offsets 0 → Φ(1) = 12/8 = 3/2."""
    spec = PhiSpec(1.0, 1.0, 2, 0.0, 0.0)
    assert phi_eval(spec, 1.0) == pytest.approx(1.5, abs=1e-14)
    assert phi_eval_reference(spec, 1.0) == pytest.approx(1.5, abs=1e-14)


def test_profile_search_explicit_lattice():
    p_grid = tuple(np.arange(-4.0, 4.25, 0.25))
    q_grid = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0)
    res = find_pq_for_profile(-1.0, 1.0, 2, p_grid=p_grid, q_grid=q_grid)
    assert (res.params.p, res.params.q) == (2.0, 0.0)
    # scan order: q outer ascending, p inner ascending
    assert res.n_tested == p_grid.index(2.0) + 1 == 25
    assert res.certificate.strictly_positive
    assert res.certificate.refined_min == pytest.approx(6.75, abs=1e-9)
    assert res.certificate.tail_sign == 1


def test_profile_search_default_lattice():
    res = find_pq_for_profile(-1.0, 1.0, 2)
    assert (res.params.p, res.params.q) == (2.0, 0.0)
    assert res.n_tested == DEFAULT_P_GRID.index(2.0) + 1 == 41


def test_profile_search_positive_offset_still_scans():
    # c1 > 0 does not mean the first lattice point wins: at p = -8 the
    # constant term d'(2p+q) pulls Φ(0) far below zero
    res = find_pq_for_profile(2.0, 0.0, 3)
    assert (res.params.p, res.params.q) == (-0.25, 0.0)
    assert res.n_tested == 32


def test_profile_search_input_validation():
    with pytest.raises(InvalidInput, match="fiber dimension >= 2"):
        find_pq_for_profile(1.0, 0.0, 1)


def test_profile_search_exhausted():
    with pytest.raises(NotFound, match="positive profile"):
        find_pq_for_profile(-1e9, 0.0, 2, p_grid=(0.0,), q_grid=(0.0,))


def test_pipeline_curved_base_positive(presets):
    """End-to-end on a curved codimension-2 base: the curvature magnitude
    is measured from the normal curvature and a certified pair exists."""
    out = scalar_bound_pipeline(presets["lagrangian_graph_r2_in_r4"], 0.0,
                                count=16)
    assert (out.params.p, out.params.q) == (2.5, 0.0)
    assert out.C_measured > 1.0
    assert out.certificate.strictly_positive
    assert out.min_scalar_observed > 0.0
    assert out.n_points_checked == 64

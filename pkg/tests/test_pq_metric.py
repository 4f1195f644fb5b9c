"""Two-parameter bundle metric and its Levi-Civita connection."""
import numpy as np
import pytest

from normalbundle.errors import InvalidInput, UnsupportedMorphism
from normalbundle.pq_metric import (HorizontalMorphism, NormalPoint, PQParams,
                                    TotalTangent, VerticalMorphism,
                                    bracket_lifts,
                                    canonical_vertical_derivative,
                                    coordinate_connection, horizontal_lift,
                                    levi_civita, lift_derivative_morphism,
                                    metric_eval, omega, theta_lift,
                                    vertical_lift)

PQ_GRID = (PQParams(0.0, 0.0), PQParams(1.0, 1.0), PQParams(-1.0, 2.0),
           PQParams(2.0, 0.0))


def test_pqparams_validation():
    with pytest.raises(InvalidInput):
        PQParams(1.0, -0.5)
    assert PQParams.sasaki() == PQParams(0.0, 0.0)
    assert PQParams.cheeger_gromoll() == PQParams(1.0, 1.0)


def test_special_cases_metric_values(lagrangian_graph, samples):
    """Sasaki metric: fiber inner product unchanged. CG: 1/(1+|θ|²) scale."""
    U, T = samples(lagrangian_graph, 4)
    for k in range(4):
        point = NormalPoint(lagrangian_graph, U[k], T[k])
        s = point.theta_norm2
        xi, eta = np.array([0.3, -0.9]), np.array([1.1, 0.4])
        sasaki = metric_eval(PQParams.sasaki(), point,
                             vertical_lift(point, xi),
                             vertical_lift(point, eta))
        assert abs(sasaki - xi @ eta) < 1e-14
        w = 1.0 / (1.0 + s)
        cg = metric_eval(PQParams.cheeger_gromoll(), point,
                         vertical_lift(point, xi), vertical_lift(point, eta))
        expect = w * (xi @ eta + (xi @ T[k]) * (eta @ T[k]))
        assert abs(cg - expect) < 1e-13


def test_metric_blocks(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 4)
    for pq in PQ_GRID:
        for k in range(4):
            point = NormalPoint(lagrangian_graph, U[k], T[k])
            geom = point.geometry
            X = np.array([0.7, -0.2])
            xi = np.array([-0.4, 1.3])
            # horizontal block is the base metric, independent of (p, q)
            hh = metric_eval(pq, point, horizontal_lift(point, X),
                             horizontal_lift(point, X))
            assert abs(hh - X @ geom.g @ X) < 1e-13
            # mixed block vanishes
            hv = metric_eval(pq, point, horizontal_lift(point, X),
                             vertical_lift(point, xi))
            assert abs(hv) < 1e-15
            # vertical block in closed form
            s = point.theta_norm2
            wp = omega(T[k]) ** pq.p
            vv = metric_eval(pq, point, vertical_lift(point, xi),
                             vertical_lift(point, xi))
            expect = wp * (xi @ xi + pq.q * (xi @ T[k]) ** 2)
            assert abs(vv - expect) < 1e-13
            # canonical vertical field has squared length ω^p(s + q s²)
            th = metric_eval(pq, point, theta_lift(point), theta_lift(point))
            assert abs(th - wp * (s + pq.q * s * s)) < 1e-13


def test_metric_positive_definite(presets, samples):
    for name in ("helix_r1_in_r3", "lagrangian_graph_r2_in_r4"):
        sub = presets[name]
        U, T = samples(sub, 4)
        d, dp = sub.dim, sub.codim
        for pq in PQ_GRID:
            for k in range(4):
                point = NormalPoint(sub, U[k], T[k])
                lifts = [horizontal_lift(point, e) for e in np.eye(d)]
                lifts += [vertical_lift(point, e) for e in np.eye(dp)]
                G = np.array([[metric_eval(pq, point, a, b) for b in lifts]
                              for a in lifts])
                assert np.min(np.linalg.eigvalsh(G)) > 1e-12
                assert np.max(np.abs(G - G.T)) < 1e-15


def test_fiber_metric_derivative_rule(lagrangian_graph, samples):
    """Vertical derivative of the fiber metric in closed form."""
    U, T = samples(lagrangian_graph, 3)
    rng = np.random.default_rng(11)
    h = 1e-6
    for pq in PQ_GRID:
        for k in range(3):
            t = T[k]
            xi, eta, zeta = rng.standard_normal((3, 2))

            def fiber_inner(tt):
                point = NormalPoint(lagrangian_graph, U[k], tt)
                return metric_eval(pq, point, vertical_lift(point, eta),
                                   vertical_lift(point, zeta))

            fd = (fiber_inner(t + h * xi) - fiber_inner(t - h * xi)) / (2 * h)
            w = omega(t)
            wp = w ** pq.p
            rule = (-2.0 * pq.p * w ** (pq.p + 1) * (xi @ t)
                    * (eta @ zeta + pq.q * (eta @ t) * (zeta @ t))
                    + pq.q * wp * ((xi @ eta) * (zeta @ t)
                                   + (xi @ zeta) * (eta @ t)))
            assert abs(fd - rule) < 1e-8


def test_vertical_koszul(lagrangian_graph, samples):
    """2⟨⟨∇_{ξ}η, ζ⟩⟩ must equal the Koszul combination of fiber
    derivatives (lifted fields with constant components commute)."""
    U, T = samples(lagrangian_graph, 3)
    rng = np.random.default_rng(5)
    h = 1e-6
    for pq in PQ_GRID:
        for k in range(3):
            t = T[k]
            xi, eta, zeta = rng.standard_normal((3, 2))
            point = NormalPoint(lagrangian_graph, U[k], t)

            def inner(tt, a, b):
                pt = NormalPoint(lagrangian_graph, U[k], tt)
                return metric_eval(pq, pt, vertical_lift(pt, a),
                                   vertical_lift(pt, b))

            def deriv(direction, a, b):
                return (inner(t + h * direction, a, b)
                        - inner(t - h * direction, a, b)) / (2 * h)

            koszul = (deriv(xi, eta, zeta) + deriv(eta, xi, zeta)
                      - deriv(zeta, xi, eta))
            nab = levi_civita(pq, point, "VV", xi, eta)
            lhs = 2.0 * metric_eval(pq, point, nab,
                                    vertical_lift(point, zeta))
            assert abs(lhs - koszul) < 1e-8


def test_horizontal_vertical_koszul(lagrangian_graph, samples):
    """2⟨⟨∇_{X^h}Y^h, ζ^v⟩⟩ = ⟨⟨[X^h,Y^h], ζ^v⟩⟩ for constant X, Y."""
    U, T = samples(lagrangian_graph, 3)
    for pq in PQ_GRID:
        for k in range(3):
            point = NormalPoint(lagrangian_graph, U[k], T[k])
            X, Y = np.array([0.8, 0.3]), np.array([-0.2, 1.0])
            zeta = np.array([0.5, -0.7])
            nab = levi_civita(pq, point, "HH", X, Y)
            br = bracket_lifts(point, "HH", X, Y)
            zl = vertical_lift(point, zeta)
            lhs = 2.0 * metric_eval(pq, point, nab, zl)
            rhs = metric_eval(pq, point, br, zl)
            assert abs(lhs - rhs) < 1e-12


def test_torsion_free(presets, samples):
    for name in ("sphere_s2_in_r3", "lagrangian_graph_r2_in_r4"):
        sub = presets[name]
        U, T = samples(sub, 3)
        d, dp = sub.dim, sub.codim
        rng = np.random.default_rng(3)
        for pq in PQ_GRID:
            for k in range(3):
                point = NormalPoint(sub, U[k], T[k])
                X, Y = rng.standard_normal((2, d))
                xi, eta = rng.standard_normal((2, dp))
                hh = (levi_civita(pq, point, "HH", X, Y)
                      + (-1.0) * levi_civita(pq, point, "HH", Y, X)
                      + (-1.0) * bracket_lifts(point, "HH", X, Y))
                assert hh.max_abs() < 1e-10
                hv = (levi_civita(pq, point, "HV", X, eta)
                      + (-1.0) * levi_civita(pq, point, "VH", eta, X))
                assert hv.max_abs() < 1e-10
                vv = (levi_civita(pq, point, "VV", xi, eta)
                      + (-1.0) * levi_civita(pq, point, "VV", eta, xi))
                assert vv.max_abs() < 1e-10


def test_connection_sasaki_vertical_flat(lagrangian_graph, samples):
    """At p = q = 0 the fiber is Euclidean: ∇ of vertical lifts along
    vertical lifts vanishes."""
    U, T = samples(lagrangian_graph, 3)
    point = NormalPoint(lagrangian_graph, U[0], T[0])
    out = levi_civita(PQParams.sasaki(), point, "VV",
                      np.array([1.0, 2.0]), np.array([-0.3, 0.4]))
    assert out.max_abs() == 0.0


def test_bracket_rules(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 2)
    point = NormalPoint(lagrangian_graph, U[0], T[0])
    geom = point.geometry
    X, Y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    xi = np.array([0.7, -0.1])
    assert bracket_lifts(point, "VV", xi, xi).max_abs() == 0.0
    hh = bracket_lifts(point, "HH", X, Y)
    rp = np.einsum("i,j,ijba,a->b", X, Y, geom.normal_curv, T[0])
    assert np.allclose(hh.vertical, -rp)
    assert np.allclose(hh.horizontal, 0.0)
    vth = bracket_lifts(point, "VTheta", xi)
    assert np.allclose(vth.vertical, xi)
    hth = bracket_lifts(point, "HTheta", X)
    assert hth.max_abs() == 0.0
    with pytest.raises(ValueError):
        bracket_lifts(point, "XX", X, Y)


def test_canonical_vertical_derivative_rules(lagrangian_graph, samples):
    """∇Θ along directions matches the identity-endomorphism lift, and
    the vertical rule reproduces ∇_{ξ^v}Θ = ξ^v + ∇_{ξ^v}θ^v."""
    U, T = samples(lagrangian_graph, 3)
    for pq in PQ_GRID:
        for k in range(3):
            point = NormalPoint(lagrangian_graph, U[k], T[k])
            X = np.array([0.4, -0.8])
            xi = np.array([-0.6, 0.2])
            ident = VerticalMorphism(matrix=np.eye(2),
                                     cov=np.zeros((2, 2, 2)))
            via_morphism = lift_derivative_morphism(
                pq, point, TotalTangent(X, xi), ident)
            direct = canonical_vertical_derivative(
                pq, point, TotalTangent(X, xi))
            diff = direct + (-1.0) * via_morphism
            assert diff.max_abs() < 1e-12
            vert_only = canonical_vertical_derivative(
                pq, point, TotalTangent(np.zeros(2), xi))
            expect = (vertical_lift(point, xi)
                      + levi_civita(pq, point, "VV", xi, T[k]))
            diff = vert_only + (-1.0) * expect
            assert diff.max_abs() < 1e-12


def test_morphism_requires_cov_data(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 1)
    point = NormalPoint(lagrangian_graph, U[0], T[0])
    X = np.array([1.0, 0.0])
    bare_v = VerticalMorphism(matrix=np.eye(2))
    with pytest.raises(UnsupportedMorphism):
        lift_derivative_morphism(pq := PQParams(1.0, 1.0), point,
                                 TotalTangent(X, np.zeros(2)), bare_v)
    bare_h = HorizontalMorphism(matrix=np.ones((2, 2)))
    with pytest.raises(UnsupportedMorphism):
        lift_derivative_morphism(pq, point,
                                 TotalTangent(X, np.zeros(2)), bare_h)
    # vertical directions never need cov data
    out = lift_derivative_morphism(pq, point,
                                   TotalTangent(np.zeros(2),
                                                np.array([0.3, 0.4])),
                                   bare_v)
    assert np.isfinite(out.horizontal).all()


def test_coordinate_connection_symmetric(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 2)
    for pq in PQ_GRID:
        point = NormalPoint(lagrangian_graph, U[0], T[0])
        H, V = coordinate_connection(pq, point)
        assert np.max(np.abs(H - H.transpose(1, 0, 2))) < 1e-12
        assert np.max(np.abs(V - V.transpose(1, 0, 2))) < 1e-12


def test_total_tangent_arithmetic():
    a = TotalTangent(np.array([1.0, 2.0]), np.array([3.0]))
    b = TotalTangent(np.array([0.5, -1.0]), np.array([1.0]))
    s = a + b
    assert np.allclose(s.horizontal, [1.5, 1.0])
    assert np.allclose(s.vertical, [4.0])
    scaled = 2.0 * a
    assert np.allclose(scaled.horizontal, [2.0, 4.0])
    assert s.max_abs() == 4.0


def test_levi_civita_rejects_unknown_case(lagrangian_graph, samples):
    U, T = samples(lagrangian_graph, 1)
    point = NormalPoint(lagrangian_graph, U[0], T[0])
    with pytest.raises(ValueError):
        levi_civita(PQParams(1.0, 1.0), point, "ZZ",
                    np.zeros(2), np.zeros(2))


# -- independent check of the morphism-lift derivative ----------------------
def _coord_covariant_derivative(x, field, direction_coords, Gam):
    """(∇ F)(direction) in bundle-chart coordinates: ∂F + Γ·F, contracted."""
    h = 1e-4
    n = len(x)
    out = np.zeros(n)
    for c in range(n):
        dF = np.zeros(n)
        for shift, coef in ((-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3),
                            (2, -1 / 12)):
            xx = x.copy()
            xx[c] += shift * h
            dF += coef / h * field(xx)
        out += direction_coords[c] * (dF + Gam[:, c, :] @ field(x))
    return out


def test_canonical_vertical_parallel_along_horizontal(lagrangian_graph,
                                                      samples):
    """Θ is parallel in horizontal directions, for every (p, q)."""
    U, T = samples(lagrangian_graph, 3)
    rng = np.random.default_rng(31)
    for pq in PQ_GRID:
        for k in range(3):
            point = NormalPoint(lagrangian_graph, U[k], T[k])
            X = rng.standard_normal(2)
            out = canonical_vertical_derivative(
                pq, point, TotalTangent(X, np.zeros(2)))
            assert np.max(np.abs(out.horizontal)) == 0.0
            assert np.max(np.abs(out.vertical)) == 0.0


def test_morphism_lift_derivative_matches_fd(lagrangian_graph, samples):
    """All four branches against ∂F + Γ̃F with finite-difference Γ̃.

    The endomorphism/bundle-map matrices are held constant in frame
    components, so their covariant data reduces to connection
    commutators: [A_i, M] for the vertical morphism and Γ_i G − G A_i
    for the horizontal one.
    """
    from normalbundle.fd_oracle import (coordinate_components, fd_christoffel,
                                        total_coordinates)
    from normalbundle.submanifold_geometry import base_geometry

    sub = lagrangian_graph
    U, T = samples(sub, 1)
    u, t = U[0], T[0]
    d = 2
    pq = PQParams(2.0, 3.0)
    point = NormalPoint(sub, u, t)
    geom = base_geometry(sub, u)
    x = total_coordinates(u, t)
    Gam = fd_christoffel(pq, sub, x)

    M = np.array([[0.7, -0.2], [0.5, 1.1]])
    GG = np.array([[0.3, 1.2], [-0.4, 0.8]])
    cov_m = np.array([geom.A[i] @ M - M @ geom.A[i] for i in range(d)])
    cov_g = np.array([np.einsum("lk,ka->la", geom.christoffel[:, i, :], GG)
                      - GG @ geom.A[i] for i in range(d)])

    def vert_field(y):
        # (M θ)^v in chart coordinates: vertical slot holds frame components
        return np.concatenate([np.zeros(d), M @ y[d:]])

    def horiz_field(y):
        # (G θ)^h: the lift carries a normal-connection correction
        g = base_geometry(sub, y[:d])
        return coordinate_components(
            g, y[d:], TotalTangent(GG @ y[d:], np.zeros(d)))

    X = np.array([0.6, -0.9])
    directions = [TotalTangent(np.zeros(d), np.eye(d)[0]),
                  TotalTangent(np.zeros(d), np.eye(d)[1]),
                  TotalTangent(X, np.zeros(d))]
    for dirn in directions:
        dir_coords = coordinate_components(geom, t, dirn)
        for morph, field in ((VerticalMorphism(M, cov_m), vert_field),
                             (HorizontalMorphism(GG, cov_g), horiz_field)):
            closed = lift_derivative_morphism(pq, point, dirn, morph)
            got = coordinate_components(
                geom, t, TotalTangent(closed.horizontal, closed.vertical))
            want = _coord_covariant_derivative(x, field, dir_coords, Gam)
            assert np.max(np.abs(got - want)) < 1e-8

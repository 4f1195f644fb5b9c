"""Intrinsic and normal-bundle geometry of an embedded submanifold.

Everything is computed pointwise from the chart, in a fixed gauge:

* induced metric g_ij = ⟨∂_i f, ∂_j f⟩ and its Christoffel symbols
  Γ^a_ij = g^{al} ⟨∂_i ∂_j f, ∂_l f⟩ — exact from chart derivatives;
* an orthonormal normal frame ξ_1..ξ_{d'} from pivoted Gram-Schmidt of
  the normal-projector columns (deterministic per preset pivot order);
* normal-connection coefficients A_i[b,a] = ⟨∂_i ξ_a, ξ_b⟩ by
  complex-step differentiation of the frame (exact to roundoff);
* normal curvature R⊥_ij = ∂_i A_j − ∂_j A_i + [A_i, A_j] by a
  fourth-order finite-difference of A, and its covariant derivative by a
  second FD layer with Christoffel/connection corrections;
* the adjoint curvature R̂ determined by
  ⟨R̂(ξ,η)X, Y⟩_g = ⟨R⊥(X,Y)ξ, η⟩, together with its derivative;
* the base Riemann tensor by complex-step differentiation of the exact
  Christoffel symbols.

Conventions.  Frames are stored as rows.  A_i is antisymmetric and acts
on frame components.  R⊥_ij acts as a matrix on frame components, with
(R⊥(X,Y)ξ)_b = X^i Y^j R⊥_ij[b,a] ξ_a.  The Riemann convention is
R(X,Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_[X,Y] Z with coordinate components
R[a,b,c,d] = (R(∂_c, ∂_d) ∂_b)^a; the unit sphere has sectional
curvature +1 in this convention.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import FrameDegeneracy, SingularMetric

__all__ = [
    "BaseGeometry",
    "AdjointCurvature",
    "base_geometry",
    "induced_metric",
    "base_christoffel",
    "normal_frame",
    "normal_connection",
    "base_curvature",
    "normal_curvature",
    "adjoint_curvature",
    "cov_deriv_normal_curvature",
    "align_frame",
    "rp_apply",
    "hat_apply",
    "crp_apply",
    "chat_apply",
    "rbase_apply",
]

#: FD step for the first derivative layer (∂A, entering R⊥).
FD_STEP_DA = 1e-4
#: FD step for the second derivative layer (∂R⊥, entering ∇⊥R⊥).
FD_STEP_COV = 2e-3
#: complex-step size; exact to machine precision for analytic charts.
COMPLEX_STEP = 1e-20
#: condition-number limit before the induced metric counts as singular.
COND_LIMIT = 1e12

_GEOM_CACHE_CAP = 8192


def _fd4(fun, u, i, h):
    """Fourth-order central difference of ``fun`` along coordinate i."""
    e = np.zeros(len(u))
    e[i] = h
    return (-fun(u + 2 * e) + 8 * fun(u + e)
            - 8 * fun(u - e) + fun(u - 2 * e)) / (12 * h)


def _frame_from_jacobian(F, pivots, codim):
    """Gram-Schmidt normal frame from the normal projector's columns.

    Works on real or complex input (analytic operations only, so it can
    be complex-step differentiated).  Rows are the frame vectors.
    """
    n = F.shape[1]
    g = F @ F.T
    gi = np.linalg.inv(g)
    P = np.eye(n, dtype=F.dtype) - F.T @ gi @ F
    rows = []
    for k in pivots:
        v = P[:, k].copy()
        for x in rows:
            v = v - (v @ x) * x          # no conjugation: analytic GS
        nrm2 = v @ v
        if abs(nrm2) < 1e-12:
            continue
        rows.append(v / np.sqrt(nrm2))
        if len(rows) == codim:
            break
    if len(rows) != codim:
        raise FrameDegeneracy(
            f"Gram-Schmidt produced {len(rows)} of {codim} normal vectors; "
            f"adjust frame_pivots")
    return np.array(rows)


class BaseGeometry:
    """All base-point tensors of a submanifold at one chart point u.

    Cheap first-order data (metric, Christoffels, frame, normal
    connection) is computed eagerly; curvature layers are lazy and
    cached.  Instances are cached per (submanifold, u) by
    :func:`base_geometry`.
    """

    def __init__(self, sub, u):
        u = np.asarray(u, float)
        self.sub = sub
        self.u = u
        self.dim = sub.dim
        self.codim = sub.codim
        self.jac = sub.chart_derivatives(u, order=1)
        self.g = self.jac @ self.jac.T
        if np.linalg.cond(self.g) > COND_LIMIT:
            raise SingularMetric(
                f"induced metric has condition number above {COND_LIMIT:g} "
                f"at u={u}")
        self.g_inv = np.linalg.inv(self.g)
        second = sub.chart_derivatives(u, order=2)
        # Γ^a_ij = g^{al} <∂_i∂_j f, ∂_l f>
        self.christoffel = np.einsum("al,ijk,lk->aij", self.g_inv, second,
                                     self.jac)
        self.frame = np.real(_frame_from_jacobian(self.jac, sub.frame_pivots,
                                                  self.codim))
        self.A = self._normal_connection()

    # -- connection --------------------------------------------------------
    def _frame_at(self, u):
        F = self.sub.chart_derivatives(u, order=1)
        return _frame_from_jacobian(F, self.sub.frame_pivots, self.codim)

    def _normal_connection(self):
        d, dp = self.dim, self.codim
        A = np.zeros((d, dp, dp))
        X0 = self.frame
        if self.sub.chart.complex_ok:
            h = COMPLEX_STEP
            for i in range(d):
                uc = np.array(self.u, dtype=complex)
                uc[i] += 1j * h
                dX = self._frame_at(uc).imag / h
                A[i] = (dX @ X0.T).T
        else:
            for i in range(d):
                dX = _fd4(lambda v: np.real(self._frame_at(v)), self.u, i, 1e-5)
                A[i] = (dX @ X0.T).T
        return A

    def _connection_at(self, u):
        """A at a displaced point (real), for the FD curvature layers."""
        geom = base_geometry(self.sub, u)
        return geom.A

    # -- curvature layers --------------------------------------------------
    @cached_property
    def dA(self):
        """∂_i A_j as an array [i, j, b, a] (plain partials of A)."""
        d, dp = self.dim, self.codim
        out = np.zeros((d, d, dp, dp))
        for i in range(d):
            dAi = _fd4(self._connection_at, self.u, i, FD_STEP_DA)
            out[i] = dAi
        return out

    @cached_property
    def normal_curv(self):
        """R⊥ with components [i, j, b, a] (matrix on frame components)."""
        d, dp = self.dim, self.codim
        dA = self.dA
        Rp = np.zeros((d, d, dp, dp))
        for i in range(d):
            for j in range(d):
                Rp[i, j] = dA[i, j] - dA[j, i] + self.A[i] @ self.A[j] \
                    - self.A[j] @ self.A[i]
        return Rp

    def _normal_curv_at(self, u):
        return base_geometry(self.sub, u).normal_curv

    @cached_property
    def cov_normal_curv(self):
        """(∇⊥R⊥) with components [k, i, j, b, a]."""
        d, dp = self.dim, self.codim
        Rp, A, Gam = self.normal_curv, self.A, self.christoffel
        dRp = [_fd4(self._normal_curv_at, self.u, k, FD_STEP_COV)
               for k in range(d)]
        out = np.zeros((d, d, d, dp, dp))
        for k in range(d):
            for i in range(d):
                for j in range(d):
                    M = dRp[k][i, j] + A[k] @ Rp[i, j] - Rp[i, j] @ A[k]
                    for l in range(d):
                        M = M - Gam[l, k, i] * Rp[l, j] \
                            - Gam[l, k, j] * Rp[i, l]
                    out[k, i, j] = M
        return out

    @cached_property
    def hat_tensor(self):
        """R̂ components [a, b, l, i]: (R̂(ξ_a,ξ_b)X)^l = hat[a,b,l,i] X^i."""
        return np.einsum("lj,ijba->abli", self.g_inv, self.normal_curv)

    @cached_property
    def cov_hat_tensor(self):
        """(∇R̂) components [k, a, b, l, i] (duality with ∇⊥R⊥)."""
        return np.einsum("lj,kijba->kabli", self.g_inv, self.cov_normal_curv)

    @cached_property
    def riemann(self):
        """Base Riemann tensor R[a, b, c, d] = (R(∂_c,∂_d)∂_b)^a."""
        d = self.dim
        sub = self.sub
        if sub.chart.complex_ok:
            h = COMPLEX_STEP

            def dGam(k):
                uc = np.array(self.u, dtype=complex)
                uc[k] += 1j * h
                F = sub.chart_derivatives(uc, order=1)
                dd = sub.chart_derivatives(uc, order=2)
                gi = np.linalg.inv(F @ F.T)
                return np.einsum("al,ijk,lk->aij", gi, dd, F).imag / h
            dG = np.array([dGam(k) for k in range(d)])
        else:
            def gam_at(v):
                return base_geometry(sub, v).christoffel
            dG = np.array([_fd4(gam_at, self.u, k, FD_STEP_DA)
                           for k in range(d)])
        Gam = self.christoffel
        T1 = np.transpose(dG, (1, 3, 0, 2))      # ∂_c Γ^a_{db}
        T2 = np.transpose(dG, (1, 3, 2, 0))      # ∂_d Γ^a_{cb}
        E1 = np.einsum("ace,edb->abcd", Gam, Gam)
        E2 = np.einsum("ade,ecb->abcd", Gam, Gam)
        return T1 - T2 + E1 - E2

    @cached_property
    def ricci(self):
        return np.einsum("adab->bd", self.riemann)

    @cached_property
    def scalar(self):
        return float(np.einsum("bd,bd->", self.g_inv, self.ricci))


# --------------------------------------------------------------------------
# cached factory and functional API
# --------------------------------------------------------------------------
def base_geometry(sub, u) -> BaseGeometry:
    """BaseGeometry at u, cached on the submanifold instance."""
    key = np.asarray(u, float).tobytes()
    cache = sub._geom_cache
    geom = cache.get(key)
    if geom is None:
        geom = BaseGeometry(sub, u)
        if len(cache) >= _GEOM_CACHE_CAP:
            cache.pop(next(iter(cache)))
        cache[key] = geom
    return geom


def induced_metric(sub, u):
    """Induced metric g_ij at u."""
    return base_geometry(sub, u).g


def base_christoffel(sub, u):
    """Christoffel symbols Γ^a_ij of the induced metric."""
    return base_geometry(sub, u).christoffel


def normal_frame(sub, u):
    """Orthonormal normal frame (rows), in the fixed pivot gauge."""
    return base_geometry(sub, u).frame


def normal_connection(sub, u):
    """Normal-connection coefficient matrices A_i (antisymmetric)."""
    return base_geometry(sub, u).A


def base_curvature(sub, u):
    """Base Riemann tensor R[a,b,c,d]."""
    return base_geometry(sub, u).riemann


def normal_curvature(sub, u):
    """Normal curvature R⊥[i,j] as matrices on frame components."""
    return base_geometry(sub, u).normal_curv


def cov_deriv_normal_curvature(sub, u):
    """Covariant derivative (∇⊥R⊥)[k,i,j] on frame components."""
    return base_geometry(sub, u).cov_normal_curv


class AdjointCurvature:
    """The adjoint R̂ of the normal curvature, with its derivative.

    R̂(ξ,η) maps tangent vectors to tangent vectors and is defined by
    ⟨R̂(ξ,η)X, Y⟩_g = ⟨R⊥(X,Y)ξ, η⟩.
    """

    def __init__(self, geom: BaseGeometry):
        self.geom = geom
        self.tensor = geom.hat_tensor
        self.cov_tensor = geom.cov_hat_tensor

    def apply(self, xi, eta, X):
        """R̂(ξ,η)X as base coordinate components."""
        return np.einsum("a,b,abli,i->l", xi, eta, self.tensor, X)

    def cov_apply(self, Xdir, xi, eta, Y):
        """(∇_{Xdir} R̂)(ξ,η)Y as base coordinate components."""
        return np.einsum("k,a,b,kabli,i->l", Xdir, xi, eta,
                         self.cov_tensor, Y)

    def duality_residual(self) -> float:
        """max |⟨R̂(ξ_a,ξ_b)∂_i, ∂_l⟩_g − ⟨R⊥(∂_i,∂_l)ξ_a, ξ_b⟩|."""
        lowered = np.einsum("abmi,ml->abli", self.tensor, self.geom.g)
        target = np.transpose(self.geom.normal_curv, (3, 2, 1, 0))
        return float(np.max(np.abs(lowered - target)))


def adjoint_curvature(sub, u) -> AdjointCurvature:
    return AdjointCurvature(base_geometry(sub, u))


# --------------------------------------------------------------------------
# frame gauge alignment (used by the FD oracle)
# --------------------------------------------------------------------------
def align_frame(reference, frame, tol=1e-2):
    """Align ``frame`` to ``reference`` across a discrete gauge jump.

    Returns ``(aligned_frame, snap, deviation)`` where ``deviation`` is
    the pre-alignment mismatch max|ref·frameᵀ − I|.  For a smooth gauge
    the snap is the identity and the frame is returned untouched.  A
    genuine pivot flip or swap is undone by the nearest signed
    permutation of the polar factor of ref·frameᵀ; anything that cannot
    be snapped that way raises :class:`FrameDegeneracy`.
    """
    M = reference @ frame.T
    dev = float(np.max(np.abs(M - np.eye(M.shape[0]))))
    if dev <= tol:
        return frame, np.eye(M.shape[0]), dev
    U, _, Vt = np.linalg.svd(M)
    polar = U @ Vt
    snap = np.round(polar)
    if np.max(np.abs(snap @ snap.T - np.eye(M.shape[0]))) > 1e-9 or \
            np.max(np.abs(snap - polar)) > 0.3:
        raise FrameDegeneracy(
            f"frame gauge jump (deviation {dev:.3g}) is not a signed "
            f"permutation; cannot align")
    return snap @ frame, snap, dev


# --------------------------------------------------------------------------
# component-wise application helpers
# --------------------------------------------------------------------------
def rp_apply(geom, X, Y, xi):
    """R⊥(X,Y)ξ in frame components."""
    return np.einsum("i,j,ijba,a->b", X, Y, geom.normal_curv, xi)


def hat_apply(geom, xi, eta, X):
    """R̂(ξ,η)X in base coordinate components."""
    return np.einsum("a,b,abli,i->l", xi, eta, geom.hat_tensor, X)


def crp_apply(geom, Zdir, X, Y, xi):
    """(∇⊥_{Zdir} R⊥)(X,Y)ξ in frame components."""
    return np.einsum("k,i,j,kijba,a->b", Zdir, X, Y,
                     geom.cov_normal_curv, xi)


def chat_apply(geom, Xdir, xi, eta, Y):
    """(∇_{Xdir} R̂)(ξ,η)Y in base coordinate components."""
    return np.einsum("k,a,b,kabli,i->l", Xdir, xi, eta,
                     geom.cov_hat_tensor, Y)


def rbase_apply(geom, X, Y, Z):
    """Base R(X,Y)Z in coordinate components."""
    return np.einsum("c,d,b,abcd->a", X, Y, Z, geom.riemann)

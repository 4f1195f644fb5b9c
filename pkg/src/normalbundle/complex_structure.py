"""Compatible almost-complex structure on the total space.

For a totally real submanifold of ℝ²ᵈ (an orthogonal ambient J maps
every tangent vector into the normal space), rotating between the
horizontal and vertical distributions defines an almost-complex
structure J̃ on the total space that is compatible with the
two-parameter metric.  This module builds J̃, its fundamental 2-form φ,
the exterior derivative dφ together with the 1-form α that makes the
pair locally conformally symplectic (dφ = α ∧ φ), the Nijenhuis tensor
in the Sasaki case, and the constant-coefficient diagnostics used to
classify when the structure is Kähler or Hermitian-like.

The mixed-form sign and the dφ prefactor each circulate in print with
the wrong sign on the k = q/(1+√(1+q|θ|²)) correction; the defaults
here are the oracle-verified forms, with the defective variants kept
behind ``variant="uncorrected"`` for adjudication.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .pq_metric import NormalPoint, PQParams, TotalTangent, omega
from .sampling import sample_normal_points
from .submanifold_geometry import base_geometry, rp_apply

__all__ = [
    "JTildeCoeffs",
    "jtilde_coeffs",
    "jtilde_coeff_residuals",
    "tangent_normal_rotations",
    "apply_jtilde",
    "jtilde_chart_matrix",
    "fundamental_form",
    "dphi",
    "alpha_form",
    "alpha_wedge_phi",
    "LCKReport",
    "lck_check",
    "nijenhuis_p0q0",
    "KahlerReport",
    "kahler_check",
    "hermitian_constant_K",
    "HermitianShapeReport",
    "hermitian_shape_residual",
]

_VARIANTS = ("corrected", "uncorrected")


def _check_variant(variant):
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}, got {variant!r}")


def require_totally_real(sub, u=None, tol: float = 1e-9) -> np.ndarray:
    """Ambient J of the submanifold, or StructureError if unusable."""
    if sub.ambient_complex is None:
        raise StructureError(
            "this geometry carries no ambient complex structure")
    if u is None:
        u = 0.5 * (sub.domain_box[:, 0] + sub.domain_box[:, 1])
    if not sub.ambient_complex.is_totally_real(sub, u, tol=tol):
        dev = sub.ambient_complex.totally_real_deviation(sub, u)
        raise StructureError(
            f"embedding is not totally real: tangent deviation {dev:.3e} "
            f"at u={np.asarray(u)} exceeds {tol:.1e}")
    return sub.ambient_complex.matrix


# --------------------------------------------------------------------------
# J-tilde coefficients
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class JTildeCoeffs:
    """Scalar weights of J̃ at fixed |θ|².

    vertical → horizontal:  a·(Jξ)ᵗᵃⁿ + b·⟨ξ,θ⟩·(Jθ)ᵗᵃⁿ
    horizontal → vertical:  c·(JX)ⁿᵒʳ + d·⟨JX,θ⟩·θ
    """

    a: float
    b: float
    c: float
    d: float


def jtilde_coeffs(pq: PQParams, t) -> JTildeCoeffs:
    t = np.asarray(t, float)
    s = float(t @ t)
    w = 1.0 / (1.0 + s)
    root = math.sqrt(1.0 + pq.q * s)
    a = w ** (pq.p / 2)
    b = w ** (pq.p / 2) * pq.q / (1.0 + root)
    c = w ** (-pq.p / 2)
    d = -w ** (-pq.p / 2) * pq.q / (root * (1.0 + root))
    return JTildeCoeffs(a, b, c, d)


def jtilde_coeff_residuals(pq: PQParams, t) -> float:
    """Max residual of the six equations pinning (a, b, c, d).

    J̃² = −I and metric compatibility reduce, slot by slot, to six scalar
    identities in the coefficients and S = |θ|²; all must vanish.
    """
    t = np.asarray(t, float)
    S = float(t @ t)
    co = jtilde_coeffs(pq, t)
    a, b, c, d = co.a, co.b, co.c, co.d
    wp = (1.0 / (1.0 + S)) ** pq.p
    eqs = (
        a * c - 1.0,
        a * d + b * c + b * d * S,
        a * a - wp,
        2 * a * b + b * b * S - wp * pq.q,
        wp * c * c - 1.0,
        2 * c * d + d * d * S + pq.q * (c + d * S) ** 2,
    )
    return float(max(abs(e) for e in eqs))


# --------------------------------------------------------------------------
# pointwise rotation components
# --------------------------------------------------------------------------
def tangent_normal_rotations(sub, u):
    """Component matrices of the ambient rotation in the adapted frames.

    P[:, a] — base components of the tangent vector J ξ_a;
    Q[:, i] — frame components of the normal vector J ∂_i.
    Both exact inverses of each other up to index lowering when the
    position is totally real.
    """
    J = require_totally_real(sub, u)
    geom = base_geometry(sub, u)
    F, gi, xi = geom.jac, geom.g_inv, geom.frame
    P = np.array([gi @ (F @ (J @ xi[a])) for a in range(geom.codim)]).T
    Q = np.array([xi @ (J @ F[i]) for i in range(geom.dim)]).T
    return P, Q


def apply_jtilde(pq: PQParams, point: NormalPoint,
                 tangent: TotalTangent) -> TotalTangent:
    """J̃ applied to a split tangent vector of the total space."""
    sub, u, t = point.sub, point.u, point.t
    P, Q = tangent_normal_rotations(sub, u)
    co = jtilde_coeffs(pq, t)
    h, v = tangent.horizontal, tangent.vertical
    h_out = co.a * (P @ v) + co.b * (v @ t) * (P @ t)
    qh = Q @ h
    v_out = co.c * qh + co.d * (qh @ t) * t
    return TotalTangent(h_out, v_out)


def jtilde_chart_matrix(pq: PQParams, sub, x) -> np.ndarray:
    """Matrix of J̃ on coordinate fields of the (u, t) chart.

    Used by the finite-difference side: coordinate fields are smooth
    extensions, so FD derivatives of this matrix are meaningful.
    """
    d = sub.dim
    u, t = x[:d], x[d:]
    geom = base_geometry(sub, u)
    dp = geom.codim
    point = NormalPoint(sub, u, t)
    cols = []
    for idx in range(d + dp):
        h = np.zeros(d)
        v = np.zeros(dp)
        if idx < d:
            h[idx] = 1.0
            v = geom.A[idx] @ t
        else:
            v[idx - d] = 1.0
        out = apply_jtilde(pq, point, TotalTangent(h, v))
        col = np.empty(d + dp)
        col[:d] = out.horizontal
        col[d:] = out.vertical - np.einsum("i,iba,a->b", out.horizontal,
                                           geom.A, t)
        cols.append(col)
    return np.array(cols).T


# --------------------------------------------------------------------------
# fundamental form, its differential, and the Lee form
# --------------------------------------------------------------------------
def _mixed_phi(pq, geom, P, t, sign, X, xi):
    w = omega(t)
    s = float(t @ t)
    k = pq.q / (1.0 + math.sqrt(1.0 + pq.q * s))
    return w ** (pq.p / 2) * (X @ geom.g @ (P @ xi)
                              + sign * k * (xi @ t) * (X @ geom.g @ (P @ t)))


def fundamental_form(pq: PQParams, point: NormalPoint, A: TotalTangent,
                     B: TotalTangent, variant: str = "corrected") -> float:
    """φ(A, B) = ⟨⟨A, J̃B⟩⟩ in closed form.

    Pure horizontal and pure vertical pairs pair to zero; only the
    mixed part survives.  ``variant="uncorrected"`` flips the sign of the
    k-correction (the defective printed form).
    """
    _check_variant(variant)
    sign = 1.0 if variant == "corrected" else -1.0
    sub, t = point.sub, point.t
    geom = point.geometry
    P, _ = tangent_normal_rotations(sub, point.u)
    return float(_mixed_phi(pq, geom, P, t, sign, A.horizontal, B.vertical)
                 - _mixed_phi(pq, geom, P, t, sign, B.horizontal, A.vertical))


def dphi(pq: PQParams, point: NormalPoint, A: TotalTangent, B: TotalTangent,
         C: TotalTangent, variant: str = "corrected") -> float:
    """dφ(A, B, C) in closed form.

    Only vertical-vertical-horizontal slot combinations contribute.
    ``variant="uncorrected"`` uses the defective prefactor p·ω − k instead of
    p·ω + k.
    """
    _check_variant(variant)
    sub, t = point.sub, point.t
    geom = point.geometry
    P, _ = tangent_normal_rotations(sub, point.u)
    w = omega(t)
    s = float(t @ t)
    k = pq.q / (1.0 + math.sqrt(1.0 + pq.q * s))
    sign = 1.0 if variant == "corrected" else -1.0
    fac = w ** (pq.p / 2) * (pq.p * w + sign * k)
    g = geom.g

    def Dv(xi, eta, X):
        return fac * ((xi @ t) * (X @ g @ (P @ eta))
                      - (eta @ t) * (X @ g @ (P @ xi)))

    return float(Dv(A.vertical, B.vertical, C.horizontal)
                 - Dv(A.vertical, C.vertical, B.horizontal)
                 + Dv(B.vertical, C.vertical, A.horizontal))


def alpha_form(pq: PQParams, point: NormalPoint, A: TotalTangent,
               variant: str = "corrected") -> float:
    """The 1-form α with dφ = α ∧ φ; vanishes on horizontal lifts."""
    _check_variant(variant)
    t = point.t
    w = omega(t)
    s = float(t @ t)
    k = pq.q / (1.0 + math.sqrt(1.0 + pq.q * s))
    sign = 1.0 if variant == "corrected" else -1.0
    return float(-(pq.p * w + sign * k) * (A.vertical @ t))


def alpha_wedge_phi(pq: PQParams, point: NormalPoint, A: TotalTangent,
                    B: TotalTangent, C: TotalTangent,
                    variant: str = "corrected",
                    alpha_scale: float = 1.0) -> float:
    """(α ∧ φ)(A, B, C); ``alpha_scale`` rescales α for negative controls."""
    aA = alpha_scale * alpha_form(pq, point, A, variant)
    aB = alpha_scale * alpha_form(pq, point, B, variant)
    aC = alpha_scale * alpha_form(pq, point, C, variant)
    return (aA * fundamental_form(pq, point, B, C, variant)
            - aB * fundamental_form(pq, point, A, C, variant)
            + aC * fundamental_form(pq, point, A, B, variant))


@dataclass(frozen=True)
class LCKReport:
    """Result of probing dφ = α ∧ φ over sample points and lift triples."""

    max_abs_residual: float
    tolerance: float
    passed: bool
    n_samples: int
    alpha_scale: float


def lck_check(pq: PQParams, sub, samples=None, count: int = 8,
              tol: float = 1e-9, alpha_scale: float = 1.0,
              variant: str = "corrected") -> LCKReport:
    """Check the conformally-symplectic identity on pure lift triples.

    ``alpha_scale != 1`` deliberately breaks the identity and must fail;
    that is the negative control for the verification battery.
    """
    require_totally_real(sub)
    if samples is None:
        U, T, _ = sample_normal_points(sub, count)
    else:
        U, T = samples
        count = len(U)
    d, dp = sub.dim, sub.codim
    m = d + dp
    lifts = [TotalTangent(np.eye(d)[i], np.zeros(dp)) for i in range(d)] \
        + [TotalTangent(np.zeros(d), np.eye(dp)[a]) for a in range(dp)]
    worst = 0.0
    for kpt in range(count):
        point = NormalPoint(sub, U[kpt], T[kpt])
        for i in range(m):
            for j in range(i + 1, m):
                for l in range(j + 1, m):
                    lhs = dphi(pq, point, lifts[i], lifts[j], lifts[l],
                               variant)
                    rhs = alpha_wedge_phi(pq, point, lifts[i], lifts[j],
                                          lifts[l], variant, alpha_scale)
                    worst = max(worst, abs(lhs - rhs))
    return LCKReport(float(worst), tol, worst < tol, count, alpha_scale)


# --------------------------------------------------------------------------
# integrability
# --------------------------------------------------------------------------
def nijenhuis_p0q0(point: NormalPoint, A: TotalTangent,
                   B: TotalTangent) -> TotalTangent:
    """Nijenhuis tensor of J̃ for the p = q = 0 metric, in closed form.

    N(A,B) = [J̃A, J̃B] − J̃[J̃A, B] − J̃[A, J̃B] + [A, B]; every slot
    combination reduces to normal-curvature contractions, so the
    structure is integrable exactly on normally flat geometries.
    """
    sub, t = point.sub, point.t
    geom = point.geometry
    P, _ = tangent_normal_rotations(sub, point.u)
    hA, vA = A.horizontal, A.vertical
    hB, vB = B.horizontal, B.vertical
    h = P @ rp_apply(geom, hA, P @ vB, t) - P @ rp_apply(geom, hB, P @ vA, t)
    v = rp_apply(geom, hA, hB, t) + rp_apply(geom, P @ vB, P @ vA, t)
    return TotalTangent(h, v)


@dataclass(frozen=True)
class KahlerReport:
    kahler: bool
    sasaki_params: bool
    max_normal_curvature: float
    flat_tolerance: float
    n_samples: int


def kahler_check(pq: PQParams, sub, samples=None, count: int = 16,
                 flat_tol: float = 1e-7) -> KahlerReport:
    """Kähler verdict: parameter pair (0, 0) and flat normal bundle."""
    require_totally_real(sub)
    if samples is None:
        U, _, _ = sample_normal_points(sub, count)
    else:
        U = samples
        count = len(U)
    worst = 0.0
    for u in U:
        worst = max(worst, float(np.max(np.abs(
            base_geometry(sub, u).normal_curv))))
    sasaki = pq.p == 0.0 and pq.q == 0.0
    return KahlerReport(sasaki and worst < flat_tol, sasaki, worst,
                        flat_tol, count)


# --------------------------------------------------------------------------
# Hermitian-type diagnostics
# --------------------------------------------------------------------------
def hermitian_constant_K(pq: PQParams) -> float:
    """Structure constant attached to the Hermitian-type curvature shape.

    K(p, q) = 2^{p-1} (p + p√(1+q) + 2q) / (√(1+q) (1 + √(1+q))).
    """
    r = math.sqrt(1.0 + pq.q)
    return 2.0 ** (pq.p - 1) * (pq.p + pq.p * r + 2 * pq.q) / (r * (1.0 + r))


@dataclass(frozen=True)
class HermitianShapeReport:
    """Least-squares fit of the rotationally coupled curvature shape.

    Fits φ₀ in R⊥(X,Y)θ ≈ φ₀ (⟨JY,θ⟩ JX − ⟨JX,θ⟩ JY) over samples;
    the residual is informational — it measures how far the geometry is
    from the special shape, not a pass/fail criterion.
    """

    phi0: float
    max_residual: float
    rms_residual: float
    n_samples: int


def hermitian_shape_residual(sub, samples=None,
                             count: int = 16) -> HermitianShapeReport:
    require_totally_real(sub)
    if samples is None:
        U, T, _ = sample_normal_points(sub, count)
    else:
        U, T = samples
        count = len(U)
    lhs_all, rhs_all = [], []
    for kpt in range(count):
        u, t = U[kpt], T[kpt]
        geom = base_geometry(sub, u)
        _, Q = tangent_normal_rotations(sub, u)
        d = geom.dim
        for i in range(d):
            for j in range(i + 1, d):
                X, Y = np.eye(d)[i], np.eye(d)[j]
                lhs_all.append(rp_apply(geom, X, Y, t))
                jx, jy = Q @ X, Q @ Y
                rhs_all.append((jy @ t) * jx - (jx @ t) * jy)
    L = np.concatenate(lhs_all) if lhs_all else np.zeros(1)
    R = np.concatenate(rhs_all) if rhs_all else np.zeros(1)
    denom = float(R @ R)
    phi0 = float(L @ R) / denom if denom > 0 else 0.0
    resid = L - phi0 * R
    return HermitianShapeReport(phi0, float(np.max(np.abs(resid))),
                                float(np.sqrt(np.mean(resid**2))), count)

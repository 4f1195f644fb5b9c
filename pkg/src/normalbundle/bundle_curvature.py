"""Curvature of the total space in closed form.

The Riemann tensor of the two-parameter metric splits into six slot
cases on pure lifts (HHH, HHV, HVH, HVV, VVH, VVV); every case is a
pointwise expression in base curvature R, normal curvature R⊥, its
adjoint R̂, covariant derivatives of those, and scalar factors of
|θ|².  The vertical-vertical-vertical case is controlled by three
coefficient functions a, b, c of |θ|².

Three of the case displays circulate in print with defects (a dropped
derivative term in HHH, a wrong prefactor power in HHV, a wrong inner
product and a mislabeled projection in VVH), as does the mixed-plane
sectional denominator.  The corrected forms — the ones that match the
finite-difference oracle — are the default; the defective variants stay
available behind ``variant="uncorrected"`` so the adjudication battery in
:mod:`.fd_oracle` can demonstrate the discrepancy.

Sign and ordering conventions follow :mod:`.submanifold_geometry`:
R̃(A,B)C with R̃(X,Y)Z = ∇̃_X∇̃_Y Z − ∇̃_Y∇̃_X Z − ∇̃_{[X,Y]}Z.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .pq_metric import (ConnectionValue, NormalPoint, PQParams, TotalTangent,
                        omega, omega_sqrtq)
from .sampling import sample_normal_points
from .submanifold_geometry import (chat_apply, crp_apply, hat_apply, rbase_apply,
                                   rp_apply)

__all__ = [
    "VerticalCurvatureCoeffs",
    "SectionalValue",
    "FlatnessReport",
    "abc_coeffs",
    "curvature_tensor",
    "curvature_on_lifts",
    "sectional",
    "orthonormal_total_basis",
    "scalar_curvature",
    "flatness_check",
]

_VARIANTS = ("corrected", "uncorrected")
_SUSPECT_CASES = ("HHH", "HHV", "VVH")


def _check_variant(variant):
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}, got {variant!r}")


def _variant_for(variant, token):
    """Resolve a per-case variant: plain string, or dict by slot case."""
    if isinstance(variant, dict):
        normalized = {k.upper(): val for k, val in variant.items()}
        for key in normalized:
            if key not in _SUSPECT_CASES:
                raise ValueError(f"no defective variant exists for {key!r}")
        v = normalized.get(token, "corrected")
    else:
        v = variant
    _check_variant(v)
    return v


# --------------------------------------------------------------------------
# vertical curvature coefficients
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class VerticalCurvatureCoeffs:
    """Coefficients (a, b, c) of the purely vertical curvature case.

    R̃(ξ^v,η^v)ζ^v = a⟨ζ,θ⟩(⟨η,θ⟩ξ − ⟨ξ,θ⟩η)^v
                    + b(⟨η,ζ⟩ξ − ⟨ξ,ζ⟩η)^v
                    + c(⟨ξ,θ⟩⟨η,ζ⟩ − ⟨η,θ⟩⟨ξ,ζ⟩)Θ.
    """

    a: float
    b: float
    c: float
    p: float
    q: float
    theta_norm2: float

    def consistency_residual(self) -> float:
        """|c − ω_√q (a − q b)|: the exact relation tying c to a, b."""
        wq = 1.0 / (1.0 + self.q * self.theta_norm2)
        return abs(self.c - wq * (self.a - self.q * self.b))


def abc_coeffs(pq: PQParams, theta_norm2: float) -> VerticalCurvatureCoeffs:
    """Vertical curvature coefficients at fiber radius² = theta_norm2."""
    p, q, s = pq.p, pq.q, float(theta_norm2)
    w = 1.0 / (1.0 + s)
    wq = 1.0 / (1.0 + q * s)
    a = p * w**2 * (p + q - 2 - q * s) * wq
    b = (2 * p * w - p**2 * s * w**2 + q) * wq
    c = (p * q * w - q**2
         + w**2 * (p**2 - 2 * p * (1 + q) + p * q * (p - 4) * s)) * wq**2
    return VerticalCurvatureCoeffs(a, b, c, p, q, s)


# --------------------------------------------------------------------------
# six slot cases
# --------------------------------------------------------------------------
def _r_hhh(pq, geom, t, X, Y, Z, variant):
    wp = omega(t) ** pq.p
    h = rbase_apply(geom, X, Y, Z)
    h -= 0.25 * wp * (hat_apply(geom, t, rp_apply(geom, Y, Z, t), X)
                      - hat_apply(geom, t, rp_apply(geom, X, Z, t), Y)
                      - 2.0 * hat_apply(geom, t, rp_apply(geom, X, Y, t), Z))
    if variant == "corrected":
        v = 0.5 * crp_apply(geom, Z, X, Y, t)
    else:
        # defective print: the (∇⊥R⊥) vertical term is absent
        v = np.zeros(geom.codim)
    return h, v


def _r_hhv(pq, geom, t, X, Y, eta, variant):
    w = omega(t)
    wp = w ** pq.p
    wq = omega_sqrtq(pq, t)
    mu = (pq.q + pq.p * w) * wq
    h = 0.5 * wp * (chat_apply(geom, X, t, eta, Y)
                    - chat_apply(geom, Y, t, eta, X))
    v = rp_apply(geom, X, Y, eta)
    v += 0.25 * wp * (rp_apply(geom, Y, hat_apply(geom, t, eta, X), t)
                      - rp_apply(geom, X, hat_apply(geom, t, eta, Y), t))
    # defective print carries ω^p on the next prefactor instead of ω
    factor = pq.p * w if variant == "corrected" else pq.p * wp
    rxyt = rp_apply(geom, X, Y, t)
    v -= factor * (eta @ t) * rxyt
    v += mu * (rxyt @ eta) * t
    return h, v


def _r_hvh(pq, geom, t, X, eta, Z):
    w = omega(t)
    wp = w ** pq.p
    wq = omega_sqrtq(pq, t)
    mu = (pq.q + pq.p * w) * wq
    h = 0.5 * wp * chat_apply(geom, X, t, eta, Z)
    rxzt = rp_apply(geom, X, Z, t)
    v = 0.5 * rp_apply(geom, X, Z, eta)
    v -= 0.5 * pq.p * w * (eta @ t) * rxzt
    v -= 0.25 * wp * rp_apply(geom, X, hat_apply(geom, t, eta, Z), t)
    v += 0.5 * mu * (rxzt @ eta) * t
    return h, v


def _r_hvv(pq, geom, t, X, eta, xi):
    w = omega(t)
    wp = w ** pq.p
    h = 0.5 * pq.p * w * wp * ((eta @ t) * hat_apply(geom, t, xi, X)
                               - (xi @ t) * hat_apply(geom, t, eta, X))
    h -= 0.5 * wp * hat_apply(geom, eta, xi, X)
    h -= 0.25 * wp * wp * hat_apply(geom, t, eta, hat_apply(geom, t, xi, X))
    return h, np.zeros(geom.codim)


def _r_vvh(pq, geom, t, xi, eta, Z, variant):
    w = omega(t)
    wp = w ** pq.p
    h = wp * hat_apply(geom, xi, eta, Z)
    if variant == "corrected":
        h += pq.p * w * wp * ((eta @ t) * hat_apply(geom, t, xi, Z)
                              - (xi @ t) * hat_apply(geom, t, eta, Z))
        h += 0.25 * wp * wp * (
            hat_apply(geom, t, xi, hat_apply(geom, t, eta, Z))
            - hat_apply(geom, t, eta, hat_apply(geom, t, xi, Z)))
        return h, np.zeros(geom.codim)
    # defective print: ⟨η,ξ⟩ in the first product and a vertical label
    # on the commutator bracket (only meaningful when d = d')
    h += pq.p * w * wp * ((eta @ xi) * hat_apply(geom, t, xi, Z)
                          - (xi @ t) * hat_apply(geom, t, eta, Z))
    comm = 0.25 * wp * wp * (
        hat_apply(geom, t, xi, hat_apply(geom, t, eta, Z))
        - hat_apply(geom, t, eta, hat_apply(geom, t, xi, Z)))
    if geom.dim != geom.codim:
        raise DimensionError(
            "the mislabeled vertical projection in the defective "
            "vertical-vertical-horizontal display needs d = d'")
    return h, comm


def _r_vvv(pq, geom, t, xi, eta, zeta):
    co = abc_coeffs(pq, float(t @ t))
    v = (co.a * (zeta @ t) * ((eta @ t) * xi - (xi @ t) * eta)
         + co.b * ((eta @ zeta) * xi - (xi @ zeta) * eta)
         + co.c * ((xi @ t) * (eta @ zeta) - (eta @ t) * (xi @ zeta)) * t)
    return np.zeros(geom.dim), v


def curvature_tensor(pq: PQParams, point: NormalPoint, slots: str,
                     first, second, third,
                     variant: str = "corrected") -> ConnectionValue:
    """R̃ on pure lifts, by slot case.

    ``slots`` ∈ {"HHH","HHV","HVH","HVV","VVH","VVV"} gives the lift
    types of the three arguments in order; H arguments are base
    coordinate components, V arguments frame components.  ``variant``
    is a string for all cases or a dict keyed by suspect case.
    """
    geom = point.geometry
    t = point.t
    a1 = np.asarray(first, float)
    a2 = np.asarray(second, float)
    a3 = np.asarray(third, float)
    token = slots.upper()
    resolved = _variant_for(variant, token)   # also rejects bad dict keys
    if token == "HHH":
        h, v = _r_hhh(pq, geom, t, a1, a2, a3, resolved)
    elif token == "HHV":
        h, v = _r_hhv(pq, geom, t, a1, a2, a3, resolved)
    elif token == "HVH":
        h, v = _r_hvh(pq, geom, t, a1, a2, a3)
    elif token == "HVV":
        h, v = _r_hvv(pq, geom, t, a1, a2, a3)
    elif token == "VVH":
        h, v = _r_vvh(pq, geom, t, a1, a2, a3, resolved)
    elif token == "VVV":
        h, v = _r_vvv(pq, geom, t, a1, a2, a3)
    else:
        raise ValueError(f"unknown slot string {slots!r}")
    return ConnectionValue(h, v)


def curvature_on_lifts(pq: PQParams, point: NormalPoint, A: TotalTangent,
                       B: TotalTangent, C: TotalTangent,
                       variant: str = "corrected") -> ConnectionValue:
    """R̃(A,B)C for arbitrary split tangents, assembled multilinearly.

    Slot cases with a vertical first argument and horizontal second are
    folded in through the antisymmetry R̃(A,B) = −R̃(B,A).  ``variant``
    is a string for all cases or a dict keyed by suspect case.
    """
    geom = point.geometry
    t = point.t
    h = np.zeros(geom.dim)
    v = np.zeros(geom.codim)

    def acc(res, sign=1.0):
        nonlocal h, v
        h = h + sign * res[0]
        v = v + sign * res[1]

    acc(_r_hhh(pq, geom, t, A.horizontal, B.horizontal, C.horizontal,
               _variant_for(variant, "HHH")))
    acc(_r_hhv(pq, geom, t, A.horizontal, B.horizontal, C.vertical,
               _variant_for(variant, "HHV")))
    acc(_r_hvh(pq, geom, t, A.horizontal, B.vertical, C.horizontal))
    acc(_r_hvh(pq, geom, t, B.horizontal, A.vertical, C.horizontal), -1.0)
    acc(_r_hvv(pq, geom, t, A.horizontal, B.vertical, C.vertical))
    acc(_r_hvv(pq, geom, t, B.horizontal, A.vertical, C.vertical), -1.0)
    acc(_r_vvh(pq, geom, t, A.vertical, B.vertical, C.horizontal,
               _variant_for(variant, "VVH")))
    acc(_r_vvv(pq, geom, t, A.vertical, B.vertical, C.vertical))
    return ConnectionValue(h, v)


# --------------------------------------------------------------------------
# sectional curvature
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class SectionalValue:
    """Sectional curvature of a tangent plane of the total space."""

    value: float
    plane: str


def sectional(pq: PQParams, point: NormalPoint, plane: str, first, second,
              variant: str = "corrected") -> SectionalValue:
    """K̃ of a plane spanned by two lifts.

    plane "HH": two base vectors (coordinate components);
    plane "HV": base vector and normal vector;
    plane "VV": two normal vectors (frame components).
    Inputs are normalized internally, so any spanning pair works.
    ``variant`` switches the mixed-plane denominator to its defective
    printed form (q⟨η,θ⟩ squared as a unit instead of q·⟨η,θ⟩²).
    """
    _check_variant(variant)
    geom = point.geometry
    t = point.t
    g = geom.g
    d, dp = geom.dim, geom.codim
    token = plane.upper()
    X = np.asarray(first, float)
    Y = np.asarray(second, float)
    if token == "HH":
        if d < 2:
            raise DimensionError("horizontal planes need base dimension >= 2")
        gram = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
        if gram <= 0:
            raise ValueError("degenerate horizontal plane")
        base = rbase_apply(geom, X, Y, Y) @ g @ X
        r = rp_apply(geom, X, Y, t)
        wp = omega(t) ** pq.p
        return SectionalValue(float((base - 0.75 * wp * (r @ r)) / gram), token)
    if token == "HV":
        nX = np.sqrt(X @ g @ X)
        nE = np.linalg.norm(Y)
        if nX == 0.0 or nE == 0.0:
            raise ValueError("degenerate mixed plane")
        Xn, etan = X / nX, Y / nE
        wp = omega(t) ** pq.p
        vec = hat_apply(geom, t, etan, Xn)
        et = etan @ t
        den = 1.0 + pq.q * et**2 if variant == "corrected" \
            else 1.0 + (pq.q * et) ** 2
        return SectionalValue(float(0.25 * wp * (vec @ g @ vec) / den), token)
    if token == "VV":
        if dp < 2:
            raise DimensionError("vertical planes need codimension >= 2")
        xi = X / np.linalg.norm(X)
        eta = Y - (Y @ xi) * xi
        neta = np.linalg.norm(eta)
        if neta < 1e-14:
            raise ValueError("degenerate vertical plane")
        eta = eta / neta
        z = (xi @ t) ** 2 + (eta @ t) ** 2
        co = abc_coeffs(pq, float(t @ t))
        wmp = omega(t) ** (-pq.p)
        return SectionalValue(
            float(wmp * (co.b + co.a * z) / (1.0 + pq.q * z)), token)
    raise ValueError(f"no plane of type {plane!r}")


# --------------------------------------------------------------------------
# adapted orthonormal basis and scalar curvature
# --------------------------------------------------------------------------
def _g_orthonormal_base(geom):
    """Deterministic g-orthonormalization of the coordinate basis."""
    d = geom.dim
    g = geom.g
    out = []
    for i in range(d):
        v = np.eye(d)[i]
        for x in out:
            v = v - (v @ g @ x) * x
        n2 = v @ g @ v
        out.append(v / np.sqrt(n2))
    return out


def _euclid_complete(t, dp):
    """Euclidean ON fiber basis starting with t/|t| (deterministic)."""
    xi1 = t / np.linalg.norm(t)
    out = [xi1]
    for a in range(dp):
        v = np.eye(dp)[a]
        for x in out:
            v = v - (v @ x) * x
        n2 = v @ v
        if n2 < 1e-12:
            continue
        out.append(v / np.sqrt(n2))
        if len(out) == dp:
            break
    return out


def orthonormal_total_basis(pq: PQParams, point: NormalPoint):
    """An h-orthonormal basis of the total tangent space at the point.

    Horizontal part: g-orthonormalized coordinate lifts.  Vertical part:
    at θ ≠ 0 the frame starts with θ/|θ| rescaled by the radial norm
    factor, the rest rescaled by ω^{-p/2}; at θ = 0 the plain frame
    lifts.  Returns d + d' TotalTangent vectors, horizontal first.
    """
    geom = point.geometry
    t = point.t
    d, dp = geom.dim, geom.codim
    s = float(t @ t)
    w = omega(t)
    wq = omega_sqrtq(pq, t)
    basis = [TotalTangent(X, np.zeros(dp)) for X in _g_orthonormal_base(geom)]
    if s < 1e-28:
        for a in range(dp):
            basis.append(TotalTangent(np.zeros(d), np.eye(dp)[a]))
        return basis
    fiber = _euclid_complete(t, dp)
    radial_scale = np.sqrt(wq / w**pq.p)
    basis.append(TotalTangent(np.zeros(d), radial_scale * fiber[0]))
    for xi in fiber[1:]:
        basis.append(TotalTangent(np.zeros(d), xi / np.sqrt(w**pq.p)))
    return basis


def scalar_curvature(pq: PQParams, point: NormalPoint) -> float:
    """Scalar curvature S̃ of the total space at the point.

    S̃ = S − (3/4)ωᵖ Σ_{i,j} |R⊥(X_i,X_j)θ|²
          + (1/2)ωᵖ Σ_{i,a} |R̂(θ,ξ_a)X_i|²_g
          + (d'−1) ω⁻ᵖ ω_√q (2a|θ|² + b(d' + (d'−2) q |θ|²))

    over any g-orthonormal base frame X_i and Euclidean-orthonormal
    fiber frame ξ_a; terms that need two base or two fiber directions
    vanish identically in dimension one.
    """
    geom = point.geometry
    t = point.t
    d, dp = geom.dim, geom.codim
    s = float(t @ t)
    w = omega(t)
    wp = w ** pq.p
    wq = omega_sqrtq(pq, t)
    co = abc_coeffs(pq, s)
    Xs = _g_orthonormal_base(geom)
    g = geom.g

    sum_rp = 0.0
    for Xi in Xs:
        for Xj in Xs:
            r = rp_apply(geom, Xi, Xj, t)
            sum_rp += r @ r
    sum_hat = 0.0
    for Xi in Xs:
        for a in range(dp):
            vec = hat_apply(geom, t, np.eye(dp)[a], Xi)
            sum_hat += vec @ g @ vec
    tail = (dp - 1) * (2 * co.a * s + co.b * (dp + (dp - 2) * pq.q * s)) \
        * wq / wp
    return float(geom.scalar - 0.75 * wp * sum_rp + 0.5 * wp * sum_hat + tail)


# --------------------------------------------------------------------------
# flatness probe
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class FlatnessReport:
    max_abs: float
    witness: tuple
    flat: bool
    tolerance: float
    n_samples: int


def flatness_check(pq: PQParams, sub, samples=None, count: int = 16,
                   tol: float = 1e-7) -> FlatnessReport:
    """Probe max |R̃| over sample points and all pure-lift slot triples."""
    if samples is None:
        U, T, _ = sample_normal_points(sub, count)
    else:
        U, T = samples
        count = len(U)
    d, dp = sub.dim, sub.codim
    m = d + dp
    worst = 0.0
    witness = None
    for k in range(count):
        point = NormalPoint(sub, U[k], T[k])
        lifts = [TotalTangent(np.eye(d)[i], np.zeros(dp)) for i in range(d)] \
            + [TotalTangent(np.zeros(d), np.eye(dp)[a]) for a in range(dp)]
        for i in range(m):
            for j in range(i + 1, m):
                for l in range(m):
                    val = curvature_on_lifts(pq, point, lifts[i], lifts[j],
                                             lifts[l])
                    mag = val.max_abs()
                    if mag > worst:
                        worst = mag
                        witness = (k, i, j, l)
    return FlatnessReport(float(worst), witness, worst < tol, tol, count)

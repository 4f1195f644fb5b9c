"""The two-parameter family of metrics on the total space of T⊥L.

For parameters (p, q), q ≥ 0, the metric on the normal bundle of
L ⊂ ℝⁿ is, in terms of the horizontal/vertical splitting induced by the
normal connection,

    h(A, B) = ⟨π⋆A, π⋆B⟩ + ωᵖ (⟨KA, KB⟩ + q ⟨KA, θ⟩ ⟨KB, θ⟩),

where θ is the fiber point, ω = 1/(1 + |θ|²), π⋆ the horizontal and K
the vertical projection.  (0,0) is the Sasaki metric and (1,1) the
Cheeger-Gromoll metric.  This module evaluates the metric, its
Levi-Civita connection on lifted fields (in closed form, no finite
differences), the derivative rules for lifted bundle morphisms, and the
Lie brackets of lifts.

Vertical vectors are frame components against the fixed normal-frame
gauge of :mod:`.submanifold_geometry`; horizontal vectors are base
coordinate components.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, UnsupportedMorphism
from .submanifold_geometry import base_geometry, hat_apply, rp_apply

__all__ = [
    "PQParams",
    "NormalPoint",
    "TotalTangent",
    "ConnectionValue",
    "VerticalMorphism",
    "HorizontalMorphism",
    "omega",
    "omega_sqrtq",
    "nu_mu",
    "metric_eval",
    "levi_civita",
    "lift_derivative_morphism",
    "canonical_vertical_derivative",
    "bracket_lifts",
    "horizontal_lift",
    "vertical_lift",
    "theta_lift",
    "coordinate_connection",
]


@dataclass(frozen=True)
class PQParams:
    """Metric parameters (p, q) with q ≥ 0."""

    p: float
    q: float

    def __post_init__(self):
        if self.q < 0:
            raise InvalidInput(f"q must be nonnegative, got {self.q}")

    @classmethod
    def sasaki(cls):
        return cls(0.0, 0.0)

    @classmethod
    def cheeger_gromoll(cls):
        return cls(1.0, 1.0)


@dataclass
class NormalPoint:
    """A point of the total space: base chart point u, fiber components t."""

    sub: object
    u: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, float)
        self.t = np.asarray(self.t, float)
        if self.u.shape != (self.sub.dim,):
            raise ValueError(f"u has shape {self.u.shape}, expected "
                             f"({self.sub.dim},)")
        if self.t.shape != (self.sub.codim,):
            raise ValueError(f"t has shape {self.t.shape}, expected "
                             f"({self.sub.codim},)")

    @property
    def geometry(self):
        return base_geometry(self.sub, self.u)

    @property
    def theta_norm2(self) -> float:
        return float(self.t @ self.t)


@dataclass
class TotalTangent:
    """Tangent vector of the total space, split as (horizontal, vertical).

    ``horizontal`` holds base coordinate components (length d),
    ``vertical`` holds normal-frame components (length d').
    """

    horizontal: np.ndarray
    vertical: np.ndarray

    def __post_init__(self):
        self.horizontal = np.asarray(self.horizontal, float)
        self.vertical = np.asarray(self.vertical, float)

    def __add__(self, other):
        return type(self)(self.horizontal + other.horizontal,
                          self.vertical + other.vertical)

    def __sub__(self, other):
        return type(self)(self.horizontal - other.horizontal,
                          self.vertical - other.vertical)

    def __mul__(self, scalar):
        return type(self)(scalar * self.horizontal, scalar * self.vertical)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def max_abs(self) -> float:
        h = np.max(np.abs(self.horizontal)) if self.horizontal.size else 0.0
        v = np.max(np.abs(self.vertical)) if self.vertical.size else 0.0
        return float(max(h, v))


class ConnectionValue(TotalTangent):
    """A covariant-derivative value ∇̃_A B at a point (a total tangent)."""


def horizontal_lift(point: NormalPoint, X) -> TotalTangent:
    """X^h at the point, X in base coordinate components."""
    return TotalTangent(np.asarray(X, float), np.zeros(point.sub.codim))


def vertical_lift(point: NormalPoint, xi) -> TotalTangent:
    """ξ^v at the point, ξ in frame components."""
    return TotalTangent(np.zeros(point.sub.dim), np.asarray(xi, float))


def theta_lift(point: NormalPoint) -> TotalTangent:
    """The canonical vertical field Θ at the point (vanishes at t = 0)."""
    return TotalTangent(np.zeros(point.sub.dim), point.t.copy())


# --------------------------------------------------------------------------
# scalar factors
# --------------------------------------------------------------------------
def omega(t) -> float:
    """ω = 1/(1 + |t|²)."""
    t = np.asarray(t, float)
    return 1.0 / (1.0 + t @ t)


def omega_sqrtq(pq: PQParams, t) -> float:
    """ω_√q = 1/(1 + q |t|²)."""
    t = np.asarray(t, float)
    return 1.0 / (1.0 + pq.q * (t @ t))


def nu_mu(pq: PQParams, t):
    """The vertical-connection coefficients (ν, μ).

    ν = p·q·ω·ω_√q and μ = (q + p·ω)·ω_√q.
    """
    w = omega(t)
    wq = omega_sqrtq(pq, t)
    return pq.p * pq.q * w * wq, (pq.q + pq.p * w) * wq


# --------------------------------------------------------------------------
# metric
# --------------------------------------------------------------------------
def metric_eval(pq: PQParams, point: NormalPoint, A: TotalTangent,
                B: TotalTangent) -> float:
    """h(A, B) at the point."""
    g = point.geometry.g
    t = point.t
    wp = omega(t) ** pq.p
    horiz = A.horizontal @ g @ B.horizontal
    vert = A.vertical @ B.vertical \
        + pq.q * (A.vertical @ t) * (B.vertical @ t)
    return float(horiz + wp * vert)


# --------------------------------------------------------------------------
# Levi-Civita connection on lifts
# --------------------------------------------------------------------------
def _lc_vv(pq: PQParams, t, xi, eta):
    """Vertical-vertical case: ∇̃_{ξ^v} η^v as (h, v) components.

    −pω(⟨ξ,θ⟩η + ⟨η,θ⟩ξ)^v + (ν⟨ξ,θ⟩⟨η,θ⟩ + μ⟨ξ,η⟩)Θ — purely
    vertical, tensorial in both arguments.
    """
    w = omega(t)
    nu, mu = nu_mu(pq, t)
    v = -pq.p * w * ((xi @ t) * eta + (eta @ t) * xi) \
        + (nu * (xi @ t) * (eta @ t) + mu * (xi @ eta)) * t
    return v


def levi_civita(pq: PQParams, point: NormalPoint, case: str, first, second,
                derivative=None) -> ConnectionValue:
    """∇̃ on lifted fields, by slot case.

    Parameters
    ----------
    case : {"HH", "HV", "VH", "VV"}
        Slot types of (direction, argument): H = horizontal lift of a
        base field, V = vertical lift of a normal field.
    first, second : arrays
        Component vectors of the two fields at the point (coordinate
        components for H slots, frame components for V slots).
    derivative : array, optional
        The derivative part of the argument field along the direction:
        ∇_X Y (coordinate components) for "HH", ∇⊥_X η (frame
        components) for "HV".  Defaults to zero, i.e. fields extended
        parallel at the point.  "VH" and "VV" need none.

    Returns
    -------
    ConnectionValue
        Closed-form value; no finite differences involved.
    """
    geom = point.geometry
    t = point.t
    d, dp = point.sub.dim, point.sub.codim
    wp = omega(t) ** pq.p
    case = case.upper()
    first = np.asarray(first, float)
    second = np.asarray(second, float)
    if case == "HH":
        h = np.asarray(derivative, float) if derivative is not None \
            else np.zeros(d)
        v = -0.5 * rp_apply(geom, first, second, t)
        return ConnectionValue(h, v)
    if case == "HV":
        h = 0.5 * wp * hat_apply(geom, t, second, first)
        v = np.asarray(derivative, float) if derivative is not None \
            else np.zeros(dp)
        return ConnectionValue(h, v)
    if case == "VH":
        h = 0.5 * wp * hat_apply(geom, t, first, second)
        return ConnectionValue(h, np.zeros(dp))
    if case == "VV":
        return ConnectionValue(np.zeros(d), _lc_vv(pq, t, first, second))
    raise ValueError(f"unknown case {case!r}")


# --------------------------------------------------------------------------
# lifted bundle morphisms
# --------------------------------------------------------------------------
@dataclass
class VerticalMorphism:
    """A bundle endomorphism F of T⊥L, lifted to the vertical field F(θ)^v.

    ``matrix`` is F in frame components (d'×d'); ``cov`` optionally
    holds the covariant derivatives (∇⊥_i F) as an array (d, d', d') —
    required for derivatives in horizontal directions.
    """

    matrix: np.ndarray
    cov: np.ndarray | None = None


@dataclass
class HorizontalMorphism:
    """A bundle map G : T⊥L → TL, lifted to the horizontal field G(θ)^h.

    ``matrix`` maps frame components to coordinate components (d×d');
    ``cov`` optionally holds (∇_i G) as an array (d, d, d').
    """

    matrix: np.ndarray
    cov: np.ndarray | None = None


def lift_derivative_morphism(pq: PQParams, point: NormalPoint,
                             direction: TotalTangent,
                             morphism) -> ConnectionValue:
    """∇̃ of a morphism-lifted field along a total tangent direction.

    The four branches (vertical/horizontal direction × vertical/
    horizontal morphism lift) are closed-form.  Horizontal directions
    need the morphism's ``cov`` data; otherwise
    :class:`UnsupportedMorphism` is raised.
    """
    geom = point.geometry
    t = point.t
    d, dp = point.sub.dim, point.sub.codim
    w = omega(t)
    wp = w ** pq.p
    nu, mu = nu_mu(pq, t)
    xi = direction.vertical
    X = direction.horizontal
    has_v = np.any(xi != 0.0)
    has_h = np.any(X != 0.0)

    h_out = np.zeros(d)
    v_out = np.zeros(dp)
    if isinstance(morphism, VerticalMorphism):
        F = np.asarray(morphism.matrix, float)
        Ft = F @ t
        if has_v:
            v_out += F @ xi
            v_out += -pq.p * w * ((xi @ t) * Ft + (Ft @ t) * xi)
            v_out += (mu * (xi @ Ft) + nu * (xi @ t) * (Ft @ t)) * t
        if has_h:
            if morphism.cov is None:
                raise UnsupportedMorphism(
                    "horizontal derivative of a vertical morphism lift "
                    "requires cov data")
            h_out += 0.5 * wp * hat_apply(geom, t, Ft, X)
            v_out += np.einsum("i,iba,a->b", X, morphism.cov, t)
        return ConnectionValue(h_out, v_out)
    if isinstance(morphism, HorizontalMorphism):
        G = np.asarray(morphism.matrix, float)
        Gt = G @ t
        if has_v:
            h_out += G @ xi
            h_out += 0.5 * wp * hat_apply(geom, t, xi, Gt)
        if has_h:
            if morphism.cov is None:
                raise UnsupportedMorphism(
                    "horizontal derivative of a horizontal morphism lift "
                    "requires cov data")
            h_out += np.einsum("i,ila,a->l", X, morphism.cov, t)
            v_out += -0.5 * rp_apply(geom, X, Gt, t)
        return ConnectionValue(h_out, v_out)
    raise TypeError(f"unsupported morphism type {type(morphism).__name__}")


def canonical_vertical_derivative(pq: PQParams, point: NormalPoint,
                                  direction: TotalTangent) -> ConnectionValue:
    """∇̃ of the canonical vertical field Θ along a direction.

    Vertical direction ξ^v:  (1 − pω|θ|²) ξ^v + q ω_√q ⟨ξ,θ⟩ Θ.
    Horizontal directions give zero.
    """
    t = point.t
    s = point.theta_norm2
    w = omega(t)
    wq = omega_sqrtq(pq, t)
    xi = direction.vertical
    v = (1.0 - pq.p * w * s) * xi + pq.q * wq * (xi @ t) * t
    return ConnectionValue(np.zeros(point.sub.dim), v)


# --------------------------------------------------------------------------
# Lie brackets of lifts
# --------------------------------------------------------------------------
def bracket_lifts(point: NormalPoint, case: str, first=None, second=None,
                  derivative=None, lie=None) -> TotalTangent:
    """Lie brackets of lifted fields (metric-independent).

    Cases: "VV" → 0;  "HV" → (∇⊥_X η)^v (pass via ``derivative``,
    default 0);  "HH" → [X,Y]^h − (R⊥(X,Y)θ)^v (base bracket via
    ``lie``, default 0);  "VTheta" → ξ^v;  "HTheta" → 0.
    """
    d, dp = point.sub.dim, point.sub.codim
    token = case.upper()
    if token == "VV":
        return TotalTangent(np.zeros(d), np.zeros(dp))
    if token == "HV":
        v = np.asarray(derivative, float) if derivative is not None \
            else np.zeros(dp)
        return TotalTangent(np.zeros(d), v)
    if token == "HH":
        X = np.asarray(first, float)
        Y = np.asarray(second, float)
        h = np.asarray(lie, float) if lie is not None else np.zeros(d)
        v = -rp_apply(point.geometry, X, Y, point.t)
        return TotalTangent(h, v)
    if token == "VTHETA":
        return TotalTangent(np.zeros(d), np.asarray(first, float))
    if token == "HTHETA":
        return TotalTangent(np.zeros(d), np.zeros(dp))
    raise ValueError(f"unknown case {case!r}")


# --------------------------------------------------------------------------
# connection on chart coordinate fields (for oracle comparison)
# --------------------------------------------------------------------------
def coordinate_connection(pq: PQParams, point: NormalPoint):
    """∇̃ of the chart coordinate frame, as lift components.

    The chart of the total space is (u, t); its coordinate fields split
    as ∂_i = (e_i)^h + (A_i θ)^v and ∂_{t^a} = (e_a)^v.  Returns a pair
    of arrays (H, V) of shapes (m, m, d) and (m, m, d'), m = d + d',
    with (H[α,β], V[α,β]) the lift components of ∇̃_{∂_α} ∂_β.

    The field variation of the vertical parts A_j θ contributes
    connection-coefficient derivatives ∂_i A_j; everything else is the
    pointwise closed form.
    """
    geom = point.geometry
    t = point.t
    d, dp = point.sub.dim, point.sub.codim
    m = d + dp
    wp = omega(t) ** pq.p
    A = geom.A
    dA = geom.dA
    c = np.array([A[i] @ t for i in range(d)])

    H = np.zeros((m, m, d))
    V = np.zeros((m, m, dp))

    for i in range(d):
        for j in range(d):
            # horizontal-horizontal block of ∂_i, ∂_j plus all the
            # cross terms generated by the vertical parts c_i, c_j
            H[i, j] += geom.christoffel[:, i, j]
            V[i, j] += -0.5 * rp_apply(geom, np.eye(d)[i], np.eye(d)[j], t)
            H[i, j] += 0.5 * wp * hat_apply(geom, t, c[j], np.eye(d)[i])
            V[i, j] += dA[i, j] @ t + A[i] @ c[j] - A[j] @ c[i]
            H[i, j] += 0.5 * wp * hat_apply(geom, t, c[i], np.eye(d)[j])
            V[i, j] += A[j] @ c[i]
            V[i, j] += _lc_vv(pq, t, c[i], c[j])
        for a in range(dp):
            e_a = np.eye(dp)[a]
            H[i, d + a] += 0.5 * wp * hat_apply(geom, t, e_a, np.eye(d)[i])
            V[i, d + a] += A[i] @ e_a + _lc_vv(pq, t, c[i], e_a)
            H[d + a, i] = H[i, d + a]       # torsion-free symmetry
            V[d + a, i] = V[i, d + a]
    for a in range(dp):
        for b in range(dp):
            V[d + a, d + b] = _lc_vv(pq, t, np.eye(dp)[a], np.eye(dp)[b])
    return H, V

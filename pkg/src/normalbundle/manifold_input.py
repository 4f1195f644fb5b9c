"""Embedded submanifolds of Euclidean space, given by explicit charts.

A submanifold L ⊂ ℝⁿ is described by a chart f : U ⊂ ℝᵈ → ℝⁿ together
with a rectangular domain box.  Downstream geometry needs first and
second chart derivatives analytically (third order is available for the
builtin presets).  Builtin presets hand-code exact derivatives and are
safe to evaluate at complex arguments, which the geometry layer exploits
for complex-step differentiation.  User charts can be supplied as
polynomial or Fourier coefficient tables (differentiated exactly) or as
raw callables (differentiated by central finite differences).

An optional orthogonal ambient complex structure J (with J² = −I) can be
attached when n = 2d; it is only usable downstream when J maps tangent
spaces to normal spaces (the totally-real condition), which is checked
at the point of use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StepError

__all__ = [
    "AmbientComplexStructure",
    "EmbeddedSubmanifold",
    "PresetChart",
    "PolynomialChart",
    "FourierChart",
    "CallableChart",
    "builtin_presets",
    "get_preset",
]


# --------------------------------------------------------------------------
# chart backends
# --------------------------------------------------------------------------
class PresetChart:
    """Chart with hand-coded exact derivative callables.

    Parameters
    ----------
    value, jacobian, second, third : callables
        ``value(u) -> (n,)``, ``jacobian(u) -> (d, n)``,
        ``second(u) -> (d, d, n)``, ``third(u) -> (d, d, d, n)``.
        All must preserve complex dtype (analytic expressions only).
    """

    complex_ok = True
    order_available = 3
    stencil_reach = 0.0

    def __init__(self, dim, ambient_dim, value, jacobian, second, third):
        self.dim = dim
        self.ambient_dim = ambient_dim
        self._value = value
        self._jac = jacobian
        self._second = second
        self._third = third

    def value(self, u):
        return self._value(u)

    def jacobian(self, u):
        return self._jac(u)

    def second(self, u):
        return self._second(u)

    def third(self, u):
        return self._third(u)


class PolynomialChart:
    """Chart given by a polynomial coefficient table.

    ``terms`` maps exponent multi-indices (tuples of length d) to
    coefficient vectors in ℝⁿ:  f(u) = Σ c_α u^α.  Derivatives of any
    order are exact; the table is differentiated symbolically once at
    construction.
    """

    complex_ok = True
    order_available = 3
    stencil_reach = 0.0

    def __init__(self, dim, ambient_dim, terms):
        self.dim = dim
        self.ambient_dim = ambient_dim
        self.terms = {tuple(int(e) for e in k): np.asarray(v, float)
                      for k, v in dict(terms).items()}
        for k, v in self.terms.items():
            if len(k) != dim or min(k) < 0:
                raise ValueError(f"bad exponent multi-index {k}")
            if v.shape != (ambient_dim,):
                raise ValueError(f"coefficient for {k} has shape {v.shape}")

    @staticmethod
    def _diff(terms, i):
        out = {}
        for expo, coeff in terms.items():
            if expo[i] == 0:
                continue
            new = list(expo)
            new[i] -= 1
            key = tuple(new)
            add = expo[i] * coeff
            out[key] = out.get(key, 0) + add
        return out

    def _eval_terms(self, terms, u):
        u = np.asarray(u)
        out = np.zeros(self.ambient_dim, dtype=np.result_type(u, float))
        for expo, coeff in terms.items():
            mono = 1.0
            for ui, e in zip(u, expo):
                if e:
                    mono = mono * ui ** e
            out = out + mono * coeff
        return out

    def value(self, u):
        return self._eval_terms(self.terms, u)

    def jacobian(self, u):
        d, n = self.dim, self.ambient_dim
        out = np.empty((d, n), dtype=np.result_type(np.asarray(u), float))
        for i in range(d):
            out[i] = self._eval_terms(self._diff(self.terms, i), u)
        return out

    def second(self, u):
        d, n = self.dim, self.ambient_dim
        out = np.empty((d, d, n), dtype=np.result_type(np.asarray(u), float))
        for i in range(d):
            ti = self._diff(self.terms, i)
            for j in range(d):
                out[i, j] = self._eval_terms(self._diff(ti, j), u)
        return out

    def third(self, u):
        d, n = self.dim, self.ambient_dim
        out = np.empty((d, d, d, n), dtype=np.result_type(np.asarray(u), float))
        for i in range(d):
            ti = self._diff(self.terms, i)
            for j in range(d):
                tij = self._diff(ti, j)
                for k in range(d):
                    out[i, j, k] = self._eval_terms(self._diff(tij, k), u)
        return out


class FourierChart:
    """Chart built from trigonometric terms.

    ``terms`` is a list of ``(freq, cos_coeff, sin_coeff)`` with ``freq``
    a length-d tuple and the coefficients vectors in ℝⁿ:
    f(u) = Σ cos(k·u) a_k + sin(k·u) b_k.  Exact derivatives follow from
    the rotation (a, b) → (k_i b, −k_i a) per differentiation in u_i.
    """

    complex_ok = True
    order_available = 3
    stencil_reach = 0.0

    def __init__(self, dim, ambient_dim, terms):
        self.dim = dim
        self.ambient_dim = ambient_dim
        self.terms = [(np.asarray(k, float), np.asarray(a, float),
                       np.asarray(b, float)) for k, a, b in terms]
        for k, a, b in self.terms:
            if k.shape != (dim,) or a.shape != (ambient_dim,) or b.shape != (ambient_dim,):
                raise ValueError("inconsistent Fourier term shapes")

    @staticmethod
    def _rotate(term, i):
        k, a, b = term
        return (k, k[i] * b, -k[i] * a)

    def _eval(self, terms, u):
        u = np.asarray(u)
        out = np.zeros(self.ambient_dim, dtype=np.result_type(u, float))
        for k, a, b in terms:
            phase = k @ u
            out = out + np.cos(phase) * a + np.sin(phase) * b
        return out

    def value(self, u):
        return self._eval(self.terms, u)

    def jacobian(self, u):
        d, n = self.dim, self.ambient_dim
        out = np.empty((d, n), dtype=np.result_type(np.asarray(u), float))
        for i in range(d):
            out[i] = self._eval([self._rotate(t, i) for t in self.terms], u)
        return out

    def second(self, u):
        d, n = self.dim, self.ambient_dim
        out = np.empty((d, d, n), dtype=np.result_type(np.asarray(u), float))
        for i in range(d):
            ti = [self._rotate(t, i) for t in self.terms]
            for j in range(d):
                out[i, j] = self._eval([self._rotate(t, j) for t in ti], u)
        return out

    def third(self, u):
        d, n = self.dim, self.ambient_dim
        out = np.empty((d, d, d, n), dtype=np.result_type(np.asarray(u), float))
        for i in range(d):
            ti = [self._rotate(t, i) for t in self.terms]
            for j in range(d):
                tij = [self._rotate(t, j) for t in ti]
                for k in range(d):
                    out[i, j, k] = self._eval([self._rotate(t, k) for t in tij], u)
        return out


class CallableChart:
    """Chart given by an opaque callable; derivatives by central FD.

    Only orders 1 and 2 are available, and evaluation near the domain
    boundary raises :class:`StepError` when the stencil would leave the
    box (enforced by ``EmbeddedSubmanifold``, which knows the box).
    """

    complex_ok = False
    order_available = 2

    def __init__(self, dim, ambient_dim, fn, step=1e-4):
        if step <= 0:
            raise StepError(f"FD step must be positive, got {step}")
        self.dim = dim
        self.ambient_dim = ambient_dim
        self.fn = fn
        self.step = float(step)

    @property
    def stencil_reach(self):
        return 2.0 * self.step

    def value(self, u):
        return np.asarray(self.fn(np.asarray(u, float)), float)

    def jacobian(self, u):
        u = np.asarray(u, float)
        h = self.step
        out = np.empty((self.dim, self.ambient_dim))
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            out[i] = (self.value(u + e) - self.value(u - e)) / (2 * h)
        return out

    def second(self, u):
        u = np.asarray(u, float)
        h = self.step
        d = self.dim
        out = np.empty((d, d, self.ambient_dim))
        f0 = self.value(u)
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = h
            out[i, i] = (self.value(u + ei) - 2 * f0 + self.value(u - ei)) / h**2
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = h
                out[i, j] = out[j, i] = (
                    self.value(u + ei + ej) - self.value(u + ei - ej)
                    - self.value(u - ei + ej) + self.value(u - ei - ej)
                ) / (4 * h**2)
        return out

    def third(self, u):
        raise StepError("third derivatives are not available for callable "
                        "charts (order_available = 2)")


# --------------------------------------------------------------------------
# ambient complex structure
# --------------------------------------------------------------------------
@dataclass
class AmbientComplexStructure:
    """An orthogonal ambient complex structure J on ℝⁿ.

    Validates J² = −I and JᵀJ = I at construction.  Whether J pairs with
    a given submanifold (J maps tangents to normals) is a pointwise
    property; use :meth:`totally_real_deviation`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.matrix, float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("J must be square")
        n = J.shape[0]
        if np.max(np.abs(J @ J + np.eye(n))) > 1e-12:
            raise ValueError("J^2 != -I")
        if np.max(np.abs(J.T @ J - np.eye(n))) > 1e-12:
            raise ValueError("J is not orthogonal")
        self.matrix = J

    @property
    def ambient_dim(self):
        return self.matrix.shape[0]

    def totally_real_deviation(self, sub, u) -> float:
        """max_{i,j} |⟨J ∂_i f, ∂_j f⟩| over unit-normalized tangents.

        Zero means J maps every tangent vector into the normal space at
        f(u) (totally real position).
        """
        F = sub.chart_derivatives(u, order=1)
        norms = np.sqrt(np.einsum("ik,ik->i", F, F))
        M = F @ self.matrix.T @ F.T / np.outer(norms, norms)
        return float(np.max(np.abs(M)))

    def is_totally_real(self, sub, u, tol=1e-9) -> bool:
        return self.totally_real_deviation(sub, u) < tol


# --------------------------------------------------------------------------
# submanifold
# --------------------------------------------------------------------------
class EmbeddedSubmanifold:
    """An embedded submanifold of ℝⁿ with a rectangular chart domain.

    Parameters
    ----------
    chart : chart backend
        One of the chart classes above.
    domain_box : (d, 2) array
        Closed coordinate box [lo, hi] per base direction.
    preset_name : str, optional
    ambient_complex : AmbientComplexStructure, optional
        Requires ``ambient_dim == 2 * dim``.
    frame_pivots : sequence of int, optional
        Ambient coordinate indices used (in order) to seed Gram-Schmidt
        for the normal frame; defaults to 0..n-1.
    """

    def __init__(self, chart, domain_box, preset_name=None,
                 ambient_complex=None, frame_pivots=None):
        self.chart = chart
        self.dim = chart.dim
        self.ambient_dim = chart.ambient_dim
        self.codim = self.ambient_dim - self.dim
        if self.codim < 1:
            raise ValueError("ambient dimension must exceed base dimension")
        box = np.asarray(domain_box, float)
        if box.shape != (self.dim, 2) or np.any(box[:, 1] <= box[:, 0]):
            raise ValueError(f"bad domain box of shape {box.shape}")
        self.domain_box = box
        self.preset_name = preset_name
        if ambient_complex is not None and \
                ambient_complex.ambient_dim != self.ambient_dim:
            raise ValueError("ambient complex structure dimension mismatch")
        if ambient_complex is not None and self.ambient_dim != 2 * self.dim:
            raise ValueError("ambient complex structure requires n = 2d")
        self.ambient_complex = ambient_complex
        self.frame_pivots = tuple(frame_pivots) if frame_pivots is not None \
            else tuple(range(self.ambient_dim))
        self.derivative_order_available = chart.order_available
        self._geom_cache = {}

    # -- domain ------------------------------------------------------------
    def contains(self, u, slack=1e-12) -> bool:
        ur = np.real(np.asarray(u))
        if ur.shape != (self.dim,):
            return False
        return bool(np.all(ur >= self.domain_box[:, 0] - slack)
                    and np.all(ur <= self.domain_box[:, 1] + slack))

    def _require_inside(self, u):
        if not self.contains(u):
            raise DomainError(
                f"point {np.real(np.asarray(u))} outside domain box of "
                f"{self.preset_name or 'chart'}")

    # -- evaluation --------------------------------------------------------
    def evaluate_chart(self, u):
        """Chart value f(u) ∈ ℝⁿ; DomainError outside the box."""
        self._require_inside(u)
        return self.chart.value(u)

    def chart_derivatives(self, u, order: int):
        """Exact (or FD) chart derivative array of the requested order.

        order 1 → (d, n); order 2 → (d, d, n); order 3 → (d, d, d, n).
        """
        self._require_inside(u)
        if order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {order}")
        if order > self.chart.order_available:
            raise StepError(f"chart provides derivatives up to order "
                            f"{self.chart.order_available}, requested {order}")
        reach = getattr(self.chart, "stencil_reach", 0.0)
        if reach > 0.0:
            ur = np.real(np.asarray(u))
            if np.any(ur - reach < self.domain_box[:, 0]) or \
                    np.any(ur + reach > self.domain_box[:, 1]):
                raise StepError(
                    f"FD stencil of reach {reach} leaves the domain box "
                    f"around {ur}")
        if order == 1:
            return self.chart.jacobian(u)
        if order == 2:
            return self.chart.second(u)
        return self.chart.third(u)

    def __repr__(self):
        name = self.preset_name or type(self.chart).__name__
        return (f"EmbeddedSubmanifold({name}, d={self.dim}, "
                f"n={self.ambient_dim})")


# --------------------------------------------------------------------------
# builtin presets
# --------------------------------------------------------------------------
def _interleaved_complex_structure(k: int) -> AmbientComplexStructure:
    """Standard J on ℝ²ᵏ with coordinates (x₁,y₁,…,x_k,y_k)."""
    J = np.zeros((2 * k, 2 * k))
    for j in range(k):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return AmbientComplexStructure(J)


def _zeros_like_factory(shape_tail):
    def maker(u):
        u = np.asarray(u)
        return np.zeros(shape_tail, dtype=np.result_type(u, float))
    return maker


def preset_plane_r2_in_r4() -> EmbeddedSubmanifold:
    """Flat plane (u₁, u₂, 0, 0) ⊂ ℝ⁴: everything intrinsic vanishes."""
    def f(u):
        u1, u2 = u
        z = 0.0 * u1
        return np.array([u1, u2, z, z])

    def jac(u):
        u1, _ = u
        one, z = 1.0 + 0.0 * u1, 0.0 * u1
        return np.array([[one, z, z, z], [z, one, z, z]])

    chart = PresetChart(2, 4, f, jac,
                        _zeros_like_factory((2, 2, 4)),
                        _zeros_like_factory((2, 2, 2, 4)))
    return EmbeddedSubmanifold(chart, [[-3, 3], [-3, 3]],
                               preset_name="plane_r2_in_r4",
                               frame_pivots=(2, 3))


def preset_curve_in_r2() -> EmbeddedSubmanifold:
    """Sine graph (s, sin s) ⊂ ℝ²: curve with one normal direction."""
    def f(u):
        s = u[0]
        return np.array([s, np.sin(s)])

    def jac(u):
        s = u[0]
        return np.array([[1.0 + 0.0 * s, np.cos(s)]])

    def second(u):
        s = u[0]
        return np.array([[[0.0 * s, -np.sin(s)]]])

    def third(u):
        s = u[0]
        return np.array([[[[0.0 * s, -np.cos(s)]]]])

    chart = PresetChart(1, 2, f, jac, second, third)
    return EmbeddedSubmanifold(chart, [[-2, 2]], preset_name="curve_in_r2",
                               frame_pivots=(1, 0))


def preset_helix_r1_in_r3() -> EmbeddedSubmanifold:
    """Helix (cos s, sin s, s) ⊂ ℝ³: curve with a rank-2 normal bundle."""
    def f(u):
        s = u[0]
        return np.array([np.cos(s), np.sin(s), s])

    def jac(u):
        s = u[0]
        return np.array([[-np.sin(s), np.cos(s), 1.0 + 0.0 * s]])

    def second(u):
        s = u[0]
        return np.array([[[-np.cos(s), -np.sin(s), 0.0 * s]]])

    def third(u):
        s = u[0]
        return np.array([[[[np.sin(s), -np.cos(s), 0.0 * s]]]])

    chart = PresetChart(1, 3, f, jac, second, third)
    return EmbeddedSubmanifold(chart, [[-4, 4]], preset_name="helix_r1_in_r3",
                               frame_pivots=(0, 1, 2))


def preset_sphere_s2_in_r3() -> EmbeddedSubmanifold:
    """Unit sphere in the polar chart (sin u₁ cos u₂, sin u₁ sin u₂, cos u₁).

    The domain box stays clear of the poles and of the u₂ values where
    the frame pivot coordinate sin u₁ cos u₂ changes sign.
    """
    def f(u):
        u1, u2 = u
        return np.array([np.sin(u1) * np.cos(u2), np.sin(u1) * np.sin(u2),
                         np.cos(u1)])

    def jac(u):
        u1, u2 = u
        return np.array([
            [np.cos(u1) * np.cos(u2), np.cos(u1) * np.sin(u2), -np.sin(u1)],
            [-np.sin(u1) * np.sin(u2), np.sin(u1) * np.cos(u2), 0.0 * u1],
        ])

    def second(u):
        u1, u2 = u
        z = 0.0 * u1
        d11 = [-np.sin(u1) * np.cos(u2), -np.sin(u1) * np.sin(u2), -np.cos(u1)]
        d12 = [-np.cos(u1) * np.sin(u2), np.cos(u1) * np.cos(u2), z]
        d22 = [-np.sin(u1) * np.cos(u2), -np.sin(u1) * np.sin(u2), z]
        return np.array([[d11, d12], [d12, d22]])

    def third(u):
        u1, u2 = u
        z = 0.0 * u1
        d111 = [-np.cos(u1) * np.cos(u2), -np.cos(u1) * np.sin(u2), np.sin(u1)]
        d112 = [np.sin(u1) * np.sin(u2), -np.sin(u1) * np.cos(u2), z]
        d122 = [-np.cos(u1) * np.cos(u2), -np.cos(u1) * np.sin(u2), z]
        d222 = [np.sin(u1) * np.sin(u2), -np.sin(u1) * np.cos(u2), z]
        return np.array([[[d111, d112], [d112, d122]],
                         [[d112, d122], [d122, d222]]])

    chart = PresetChart(2, 3, f, jac, second, third)
    return EmbeddedSubmanifold(chart, [[0.4, 2.7], [-1.2, 1.2]],
                               preset_name="sphere_s2_in_r3",
                               frame_pivots=(0, 1, 2))


def preset_graph_surface_r2_in_r4() -> EmbeddedSubmanifold:
    """Quadratic graph surface (u₁, u₂, u₁u₂, u₁²−u₂²) ⊂ ℝ⁴.

    Curved normal bundle with d = codim = 2.  Carries the standard
    interleaved J of ℝ⁴ ≅ ℂ², with which it is *not* totally real —
    useful for exercising the structure guards.
    """
    def f(u):
        u1, u2 = u
        return np.array([u1, u2, u1 * u2, u1**2 - u2**2])

    def jac(u):
        u1, u2 = u
        one, z = 1.0 + 0.0 * u1, 0.0 * u1
        return np.array([[one, z, u2, 2.0 * u1],
                         [z, one, u1, -2.0 * u2]])

    def second(u):
        u1, _ = u
        one, z = 1.0 + 0.0 * u1, 0.0 * u1
        d11 = [z, z, z, 2.0 * one]
        d12 = [z, z, one, z]
        d22 = [z, z, z, -2.0 * one]
        return np.array([[d11, d12], [d12, d22]])

    chart = PresetChart(2, 4, f, jac, second, _zeros_like_factory((2, 2, 2, 4)))
    return EmbeddedSubmanifold(chart, [[-1, 1], [-1, 1]],
                               preset_name="graph_surface_r2_in_r4",
                               ambient_complex=_interleaved_complex_structure(2),
                               frame_pivots=(2, 3, 0, 1))


def preset_lagrangian_rk_in_r2k(k: int = 2) -> EmbeddedSubmanifold:
    """Totally geodesic ℝᵏ ⊂ ℝ²ᵏ in totally real position.

    Coordinates interleaved as (x₁,y₁,…,x_k,y_k); the submanifold is the
    real slice {y = 0}, J is the standard structure.  Flat model for the
    almost-complex checks.
    """
    def f(u):
        out = np.zeros(2 * k, dtype=np.result_type(np.asarray(u), float))
        for j in range(k):
            out[2 * j] = u[j]
        return out

    def jac(u):
        out = np.zeros((k, 2 * k), dtype=np.result_type(np.asarray(u), float))
        for j in range(k):
            out[j, 2 * j] = 1.0
        return out

    chart = PresetChart(k, 2 * k, f, jac,
                        _zeros_like_factory((k, k, 2 * k)),
                        _zeros_like_factory((k, k, k, 2 * k)))
    return EmbeddedSubmanifold(chart, [[-2, 2]] * k,
                               preset_name="lagrangian_rk_in_r2k",
                               ambient_complex=_interleaved_complex_structure(k),
                               frame_pivots=tuple(2 * j + 1 for j in range(k)))


def preset_lagrangian_graph_r2_in_r4() -> EmbeddedSubmanifold:
    """Curved totally real surface (u₁, u₁u₂, u₂, u₁²/2 − u₂²/2) ⊂ ℂ².

    Gradient graph of the cubic potential u₁²u₂/2 − u₂³/6 in interleaved
    coordinates (x₁,y₁,x₂,y₂) — totally real for the standard J, with a
    normal curvature of order one on the domain box.  The workhorse for
    the almost-complex and Nijenhuis verification paths.
    """
    def f(u):
        u1, u2 = u
        return np.array([u1, u1 * u2, u2, u1**2 / 2 - u2**2 / 2])

    def jac(u):
        u1, u2 = u
        one, z = 1.0 + 0.0 * u1, 0.0 * u1
        return np.array([[one, u2, z, u1],
                         [z, u1, one, -u2]])

    def second(u):
        u1, _ = u
        one, z = 1.0 + 0.0 * u1, 0.0 * u1
        d11 = [z, z, z, one]
        d12 = [z, one, z, z]
        d22 = [z, z, z, -one]
        return np.array([[d11, d12], [d12, d22]])

    chart = PresetChart(2, 4, f, jac, second, _zeros_like_factory((2, 2, 2, 4)))
    return EmbeddedSubmanifold(chart, [[-0.8, 0.8], [-0.8, 0.8]],
                               preset_name="lagrangian_graph_r2_in_r4",
                               ambient_complex=_interleaved_complex_structure(2),
                               frame_pivots=(1, 3))


_PRESETS = {
    "plane_r2_in_r4": preset_plane_r2_in_r4,
    "curve_in_r2": preset_curve_in_r2,
    "helix_r1_in_r3": preset_helix_r1_in_r3,
    "sphere_s2_in_r3": preset_sphere_s2_in_r3,
    "graph_surface_r2_in_r4": preset_graph_surface_r2_in_r4,
    "lagrangian_rk_in_r2k": preset_lagrangian_rk_in_r2k,
    "lagrangian_graph_r2_in_r4": preset_lagrangian_graph_r2_in_r4,
}


def builtin_presets():
    """Mapping of preset name → zero-argument factory."""
    return dict(_PRESETS)


def get_preset(name: str, **kwargs) -> EmbeddedSubmanifold:
    """Instantiate a builtin preset by name."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: "
                       f"{sorted(_PRESETS)}") from None
    return factory(**kwargs)

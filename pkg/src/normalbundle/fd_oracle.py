"""Finite-difference oracle on total-space coordinates.

Everything here works in the plain coordinate chart x = (u, t) of the
total space — base coordinates first, fiber frame components after —
and touches only input-level data (induced metric, normal frame,
connection forms).  The Christoffel symbols and the Riemann tensor of
the two-parameter metric are obtained by numerically differentiating
the metric components, never from the closed formulas, so agreement
between this module and :mod:`.bundle_curvature` is evidence, not
tautology.

Central stencils are fourth order; the nominal accuracy of the Riemann
oracle is ~1e-7 on the preset geometries, which is why closed-form
comparisons run at 1e-4/1e-5 tolerances.

The coordinate frame fields are gauge dependent (they extend a
Gram–Schmidt frame off the evaluation point).  All formulas used here
are gauge covariant, but a branch flip of the frame inside an FD
stencil would silently poison the derivatives; ``fd_riemann`` guards
against that by probing frame continuity across the stencil reach once
per evaluation point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameDegeneracy
from .pq_metric import PQParams, TotalTangent
from .submanifold_geometry import base_geometry

__all__ = [
    "total_coordinates",
    "total_metric_components",
    "fd_christoffel",
    "fd_riemann",
    "fd_lie_bracket",
    "fd_exterior_derivative",
    "lift_components",
    "coordinate_components",
    "riemann_first_bianchi",
    "fd_convergence_order",
    "ComparisonReport",
    "AdjudicationResult",
    "adjudicate",
]

FD_STEP = 1e-3
FD_STEP_OUTER = 5e-3
GAUGE_STEP_TOL = 1e-2
GAUGE_REACH_TOL = 0.5


def fd4(fun, x, i, h):
    """Fourth-order central derivative of an array map along coordinate i."""
    e = np.zeros(len(x))
    e[i] = h
    return (-fun(x + 2 * e) + 8 * fun(x + e)
            - 8 * fun(x - e) + fun(x - 2 * e)) / (12 * h)


def total_coordinates(u, t):
    return np.concatenate([np.asarray(u, float), np.asarray(t, float)])


def _split(sub, x):
    d = sub.dim
    return x[:d], x[d:]


# --------------------------------------------------------------------------
# metric components and their FD derivatives
# --------------------------------------------------------------------------
def total_metric_components(pq: PQParams, sub, x) -> np.ndarray:
    """Components of the two-parameter metric in the (u, t) chart.

    The coordinate fields are ∂_i = e_i^h + (A_i t)^v and ∂_{t^a} = e_a^v,
    so the blocks mix the base metric with connection-form contractions.
    """
    u, t = _split(sub, x)
    geom = base_geometry(sub, u)
    d, dp = geom.dim, geom.codim
    g, A = geom.g, geom.A
    s = t @ t
    wp = (1.0 / (1.0 + s)) ** pq.p
    q = pq.q
    c = np.array([A[i] @ t for i in range(d)])
    G = np.zeros((d + dp, d + dp))
    G[:d, :d] = g + wp * (c @ c.T + q * np.outer(c @ t, c @ t))
    mixed = wp * (c + q * np.outer(c @ t, t))
    G[:d, d:] = mixed
    G[d:, :d] = mixed.T
    G[d:, d:] = wp * (np.eye(dp) + q * np.outer(t, t))
    return G


def check_frame_gauge(sub, u, spacing, tol):
    """Raise if the normal frame jumps across ±spacing along any base axis.

    A Gram–Schmidt frame from fixed pivots is smooth away from pivot
    degeneracies; across one, a vector flips sign or the ordering
    permutes, which shows up as an O(1) jump.
    """
    ref = base_geometry(sub, u).frame
    d = len(u)
    for i in range(d):
        for sgn in (-1.0, 1.0):
            up = np.array(u, float)
            up[i] += sgn * spacing
            dev = float(np.max(np.abs(base_geometry(sub, up).frame - ref)))
            if dev > tol:
                raise FrameDegeneracy(
                    f"normal frame discontinuity near u={u}: deviation "
                    f"{dev:.3e} over spacing {spacing:.1e} (tol {tol:.1e})")


def fd_christoffel(pq: PQParams, sub, x, step: float = FD_STEP,
                   check_gauge: bool = False) -> np.ndarray:
    """Christoffel symbols Γ[a,b,c] of the total metric by central FD."""
    x = np.asarray(x, float)
    u, _ = _split(sub, x)
    if check_gauge:
        check_frame_gauge(sub, u, step, GAUGE_STEP_TOL)
    m = sub.dim + sub.codim
    Gi = np.linalg.inv(total_metric_components(pq, sub, x))
    dG = np.empty((m, m, m))
    for k in range(m):
        dG[k] = fd4(lambda y: total_metric_components(pq, sub, y), x, k, step)
    M = dG.transpose(1, 0, 2) + dG.transpose(2, 1, 0) - dG
    return 0.5 * np.einsum("ad,dbc->abc", Gi, M)


def fd_riemann(pq: PQParams, sub, x, step: float = FD_STEP,
               outer_step: float = FD_STEP_OUTER,
               check_gauge: bool = True) -> np.ndarray:
    """Riemann tensor R[a,b,c,d] = (R(∂_c,∂_d)∂_b)^a of the total metric.

    Entirely by nested finite differences of the metric components.
    """
    x = np.asarray(x, float)
    u, _ = _split(sub, x)
    if check_gauge:
        check_frame_gauge(sub, u, step, GAUGE_STEP_TOL)
        reach = 2.0 * (step + outer_step)
        check_frame_gauge(sub, u, reach, GAUGE_REACH_TOL)
    m = sub.dim + sub.codim
    dGam = np.empty((m, m, m, m))
    for k in range(m):
        dGam[k] = fd4(lambda y: fd_christoffel(pq, sub, y, step), x, k,
                      outer_step)
    Gam = fd_christoffel(pq, sub, x, step)
    T1 = dGam.transpose(1, 3, 0, 2)
    T2 = dGam.transpose(1, 3, 2, 0)
    E1 = np.einsum("ace,edb->abcd", Gam, Gam)
    E2 = np.einsum("ade,ecb->abcd", Gam, Gam)
    return T1 - T2 + E1 - E2


# --------------------------------------------------------------------------
# auxiliary FD operators
# --------------------------------------------------------------------------
def fd_lie_bracket(field_a, field_b, x, step: float = FD_STEP) -> np.ndarray:
    """[a, b] at x for coordinate vector-field callables x ↦ components."""
    x = np.asarray(x, float)
    m = len(x)
    Ja = np.array([fd4(field_a, x, j, step) for j in range(m)]).T
    Jb = np.array([fd4(field_b, x, j, step) for j in range(m)]).T
    return Jb @ field_a(x) - Ja @ field_b(x)


def fd_exterior_derivative(form2, x, step: float = FD_STEP) -> np.ndarray:
    """dω[a,b,c] for a 2-form callable x ↦ antisymmetric matrix."""
    x = np.asarray(x, float)
    m = len(x)
    dW = np.empty((m, m, m))
    for k in range(m):
        dW[k] = fd4(form2, x, k, step)
    return dW - dW.transpose(1, 0, 2) + dW.transpose(1, 2, 0)


def riemann_first_bianchi(R: np.ndarray) -> float:
    """Max residual of the first Bianchi identity on a Riemann array."""
    return float(np.max(np.abs(R + R.transpose(0, 2, 3, 1)
                               + R.transpose(0, 3, 1, 2))))


def fd_convergence_order(value_at_step, h: float) -> float:
    """Estimated convergence order from step halving around h."""
    q2, q1, q0 = value_at_step(2 * h), value_at_step(h), value_at_step(h / 2)
    r1 = float(np.max(np.abs(np.asarray(q2) - np.asarray(q1))))
    r2 = float(np.max(np.abs(np.asarray(q1) - np.asarray(q0))))
    if r2 == 0.0:
        return np.inf
    return float(np.log2(r1 / r2))


# --------------------------------------------------------------------------
# chart <-> lift conversions
# --------------------------------------------------------------------------
def lift_components(geom, t, coord_vec) -> TotalTangent:
    """Horizontal/vertical split of a coordinate tangent vector."""
    d = geom.dim
    coord_vec = np.asarray(coord_vec, float)
    h = coord_vec[:d]
    v = coord_vec[d:] + np.einsum("i,iba,a->b", h, geom.A, t)
    return TotalTangent(h, v)


def coordinate_components(geom, t, tangent: TotalTangent) -> np.ndarray:
    """Inverse of :func:`lift_components`."""
    d = geom.dim
    out = np.empty(d + geom.codim)
    out[:d] = tangent.horizontal
    out[d:] = tangent.vertical - np.einsum("i,iba,a->b", tangent.horizontal,
                                           geom.A, t)
    return out


# --------------------------------------------------------------------------
# comparison records and adjudication
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ComparisonReport:
    """One closed-form-versus-oracle comparison, CSV-serializable."""

    quantity: str
    max_abs_deviation: float
    tolerance: float
    passed: bool
    n_samples: int
    witness: str = ""
    variant: str = ""
    note: str = ""

    CSV_HEADER = ("quantity", "variant", "max_abs_deviation", "tolerance",
                  "passed", "n_samples", "witness", "note")

    def csv_row(self):
        return (self.quantity, self.variant,
                "%.17g" % self.max_abs_deviation, "%.17g" % self.tolerance,
                "1" if self.passed else "0", str(self.n_samples),
                self.witness, self.note)


@dataclass(frozen=True)
class AdjudicationResult:
    """Outcome of testing two rival closed forms against the oracle."""

    quantity: str
    selected: str
    deviation_corrected: float
    deviation_uncorrected: float
    tolerance: float
    n_samples: int
    witness_corrected: str = ""
    witness_uncorrected: str = ""

    def reports(self):
        sel = self.selected
        rows = []
        for variant, dev, wit in (
                ("corrected", self.deviation_corrected, self.witness_corrected),
                ("uncorrected", self.deviation_uncorrected, self.witness_uncorrected)):
            note = "selected" if sel == variant else (
                "rejected" if sel in ("corrected", "uncorrected") else sel)
            rows.append(ComparisonReport(
                quantity=self.quantity, max_abs_deviation=dev,
                tolerance=self.tolerance, passed=dev <= self.tolerance,
                n_samples=self.n_samples, witness=wit, variant=variant,
                note=note))
        return rows


def adjudicate(quantity: str, samples, closed_fn, oracle_fn,
               tol: float = 1e-4) -> AdjudicationResult:
    """Pick between rival closed forms by oracle deviation.

    ``closed_fn(variant, sample)`` and ``oracle_fn(sample)`` return
    arrays of matching shape.  Exactly one variant within tolerance
    selects it; otherwise the result is marked inconclusive.
    """
    samples = list(samples)
    devs = {"corrected": 0.0, "uncorrected": 0.0}
    wits = {"corrected": "", "uncorrected": ""}
    for k, sample in enumerate(samples):
        ref = np.asarray(oracle_fn(sample), float)
        for variant in ("corrected", "uncorrected"):
            d = float(np.max(np.abs(
                np.asarray(closed_fn(variant, sample), float) - ref)))
            if d > devs[variant]:
                devs[variant] = d
                wits[variant] = f"sample[{k}]"
    ok_c = devs["corrected"] <= tol
    ok_p = devs["uncorrected"] <= tol
    if ok_c and not ok_p:
        selected = "corrected"
    elif ok_p and not ok_c:
        selected = "uncorrected"
    elif ok_c and ok_p:
        selected = "inconclusive-both"
    else:
        selected = "inconclusive-neither"
    return AdjudicationResult(quantity, selected, devs["corrected"],
                              devs["uncorrected"], tol, len(samples),
                              wits["corrected"], wits["uncorrected"])

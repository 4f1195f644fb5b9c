"""Geometry of normal bundles of Euclidean submanifolds.

The package computes the Levi-Civita connection, curvature tensor,
sectional and scalar curvature of the total space of a normal bundle
equipped with a two-parameter family of fiber-rescaled metrics (the
classical Sasaki and Cheeger-Gromoll metrics are the two standard
members).  Closed-form results are cross-checked against a
finite-difference coordinate oracle, and a search routine looks for
parameter pairs making the scalar curvature positive.  A compatible
almost-complex structure with its conformal-type identities is
available for totally real submanifolds of even-dimensional space.
"""
from .errors import (CertificateError, DimensionError, DomainError,
                     FrameDegeneracy, InvalidInput, NormalBundleError,
                     NotFound, SingularMetric, StepError, StructureError,
                     UnsupportedMorphism)
from .manifold_input import (AmbientComplexStructure, CallableChart,
                             EmbeddedSubmanifold, FourierChart,
                             PolynomialChart, PresetChart, builtin_presets,
                             get_preset)
from .sampling import halton_points, sample_normal_points
from .submanifold_geometry import (AdjointCurvature, BaseGeometry,
                                   align_frame, base_geometry)
from .pq_metric import (ConnectionValue, HorizontalMorphism, NormalPoint,
                        PQParams, TotalTangent, VerticalMorphism,
                        bracket_lifts, canonical_vertical_derivative,
                        coordinate_connection, horizontal_lift, levi_civita,
                        lift_derivative_morphism, metric_eval, theta_lift,
                        vertical_lift)
from .bundle_curvature import (FlatnessReport, SectionalValue,
                               VerticalCurvatureCoeffs, abc_coeffs,
                               curvature_on_lifts, curvature_tensor,
                               flatness_check, orthonormal_total_basis,
                               scalar_curvature, sectional)
from .fd_oracle import (AdjudicationResult, ComparisonReport, adjudicate,
                        coordinate_components, fd_christoffel,
                        fd_convergence_order, fd_exterior_derivative,
                        fd_lie_bracket, fd_riemann, lift_components,
                        riemann_first_bianchi, total_coordinates,
                        total_metric_components)
from .scalar_estimates import (BoundednessCertificate, PQSearchResult,
                               PhiSpec, ScalarBoundResult, certificate,
                               find_pq, find_pq_for_profile, phi_eval,
                               scalar_bound_pipeline)
from .complex_structure import (HermitianShapeReport, JTildeCoeffs,
                                KahlerReport, LCKReport, alpha_form,
                                alpha_wedge_phi, apply_jtilde, dphi,
                                fundamental_form, hermitian_constant_K,
                                hermitian_shape_residual,
                                jtilde_chart_matrix, jtilde_coeff_residuals,
                                jtilde_coeffs, kahler_check, lck_check,
                                nijenhuis_p0q0, require_totally_real,
                                tangent_normal_rotations)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

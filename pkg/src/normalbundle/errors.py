"""Exception types shared across the package.

Every error raised on a documented failure path derives from
:class:`NormalBundleError`, so callers can catch one base type at the
boundary (the CLI does exactly that and maps it to exit code 2).
"""


class NormalBundleError(Exception):
    """Base class for all package-specific errors."""


class DomainError(NormalBundleError):
    """A chart was evaluated at a point outside its domain box."""


class StepError(NormalBundleError):
    """A finite-difference stencil is invalid (bad step, or it would
    leave the chart's domain box)."""


class SingularMetric(NormalBundleError):
    """The induced metric is numerically singular at the requested point."""


class FrameDegeneracy(NormalBundleError):
    """Gram-Schmidt could not produce a full orthonormal normal frame,
    or the frame gauge jumped discontinuously across an FD stencil."""


class UnsupportedMorphism(NormalBundleError):
    """A lifted-morphism derivative was requested in a horizontal
    direction but the morphism carries no covariant-derivative data."""


class DimensionError(NormalBundleError):
    """A requested plane or slot type does not exist for the given
    base/fiber dimensions."""


class NotFound(NormalBundleError):
    """A parameter search exhausted its budget without an admissible
    result."""


class InvalidInput(NormalBundleError):
    """Structurally invalid input to a search or estimate routine."""


class CertificateError(NormalBundleError):
    """A positivity certificate failed its own cross-validation."""


class StructureError(NormalBundleError):
    """An almost-complex-structure operation was requested where no
    compatible ambient structure exists (missing J, or the submanifold
    is not totally real)."""

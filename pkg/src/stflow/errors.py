"""Exception hierarchy shared by all stflow modules."""


class StflowError(Exception):
    """Base class for all stflow-specific errors."""


class DegenerateElement(StflowError):
    """Element Jacobian determinant is (numerically) zero."""


class DegenerateFacet(StflowError):
    """Facet spans a degenerate (lower-dimensional) simplex."""


class NonPhysicalState(StflowError):
    """Pressure or temperature is non-positive."""


class NonPositiveTimeStep(StflowError):
    """Slab time extent is not positive."""


class RefinementConflict(StflowError):
    """Temporal refinement levels cannot be smoothed to a compatible field."""


class ParseError(StflowError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        super().__init__(where + message)


class NonConformingMesh(StflowError):
    """Mesh violates the conformity requirements."""


class NegativeVolumeElement(StflowError):
    """Element has non-positive volume even after canonical reordering."""


class SingularA0(StflowError):
    """The variable-change matrix A0 is singular at the evaluation point."""


class SquareRootFailure(StflowError):
    """Principal matrix square root does not exist or did not converge."""


class QuadratureError(StflowError):
    """Quadrature rule construction or application failed."""


class UnsupportedRule(StflowError):
    """Requested quadrature dimension/degree combination is unavailable."""


class UnknownBoundaryTag(StflowError):
    """A boundary specification references a tag not present in the mesh."""


class NewtonDiverged(StflowError):
    """Newton iteration exceeded its budget or the residual grew."""


class KrylovStagnation(StflowError):
    """Linear solver failed to reach the requested tolerance."""


class ShockFormed(StflowError):
    """Characteristic map is multivalued: requested time exceeds t*."""


class ExportRangeError(StflowError, IOError):
    """Requested slice time lies outside the solved slab range."""

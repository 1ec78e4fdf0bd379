"""Exception hierarchy shared by all modules."""


class PSError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(PSError, ValueError):
    """Input fails a precondition (bad map, bad parameter, bad gauge)."""


class NumericalError(PSError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class InvariantViolation(PSError):
    """A computed object violates an identity that must hold exactly."""


# rational_map
class DegenerateMap(ValidationError):
    pass


class NotInComponent(ValidationError):
    pass


class AtBranchPoint(ValidationError):
    pass


class InvalidGauge(ValidationError):
    pass


class ReconstructionFailed(ValidationError):
    pass


# quadrature / solver
class KernelError(NumericalError):
    pass


class SolverError(NumericalError):
    pass


# monodromy
class ExcludedParameter(ValidationError):
    pass


class OnSingularLocus(NumericalError):
    pass


class DegeneratePair(NumericalError):
    pass


# lift
class NotAnEigenpair(InvariantViolation):
    pass


class AssignmentError(NumericalError):
    pass


class Unclassified(NumericalError):
    pass


class WindingError(NumericalError):
    pass


class StructureDegenerate(NumericalError):
    pass


# pants
class InvalidPants(ValidationError):
    pass


class CountingViolation(InvariantViolation):
    pass


# elliptic
class DomainError(ValidationError):
    pass

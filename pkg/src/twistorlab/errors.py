"""Exception hierarchy shared by every module."""


class GeometryError(Exception):
    """Base class for all errors raised by twistorlab."""


class StructureError(GeometryError, ValueError):
    """Operands have incompatible shapes (dimension or lattice mismatch)."""


class ContractError(GeometryError, ValueError):
    """A documented precondition of an operation does not hold."""


class ChartError(GeometryError, ValueError):
    """A point lies outside the coordinate box of a chart."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DifferentiationError(GeometryError):
    """Evaluation failed at one of the finite-difference stencil points."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NotHermitianError(ContractError):
    pass


class SingularMatrixError(GeometryError, ValueError):
    pass


class PositivityError(ContractError):
    """A form or scalar expected to be positive is not; carries the witness."""

    def __init__(self, message, value=None, witness=None):
        super().__init__(message)
        self.value = value
        self.witness = witness


class CriticalPointError(ContractError):
    """A sample point is a critical point of h where a submersion was required."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`LyapTrekError`.  The two intermediate classes separate problems with
the *input* (a malformed or inadmissible model) from *numerical* failures on an
otherwise valid input; the command line maps them to distinct exit codes.
"""


class LyapTrekError(Exception):
    """Base class for all package errors."""


class ModelError(LyapTrekError, ValueError):
    """The input model or argument is malformed or violates a precondition."""


class NumericalError(LyapTrekError, ArithmeticError):
    """A computation failed on an otherwise well-formed input."""


class DimensionMismatchError(ModelError):
    pass


class AsymmetricCError(ModelError):
    pass


class NotPSDError(ModelError):
    pass


class NodeOutOfRangeError(ModelError, IndexError):
    pass


class IncompatibleEdgeError(ModelError):
    pass


class DiagonalNotMinusOneError(ModelError):
    pass


class DiagonalOutOfRangeError(ModelError):
    pass


class LambdaOutOfRangeError(ModelError):
    pass


class ZOutOfRangeError(ModelError):
    pass


class CyclicGraphError(ModelError):
    pass


class NotTriangularError(ModelError):
    pass


class PreconditionViolationError(ModelError):
    pass


class NotStableError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class SingularIminusBError(NumericalError):
    pass


class NoConvergenceError(NumericalError):
    pass

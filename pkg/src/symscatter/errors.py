"""Exception hierarchy shared by all modules."""


class ScatterError(Exception):
    """Base class for every error raised by symscatter."""


class SingularMatrix(ScatterError):
    """A pivot fell below the singularity threshold during LU factorization."""


class OutOfBand(ScatterError):
    """Frequency or momentum outside the open propagating band of the leads."""


class ParseError(ScatterError):
    """Malformed network or symmetry document."""


class ValidationError(ScatterError):
    """Well-formed input that violates a structural invariant."""


class UnknownLead(ScatterError):
    pass


class SamePort(ScatterError):
    pass


class InconsistentReflection(ScatterError):
    """Reflection amplitude depends on the partner port used for the reduction."""


class DimensionMismatch(ScatterError):
    pass


class InvalidOperator(ScatterError):
    """Symmetry operator is not unitary or violates its involution constraint."""


class SymmetryNotSatisfied(ScatterError):
    pass


class PacketDoesNotFit(ScatterError):
    pass


class PacketNotCleared(ScatterError):
    pass


class Instability(ScatterError):
    """Amplitudes blew up during time integration."""

"""Exception types shared across the package."""


class NonclassError(Exception):
    """Base class for all package-specific errors."""


class CutoffTooSmall(NonclassError):
    """The requested Fock cutoffs cannot hold the state to the required tail accuracy."""


class OutOfRange(NonclassError):
    """An occupation number or table index lies outside the truncated basis."""


class DimensionMismatch(NonclassError):
    """Operands live on different Fock spaces."""


class ImaginaryResidue(NonclassError):
    """A quantity that must be real carried an imaginary part too large to be truncation noise."""


class DecompositionMismatch(NonclassError):
    """The direct operator-product path and the ordering-tensor path disagree."""


class IdentityMismatch(NonclassError):
    """Two algebraically equal expressions disagree beyond tolerance."""


class VacuumMode(NonclassError):
    """Mandel Q is undefined for a mode with vanishing mean photon number."""


class NonUnitaryInput(NonclassError):
    """A matrix that must be unitary is not, within tolerance."""

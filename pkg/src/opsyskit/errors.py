"""Exception types shared across the toolkit."""


class OpsyskitError(Exception):
    """Base class for all toolkit errors."""


class NonHermitianError(OpsyskitError, ValueError):
    """A matrix expected to be hermitian is not, beyond tolerance."""


class ShapeMismatchError(OpsyskitError, ValueError):
    """A matrix does not match the expected block-diagonal shape."""


class BracketInvalidError(OpsyskitError, ValueError):
    """Bisection bracket does not satisfy pred(lo) = False, pred(hi) = True."""


class UnitInSubspaceError(OpsyskitError, ValueError):
    """A candidate kernel subspace contains the order unit."""


class NotAKernelError(OpsyskitError, ValueError):
    """A norm computation was requested on a quotient by a non-kernel."""


class NotStarPreservingError(OpsyskitError, ValueError):
    """A linear map does not send hermitian basis elements to hermitian images."""


class SubspaceNotAnnihilatedError(OpsyskitError, ValueError):
    """A map required to vanish on a subspace does not."""


class PartnerNotCstarError(OpsyskitError, ValueError):
    """The right tensor factor is not a full finite-dimensional C*-algebra."""


class SolverFailure(OpsyskitError, RuntimeError):
    """The conic solver could not certify a result within its iteration cap."""


class InvalidInputError(OpsyskitError, ValueError):
    """A scenario or JSON input failed validation before any computation."""

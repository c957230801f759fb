class AnnulusError(ValueError):
    """Base class for invalid inputs to the annulus solvers."""


class InvalidAnnulusError(AnnulusError):
    pass


class DomainError(AnnulusError):
    """A point or modulus lies outside the annulus an operation is defined on."""


class RegimeError(AnnulusError):
    """An operation was requested in the wrong bound regime."""


class AdmissibilityError(AnnulusError):
    """A sampled map violates the boundary, image or winding constraints."""

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f"{message} at node {index}")
        self.index = index


class WindingError(AdmissibilityError):
    pass

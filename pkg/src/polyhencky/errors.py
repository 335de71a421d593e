"""Exception types raised by the library."""


class DomainError(ValueError):
    """Input lies outside the domain of an operation (e.g. det F <= 0)."""


class ParameterError(ValueError):
    """Material or model parameters violate a construction hypothesis."""


class ConstructionError(ValueError):
    """A derived object (extension, profile) could not be built."""


class DimensionError(ValueError):
    """Operation called on a matrix of unsupported dimension."""

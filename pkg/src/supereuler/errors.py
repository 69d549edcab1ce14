"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures with 3 and degenerate section zeros with 4.
"""


class DimensionError(ValueError):
    """Operands live in Grassmann algebras with different generator counts."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ParityError(ValueError):
    """An element does not have the parity an operation requires."""


class LoadError(ValueError):
    """An input file could not be parsed or failed validation."""


class ConfigError(ValueError):
    """Invalid manifold, section or run configuration."""


class GeometryError(ArithmeticError):
    """Metric or frame is degenerate at the requested point."""


class NumericError(ArithmeticError):
    """A numerical evaluation produced a non-finite or unusable result."""


class DegenerateZeroError(ArithmeticError):
    """A section zero has a (numerically) singular covariant derivative."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

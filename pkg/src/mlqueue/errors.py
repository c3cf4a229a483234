"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class EventCapError(RuntimeError):
    """A simulated path would exceed the configured event cap."""


class DivergenceError(ArithmeticError):
    """A transform or series is evaluated where it does not converge."""


class InversionError(ArithmeticError):
    """Numerical Laplace inversion failed its cross-check."""


class QuadratureError(ArithmeticError):
    """A quadrature could not reach the requested tolerance."""


class SolverError(ArithmeticError):
    """A time-stepping solver became unstable."""


class SchemaError(ValueError):
    """An experiment configuration does not match its schema."""

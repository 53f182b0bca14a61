"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Arguments violate an operation's preconditions."""


class InfeasibleError(InvalidInputError):
    """No normalized state (or level triple) satisfies the requested constraints."""


class QuadratureError(RuntimeError):
    """Quadrature result is not converged at the requested tolerance."""


class ConvergenceError(RuntimeError):
    """No optimizer restart converged."""

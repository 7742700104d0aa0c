"""Exception hierarchy shared by every module."""


class KGHError(Exception):
    """Base class for all errors raised by :mod:`kgh`."""


class ContractViolation(KGHError, ValueError):
    """An input does not satisfy an operation's precondition."""


class InvalidParameter(KGHError, ValueError):
    pass


class SingularSymbolError(KGHError, ValueError):
    """A Fourier symbol is NaN or infinite at some lattice frequency."""

    def __init__(self, xi):
        self.xi = tuple(float(x) for x in xi)
        super().__init__(f"symbol is not finite at lattice frequency xi={self.xi}")


class GridMismatchError(KGHError, ValueError):
    pass


class ExponentError(KGHError, ValueError):
    """Exponent arithmetic left its admissible range."""


class ResolutionExhausted(KGHError, RuntimeError):
    """No resolved cutoff radius achieves the requested high-frequency bound."""

    def __init__(self, target, best_bound, radius):
        self.target = target
        self.best_bound = best_bound
        self.radius = radius
        super().__init__(
            f"cannot reach high-part bound {target:.6g}; best achievable is "
            f"{best_bound:.6g} at radius {radius:.6g}"
        )


class NoContractionError(KGHError, RuntimeError):
    def __init__(self, ratios):
        self.ratios = list(ratios)
        super().__init__(
            "Picard map is not contracting (ratios "
            + ", ".join(f"{r:.3g}" for r in self.ratios[-3:])
            + "); shorten T"
        )


class NonConvergenceError(KGHError, RuntimeError):
    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Picard iteration did not converge in {iterations} iterations "
            f"(last residual {residual:.3e})"
        )


class InstabilityError(KGHError, FloatingPointError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, last_stable_time):
        self.last_stable_time = last_stable_time
        super().__init__(
            f"solution became non-finite after t={last_stable_time:.6g}"
        )


class ConfigError(KGHError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

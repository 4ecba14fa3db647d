"""Exception types raised across the package."""


class HNGarchError(Exception):
    """Base class for all package errors."""


class ValidationError(HNGarchError, ValueError):
    """Model or preference parameters outside their accepted domain."""


class NonStationary(ValidationError):
    """Variance persistence ``beta + alpha * theta**2`` is not below one."""

    def __init__(self, persistence: float):
        self.persistence = persistence
        super().__init__(
            f"persistence beta + alpha*theta^2 = {persistence:.6g} must be < 1"
        )


class NegativeCoefficient(ValidationError):
    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"{name} must be nonnegative, got {value!r}")


class InvalidDelta(ValidationError):
    def __init__(self, delta: float):
        self.delta = delta
        super().__init__(f"period length delta must lie in (0, 1] days, got {delta!r}")


class InadmissibleCoefficient(HNGarchError, ArithmeticError):
    """``1 - 2*alpha*E`` became nonpositive during a backward recursion.

    ``t`` is the step whose continuation coefficient broke the condition.
    """

    def __init__(self, t: int, value: float):
        self.t = t
        self.value = value
        super().__init__(
            f"admissibility 1 - 2*alpha*E > 0 violated at t={t} (1 - 2*alpha*E = {value:.6g})"
        )


class MgfDivergent(HNGarchError, ArithmeticError):
    """The moment generating function does not exist at ``u``."""

    def __init__(self, u: float, t: int, value: float):
        self.u = u
        self.t = t
        self.value = value
        super().__init__(
            f"m.g.f. diverges at u={u:.6g}: 1 - 2*alpha*B = {value:.6g} at t={t}"
        )


class MismatchedHorizon(HNGarchError, ValueError):
    pass

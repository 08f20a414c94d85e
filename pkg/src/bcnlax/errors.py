"""Exception types shared across the package."""


class BcnLaxError(Exception):
    """Base class for all package errors."""


class DomainError(BcnLaxError, ValueError):
    """An argument lies too close to a singular set of the function."""

    def __init__(self, message, argument=None):
        super().__init__(message)
        self.argument = argument


class SeriesTruncationError(BcnLaxError, ArithmeticError):
    """A theta series did not reach its tolerance within ``max_terms`` terms."""

    def __init__(self, message, partial_sum=None, last_term=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term


class SamplerError(BcnLaxError, RuntimeError):
    """No admissible random configuration was found."""


class SingularJacobianError(BcnLaxError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class StepRejectionError(BcnLaxError, RuntimeError):
    """Integration left the admissible region; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NotAnEquilibriumError(BcnLaxError, ValueError):
    pass


class ConfigError(BcnLaxError, ValueError):
    pass

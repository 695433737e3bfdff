"""Exception hierarchy shared by all modules."""


class IncFilterError(Exception):
    """Base class; ``module`` records where the failure originated."""

    module = "incfilter"


class TauNotOnGrid(IncFilterError, ValueError):
    module = "increments"


class PathTooShort(IncFilterError, ValueError):
    module = "increments"


class NonIntegrableWeight(IncFilterError, ValueError):
    module = "spectra"


class QuadratureFailure(IncFilterError, ArithmeticError):
    module = "kernels"

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class GridTooCoarse(IncFilterError, ValueError):
    module = "kernels"


class NonConverged(IncFilterError, ArithmeticError):
    module = "solver"


class SingularOperator(IncFilterError, ArithmeticError):
    module = "solver"


class DegenerateDensity(IncFilterError, ArithmeticError):
    module = "filter"


class RouteMismatch(IncFilterError, ArithmeticError):
    module = "filter"


class NoConvergence(IncFilterError, ArithmeticError):
    module = "minimax"

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleClass(IncFilterError, ValueError):
    module = "minimax"


class SaddleViolated(IncFilterError, AssertionError):
    module = "minimax"

    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class GridResolutionFailure(IncFilterError, ValueError):
    module = "simulate"


class IllConditionedGram(IncFilterError, ArithmeticError):
    module = "simulate"

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ConfigError(IncFilterError, ValueError):
    module = "cli"

    def __init__(self, field, reason):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason

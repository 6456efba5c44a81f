"""Exception hierarchy shared by every module in the package."""


class FracPowError(Exception):
    """Base class for all errors raised by fracpow."""


class SingularShiftedSystem(FracPowError, ArithmeticError):
    def __init__(self, sigma, pivot_index, pivot):
        self.sigma = sigma
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(
            f"shifted system sigma*I + A is numerically singular "
            f"(sigma={sigma:.6g}, pivot {pivot_index} = {pivot:.3g})"
        )


class ConvergenceFailure(FracPowError, ArithmeticError):
    def __init__(self, message, last=None, history=None, iterate=None):
        self.last = last
        self.history = history
        self.iterate = iterate
        super().__init__(message)


class NotSymmetric(FracPowError, ValueError):
    pass


class NotSPD(FracPowError, ValueError):
    pass


class AlphaOutOfRange(FracPowError, ValueError):
    pass


class TolTooLarge(FracPowError, ValueError):
    pass


class PreconditionViolated(FracPowError, ValueError):
    def __init__(self, which, message):
        self.which = which
        super().__init__(message)


class ShiftOverflow(FracPowError, OverflowError):
    pass


class EvalBudgetExceeded(FracPowError, RuntimeError):
    """Raised when an adaptive rule would exceed its evaluation budget.

    ``report`` holds the best approximation computed before stopping.
    """

    def __init__(self, report, budget):
        self.report = report
        self.budget = budget
        super().__init__(
            f"integrand evaluation budget {budget} reached "
            f"after {report.evals} evaluations"
        )


class ParameterOutOfRange(FracPowError, ValueError):
    pass


class NotUnitFraction(FracPowError, ValueError):
    pass


class KNotOdd(FracPowError, ValueError):
    pass


class PoleProximity(FracPowError, ArithmeticError):
    pass


class SingularIterate(FracPowError, ArithmeticError):
    pass


class ParseError(FracPowError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedField(FracPowError, ValueError):
    pass


class BisectionFailure(FracPowError, RuntimeError):
    pass


class ValidationError(FracPowError, AssertionError):
    pass

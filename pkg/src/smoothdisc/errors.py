"""Exception hierarchy shared by all modules."""


class SmoothDiscError(Exception):
    """Base class for all package errors."""


class ColumnNormExceeded(SmoothDiscError, ValueError):
    def __init__(self, index: int, norm: float):
        self.index = index
        self.norm = norm
        super().__init__(f"column {index} has 2-norm {norm:.12g} > 1")


class DimensionMismatch(SmoothDiscError, ValueError):
    pass


class TooLarge(SmoothDiscError, ValueError):
    pass


class NumericalFailure(SmoothDiscError, ArithmeticError):
    pass


class MaxRejectionsExceeded(SmoothDiscError, RuntimeError):
    pass


class AttemptsExhausted(SmoothDiscError, RuntimeError):
    def __init__(self, kept_so_far, message: str = ""):
        self.kept_so_far = list(kept_so_far)
        super().__init__(message or f"gave up with {len(self.kept_so_far)} member(s) kept")


class OddN(SmoothDiscError, ValueError):
    pass


class ParityViolation(SmoothDiscError, ValueError):
    pass


class ParityMismatch(SmoothDiscError, ValueError):
    pass


class PreconditionViolated(SmoothDiscError, ValueError):
    pass


class EmptySampleSet(SmoothDiscError, ValueError):
    pass


class InvalidEnsembleParams(SmoothDiscError, ValueError):
    pass

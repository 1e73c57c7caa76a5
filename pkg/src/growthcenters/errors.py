"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: InputError -> 1, NumericalError -> 2.
"""


class GrowthError(Exception):
    pass


class InputError(GrowthError, ValueError):
    """Malformed or inconsistent user input (dimensions, schema, ranges)."""


class NumericalError(GrowthError, ArithmeticError):
    pass


class PositivityError(NumericalError):
    def __init__(self, t: float, index: int, value: float):
        self.t = t
        self.index = index
        self.value = value
        super().__init__(
            f"integration produced W[{index}] = {value!r} <= 0 at t = {t!r}; "
            "retry with a smaller dt"
        )


class ConvergenceError(NumericalError):
    def __init__(self, message: str, iterations: int, last=None):
        self.iterations = iterations
        self.last = last
        super().__init__(message)


class DegenerateError(NumericalError):
    """A statistic is undefined for the given data (zero variance, empty band, ...)."""

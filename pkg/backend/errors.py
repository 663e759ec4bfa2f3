"""
Exception hierarchy shared by the p-adic period modules.

Precision exhaustion is never an error: a result with no significant
digit left is returned as a zero-at-precision value.
"""


class PadicPeriodError(Exception):
    """Base class for every error raised by the backend."""


class ConfigError(PadicPeriodError, ValueError):
    pass


class PrimeMismatchError(PadicPeriodError, ValueError):
    pass


class PadicZeroDivisionError(PadicPeriodError, ZeroDivisionError):
    pass


class PadicDomainError(PadicPeriodError, ValueError):
    """Input outside the convergence domain of a p-adic function."""


class AlphabetMismatchError(PadicPeriodError, ValueError):
    pass


class WordSyntaxError(PadicPeriodError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class WeightOverflowError(PadicPeriodError, ValueError):
    pass


class SeriesMismatchError(PadicPeriodError, ValueError):
    """Two series disagree on alphabet or weight cap."""


class NotInvertibleError(PadicPeriodError, ValueError):
    pass


class DiscError(PadicPeriodError, ValueError):
    """Point lies outside every residue disc we can evaluate in."""


class InsufficientTermsError(PadicPeriodError, ValueError):
    pass


class UnsupportedBasepointError(PadicPeriodError, ValueError):
    pass


class SolverError(PadicPeriodError, ArithmeticError):
    def __init__(self, message: str, weight: int):
        super().__init__(f"weight {weight}: {message}")
        self.weight = weight

"""
Exception types for the Hardy inequality laboratory
"""

from typing import List, Optional


class HardyLabError(Exception):
    """Base class for every failure raised by the laboratory."""


class ProfileError(HardyLabError, ValueError):
    """Misuse of a radial profile (support, grammar, positivity)."""


class EvaluationFault(HardyLabError, ArithmeticError):
    """A profile produced a non-finite value at an undeclared radius."""

    def __init__(self, radius: float, detail: str = ""):
        self.radius = float(radius)
        message = f"non-finite profile value at r={self.radius!r}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class NonIntegrableError(HardyLabError, ValueError):
    """An endpoint singularity is not integrable (exponent <= -1)."""

    def __init__(self, location: float, exponent: float, detail: str = ""):
        self.location = float(location)
        self.exponent = float(exponent)
        message = (
            f"non-integrable singularity at r={self.location!r}: "
            f"integrand ~ |r - r0|^{self.exponent!r} needs exponent > -1"
        )
        if detail:
            message += f"; {detail}"
        super().__init__(message)


class InadmissibleError(HardyLabError, ValueError):
    """Parameters fall outside the hypotheses of the requested family."""

    def __init__(self, family: str, failed_conditions: List[str]):
        self.family = family
        self.failed_conditions = list(failed_conditions)
        super().__init__(
            f"{family} parameters are inadmissible: " + "; ".join(self.failed_conditions)
        )


class BranchMismatchError(HardyLabError, ValueError):
    """Critical and non-critical branches of a family were mixed up."""


class ProbeError(HardyLabError, ValueError):
    """A sharpness probe cannot be carried out as requested."""


class ConfigError(HardyLabError, ValueError):
    """Syntax or resolution failure in a run configuration."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        self.reason = message
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column}"
            location += ": "
        super().__init__(location + message)

from dataclasses import dataclass


@dataclass(frozen=True)
class Violation:
    """A failed hypothesis check.

    ``field`` is a dotted config path such as ``"phi.m"``; ``kind`` is a short
    category (``"monotonicity"``, ``"exponent range"``, ...).
    """

    field: str
    kind: str
    detail: str = ""

    def __str__(self):
        msg = f"{self.field}: {self.kind}"
        return f"{msg} ({self.detail})" if self.detail else msg


class ConfigError(ValueError):
    """Raised when a configuration fails validation."""

    def __init__(self, violations):
        if isinstance(violations, Violation):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class DomainError(ValueError):
    """Argument outside the domain of a function (time or space)."""


class NumericalError(ArithmeticError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")

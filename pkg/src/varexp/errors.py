"""Exception hierarchy for varexp."""

from __future__ import annotations

from typing import Any


class VarexpError(Exception):
    """Base class for every error raised by varexp."""


class ExpressionError(VarexpError):
    """Raised when a coefficient expression cannot be parsed or evaluated."""


class ParseError(ExpressionError):
    """Syntax error in expression text."""

    def __init__(self, message: str, position: int) -> None:
        self.position = position
        self.message = message
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ParseError):
    """An identifier that is neither a variable, a constant nor a function."""

    def __init__(self, name: str, position: int) -> None:
        self.name = name
        super().__init__(f"unknown identifier '{name}'", position)


class UnboundVariableError(ExpressionError):
    """Evaluation was attempted without binding every referenced variable."""

    def __init__(self, missing: list[str]) -> None:
        self.missing = missing
        super().__init__(f"unbound variable(s): {', '.join(missing)}")


class DomainError(ExpressionError):
    """Evaluation left the real domain (log of nonpositive, 0/0, ...)."""


class GridError(VarexpError):
    """Invalid mesh, mismatched grids or a field that breaks its invariants."""


class PreconditionError(VarexpError):
    """An operation was called with inputs outside its admissible set."""


class HypothesisError(VarexpError):
    """A structural hypothesis of a problem family does not hold."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = violations
        super().__init__("; ".join(violations))


class SolverError(VarexpError):
    """Raised when a solve cannot continue (non-finite energy, failed step)."""

    def __init__(self, message: str, report: Any = None, partial: Any = None) -> None:
        self.message = message
        self.report = report
        self.partial = partial
        super().__init__(message)


class BracketError(VarexpError):
    """No admissible parameter was found while building a barrier function."""


class ConfigError(VarexpError):
    """Raised by the config loader with every violation found."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = violations
        joined = "\n  - ".join(violations)
        super().__init__(f"invalid configuration:\n  - {joined}")

"""Exception classes shared across the package."""

from __future__ import annotations


class FormcalcError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedExpressionError(FormcalcError):
    """Expression tree contains a node outside the supported class
    (rationals, variables, + - * /, integer powers, sin/cos/exp/log)."""


class EvaluationError(FormcalcError):
    """Point evaluation failed: unbound variable, division by zero, or a
    value outside the real domain (e.g. log of a negative number)."""


class DimensionError(FormcalcError):
    """Operands live on different coordinate spaces or have incompatible
    degrees."""


class MetricError(FormcalcError):
    """Metric missing, degenerate, or outside the exactly-supported class."""


class ImmersionError(FormcalcError):
    """Pseudostructure map is malformed (bad arity, stray variables, or
    Jacobian rank below the parameter count at every probe point)."""


class HomotopyError(FormcalcError):
    """Antiderivative construction failed: input not closed, or the scaled
    integrand leaves the supported function class."""


class ClosureError(FormcalcError):
    """A restriction that had to be closed is not; carries the residual
    differential for diagnostics."""

    def __init__(self, message, residual=None, verdicts=None):
        super().__init__(message)
        self.residual = residual
        self.verdicts = verdicts or {}


class ClassificationError(FormcalcError):
    """Structure-class parameters outside the valid range."""


class ParseError(FormcalcError):
    """Syntax error in the expression/form DSL, with source position."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigError(FormcalcError):
    """Structured config file (manifold/pseudostructure/balance) is invalid."""

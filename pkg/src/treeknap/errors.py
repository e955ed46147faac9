"""Exception types shared across the package.

Every user-facing failure is a ValueError subclass so callers can catch one
base class; the CLI maps them to exit code 2 (parse/validation) while anything
else surfaces as an internal error (exit code 3).
"""

from __future__ import annotations


class TreeknapError(ValueError):
    """Base class for all validation and format errors raised by this package."""


class InstanceError(TreeknapError):
    """Invalid tree/knapsack instance (structure, signs, overflow guard).

    ``code`` is a short machine-readable tag: "parent-order", "length-mismatch",
    "negative", "overflow", or "capacity".
    """

    def __init__(self, message: str, code: str):
        super().__init__(message)
        self.code = code


class AutomatonError(TreeknapError):
    """Invalid automaton definition (unknown states, bad shapes, duplicates)."""


class FormatError(TreeknapError):
    """Malformed text input. ``line`` is the 1-based source line when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SolverError(TreeknapError):
    """A solver was asked to do something outside its contract
    (e.g. witness from hlrecdp, infeasible tuple expansion, count increments
    on a plain-array solve)."""


class ClosureError(TreeknapError):
    """An operation that requires a prefix-closed automaton was given one
    that is not."""


class InternalError(TreeknapError):
    """A cross-check inside the package failed (witness validation,
    solver disagreement).  Indicates a bug, not bad input; the CLI maps
    this to exit code 3."""

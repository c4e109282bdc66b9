"""Exception types shared across the package."""

from __future__ import annotations


class TanglekitError(Exception):
    """Base class for all package-specific errors."""


class InputFormatError(TanglekitError, ValueError):
    """Malformed or structurally invalid input data."""


class CapExceededError(TanglekitError, ValueError):
    """An exhaustive operation was refused because the universe is too large.

    Caps exist because several operations enumerate all subsets (or all
    pairs of subsets, or all leaf-labeled ternary trees).  The refusal
    names the operation and its cap so callers can react before any
    exponential work starts.
    """

    def __init__(self, operation: str, n: int, cap: int):
        self.operation = operation
        self.n = n
        self.cap = cap
        super().__init__(f"{operation}: universe size {n} exceeds cap {cap}")


class NotMaxSubmodularError(TanglekitError, ValueError):
    """A computation that requires maximum-submodularity detected a violation.

    ``witness`` holds a pair of subset masks (X, Y) with
    max(f(X), f(Y)) < max(f(X & Y), f(X | Y)).
    """

    def __init__(self, message: str, witness: tuple[int, int] | None = None):
        self.witness = witness
        super().__init__(message)

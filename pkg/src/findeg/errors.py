"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ``CapExceeded`` -> 3,
``ValidationError`` and ``StructuralError`` -> 4.
"""

from __future__ import annotations


class FindegError(Exception):
    """Base class for every error raised by the package."""


class StructuralError(FindegError, ValueError):
    """Operands do not fit together (ambient mismatch, wrong shapes, ...)."""


class ValidationError(FindegError, ValueError):
    """An input object violates its declared invariants."""


class PreconditionError(FindegError, ValueError):
    """A documented precondition of an operation does not hold."""


class CapExceeded(FindegError, RuntimeError):
    """A configured size cap would be exceeded; nothing was truncated."""

    def __init__(self, what: str, limit: int, needed: int | None = None):
        self.what = what
        self.limit = limit
        self.needed = needed
        msg = f"cap exceeded: {what} (limit {limit}"
        msg += f", needed {needed})" if needed is not None else ")"
        super().__init__(msg)

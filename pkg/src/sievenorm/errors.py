"""Shared exception types.

Two failure classes are kept apart on purpose: a ``CapacityError`` means the
caller asked for more than the configured work budget (fix the request or
raise the budget), while an ``InvariantError`` means the library caught itself
violating a mathematical identity it is supposed to satisfy -- that is always
a bug and maps to exit code 2 in the CLI.
"""


class CapacityError(RuntimeError):
    """A requested computation exceeds the configured size budget."""


class InvariantError(AssertionError):
    """An internal mathematical invariant failed at runtime."""

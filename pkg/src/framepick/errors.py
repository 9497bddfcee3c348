"""Exception types shared across the engine.

`code` mirrors the CLI exit code so hosts embedding the engine can map
failures without string matching.
"""


class SelectionError(Exception):
    """Base class for engine failures."""

    code = 1


class InputError(SelectionError, ValueError):
    """Invalid inputs: shapes, budgets, file contents, configuration."""

    code = 2


class NumericalError(SelectionError, ArithmeticError):
    """Numerical breakdown that clamping could not recover."""

    code = 3

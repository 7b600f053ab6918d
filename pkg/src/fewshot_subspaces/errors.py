"""Exception types shared across the package.

Missing files and unwritable paths raise the built-in ``OSError`` family;
everything below covers validation and numerical failure modes.
"""


class SubspaceError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(SubspaceError):
    """Shape mismatch, out-of-range parameter, or non-finite data."""


class FormatError(SubspaceError):
    """Malformed feature CSV. Carries the 1-based offending line number."""

    def __init__(self, row, message):
        super().__init__(f"row {row}: {message}")
        self.row = row


class InsufficientClassSize(SubspaceError):
    """A class has too few members for the requested split."""

    def __init__(self, class_index, have, need):
        super().__init__(
            f"class {class_index} has {have} members, split needs {need}"
        )
        self.class_index = class_index
        self.have = have
        self.need = need


class NegativeEntry(SubspaceError):
    """A matrix that must be non-negative has a negative entry."""

    def __init__(self, row, col, value):
        super().__init__(f"negative entry {value!r} at ({row}, {col})")
        self.row = row
        self.col = col
        self.value = value


class NeedTwoClasses(SubspaceError):
    """Scatter statistics require at least two classes."""


class NotBinary(SubspaceError):
    """Operation defined only for two-class problems."""


class DegenerateMeans(SubspaceError):
    """The two class means coincide; no discriminant direction exists."""


class NotPositiveDefinite(SubspaceError):
    """Cholesky factorization failed; the caller should regularize."""


class RecursionBreakdown(SubspaceError):
    """The discriminant recursion hit a singular Gram system at step ``n``.

    ``produced`` counts the directions that were safely computed before
    the breakdown.
    """

    def __init__(self, n, produced):
        super().__init__(
            f"direction recursion broke down at step {n}; "
            f"{produced} directions were produced"
        )
        self.n = n
        self.produced = produced


class NumericalFailure(SubspaceError):
    """An internal solve failed where the inputs made that impossible
    in exact arithmetic; signals corrupted statistics."""


class ConfigError(SubspaceError):
    """Experiment configuration is malformed or violates a precondition."""

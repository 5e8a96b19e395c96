"""Exceptions raised by kgsym.

Every error derives from ``KgsymError``, itself a ``ValueError``, so callers
that already guard library calls with ``except ValueError`` keep working.
"""
from __future__ import annotations

from pathlib import Path


class KgsymError(ValueError):
    """Base class for all kgsym errors."""

    #: Short tag printed by the CLI in ``kgsym: error: <kind>: ...``
    kind = "internal"


class DataFormatError(KgsymError):
    """A dataset file could not be parsed or violates a store invariant."""

    kind = "data"

    def __init__(self, message: str, path: str | Path | None = None, line_no: int | None = None) -> None:
        """Initialize the error.

        Args:
            message: What is wrong with the input
            path: The offending file, if known
            line_no: The 1-based line number, if known
        """
        self.path = None if path is None else Path(path)
        self.line_no = line_no
        location = ""
        if self.path is not None:
            location = f"{self.path}"
            if line_no is not None:
                location += f":{line_no}"
            location += ": "
        super().__init__(f"{location}{message}")


class UnknownRelationError(KgsymError):
    """A relation id or name does not exist in the store."""

    kind = "data"


class UnknownEntityError(KgsymError):
    """An entity id or name does not exist in the store."""

    kind = "data"


class ConstraintError(KgsymError):
    """A numeric precondition does not hold (dimensions, norms, ranges)."""

    kind = "config"


class VocabularyMismatchError(KgsymError):
    """A checkpoint was trained against a different vocabulary."""

    kind = "mismatch"


class CheckpointFormatError(KgsymError):
    """A checkpoint file is truncated or is not a kgsym checkpoint."""

    kind = "checkpoint"


class NonFiniteError(KgsymError):
    """Training produced NaN or Inf."""

    kind = "numeric"

    def __init__(self, block: str, detail: str = "") -> None:
        """Initialize the error.

        Args:
            block: Name of the parameter block (or ``loss``) holding the value
            detail: Extra context such as the epoch and batch
        """
        self.block = block
        message = f"non-finite values in {block}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


__all__ = [
    "CheckpointFormatError",
    "ConstraintError",
    "DataFormatError",
    "KgsymError",
    "NonFiniteError",
    "UnknownEntityError",
    "UnknownRelationError",
    "VocabularyMismatchError",
]

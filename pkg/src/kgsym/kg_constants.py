"""Constants for models, norms, splits and evaluation settings."""

from __future__ import annotations

from enum import Enum

from .errors import ConstraintError


class _Named(str, Enum):
    """A string enum with a forgiving name lookup."""

    @classmethod
    def get_best(cls, name: str | _Named) -> _Named:
        """Return the member matching a user supplied name.

        Args:
            name: A member, its value or its name in any case

        Returns:
            The matching member

        Raises:
            ConstraintError: When nothing matches
        """
        if isinstance(name, cls):
            return name
        wanted = str(name).strip().lower().replace("-", "_")
        for member in cls:
            if wanted in (member.value.lower(), member.name.lower()):
                return member
        choices = ", ".join(member.value for member in cls)
        msg = f"unknown {cls.__name__} {name!r} (choose from {choices})"
        raise ConstraintError(msg)

    def __str__(self) -> str:
        return self.value


class ModelKind(_Named):
    """The translational base models."""

    TRANSE = "transe"
    TRANSH = "transh"
    TRANSD = "transd"

    @property
    def display(self) -> str:
        """Name as used in result tables."""
        return {"transe": "TransE", "transh": "TransH", "transd": "TransD"}[self.value]


class Norm(_Named):
    """Distance norms for the score functions."""

    L1 = "l1"
    L2 = "l2"


class LossReduction(_Named):
    """How the losses of one positive against its corruptions combine."""

    #: Every (positive, negative) pair counts fully
    SUM = "sum"
    #: Each positive counts once, averaged over its corruptions
    MEAN = "mean"


class Branch(_Named):
    """Which relation vector produced a score."""

    SINGLE = "single"
    PLUS = "plus"
    MINUS = "minus"


class Split(_Named):
    """Dataset splits, ``ALL`` selects their union."""

    TRAIN = "train"
    VALID = "valid"
    TEST = "test"
    ALL = "all"

    @classmethod
    def concrete(cls) -> tuple[Split, Split, Split]:
        """The three real splits in file order."""
        return (cls.TRAIN, cls.VALID, cls.TEST)


class CompletionScope(_Named):
    """Which splits symmetric completion touches."""

    TRAIN_ONLY = "train"
    ALL_SPLITS = "all"


class TripleFormat(_Named):
    """On-disk triple layouts."""

    NAMES = "names"
    IDS = "ids"


class EvalMode(_Named):
    """Link prediction ranking settings."""

    RAW = "raw"
    FILTERED = "filtered"


class Side(_Named):
    """Which end of a triple gets corrupted."""

    HEAD = "head"
    TAIL = "tail"


#: Default norm per model, L1 for TransE and L2 for the projection models
DEFAULT_NORMS = {
    ModelKind.TRANSE: Norm.L1,
    ModelKind.TRANSH: Norm.L2,
    ModelKind.TRANSD: Norm.L2,
}

#: The K values reported for Hits@K
HITS_AT = (1, 3, 10)

#: Default symmetry threshold on the ratio of reversed triples
DEFAULT_THRESHOLD = 0.5

"""Training configuration, model aliases and config file resolution."""

from __future__ import annotations

import json
import logging
import os

from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import fields
from dataclasses import replace
from pathlib import Path
from typing import Any

from .errors import ConstraintError
from .kg_constants import DEFAULT_NORMS
from .kg_constants import DEFAULT_THRESHOLD
from .kg_constants import LossReduction
from .kg_constants import ModelKind
from .kg_constants import Norm


logger = logging.getLogger(__name__)

#: Environment variable naming a JSON config file
CONFIG_ENV = "KGSYM_CONFIG"
#: Environment variable giving the default worker count
WORKERS_ENV = "KGSYM_WORKERS"

# Model name aliases (friendly name -> (model, bi-vector relations))
MODEL_ALIASES = {
    "transe": (ModelKind.TRANSE, False),
    "transh": (ModelKind.TRANSH, False),
    "transd": (ModelKind.TRANSD, False),
    "transe-sym": (ModelKind.TRANSE, True),
    "transh-sym": (ModelKind.TRANSH, True),
    "transd-sym": (ModelKind.TRANSD, True),
    # Display names as printed in result tables
    "TransE": (ModelKind.TRANSE, False),
    "TransH": (ModelKind.TRANSH, False),
    "TransD": (ModelKind.TRANSD, False),
    "TransE-SYM": (ModelKind.TRANSE, True),
    "TransH-SYM": (ModelKind.TRANSH, True),
    "TransD-SYM": (ModelKind.TRANSD, True),
}

#: Negative sampling schemes, only uniform corruption is implemented
CORRUPTIONS = ("uniform",)


def resolve_model_alias(name: str) -> tuple[ModelKind, bool]:
    """Resolve a model name to its kind and whether symmetric relations are pairs.

    Args:
        name: ``transe``, ``TransH-SYM``, ``transd_sym`` and similar

    Returns:
        The model kind and the bi-vector switch

    Raises:
        ConstraintError: For an unknown name
    """
    if name in MODEL_ALIASES:
        return MODEL_ALIASES[name]
    key = name.strip().lower().replace("_", "-")
    if key in MODEL_ALIASES:
        return MODEL_ALIASES[key]
    choices = ", ".join(alias for alias in MODEL_ALIASES if alias.islower())
    msg = f"unknown model {name!r} (choose from {choices})"
    raise ConstraintError(msg)


@dataclass(frozen=True)
class TrainConfig:
    """Everything that determines a training run."""

    model_kind: ModelKind = ModelKind.TRANSE
    #: Hold classified symmetric relations as plus/minus pairs
    sym_enabled: bool = False
    dim: int = 50
    margin: float = 1.0
    #: ``None`` picks L1 for TransE and L2 otherwise
    norm: Norm | None = None
    learning_rate: float = 0.01
    epochs: int = 500
    batch_size: int = 1024
    negatives_per_positive: int = 1
    #: ``mean`` averages each positive over its corruptions, steps stay the size of one pair
    reduction: LossReduction = LossReduction.SUM
    corruption: str = "uniform"
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    #: Single update stream, bit-identical reruns
    deterministic: bool = True
    workers: int = 1
    #: Report filtered validation metrics every this many epochs, 0 disables
    valid_every: int = 0

    def __post_init__(self) -> None:
        """Coerce enum fields and check ranges."""
        object.__setattr__(self, "model_kind", ModelKind.get_best(self.model_kind))
        object.__setattr__(self, "reduction", LossReduction.get_best(self.reduction))
        if self.norm is not None:
            object.__setattr__(self, "norm", Norm.get_best(self.norm))
        if self.dim < 1:
            msg = f"dim must be at least 1, got {self.dim}"
            raise ConstraintError(msg)
        if not self.margin > 0:
            msg = f"margin must be positive, got {self.margin}"
            raise ConstraintError(msg)
        if not self.learning_rate > 0:
            msg = f"learning rate must be positive, got {self.learning_rate}"
            raise ConstraintError(msg)
        if self.epochs < 0:
            msg = f"epochs must not be negative, got {self.epochs}"
            raise ConstraintError(msg)
        for name in ("batch_size", "negatives_per_positive", "workers"):
            if getattr(self, name) < 1:
                msg = f"{name} must be at least 1, got {getattr(self, name)}"
                raise ConstraintError(msg)
        if self.valid_every < 0:
            msg = f"valid_every must not be negative, got {self.valid_every}"
            raise ConstraintError(msg)
        if self.corruption not in CORRUPTIONS:
            msg = f"unknown corruption {self.corruption!r} (choose from {', '.join(CORRUPTIONS)})"
            raise ConstraintError(msg)
        if not 0.0 <= self.threshold <= 1.0:
            msg = f"threshold must lie in [0, 1], got {self.threshold}"
            raise ConstraintError(msg)

    @property
    def resolved_norm(self) -> Norm:
        """The norm in effect."""
        return self.norm or DEFAULT_NORMS[self.model_kind]

    @property
    def model_name(self) -> str:
        """Display name such as ``TransE-SYM``."""
        return self.model_kind.display + ("-SYM" if self.sym_enabled else "")

    def to_dict(self) -> dict[str, Any]:
        """JSON ready representation, the norm resolved."""
        found = asdict(self)
        found["model_kind"] = str(self.model_kind)
        found["norm"] = str(self.resolved_norm)
        found["reduction"] = str(self.reduction)
        return found

    def with_overrides(self, **overrides: Any) -> TrainConfig:
        """A copy with the non-``None`` overrides applied."""
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})


_FIELDS = {item.name for item in fields(TrainConfig)}


def _normalize_keys(raw: dict[str, Any], origin: str) -> dict[str, Any]:
    """Map config file keys (which mirror the CLI flags) to ``TrainConfig`` fields.

    A model alias also sets ``sym_enabled`` unless the same layer gives
    ``sym`` explicitly, so ``transe`` switches off pairs from a lower layer.
    """
    renames = {
        "model": "model_kind",
        "sym": "sym_enabled",
        "lr": "learning_rate",
        "batch": "batch_size",
        "negatives": "negatives_per_positive",
    }
    found: dict[str, Any] = {}
    alias_sym: bool | None = None
    for key, value in raw.items():
        name = renames.get(key.replace("-", "_"), key.replace("-", "_"))
        if name not in _FIELDS:
            msg = f"unknown key {key!r} in {origin}"
            raise ConstraintError(msg)
        if name == "model_kind" and isinstance(value, str):
            found["model_kind"], alias_sym = resolve_model_alias(value)
            continue
        found[name] = value
    if alias_sym is not None:
        found.setdefault("sym_enabled", alias_sym)
    return found


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file.

    Args:
        path: The file, a JSON object whose keys mirror the ``train`` flags

    Returns:
        ``TrainConfig`` field overrides

    Raises:
        FileNotFoundError: If the file does not exist
        ConstraintError: If it is not a JSON object or holds unknown keys
    """
    path = Path(path)
    if not path.is_file():
        msg = f"File not found: {path}"
        raise FileNotFoundError(msg)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        msg = f"{path} is not valid JSON: {exc}"
        raise ConstraintError(msg) from None
    if not isinstance(raw, dict):
        msg = f"{path} must hold a JSON object"
        raise ConstraintError(msg)
    return _normalize_keys(raw, str(path))


def resolve_train_config(
    overrides: dict[str, Any] | None = None,
    config_path: str | Path | None = None,
) -> TrainConfig:
    """Build the training configuration.

    Priority order:
    1. Explicit overrides (the CLI flags that were given)
    2. The config file passed as ``config_path``
    3. The config file named by the KGSYM_CONFIG environment variable
    4. Built-in defaults

    Args:
        overrides: Field values, ``None`` entries are ignored
        config_path: A JSON config file

    Returns:
        The validated configuration
    """
    merged: dict[str, Any] = {}
    env_path = os.environ.get(CONFIG_ENV)
    if env_path:
        logger.debug("reading config from %s=%s", CONFIG_ENV, env_path)
        merged.update(load_config_file(env_path))
    if config_path is not None:
        merged.update(load_config_file(config_path))
    merged.update(_normalize_keys({k: v for k, v in (overrides or {}).items() if v is not None}, "overrides"))
    if "workers" not in merged:
        merged["workers"] = default_workers()
    return TrainConfig(**merged)


def default_workers() -> int:
    """Worker count from KGSYM_WORKERS, 1 when unset.

    Raises:
        ConstraintError: When the variable is not a positive integer
    """
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        msg = f"{WORKERS_ENV} must be a positive integer, got {raw!r}"
        raise ConstraintError(msg)
    return workers

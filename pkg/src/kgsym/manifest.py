"""Run manifests and dataset fingerprints."""

from __future__ import annotations

import hashlib
import json
import logging

from collections.abc import Iterable
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from datetime import datetime
from datetime import timezone
from pathlib import Path
from typing import Any


logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

#: Behaviour choices every run records next to its config
DESIGN_FLAGS = {
    "pair_init": "independent",
    "min_tie_break": "plus",
    "min_gradient": "argmin_branch_only",
    "l1_subgradient_at_zero": 0,
    "l2_gradient_at_zero": 0,
    "transd_mapping": "separate_head_tail",
    "transd_entity_projection": "shared_by_pairs",
    "transh_orthogonality": "normal_renormalization_only",
    "negative_sampling": "uniform_train_filtered",
    "negative_attempts": 100,
    "loss_reduction": "sum_over_pairs",
    "optimizer": "sgd_constant_lr",
    "constraints": "per_batch_touched_rows",
    "symmetry_basis": "train",
    "rank_ties": "mean_half_up",
    "eval_protocol": "head_and_tail_pooled",
    "filter_splits": "train_valid_test",
}


def fingerprint(path: str | Path, chunk_size: int = 1 << 20) -> dict[str, Any]:
    """Size and SHA-256 of one file.

    Raises:
        FileNotFoundError: If the file does not exist
    """
    path = Path(path)
    if not path.is_file():
        msg = f"File not found: {path}"
        raise FileNotFoundError(msg)
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        while chunk := handle.read(chunk_size):
            digest.update(chunk)
    return {"name": path.name, "size": path.stat().st_size, "sha256": digest.hexdigest()}


def dataset_fingerprint(paths: Iterable[str | Path]) -> list[dict[str, Any]]:
    """Fingerprints of every existing file, missing files are skipped."""
    return [fingerprint(path) for path in paths if Path(path).is_file()]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """What produced an output directory."""

    command: list[str]
    version: str
    config: dict[str, Any] = field(default_factory=dict)
    datasets: list[dict[str, Any]] = field(default_factory=list)
    seed: int | None = None
    design_flags: dict[str, Any] = field(default_factory=lambda: dict(DESIGN_FLAGS))
    outputs: dict[str, Any] = field(default_factory=dict)
    started: str = field(default_factory=_now)
    finished: str | None = None

    def finish(self) -> None:
        """Stamp the end time."""
        self.finished = _now()

    def to_dict(self) -> dict[str, Any]:
        """JSON ready representation."""
        return asdict(self)

    def write(self, out_dir: str | Path) -> Path:
        """Write ``manifest.json`` into a directory, replacing an existing one."""
        path = Path(out_dir) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info("wrote %s", path)
        return path


def read_manifest(path: str | Path) -> dict[str, Any]:
    """Load a manifest written by ``RunManifest.write``."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        msg = f"File not found: {path}"
        raise FileNotFoundError(msg)
    return json.loads(path.read_text(encoding="utf-8"))

"""Binary checkpoint files.

Layout::

    b"KGESYM\\x01"
    <uint32 little-endian length of the manifest>
    <manifest, compact UTF-8 JSON with sorted keys>
    <raw little-endian float32 arrays in manifest order>

Everything needed to rebuild ``ModelParams`` lives in the manifest, plus the
SHA-256 digests of the vocabularies the model was trained on.
"""

from __future__ import annotations

import hashlib
import json
import logging
import struct

from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import CheckpointFormatError
from ..errors import ConstraintError
from ..errors import VocabularyMismatchError
from ..kg_constants import ModelKind
from ..kg_constants import Norm
from .params import ModelParams


logger = logging.getLogger(__name__)

MAGIC = b"KGESYM\x01"
FORMAT_VERSION = 1
ARRAY_DTYPE = "<f4"
_LENGTH = struct.Struct("<I")


def vocab_digest(names: Iterable[str]) -> str:
    """SHA-256 of the newline joined names in id order."""
    return hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CheckpointMeta:
    """The manifest of a checkpoint, without the arrays."""

    model_kind: ModelKind
    dim: int
    num_entities: int
    num_relations: int
    symmetric_relations: tuple[int, ...]
    norm: Norm
    seed: int
    epoch: int
    entity_digest: str = ""
    relation_digest: str = ""

    def check_store(self, store: Any) -> None:
        """Refuse a store with a different vocabulary.

        Args:
            store: A ``TripleStore``

        Raises:
            VocabularyMismatchError: On different sizes or names
        """
        if store.num_entities != self.num_entities or store.num_relations != self.num_relations:
            msg = (
                f"checkpoint has |E|={self.num_entities}, |R|={self.num_relations} "
                f"but the dataset has |E|={store.num_entities}, |R|={store.num_relations}"
            )
            raise VocabularyMismatchError(msg)
        if self.entity_digest and self.entity_digest != vocab_digest(store.entities.names):
            msg = "checkpoint entity vocabulary differs from the dataset's"
            raise VocabularyMismatchError(msg)
        if self.relation_digest and self.relation_digest != vocab_digest(store.relations.names):
            msg = "checkpoint relation vocabulary differs from the dataset's"
            raise VocabularyMismatchError(msg)


def _manifest(params: ModelParams, meta: CheckpointMeta) -> dict[str, Any]:
    blocks = params.blocks()
    return {
        "format_version": FORMAT_VERSION,
        "model_kind": str(meta.model_kind),
        "dim": params.dim,
        "num_entities": params.num_entities,
        "num_relations": params.num_relations,
        "symmetric_relations": sorted(params.symmetric_relations),
        "minus_slots": [int(slot) for slot in params.minus_slot],
        "norm": str(meta.norm),
        "seed": meta.seed,
        "epoch": meta.epoch,
        "dtype": ARRAY_DTYPE,
        "arrays": [{"name": name, "shape": list(block.shape)} for name, block in blocks.items()],
        "entity_vocab_sha256": meta.entity_digest,
        "relation_vocab_sha256": meta.relation_digest,
    }


def save_checkpoint(
    params: ModelParams,
    path: str | Path,
    norm: Norm | str,
    seed: int,
    epoch: int,
    store: Any = None,
) -> Path:
    """Write parameters to a checkpoint file.

    Args:
        params: The model
        path: Target file, parent directories are created
        norm: The norm the model was trained with
        seed: The seed of the run
        epoch: Completed epochs
        store: The ``TripleStore`` trained on, its vocabulary digests are recorded

    Returns:
        The written path
    """
    path = Path(path)
    if params.dtype != np.float32:
        logger.warning("casting %s parameters to float32 for the checkpoint", params.dtype)
    meta = CheckpointMeta(
        model_kind=params.model_kind,
        dim=params.dim,
        num_entities=params.num_entities,
        num_relations=params.num_relations,
        symmetric_relations=tuple(sorted(params.symmetric_relations)),
        norm=Norm.get_best(norm),
        seed=int(seed),
        epoch=int(epoch),
        entity_digest="" if store is None else vocab_digest(store.entities.names),
        relation_digest="" if store is None else vocab_digest(store.relations.names),
    )
    header = json.dumps(_manifest(params, meta), sort_keys=True, separators=(",", ":")).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(_LENGTH.pack(len(header)))
        handle.write(header)
        for block in params.blocks().values():
            handle.write(np.ascontiguousarray(block, dtype=ARRAY_DTYPE).tobytes())
    logger.info("wrote checkpoint %s (%r, epoch %d)", path, params, epoch)
    return path


def _read_manifest(data: bytes, path: Path) -> tuple[dict[str, Any], int]:
    if not data.startswith(MAGIC):
        msg = f"{path} is not a kgsym checkpoint (bad magic)"
        raise CheckpointFormatError(msg)
    start = len(MAGIC) + _LENGTH.size
    if len(data) < start:
        msg = f"{path} is truncated inside the header"
        raise CheckpointFormatError(msg)
    (length,) = _LENGTH.unpack_from(data, len(MAGIC))
    if len(data) < start + length:
        msg = f"{path} is truncated inside the manifest"
        raise CheckpointFormatError(msg)
    try:
        manifest = json.loads(data[start : start + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        msg = f"{path} has an unreadable manifest: {exc}"
        raise CheckpointFormatError(msg) from None
    if manifest.get("format_version") != FORMAT_VERSION:
        msg = f"{path} has unsupported format version {manifest.get('format_version')!r}"
        raise CheckpointFormatError(msg)
    return manifest, start + length


def load_checkpoint(path: str | Path) -> tuple[ModelParams, CheckpointMeta]:
    """Read a checkpoint written by ``save_checkpoint``.

    Args:
        path: The checkpoint file

    Returns:
        The float32 parameters and the manifest

    Raises:
        FileNotFoundError: If the file does not exist
        CheckpointFormatError: On a bad magic, truncation or an inconsistent manifest
    """
    path = Path(path)
    if not path.is_file():
        msg = f"File not found: {path}"
        raise FileNotFoundError(msg)
    data = path.read_bytes()
    manifest, offset = _read_manifest(data, path)

    try:
        arrays: dict[str, np.ndarray] = {}
        for entry in manifest["arrays"]:
            shape = tuple(int(size) for size in entry["shape"])
            count = int(np.prod(shape))
            end = offset + 4 * count
            if end > len(data):
                msg = f"{path} is truncated inside array {entry['name']}"
                raise CheckpointFormatError(msg)
            raw = np.frombuffer(data, dtype=ARRAY_DTYPE, count=count, offset=offset)
            arrays[entry["name"]] = raw.reshape(shape).astype(np.float32)
            offset = end
        if offset != len(data):
            msg = f"{path} has {len(data) - offset} trailing bytes"
            raise CheckpointFormatError(msg)
        params = ModelParams(manifest["model_kind"], minus_slot=np.asarray(manifest["minus_slots"]), **arrays)
        meta = CheckpointMeta(
            model_kind=ModelKind.get_best(manifest["model_kind"]),
            dim=int(manifest["dim"]),
            num_entities=int(manifest["num_entities"]),
            num_relations=int(manifest["num_relations"]),
            symmetric_relations=tuple(int(r) for r in manifest["symmetric_relations"]),
            norm=Norm.get_best(manifest["norm"]),
            seed=int(manifest["seed"]),
            epoch=int(manifest["epoch"]),
            entity_digest=manifest.get("entity_vocab_sha256", ""),
            relation_digest=manifest.get("relation_vocab_sha256", ""),
        )
    except (KeyError, TypeError, ConstraintError) as exc:
        msg = f"{path} has an incomplete manifest: {exc}"
        raise CheckpointFormatError(msg) from None
    if meta.symmetric_relations != tuple(sorted(params.symmetric_relations)) or (
        params.num_entities,
        params.num_relations,
        params.dim,
    ) != (meta.num_entities, meta.num_relations, meta.dim):
        msg = f"{path} manifest disagrees with its arrays"
        raise CheckpointFormatError(msg)
    logger.info("loaded checkpoint %s (%r, epoch %d)", path, params, meta.epoch)
    return params, meta

"""Read and write triple files.

Two layouts are understood:

``names``
    One triple per line, ``head relation tail`` separated by any run of tabs
    or spaces. Files are written with single tabs.

``ids``
    The id-mapped distribution layout: ``train2id.txt`` style files whose first
    line is the triple count followed by ``head tail relation`` integer lines,
    next to ``entity2id.txt`` and ``relation2id.txt`` maps of ``name id``
    lines (an optional leading count line is accepted).
"""

from __future__ import annotations

import logging

from collections.abc import Iterable
from collections.abc import Iterator
from collections.abc import Sequence
from pathlib import Path

from ..errors import DataFormatError
from ..errors import UnknownEntityError
from ..errors import UnknownRelationError
from ..kg_constants import Split
from ..kg_constants import TripleFormat
from ..kg_defs import Triple
from .store import TripleStore
from .store import Vocab


logger = logging.getLogger(__name__)

#: Split file names per layout, in train/valid/test order
SPLIT_FILES = {
    TripleFormat.NAMES: ("train.txt", "valid.txt", "test.txt"),
    TripleFormat.IDS: ("train2id.txt", "valid2id.txt", "test2id.txt"),
}
ENTITY_MAP = "entity2id.txt"
RELATION_MAP = "relation2id.txt"


def _lines(path: Path) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_no, fields)`` for every non-blank line of a file."""
    if not path.is_file():
        msg = f"File not found: {path}"
        raise FileNotFoundError(msg)
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if fields:
                yield line_no, fields


def _read_name_rows(path: Path) -> list[tuple[int, tuple[str, str, str]]]:
    rows = []
    for line_no, fields in _lines(path):
        if len(fields) != 3:
            msg = f"expected 3 fields (head relation tail), found {len(fields)}"
            raise DataFormatError(msg, path, line_no)
        rows.append((line_no, (fields[0], fields[1], fields[2])))
    return rows


def _parse_int(value: str, path: Path, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        msg = f"expected an integer id, found {value!r}"
        raise DataFormatError(msg, path, line_no) from None


def _read_id_map(path: Path) -> Vocab:
    """Read an ``entity2id``/``relation2id`` map into a vocabulary."""
    pairs: list[tuple[int, str]] = []
    for line_no, fields in _lines(path):
        if not pairs and len(fields) == 1:
            # leading count line
            _parse_int(fields[0], path, line_no)
            continue
        if len(fields) != 2:
            msg = f"expected 2 fields (name id), found {len(fields)}"
            raise DataFormatError(msg, path, line_no)
        pairs.append((_parse_int(fields[1], path, line_no), fields[0]))
    pairs.sort()
    for expected, (idx, name) in enumerate(pairs):
        if idx != expected:
            msg = f"ids must be dense from 0, found {idx} for {name!r} where {expected} was expected"
            raise DataFormatError(msg, path)
    return Vocab(name for _, name in pairs)


def _read_id_rows(path: Path, num_entities: int, num_relations: int) -> list[tuple[int, Triple]]:
    rows: list[tuple[int, Triple]] = []
    declared: int | None = None
    for line_no, fields in _lines(path):
        if declared is None:
            if len(fields) != 1:
                msg = "first line must hold the triple count"
                raise DataFormatError(msg, path, line_no)
            declared = _parse_int(fields[0], path, line_no)
            continue
        if len(fields) != 3:
            msg = f"expected 3 fields (head tail relation), found {len(fields)}"
            raise DataFormatError(msg, path, line_no)
        head, tail, relation = (_parse_int(field, path, line_no) for field in fields)
        if not (0 <= head < num_entities and 0 <= tail < num_entities):
            msg = f"entity id out of range (|E|={num_entities})"
            raise DataFormatError(msg, path, line_no)
        if not 0 <= relation < num_relations:
            msg = f"relation id {relation} out of range (|R|={num_relations})"
            raise DataFormatError(msg, path, line_no)
        rows.append((line_no, Triple(head, relation, tail)))
    if declared is not None and declared != len(rows):
        logger.warning("%s declares %d triples but holds %d", path, declared, len(rows))
    return rows


def _reject_duplicates(rows: Sequence[tuple[int, Triple]], path: Path) -> list[Triple]:
    seen: dict[Triple, int] = {}
    for line_no, triple in rows:
        if triple in seen:
            msg = f"duplicate triple, first seen on line {seen[triple]}"
            raise DataFormatError(msg, path, line_no)
        seen[triple] = line_no
    return [triple for _, triple in rows]


def load_triples(
    train_path: str | Path,
    valid_path: str | Path,
    test_path: str | Path,
    fmt: TripleFormat | str = TripleFormat.NAMES,
) -> TripleStore:
    """Load three split files into a validated store.

    Args:
        train_path: The train split file
        valid_path: The valid split file
        test_path: The test split file
        fmt: ``names`` or ``ids``; for ``ids`` the entity and relation maps
            are read from the train file's directory

    Returns:
        The store, vocabularies cover the union of all splits

    Raises:
        FileNotFoundError: If a file is missing
        DataFormatError: On a malformed line, a bad id or a duplicate triple
    """
    fmt = TripleFormat.get_best(fmt)
    paths = [Path(train_path), Path(valid_path), Path(test_path)]

    if fmt is TripleFormat.NAMES:
        entities = Vocab()
        relations = Vocab()
        splits: list[list[Triple]] = []
        for path in paths:
            rows = [
                (line_no, Triple(entities.add(h), relations.add(r), entities.add(t)))
                for line_no, (h, r, t) in _read_name_rows(path)
            ]
            splits.append(_reject_duplicates(rows, path))
    else:
        directory = paths[0].parent
        entities = _read_id_map(directory / ENTITY_MAP)
        relations = _read_id_map(directory / RELATION_MAP)
        splits = [
            _reject_duplicates(_read_id_rows(path, len(entities), len(relations)), path) for path in paths
        ]

    store = TripleStore(entities, relations, *splits)
    logger.info("loaded %r from %s", store, paths[0].parent)
    return store


def split_paths(data_dir: str | Path, fmt: TripleFormat | str = TripleFormat.NAMES) -> tuple[Path, Path, Path]:
    """The three split files of a dataset directory."""
    fmt = TripleFormat.get_best(fmt)
    directory = Path(data_dir)
    train, valid, test = (directory / name for name in SPLIT_FILES[fmt])
    return train, valid, test


def dataset_files(data_dir: str | Path, fmt: TripleFormat | str = TripleFormat.NAMES) -> list[Path]:
    """Every file a dataset directory load reads, for fingerprinting."""
    fmt = TripleFormat.get_best(fmt)
    files = list(split_paths(data_dir, fmt))
    if fmt is TripleFormat.IDS:
        files += [Path(data_dir) / ENTITY_MAP, Path(data_dir) / RELATION_MAP]
    return files


def load_dataset(data_dir: str | Path, fmt: TripleFormat | str = TripleFormat.NAMES) -> TripleStore:
    """Load a dataset directory holding the three split files.

    Args:
        data_dir: Directory with ``train.txt``/``valid.txt``/``test.txt``
            (``names``) or the ``*2id.txt`` files (``ids``)
        fmt: The layout

    Returns:
        The store
    """
    return load_triples(*split_paths(data_dir, fmt), fmt=fmt)


def write_triples(path: str | Path, triples: Iterable[Triple], store: TripleStore) -> int:
    """Write triples in the ``names`` layout, one tab separated line each.

    Args:
        path: The output file, parent directories are created
        triples: The triples to write
        store: The store whose vocabularies name the ids

    Returns:
        The number of lines written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for triple in triples:
            handle.write("\t".join(store.names_of(Triple(*triple))) + "\n")
            count += 1
    logger.info("wrote %d triples to %s", count, path)
    return count


def save_store(store: TripleStore, out_dir: str | Path) -> list[Path]:
    """Write the three splits as ``train.txt``, ``valid.txt`` and ``test.txt``.

    Returns:
        The written files
    """
    written = []
    for split, path in zip(Split.concrete(), split_paths(out_dir, TripleFormat.NAMES)):
        write_triples(path, store.split(split), store)
        written.append(path)
    return written


def load_probe_triples(path: str | Path, store: TripleStore) -> list[Triple]:
    """Read a ``names`` triple file against an existing store's vocabularies.

    Used for circle sets, duplicates are allowed.

    Raises:
        UnknownEntityError: If a name is not an entity of the store
        UnknownRelationError: If a name is not a relation of the store
    """
    path = Path(path)
    triples = []
    for line_no, (head, relation, tail) in _read_name_rows(path):
        try:
            h = store.entities.id_of(head)
            t = store.entities.id_of(tail)
        except KeyError as exc:
            msg = f"{path}:{line_no}: unknown entity {exc.args[0]!r}"
            raise UnknownEntityError(msg) from None
        if relation not in store.relations:
            msg = f"{path}:{line_no}: unknown relation {relation!r}"
            raise UnknownRelationError(msg)
        triples.append(Triple(h, store.relations.id_of(relation), t))
    return triples

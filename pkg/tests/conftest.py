"""Pytest configuration and fixtures."""
from __future__ import annotations

import os
import pathlib
import sys

import numpy as np
import pytest

from kgsym.kg_data.store import TripleStore, Vocab
from kgsym.kg_defs import Triple


# A small dataset: "spouse" is fully symmetric, "friend" half, "parent" not at all
TOY_TRAIN = [
    ("alice", "spouse", "bob"),
    ("bob", "spouse", "alice"),
    ("carol", "spouse", "dave"),
    ("alice", "parent", "carol"),
    ("bob", "parent", "carol"),
    ("carol", "parent", "erin"),
    ("alice", "friend", "erin"),
    ("erin", "friend", "alice"),
    ("bob", "friend", "dave"),
    ("dave", "friend", "erin"),
]
TOY_VALID = [
    ("dave", "spouse", "carol"),
    ("dave", "parent", "erin"),
]
TOY_TEST = [
    ("erin", "friend", "dave"),
    ("alice", "parent", "dave"),
    ("carol", "friend", "bob"),
]


def write_split(path: pathlib.Path, rows) -> None:
    """Write name triples tab separated."""
    path.write_text("".join(f"{h}\t{r}\t{t}\n" for h, r, t in rows), encoding="utf-8")


def write_dataset(directory: pathlib.Path, train=TOY_TRAIN, valid=TOY_VALID, test=TOY_TEST) -> pathlib.Path:
    """Write a names layout dataset directory."""
    directory.mkdir(parents=True, exist_ok=True)
    write_split(directory / "train.txt", train)
    write_split(directory / "valid.txt", valid)
    write_split(directory / "test.txt", test)
    return directory


def bipartite_store(seed: int = 7, pairs: int = 200, holdout: float = 0.0, entities: int = 40) -> TripleStore:
    """One fully symmetric relation between two halves of the entities.

    ``pairs`` undirected cross pairs are sampled and stored in both
    directions. With ``holdout`` that share of pairs keeps only its forward
    triple in train, the reverse goes to the test split.
    """
    rng = np.random.default_rng(seed)
    half = entities // 2
    cross = [(a, b) for a in range(half) for b in range(half, entities)]
    chosen = rng.choice(len(cross), size=pairs, replace=False)
    held = set(rng.choice(pairs, size=int(round(holdout * pairs)), replace=False).tolist()) if holdout else set()
    train = []
    test = []
    for position, index in enumerate(chosen.tolist()):
        a, b = cross[index]
        train.append(Triple(a, 0, b))
        if position in held:
            test.append(Triple(b, 0, a))
        else:
            train.append(Triple(b, 0, a))
    vocab = Vocab(f"e{i}" for i in range(entities))
    return TripleStore(vocab, Vocab(["spouse"]), train, [], test)


def random_store(rng: np.random.Generator, max_entities: int = 10, max_relations: int = 3) -> TripleStore:
    """A random store of distinct triples with a non-empty test split.

    Roughly a third of the triples get their reverse too so some relations
    come out symmetric.
    """
    entities = int(rng.integers(3, max_entities + 1))
    relations = int(rng.integers(1, max_relations + 1))
    chosen: dict[Triple, None] = {}
    for _ in range(int(rng.integers(4, 3 * entities))):
        head, tail = (int(x) for x in rng.integers(0, entities, size=2))
        triple = Triple(head, int(rng.integers(relations)), tail)
        chosen[triple] = None
        if rng.random() < 0.35:
            chosen[Triple(tail, triple.relation, head)] = None
    triples = list(chosen)
    splits = rng.choice(3, size=len(triples), p=[0.6, 0.2, 0.2])
    splits[0] = 2
    parts = [[t for t, s in zip(triples, splits) if s == k] for k in range(3)]
    return TripleStore(
        Vocab(f"e{i}" for i in range(entities)),
        Vocab(f"r{i}" for i in range(relations)),
        *parts,
    )


@pytest.fixture
def toy_store() -> TripleStore:
    """The toy dataset as a store."""
    return TripleStore.from_names(TOY_TRAIN, TOY_VALID, TOY_TEST)


@pytest.fixture
def toy_dir(tmp_path) -> pathlib.Path:
    """The toy dataset written to disk."""
    return write_dataset(tmp_path / "toy")


@pytest.fixture
def cli_env() -> dict[str, str]:
    """Environment for CLI subprocesses, with the source tree importable."""
    env = dict(os.environ)
    src = str(pathlib.Path(__file__).parent.parent / "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "") if env.get("PYTHONPATH") else src
    env.pop("KGSYM_CONFIG", None)
    env.pop("KGSYM_WORKERS", None)
    return env


@pytest.fixture(autouse=True)
def clean_kgsym_env(monkeypatch):
    """Keep user configuration out of the tests."""
    monkeypatch.delenv("KGSYM_CONFIG", raising=False)
    monkeypatch.delenv("KGSYM_WORKERS", raising=False)


@pytest.fixture(scope="session", autouse=True)
def enable_subprocess_coverage(tmp_path_factory):
    """Enable coverage measurement for subprocess calls.

    This creates a .pth file in site-packages that enables coverage
    for subprocesses, allowing us to measure CLI coverage properly.
    """
    if "COV_CORE_SOURCE" in os.environ or "COVERAGE_PROCESS_START" in os.environ or "--cov" in sys.argv:
        site_packages = None
        for path in sys.path:
            if "site-packages" in path:
                site_packages = pathlib.Path(path)
                break

        if site_packages and site_packages.exists():
            cov_pth = site_packages / "cov.pth"
            cov_pth.write_text("import coverage; coverage.process_startup()")
            os.environ["COVERAGE_PROCESS_START"] = str(pathlib.Path(__file__).parent.parent / ".coveragerc")

            yield

            if cov_pth.exists():
                cov_pth.unlink()
        else:
            yield
    else:
        yield

"""Loading, analysing and transforming triple datasets."""

from .circle import generate_circle_set
from .loader import dataset_files
from .loader import load_dataset
from .loader import load_probe_triples
from .loader import load_triples
from .loader import save_store
from .loader import split_paths
from .loader import write_triples
from .store import TripleStore
from .store import Vocab
from .symmetry import classify_symmetric
from .symmetry import complete_symmetric
from .symmetry import dataset_stats
from .symmetry import relation_meta
from .symmetry import relation_table
from .symmetry import symmetry_ratio


__all__ = (
    "TripleStore",
    "Vocab",
    "classify_symmetric",
    "complete_symmetric",
    "dataset_files",
    "dataset_stats",
    "generate_circle_set",
    "load_dataset",
    "load_probe_triples",
    "load_triples",
    "relation_meta",
    "relation_table",
    "save_store",
    "split_paths",
    "symmetry_ratio",
    "write_triples",
)

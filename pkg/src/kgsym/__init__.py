"""kgsym - translational knowledge graph embeddings with bi-vector symmetric relations."""

from __future__ import annotations

__version__ = "0.1.0"

# Pipeline steps on dataset directories
from kgsym.api import circle_gen, complete, evaluate_checkpoint, stats, train_model
from kgsym.config import TrainConfig, resolve_train_config
from kgsym.errors import KgsymError
from kgsym.evaluation import circle_eval, evaluate_both, link_prediction, rank_triple
from kgsym.kg_constants import EvalMode, ModelKind, Norm, Split
from kgsym.kg_data import TripleStore, classify_symmetric, complete_symmetric, dataset_stats, load_dataset
from kgsym.kg_defs import Triple
from kgsym.models import ModelParams, init_params, load_checkpoint, save_checkpoint, score
from kgsym.training import train

__all__ = [
    "__version__",
    # Errors
    "KgsymError",
    # Data
    "Triple",
    "TripleStore",
    "classify_symmetric",
    "complete_symmetric",
    "dataset_stats",
    "load_dataset",
    # Models
    "ModelKind",
    "ModelParams",
    "Norm",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "score",
    # Training and evaluation
    "EvalMode",
    "Split",
    "TrainConfig",
    "circle_eval",
    "evaluate_both",
    "link_prediction",
    "rank_triple",
    "resolve_train_config",
    "train",
    # Pipeline
    "circle_gen",
    "complete",
    "evaluate_checkpoint",
    "stats",
    "train_model",
]

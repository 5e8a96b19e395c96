"""Translational models, their scores, gradients and checkpoints."""

from .checkpoint import CheckpointMeta
from .checkpoint import load_checkpoint
from .checkpoint import save_checkpoint
from .gradients import BatchGradients
from .gradients import Gradients
from .gradients import apply_gradients
from .gradients import batch_gradients
from .gradients import gradients
from .gradients import loss_value
from .params import ModelParams
from .params import PairRelation
from .params import RelationSlot
from .params import SingleRelation
from .params import apply_constraints
from .params import init_params
from .params import mean_entity_norm
from .params import relation_norms
from .scoring import BatchScores
from .scoring import ScoreResult
from .scoring import score
from .scoring import score_batch
from .scoring import score_candidates
from .scoring import score_transd
from .scoring import score_transe
from .scoring import score_transh


__all__ = (
    "BatchGradients",
    "BatchScores",
    "CheckpointMeta",
    "Gradients",
    "ModelParams",
    "PairRelation",
    "RelationSlot",
    "ScoreResult",
    "SingleRelation",
    "apply_constraints",
    "apply_gradients",
    "batch_gradients",
    "gradients",
    "init_params",
    "load_checkpoint",
    "loss_value",
    "mean_entity_norm",
    "relation_norms",
    "save_checkpoint",
    "score",
    "score_batch",
    "score_candidates",
    "score_transd",
    "score_transe",
    "score_transh",
)

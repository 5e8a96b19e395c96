"""End to end runs on the synthetic symmetric dataset.

Both runs take on the order of a minute, they are marked slow.
"""
from __future__ import annotations

import pytest

from kgsym.config import TrainConfig
from kgsym.evaluation import circle_eval, link_prediction
from kgsym.kg_constants import EvalMode
from kgsym.kg_data import generate_circle_set
from kgsym.models import mean_entity_norm, relation_norms
from kgsym.training import train

from .conftest import bipartite_store


SPOUSE = 0

BASE = {"dim": 16, "norm": "l2", "margin": 1.0, "learning_rate": 0.01, "epochs": 500, "seed": 17}


@pytest.mark.slow
class TestZeroVectorDegeneration:
    """A single vector for a fully symmetric relation collapses to zero."""

    def test_baseline_collapses(self):
        """Test the relation norm vanishes and circle triples rank first."""
        store = bipartite_store()
        config = TrainConfig(batch_size=4, negatives_per_positive=64, reduction="mean", **BASE)
        result = train(store, config)
        params = result.params
        assert relation_norms(params, [SPOUSE])[SPOUSE]["norm"] < 0.05 * mean_entity_norm(params)

        circles = generate_circle_set(store, [SPOUSE], 200, seed=1)
        report = circle_eval(params, circles, store, norm="l2")
        assert report.fraction_ranked_1 >= 0.95


@pytest.mark.slow
class TestBiVectorFix:
    """Two vectors per symmetric relation recover held out reverses."""

    def test_sym_beats_baseline(self):
        """Test filtered Hits@10 on held out reverses and the subvector norms."""
        store = bipartite_store(holdout=0.2)
        baseline = train(store, TrainConfig(batch_size=4, **BASE))
        paired = train(store, TrainConfig(batch_size=4, sym_enabled=True, **BASE))
        assert paired.symmetric == frozenset({SPOUSE})

        base_hits = link_prediction(baseline.params, store.test, store, EvalMode.FILTERED, "l2").hits[10]
        sym_hits = link_prediction(paired.params, store.test, store, EvalMode.FILTERED, "l2").hits[10]
        assert sym_hits - base_hits >= 0.20

        norms = relation_norms(paired.params, [SPOUSE])[SPOUSE]
        floor = 0.5 * mean_entity_norm(paired.params)
        assert norms["plus"] > floor
        assert norms["minus"] > floor

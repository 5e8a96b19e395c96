"""Tests for link prediction and the circle diagnostic."""
from __future__ import annotations

import math

import numpy as np
import pytest

from kgsym.errors import DataFormatError, UnknownEntityError, UnknownRelationError
from kgsym.evaluation import (
    ASYMMETRIC,
    SYMMETRIC,
    RankMetrics,
    circle_eval,
    evaluate_both,
    link_prediction,
    rank_of,
    rank_triple,
)
from kgsym.kg_constants import EvalMode, ModelKind, Split
from kgsym.kg_data import TripleStore, Vocab
from kgsym.kg_defs import Triple
from kgsym.models import ModelParams, init_params, score

from .conftest import random_store


def brute_force_ranks(params, triple, store, filtered):
    """Head and tail rank by enumerating every substitution."""
    head, relation, tail = triple

    def rank(true_entity, build):
        scores = {e: score(params, build(e)).value for e in range(params.num_entities)}
        excluded = set()
        if filtered:
            excluded = {e for e in scores if e != true_entity and store.contains(build(e))}
        target = scores[true_entity]
        less = sum(1 for e, value in scores.items() if e not in excluded and value < target)
        tied = sum(1 for e, value in scores.items() if e not in excluded and value == target)
        return 1 + less + math.floor((tied - 1) / 2 + 0.5)

    return (
        rank(head, lambda e: Triple(e, relation, tail)),
        rank(tail, lambda e: Triple(head, relation, e)),
    )


def line_store():
    """Three entities on a line and one relation moving one step right."""
    store = TripleStore(Vocab(["x", "y", "z"]), Vocab(["next"]), [], [], [Triple(0, 0, 1)])
    params = ModelParams(
        ModelKind.TRANSE,
        np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]]),
        np.array([[1.0, 0.0]]),
        np.array([-1]),
    )
    return store, params


class TestRankOf:
    """Test the rank convention."""

    def test_strictly_best(self):
        """Test a unique minimum ranks first."""
        assert rank_of(np.array([0.5, 0.1, 0.9]), 1) == 1

    def test_ties(self):
        """Test ties count half, rounded up."""
        assert rank_of(np.array([0.1, 0.1, 0.9]), 0) == 2
        assert rank_of(np.array([0.1, 0.1, 0.1, 0.9]), 2) == 2
        assert rank_of(np.array([0.0, 0.1, 0.1, 0.1, 0.1]), 1) == 4

    def test_exclusion(self):
        """Test excluded candidates are dropped but never the true one."""
        scores = np.array([0.1, 0.2, 0.3, 0.05])
        assert rank_of(scores, 2) == 4
        assert rank_of(scores, 2, {0, 3}) == 2
        assert rank_of(scores, 2, {2, 3}) == 3

    def test_worse_candidate_changes_nothing(self):
        """Test appending a strictly worse candidate keeps the rank."""
        scores = np.array([0.4, 0.2, 0.3, 0.2])
        assert rank_of(np.append(scores, 9.0), 2) == rank_of(scores, 2)


class TestRankMetrics:
    """Test the aggregation."""

    def test_worked_ranks(self):
        """Test ranks 1, 1, 11 and 11."""
        metrics = RankMetrics.from_ranks([1, 1, 11, 11])
        assert metrics.mr == 6.0
        assert metrics.mrr == pytest.approx((1 + 1 + 1 / 11 + 1 / 11) / 4)
        assert metrics.hits == {1: 0.5, 3: 0.5, 10: 0.5}

    def test_invariants(self):
        """Test the ordering of the metrics."""
        metrics = RankMetrics.from_ranks(np.random.default_rng(0).integers(1, 30, size=200))
        assert metrics.hits[1] <= metrics.hits[3] <= metrics.hits[10]
        assert metrics.mrr <= 1.0
        assert metrics.mr >= 1.0
        assert metrics.mrr >= metrics.hits[1]

    def test_empty(self):
        """Test an empty list."""
        assert RankMetrics.from_ranks([]).count == 0

    def test_order_independent(self):
        """Test permuting the ranks gives bit-identical metrics."""
        rng = np.random.default_rng(5)
        ranks = rng.integers(1, 400, size=333)
        base = RankMetrics.from_ranks(ranks)
        for _ in range(20):
            assert RankMetrics.from_ranks(rng.permutation(ranks)) == base
        assert RankMetrics.from_ranks(ranks[::-1].tolist()) == base


class TestLinkPrediction:
    """Test ranking whole splits."""

    def test_perfect_triple(self):
        """Test a triple ranked first on both sides."""
        store, params = line_store()
        assert rank_triple(params, (0, 0, 1), store) == (1, 1)
        report = link_prediction(params, store.test, store)
        assert report.count == 1
        assert (report.mr, report.mrr) == (1.0, 1.0)
        assert report.hits == {1: 1.0, 3: 1.0, 10: 1.0}

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_brute_force_oracle(self, toy_store, kind):
        """Test every rank against exhaustive enumeration."""
        params = init_params(5, 3, [0, 2], kind, dim=3, seed=7, dtype=np.float64)
        triples = toy_store.split(Split.ALL)
        reports = evaluate_both(params, triples, toy_store)
        for mode, filtered in ((EvalMode.RAW, False), (EvalMode.FILTERED, True)):
            heads, tails = [], []
            for triple in triples:
                head_rank, tail_rank = brute_force_ranks(params, triple, toy_store, filtered)
                assert rank_triple(params, triple, toy_store, mode) == (head_rank, tail_rank)
                heads.append(head_rank)
                tails.append(tail_rank)
            expected = RankMetrics.from_ranks(heads + tails)
            assert reports[mode].metrics == expected

    def test_filtered_not_worse(self, toy_store):
        """Test filtering never raises a rank."""
        params = init_params(5, 3, [], ModelKind.TRANSH, dim=3, seed=2, dtype=np.float64)
        for triple in toy_store.split(Split.ALL):
            raw = rank_triple(params, triple, toy_store, EvalMode.RAW)
            filtered = rank_triple(params, triple, toy_store, "filtered")
            assert filtered.head_rank <= raw.head_rank
            assert filtered.tail_rank <= raw.tail_rank

    def test_order_and_workers(self, toy_store):
        """Test shuffling the split or adding threads changes no metric."""
        params = init_params(5, 3, [2], ModelKind.TRANSD, dim=3, seed=2, dtype=np.float64)
        triples = list(toy_store.split(Split.ALL))
        base = link_prediction(params, triples, toy_store)
        assert link_prediction(params, triples[::-1], toy_store).metrics == base.metrics
        assert link_prediction(params, triples, toy_store, workers=3).metrics == base.metrics

    def test_breakdowns(self, toy_store):
        """Test the per relation and per category splits of the ranks."""
        params = init_params(5, 3, [], ModelKind.TRANSE, dim=3, seed=2, dtype=np.float64)
        report = link_prediction(params, toy_store.test, toy_store, symmetric=[2])
        assert set(report.per_relation) == {1, 2}
        assert report.per_category[SYMMETRIC].count == 4
        assert report.per_category[ASYMMETRIC].count == 2
        document = report.to_dict()
        assert document["mode"] == "filtered"
        assert document["triples"] == 3
        assert set(document["per_relation"]) == {"parent", "friend"}
        assert set(document["hits"]) == {"1", "3", "10"}

    def test_default_categories(self, toy_store):
        """Test the symmetric category falls back to the train classification."""
        params = init_params(5, 3, [], ModelKind.TRANSE, dim=3, seed=2, dtype=np.float64)
        report = link_prediction(params, toy_store.test, toy_store)
        # the friend triples of the test split
        assert report.per_category[SYMMETRIC].count == 4

    def test_errors(self, toy_store):
        """Test an empty split and unknown ids."""
        params = init_params(5, 3, [], ModelKind.TRANSE, dim=3, seed=2)
        with pytest.raises(DataFormatError, match="empty"):
            link_prediction(params, [], toy_store)
        with pytest.raises(UnknownEntityError):
            rank_triple(params, (0, 0, 9), toy_store)
        with pytest.raises(UnknownRelationError):
            link_prediction(params, [(0, 5, 1)], toy_store)


class TestCircle:
    """Test the reflexive triple diagnostic."""

    def test_zero_translation(self, toy_store):
        """Test a zero relation vector scores every circle triple 0 at rank 1."""
        params = init_params(5, 3, [], ModelKind.TRANSE, dim=4, seed=0, dtype=np.float64)
        params.rel_vec[0] = 0.0
        report = circle_eval(params, [Triple(e, 0, e) for e in range(5)], toy_store)
        assert report.mean_score == 0.0
        assert report.mr == 1.0
        assert report.fraction_ranked_1 == 1.0

    def test_pair_scores(self, toy_store):
        """Test a pair scores the shorter of its vectors."""
        params = init_params(5, 3, [0], ModelKind.TRANSE, dim=2, seed=0, dtype=np.float64)
        params.rel_vec[0] = [3.0, 4.0]
        params.rel_vec[3] = [0.0, 2.0]
        report = circle_eval(params, [Triple(1, 0, 1), Triple(2, 0, 2)], toy_store, norm="l2")
        assert report.mean_score == pytest.approx(2.0)
        assert report.per_relation[0].mean_score == pytest.approx(2.0)
        assert 0.0 <= report.fraction_ranked_1 <= 1.0

    def test_order_independent(self, toy_store):
        """Test reversing the circle set changes no score or metric."""
        params = init_params(5, 3, [0], ModelKind.TRANSH, dim=4, seed=3)
        circles = [Triple(e, r, e) for r in (0, 2) for e in range(5)]
        forward = circle_eval(params, circles, toy_store)
        backward = circle_eval(params, circles[::-1], toy_store)
        assert forward.overall == backward.overall
        assert forward.per_relation == backward.per_relation

    def test_to_dict(self, toy_store):
        """Test the JSON keys."""
        params = init_params(5, 3, [], ModelKind.TRANSE, dim=4, seed=0)
        document = circle_eval(params, [Triple(0, 2, 0), Triple(3, 0, 3)], toy_store).to_dict()
        assert {"mean_score", "fraction_ranked_1", "mr", "mrr", "hits", "per_relation"} <= set(document)
        assert set(document["per_relation"]) == {"spouse", "friend"}

    def test_errors(self, toy_store):
        """Test an empty set and ids outside the model."""
        params = init_params(5, 3, [], ModelKind.TRANSE, dim=4, seed=0)
        with pytest.raises(DataFormatError):
            circle_eval(params, [], toy_store)
        with pytest.raises(UnknownEntityError):
            circle_eval(params, [Triple(7, 0, 7)], toy_store)
        with pytest.raises(UnknownRelationError):
            circle_eval(params, [Triple(0, 4, 0)], toy_store)


class TestRandomStores:
    """Compare link prediction with brute force on many small stores."""

    def test_oracle(self):
        """Test every rank and metric on fifty random stores."""
        rng = np.random.default_rng(2024)
        kinds = list(ModelKind)
        for trial in range(50):
            store = random_store(rng)
            relations = range(store.num_relations)
            symmetric = [r for r in relations if rng.random() < 0.5]
            kind = kinds[trial % len(kinds)]
            params = init_params(
                store.num_entities, store.num_relations, symmetric, kind, dim=3, seed=trial, dtype=np.float64
            )
            reports = evaluate_both(params, store.test, store)
            for mode, filtered in ((EvalMode.RAW, False), (EvalMode.FILTERED, True)):
                ranks = [brute_force_ranks(params, triple, store, filtered) for triple in store.test]
                assert [tuple(rank_triple(params, t, store, mode)) for t in store.test] == ranks
                heads, tails = zip(*ranks)
                assert reports[mode].metrics == RankMetrics.from_ranks(list(heads) + list(tails))

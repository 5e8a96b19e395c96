"""Tests for symmetry ratios, classification and completion."""
from __future__ import annotations

import logging

import numpy as np
import pytest

from kgsym.errors import ConstraintError, UnknownRelationError
from kgsym.kg_constants import CompletionScope, Split
from kgsym.kg_data import (
    TripleStore,
    classify_symmetric,
    complete_symmetric,
    dataset_stats,
    relation_meta,
    relation_table,
    symmetry_ratio,
)
from kgsym.kg_defs import Triple

from .conftest import random_store


SPOUSE, PARENT, FRIEND = 0, 1, 2


class TestSymmetryRatio:
    """Test the fraction of reversed triples."""

    def test_over_all_splits(self, toy_store):
        """Test ratios over the union of the splits."""
        assert symmetry_ratio(toy_store, SPOUSE) == 1.0
        assert symmetry_ratio(toy_store, FRIEND) == pytest.approx(4 / 6)
        assert symmetry_ratio(toy_store, PARENT) == 0.0

    def test_over_train(self, toy_store):
        """Test ratios over the train split alone."""
        assert symmetry_ratio(toy_store, SPOUSE, Split.TRAIN) == pytest.approx(2 / 3)
        assert symmetry_ratio(toy_store, FRIEND, "train") == 0.5

    def test_reflexive_counts(self):
        """Test a reflexive triple is its own reverse."""
        store = TripleStore.from_names([("a", "same", "a"), ("a", "same", "b")])
        assert symmetry_ratio(store, 0) == 0.5

    def test_empty_relation(self, toy_store):
        """Test a relation with no triples in the split has ratio 0."""
        assert symmetry_ratio(toy_store, SPOUSE, Split.TEST) == 0.0

    def test_unknown_relation(self, toy_store):
        """Test an unknown id."""
        with pytest.raises(UnknownRelationError):
            symmetry_ratio(toy_store, 9)

    def test_meta(self, toy_store):
        """Test the per relation record."""
        meta = relation_meta(toy_store, FRIEND)
        assert meta.name == "friend"
        assert meta.total == 6
        assert meta.symmetric_count == 4
        assert meta.is_symmetric


class TestClassify:
    """Test threshold classification."""

    def test_default_threshold(self, toy_store):
        """Test spouse and friend reach 0.5 over all splits."""
        assert set(classify_symmetric(toy_store)) == {SPOUSE, FRIEND}

    def test_threshold_inclusive(self, toy_store):
        """Test a ratio exactly at the threshold is symmetric."""
        found = classify_symmetric(toy_store, 0.5, Split.TRAIN)
        assert set(found) == {SPOUSE, FRIEND}
        assert found[FRIEND].ratio == 0.5

    def test_higher_threshold(self, toy_store):
        """Test raising the threshold drops relations."""
        assert set(classify_symmetric(toy_store, 0.7)) == {SPOUSE}
        assert set(classify_symmetric(toy_store, 0.7, Split.TRAIN)) == set()

    def test_threshold_bounds(self, toy_store):
        """Test 0 and 1 are accepted and values outside are not."""
        assert set(classify_symmetric(toy_store, 0.0)) == {SPOUSE, PARENT, FRIEND}
        assert set(classify_symmetric(toy_store, 1.0)) == {SPOUSE}
        with pytest.raises(ConstraintError):
            classify_symmetric(toy_store, 1.5)
        with pytest.raises(ConstraintError):
            classify_symmetric(toy_store, -0.1)

    def test_table_order(self, toy_store):
        """Test the table is sorted by ratio, descending."""
        names = [meta.name for meta in relation_table(toy_store)]
        assert names == ["spouse", "friend", "parent"]


class TestComplete:
    """Test adding the missing reverses."""

    def test_guarded_counts(self, toy_store):
        """Test reverses living in other splits are skipped."""
        result = complete_symmetric(toy_store, [SPOUSE, FRIEND])
        assert result.added == {Split.TRAIN: 1, Split.VALID: 0, Split.TEST: 1}
        assert result.skipped == {Split.TRAIN: 2, Split.VALID: 1, Split.TEST: 1}
        assert result.total_added == 2
        assert result.store.contains(Triple(3, FRIEND, 1), Split.TRAIN)
        assert result.store.contains(Triple(1, FRIEND, 2), Split.TEST)
        assert not result.store.contains(Triple(3, SPOUSE, 2), Split.TRAIN)

    def test_unguarded(self, toy_store):
        """Test without the guard every split becomes closed under reversal."""
        result = complete_symmetric(toy_store, [SPOUSE, FRIEND], leakage_guard=False)
        assert result.added == {Split.TRAIN: 3, Split.VALID: 1, Split.TEST: 2}
        for split in Split.concrete():
            for relation in (SPOUSE, FRIEND):
                if result.store.split(split) and any(t.relation == relation for t in result.store.split(split)):
                    assert symmetry_ratio(result.store, relation, split) == 1.0

    def test_appended_after_originals(self, toy_store):
        """Test the original order is kept and reverses follow it."""
        result = complete_symmetric(toy_store, [SPOUSE, FRIEND])
        assert result.store.train[: len(toy_store.train)] == toy_store.train
        assert len(result.store.train) == len(toy_store.train) + 1

    def test_idempotent(self, toy_store):
        """Test completing twice adds nothing the second time."""
        first = complete_symmetric(toy_store, [SPOUSE, FRIEND], leakage_guard=False)
        second = complete_symmetric(first.store, [SPOUSE, FRIEND], leakage_guard=False)
        assert second.total_added == 0
        assert second.store.name_level_splits() == first.store.name_level_splits()

    def test_train_scope(self, toy_store):
        """Test only the train split changes."""
        result = complete_symmetric(toy_store, [SPOUSE, FRIEND], CompletionScope.TRAIN_ONLY)
        assert result.store.valid == toy_store.valid
        assert result.store.test == toy_store.test
        assert result.added[Split.TEST] == 0

    def test_other_relations_untouched(self, toy_store):
        """Test relations outside the set are left alone."""
        result = complete_symmetric(toy_store, [PARENT], leakage_guard=False)
        assert result.total_added == 5
        assert complete_symmetric(toy_store, []).store.name_level_splits() == toy_store.name_level_splits()

    def test_vocabulary_kept(self, toy_store):
        """Test completion never creates entities or relations."""
        result = complete_symmetric(toy_store, [SPOUSE, FRIEND], leakage_guard=False)
        assert result.store.entities == toy_store.entities
        assert result.store.relations == toy_store.relations

    def test_skip_warning(self, toy_store, caplog):
        """Test guarded skips are logged."""
        with caplog.at_level(logging.INFO, logger="kgsym"):
            complete_symmetric(toy_store, [SPOUSE])
        levels = {record.levelno for record in caplog.records if "already live" in record.getMessage()}
        assert levels == {logging.WARNING}

    def test_quiet_skips(self, toy_store, caplog):
        """Test quiet completion reports skips at INFO."""
        with caplog.at_level(logging.INFO, logger="kgsym"):
            complete_symmetric(toy_store, [SPOUSE], quiet=True)
        assert "already live in another split" in caplog.text
        assert not [record for record in caplog.records if record.levelno >= logging.WARNING]


class TestDatasetStats:
    """Test the statistics report."""

    def test_counts(self, toy_store):
        """Test the per split counts and percentages."""
        report = dataset_stats(toy_store)
        train = report.splits[Split.TRAIN]
        assert (train.total, train.symmetric, train.added, train.skipped, train.added_unguarded) == (10, 4, 1, 2, 3)
        assert train.percent_before == pytest.approx(40.0)
        assert train.percent_after == pytest.approx(100 * 6 / 11)
        assert report.splits[Split.VALID].percent_before == 0.0
        assert report.splits[Split.TEST].added == 1

    def test_relations(self, toy_store):
        """Test the relation table and symmetric subset."""
        report = dataset_stats(toy_store, basis=Split.TRAIN)
        assert report.basis is Split.TRAIN
        assert [meta.name for meta in report.symmetric_relations] == ["spouse", "friend"]

    def test_to_dict(self, toy_store):
        """Test the JSON keys."""
        document = dataset_stats(toy_store).to_dict()
        assert set(document) == {"entities", "relations", "threshold", "basis", "splits", "relation_table"}
        assert document["splits"]["train"]["sym"] == 4
        assert document["relation_table"][0]["name"] == "spouse"
        assert document["basis"] == "all"

    def test_no_warnings(self, toy_store, caplog):
        """Test the what-if completion behind the counts does not warn."""
        with caplog.at_level(logging.INFO, logger="kgsym"):
            report = dataset_stats(toy_store)
        assert report.splits[Split.TRAIN].skipped == 2
        assert not [record for record in caplog.records if record.levelno >= logging.WARNING]


class TestCompletionProperties:
    """Completion laws over random stores."""

    @pytest.mark.parametrize("guard", [True, False])
    def test_closed_and_idempotent(self, guard):
        """Test completed relations reach ratio 1 and a second pass adds nothing."""
        rng = np.random.default_rng(11 + guard)
        for _ in range(40):
            store = random_store(rng)
            relations = [r for r in range(store.num_relations) if rng.random() < 0.6]
            first = complete_symmetric(store, relations, leakage_guard=guard)
            for relation in relations:
                if any(t.relation == relation for t in store.split(Split.ALL)):
                    assert symmetry_ratio(first.store, relation) == 1.0
            second = complete_symmetric(first.store, relations, leakage_guard=guard)
            assert second.total_added == 0
            assert second.store.name_level_splits() == first.store.name_level_splits()

    def test_guard_never_leaks(self):
        """Test guarded completion adds no triple that lives in another split."""
        rng = np.random.default_rng(5)
        for _ in range(40):
            store = random_store(rng)
            result = complete_symmetric(store, range(store.num_relations))
            for split in Split.concrete():
                added = result.store.index(split) - store.index(split)
                others = [s for s in Split.concrete() if s is not split]
                assert not any(triple in store.index(other) for other in others for triple in added)

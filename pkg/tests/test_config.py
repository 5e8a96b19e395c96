"""Tests for training configuration resolution."""
from __future__ import annotations

import json

import pytest

from kgsym.config import (
    CONFIG_ENV,
    WORKERS_ENV,
    TrainConfig,
    default_workers,
    load_config_file,
    resolve_model_alias,
    resolve_train_config,
)
from kgsym.errors import ConstraintError
from kgsym.kg_constants import LossReduction, ModelKind, Norm


class TestAliases:
    """Test model name resolution."""

    @pytest.mark.parametrize(
        ("name", "expected"),
        [
            ("transe", (ModelKind.TRANSE, False)),
            ("TransH-SYM", (ModelKind.TRANSH, True)),
            ("transd_sym", (ModelKind.TRANSD, True)),
            (" TRANSE ", (ModelKind.TRANSE, False)),
        ],
    )
    def test_resolve(self, name, expected):
        """Test friendly and display names."""
        assert resolve_model_alias(name) == expected

    def test_unknown(self):
        """Test an unknown model lists the choices."""
        with pytest.raises(ConstraintError, match="transe-sym"):
            resolve_model_alias("rotate")


class TestTrainConfig:
    """Test the configuration record."""

    def test_defaults(self):
        """Test the documented defaults."""
        config = TrainConfig()
        assert (config.dim, config.margin, config.learning_rate, config.epochs, config.batch_size) == (
            50,
            1.0,
            0.01,
            500,
            1024,
        )
        assert config.resolved_norm is Norm.L1
        assert TrainConfig(model_kind="transh").resolved_norm is Norm.L2
        assert config.model_name == "TransE"
        assert TrainConfig(model_kind="transd", sym_enabled=True).model_name == "TransD-SYM"
        assert config.reduction is LossReduction.SUM
        assert TrainConfig(reduction="MEAN").reduction is LossReduction.MEAN

    @pytest.mark.parametrize(
        "bad",
        [
            {"margin": 0.0},
            {"learning_rate": -1.0},
            {"dim": 0},
            {"batch_size": 0},
            {"epochs": -1},
            {"threshold": 1.2},
            {"corruption": "bern"},
            {"norm": "l3"},
            {"reduction": "median"},
        ],
    )
    def test_validation(self, bad):
        """Test out of range values are rejected."""
        with pytest.raises(ConstraintError):
            TrainConfig(**bad)

    def test_to_dict(self):
        """Test the JSON form resolves enums and the norm."""
        document = TrainConfig(model_kind="transh").to_dict()
        assert document["model_kind"] == "transh"
        assert document["norm"] == "l2"
        assert document["reduction"] == "sum"
        json.dumps(document)

    def test_with_overrides(self):
        """Test None overrides are ignored."""
        config = TrainConfig().with_overrides(dim=8, margin=None)
        assert config.dim == 8
        assert config.margin == 1.0


class TestResolve:
    """Test the precedence of flags, files and the environment."""

    def test_defaults(self):
        """Test nothing given yields the defaults."""
        assert resolve_train_config() == TrainConfig()

    def test_file_keys_mirror_flags(self, tmp_path):
        """Test flag style keys and model aliases in a file."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"model": "transh-sym", "lr": 0.1, "batch": 16, "valid-every": 5}))
        config = resolve_train_config(config_path=path)
        assert config.model_kind is ModelKind.TRANSH
        assert config.sym_enabled
        assert (config.learning_rate, config.batch_size, config.valid_every) == (0.1, 16, 5)

    def test_precedence(self, tmp_path, monkeypatch):
        """Test flags beat the file, the file beats the environment file."""
        env_file = tmp_path / "env.json"
        env_file.write_text(json.dumps({"dim": 10, "margin": 2.0, "epochs": 7}))
        flag_file = tmp_path / "flag.json"
        flag_file.write_text(json.dumps({"dim": 20, "margin": 3.0}))
        monkeypatch.setenv(CONFIG_ENV, str(env_file))
        config = resolve_train_config({"dim": 30, "seed": None}, flag_file)
        assert (config.dim, config.margin, config.epochs, config.seed) == (30, 3.0, 7, 0)

    def test_plain_model_flag_clears_pairs(self, tmp_path):
        """Test a plain model flag over a -sym file switches pairs off."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"model": "transe-sym"}))
        assert resolve_train_config(config_path=path).sym_enabled
        config = resolve_train_config({"model": "transe"}, path)
        assert config.model_kind is ModelKind.TRANSE
        assert not config.sym_enabled
        assert resolve_train_config({"model": "transh", "sym": True}, path).sym_enabled
        assert not resolve_train_config({"sym": False, "model": "transe-sym"}).sym_enabled
        assert resolve_train_config({"dim": 8}, path).sym_enabled

    def test_unknown_key(self, tmp_path):
        """Test typos in a config file are errors."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"dimension": 10}))
        with pytest.raises(ConstraintError, match="unknown key 'dimension'"):
            load_config_file(path)

    def test_not_an_object(self, tmp_path):
        """Test a JSON list is rejected."""
        path = tmp_path / "c.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConstraintError, match="JSON object"):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        """Test a missing file."""
        with pytest.raises(FileNotFoundError):
            load_config_file(tmp_path / "none.json")

    def test_workers_env(self, monkeypatch):
        """Test KGSYM_WORKERS sets the default worker count."""
        monkeypatch.setenv(WORKERS_ENV, "4")
        assert default_workers() == 4
        assert resolve_train_config().workers == 4
        assert resolve_train_config({"workers": 2}).workers == 2
        monkeypatch.setenv(WORKERS_ENV, "many")
        with pytest.raises(ConstraintError):
            default_workers()

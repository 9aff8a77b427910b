"""Tests for settings, config files, manifests and random streams."""

import json

import numpy as np
import pytest
from qtrack.core.config import Settings, load_config_file
from qtrack.core.errors import ConfigError
from qtrack.core.manifest import RunManifest, file_digest
from qtrack.core.rng import TrajectoryStreams, make_generator


class TestSettings:
    """Test environment-driven settings."""

    def test_defaults(self, monkeypatch):
        """Test default values."""
        monkeypatch.delenv("QTRACK_WORKERS", raising=False)
        settings = Settings(_env_file=None)
        assert settings.workers == 1
        assert settings.emit_stride == 100

    def test_env_prefix(self, monkeypatch):
        """Test QTRACK_* overrides."""
        monkeypatch.setenv("QTRACK_WORKERS", "4")
        monkeypatch.setenv("QTRACK_QUIET", "true")
        settings = Settings(_env_file=None)
        assert settings.workers == 4
        assert settings.quiet


class TestConfigFiles:
    """Test experiment file loading."""

    def test_flat_toml(self, tmp_path):
        """Test a flat experiment file."""
        path = tmp_path / "exp.toml"
        path.write_text('code = "five_qubit"\nsweep = [10, 30, 100]\n')
        assert load_config_file(path) == {"code": "five_qubit", "sweep": [10, 30, 100]}

    def test_experiment_table(self, tmp_path):
        """Test an [experiment] table."""
        path = tmp_path / "exp.toml"
        path.write_text("[experiment]\nseed = 9\nhorizon = 0.5\n")
        assert load_config_file(path) == {"seed": 9, "horizon": 0.5}

    def test_manifest_replay(self, tmp_path):
        """Test that a manifest yields its embedded config."""
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"command": "trajectory", "config": {"seed": 3}}))
        assert load_config_file(path) == {"seed": 3}

    def test_missing_file(self, tmp_path):
        """Test a missing path."""
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "missing.toml")

    def test_malformed(self, tmp_path):
        """Test parse errors."""
        path = tmp_path / "bad.toml"
        path.write_text("code = \n")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_json_without_config(self, tmp_path):
        """Test that arbitrary JSON is not a manifest."""
        path = tmp_path / "other.json"
        path.write_text("{}")
        with pytest.raises(ConfigError):
            load_config_file(path)


class TestManifest:
    """Test run manifests."""

    def test_outputs_and_digests(self, tmp_path):
        """Test output registration and JSON export."""
        out = tmp_path / "a.csv"
        out.write_text("t\n0\n")
        manifest = RunManifest(command="trajectory", config={"seed": 1}, seed=1)
        manifest.add_output(out, tmp_path)
        written = manifest.write(tmp_path / "manifest.json")
        data = json.loads(written.read_text())
        assert data["outputs"] == [{"path": "a.csv", "sha256": file_digest(out)}]
        assert data["finished_at"] is not None
        assert manifest.digests() == {"a.csv": file_digest(out)}


class TestStreams:
    """Test counter-based random substreams."""

    def test_reproducible(self):
        """Test equal keys give equal draws."""
        assert np.array_equal(
            make_generator(5, 1, 2).standard_normal(4), make_generator(5, 1, 2).standard_normal(4)
        )

    def test_streams_are_distinct(self):
        """Test that a trajectory's substreams differ from each other and from other indices."""
        a = TrajectoryStreams.derive(5, 0)
        b = TrajectoryStreams.derive(5, 1)
        draws = [s.standard_normal(3) for s in (a.jumps, a.noise, a.innovations, b.jumps)]
        for i in range(len(draws)):
            for j in range(i + 1, len(draws)):
                assert not np.array_equal(draws[i], draws[j])

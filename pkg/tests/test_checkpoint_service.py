"""
Tests for checkpoint files.
"""

import pytest
import numpy as np

from src.models.evolution_models import CheckpointData, StepController
from src.services.checkpoint_service import (
    CheckpointWriter, checkpoint_from_field, checkpoint_from_state, decode_checkpoint, encode_checkpoint,
    load_checkpoint, save_checkpoint
)
from src.services.propagator_service import evolve, initial_state
from src.services.spectral_service import relativistic_symbol, transform


class TestCheckpointFiles:
    """Test the binary checkpoint layout."""

    def test_save_and_load(self, tmp_path, chirped_1d):
        """Test a checkpoint restores samples and metadata exactly."""
        data = checkpoint_from_field(chirped_1d, mass=1.0, alpha=1.5, gamma=0.5, lam=-1, t=2.5, dt=0.01)

        path = save_checkpoint(tmp_path / "run" / "state.chk", data)
        loaded = load_checkpoint(path)

        assert loaded.grid == chirped_1d.grid
        assert (loaded.t, loaded.dt, loaded.mass, loaded.alpha, loaded.gamma, loaded.lam) == (2.5, 0.01, 1.0, 1.5, 0.5, -1)
        np.testing.assert_array_equal(loaded.values, chirped_1d.values)

    def test_bad_magic(self, chirped_1d):
        """Test payloads without the magic bytes are rejected."""
        payload = encode_checkpoint(checkpoint_from_field(chirped_1d, 1.0, 1.5, 0.5, 1))
        with pytest.raises(ValueError, match="magic"):
            decode_checkpoint(b"XXXXXXXX" + payload[8:])

    def test_truncated_payload(self, chirped_1d):
        """Test a payload cut short is rejected."""
        payload = encode_checkpoint(checkpoint_from_field(chirped_1d, 1.0, 1.5, 0.5, 1))
        with pytest.raises(ValueError):
            decode_checkpoint(payload[:-16])
        with pytest.raises(ValueError):
            decode_checkpoint(payload[:12])

    def test_frequency_field_rejected(self, chirped_1d):
        """Test checkpoints store physical samples only."""
        with pytest.raises(TypeError):
            checkpoint_from_field(transform(chirped_1d), 1.0, 1.5, 0.5, 1)


class TestCheckpointWriter:
    """Test periodic checkpoints during evolve()."""

    def test_writer_follows_interval(self, tmp_path, grid_1d, chirped_1d, kernel_1d):
        """Test one checkpoint per interval, each loadable at its time."""
        writer = CheckpointWriter(tmp_path, interval=0.25, mass=1.0, alpha=1.5, gamma=0.5, lam=1)
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 1.0, 1.5), kernel_1d, 0.05)

        summary = evolve(state, 1.0, StepController.fixed(0.05, observer_interval=0.25), [writer])

        assert len(writer.paths) == 4
        last = load_checkpoint(writer.paths[-1])
        assert last.t == pytest.approx(1.0)
        np.testing.assert_array_equal(last.values, summary.final_state.u.values)

    def test_state_checkpoint(self, grid_1d, chirped_1d, kernel_1d):
        """Test checkpoint_from_state copies the operator parameters."""
        state = initial_state(chirped_1d, relativistic_symbol(grid_1d, 2.0, 1.5), kernel_1d, 0.05, t=0.3)

        data = checkpoint_from_state(state)

        assert isinstance(data, CheckpointData)
        assert (data.mass, data.alpha, data.gamma, data.lam, data.t) == (2.0, 1.5, 0.5, 1, 0.3)

    def test_invalid_interval(self, tmp_path):
        """Test a nonpositive interval raises ValueError."""
        with pytest.raises(ValueError):
            CheckpointWriter(tmp_path, interval=0.0, mass=1.0, alpha=1.5, gamma=0.5, lam=1)

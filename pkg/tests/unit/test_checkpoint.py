"""
Unit tests for the binary checkpoint format.
"""
import json
import struct

import numpy as np
import pytest

from skinnet.autodiff import Tensor
from skinnet.exceptions import CheckpointError
from skinnet.network import build_skinnet, forward, load_checkpoint, save_checkpoint
from skinnet.network.checkpoint import MAGIC, decode_parameters, encode_parameters, load_spec, sidecar_path


@pytest.mark.unit
class TestCheckpointFormat:
    """Test encoding and header validation."""

    def test_header_layout(self):
        payload = encode_parameters({"a/kernel": Tensor(np.ones((2, 3), dtype=np.float32))})

        assert payload[:4] == MAGIC
        assert struct.unpack("<II", payload[4:12]) == (1, 1)
        assert len(payload) == 4 + 8 + 4 + len("a/kernel") + 4 + 8 + 6 * 4

    def test_decode_preserves_order_and_values(self, rng):
        params = {
            "z": Tensor(rng.standard_normal((2, 2)), dtype=np.float32),
            "a": Tensor(rng.standard_normal(3), dtype=np.float32),
        }

        arrays = decode_parameters(encode_parameters(params))

        assert list(arrays) == ["z", "a"]
        np.testing.assert_array_equal(arrays["z"], params["z"].data)

    def test_bad_magic(self):
        with pytest.raises(CheckpointError, match="magic"):
            decode_parameters(b"NOPE" + b"\x00" * 8)

    def test_bad_version(self):
        with pytest.raises(CheckpointError, match="version"):
            decode_parameters(MAGIC + struct.pack("<II", 2, 0))

    def test_truncated(self):
        payload = encode_parameters({"w": Tensor(np.ones(4, dtype=np.float32))})

        with pytest.raises(CheckpointError, match="truncated"):
            decode_parameters(payload[:-3])

    def test_trailing_bytes(self):
        payload = encode_parameters({"w": Tensor(np.ones(4, dtype=np.float32))})

        with pytest.raises(CheckpointError, match="trailing"):
            decode_parameters(payload + b"\x00")


@pytest.mark.unit
class TestCheckpointRoundTrip:
    """Test save -> load -> forward."""

    def test_forward_is_bitwise_equal(self, small_spec, rng, temp_output_dir):
        # Arrange
        model = build_skinnet(small_spec, rng_seed=3)
        x = Tensor(rng.uniform(0, 1, size=(2, 3, 16, 16)), dtype=np.float32)
        before = forward(model, x).data
        path = temp_output_dir / "fold0_best.sknt"

        # Act
        save_checkpoint(model, path)
        restored = load_checkpoint(path)

        # Assert
        assert restored.spec == small_spec
        np.testing.assert_array_equal(forward(restored, x).data, before)

    def test_sidecar_holds_architecture(self, small_spec, temp_output_dir):
        path = save_checkpoint(build_skinnet(small_spec, rng_seed=0), temp_output_dir / "m.sknt")

        side = json.loads(sidecar_path(path).read_text())

        assert side["depth"] == small_spec.depth
        assert load_spec(path) == small_spec

    def test_missing_sidecar(self, small_spec, temp_output_dir):
        path = save_checkpoint(build_skinnet(small_spec, rng_seed=0), temp_output_dir / "m.sknt")
        sidecar_path(path).unlink()

        with pytest.raises(CheckpointError, match="sidecar"):
            load_checkpoint(path)

    def test_architecture_mismatch(self, small_spec, toy_spec, temp_output_dir):
        path = save_checkpoint(build_skinnet(small_spec, rng_seed=0), temp_output_dir / "m.sknt")
        sidecar_path(path).write_text(toy_spec.model_dump_json())

        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_unreadable_file(self, temp_output_dir):
        with pytest.raises(CheckpointError):
            load_checkpoint(temp_output_dir / "missing.sknt")

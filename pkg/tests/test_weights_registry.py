"""Tests for the weight-file container, model loading, and multi-model runs."""

import json
import struct
from pathlib import Path

import numpy as np
import pytest

from ecgflow.models.errors import (
    ModelNotFound,
    ModelShapeError,
    WeightFormatError,
)
from ecgflow.models.fixtures import FIXTURE_SEEDS, build_fixture_cnn
from ecgflow.models.registry import (
    ModelDescriptor,
    ModelRegistry,
    load_descriptors,
    load_model,
    predict_all,
)
from ecgflow.models.weights import read_weights, write_weights
from ecgflow.models.fixtures import write_default_registry, write_fixture_model
from ecgflow.preprocess import standardize


def window(seed=101):
    rng = np.random.default_rng(seed)
    return standardize(
        rng.normal(0, 0.5, size=5000), source_recording_id="rid", window_start_s=0.0
    )


class TestContainerFormat:
    def test_golden_layout(self, tmp_path):
        # Pins magic, version, length-prefixed canonical-JSON header, and
        # little-endian float32 tensor payload in declaration order.
        header = {
            "tensors": [
                {"name": "a", "shape": [1, 2]},
                {"name": "b", "shape": [2]},
            ]
        }
        tensors = {
            "a": np.array([[1.5, -2.0]], dtype=np.float32),
            "b": np.array([0.25, 4.0], dtype=np.float32),
        }
        path = tmp_path / "golden.ecgw"
        write_weights(path, header, tensors)
        header_json = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
        expected = (
            b"ECGW"
            + struct.pack("<II", 1, len(header_json))
            + header_json
            + struct.pack("<2f", 1.5, -2.0)
            + struct.pack("<2f", 0.25, 4.0)
        )
        assert path.read_bytes() == expected

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        header = {
            "note": "round-trip",
            "tensors": [
                {"name": "w", "shape": [3, 4, 5]},
                {"name": "b", "shape": [3]},
            ],
        }
        tensors = {
            "w": rng.normal(size=(3, 4, 5)).astype(np.float32),
            "b": rng.normal(size=3).astype(np.float32),
        }
        path = tmp_path / "rt.ecgw"
        write_weights(path, header, tensors)
        header2, tensors2 = read_weights(path)
        assert header2 == header
        for name in tensors:
            np.testing.assert_array_equal(tensors2[name], tensors[name])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelNotFound):
            read_weights(tmp_path / "nope.ecgw")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ecgw"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(WeightFormatError):
            read_weights(path)

    def test_truncated_payload(self, tmp_path):
        header = {"tensors": [{"name": "w", "shape": [4]}]}
        path = tmp_path / "trunc.ecgw"
        write_weights(path, header, {"w": np.zeros(4, dtype=np.float32)})
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(WeightFormatError):
            read_weights(path)


class TestLoadModel:
    def test_default_plan_loads_with_conv_output_39(self, tmp_path):
        desc = write_fixture_model(tmp_path, "lvsd", "cnn", seed=FIXTURE_SEEDS["lvsd"])
        loaded = load_model(desc)
        assert loaded.cnn.conv_output_length == 39
        assert loaded.cnn.embedding_dim == 32
        assert loaded.ensemble is None

    def test_ensemble_model_loads(self, tmp_path):
        desc = write_fixture_model(tmp_path, "hcm", "cnn+ensemble", seed=FIXTURE_SEEDS["hcm"])
        loaded = load_model(desc)
        assert loaded.ensemble is not None
        assert loaded.ensemble.n_features == 32

    def test_loaded_weights_reproduce_fixture_forward(self, tmp_path):
        from ecgflow.models.cnn import CnnModel, ConvLayer, DenseLayer, cnn_forward

        def f32(a):
            return np.asarray(a, dtype=np.float32).astype(np.float64)

        desc = write_fixture_model(tmp_path, "lvsd", "cnn", seed=FIXTURE_SEEDS["lvsd"])
        loaded = load_model(desc)
        mem = build_fixture_cnn("lvsd", seed=FIXTURE_SEEDS["lvsd"])
        # Apply the container's one-time float32 quantization to the
        # in-memory model; the file round trip must then be bit-exact.
        quantized = CnnModel(
            model_id=mem.model_id,
            conv_layers=tuple(
                ConvLayer(f32(c.weight), f32(c.bn_gamma), f32(c.bn_beta), f32(c.bn_mean), f32(c.bn_var))
                for c in mem.conv_layers
            ),
            dense_layers=tuple(
                DenseLayer(f32(d.weight), f32(d.bias), f32(d.bn_gamma), f32(d.bn_beta), f32(d.bn_mean), f32(d.bn_var))
                for d in mem.dense_layers
            ),
            output_weight=f32(mem.output_weight),
            output_bias=f32(mem.output_bias),
            dropout_rate=mem.dropout_rate,
            input_length=mem.input_length,
        )
        w = window()
        p_loaded, emb_loaded = cnn_forward(loaded.cnn, w)
        p_mem, emb_mem = cnn_forward(quantized, w)
        assert p_loaded == p_mem
        assert emb_loaded.tobytes() == emb_mem.tobytes()

    def test_missing_weight_file(self, tmp_path):
        desc = ModelDescriptor("lvsd", "cnn", tmp_path / "missing.ecgw", 0.5)
        with pytest.raises(ModelNotFound):
            load_model(desc)

    def test_conv3_in_channel_mismatch_named(self, tmp_path):
        desc = write_fixture_model(tmp_path, "lvsd", "cnn", seed=1)
        header, tensors = read_weights(desc.weight_file)
        # Make layer 3 expect 64 in-channels while layer 2 still emits 16.
        header["conv"][2]["in"] = 64
        k = header["conv"][2]["kernel"]
        out = header["conv"][2]["out"]
        tensors["conv3.weight"] = np.zeros((out, 64, k), dtype=np.float32)
        for t in header["tensors"]:
            if t["name"] == "conv3.weight":
                t["shape"] = [out, 64, k]
        write_weights(desc.weight_file, header, tensors)
        with pytest.raises(ModelShapeError) as excinfo:
            load_model(desc)
        assert excinfo.value.layer == "conv3"

    def test_dense_width_mismatch_named(self, tmp_path):
        desc = write_fixture_model(tmp_path, "lvsd", "cnn", seed=1)
        header, tensors = read_weights(desc.weight_file)
        header["dense"][0]["in"] = 1234
        write_weights(desc.weight_file, header, tensors)
        with pytest.raises(ModelShapeError) as excinfo:
            load_model(desc)
        assert excinfo.value.layer == "dense1"

    def test_ensemble_feature_out_of_bounds_named(self, tmp_path):
        desc = write_fixture_model(tmp_path, "hcm", "cnn+ensemble", seed=2)
        header, tensors = read_weights(desc.weight_file)
        header["ensemble"]["trees"][0] = {
            "feature": 10_000,
            "threshold": 0.0,
            "left": {"leaf": 1.0},
            "right": {"leaf": 0.0},
        }
        write_weights(desc.weight_file, header, tensors)
        with pytest.raises(ModelShapeError) as excinfo:
            load_model(desc)
        assert excinfo.value.layer == "ensemble"

    def test_wrong_conv_count_rejected(self, tmp_path):
        desc = write_fixture_model(tmp_path, "lvsd", "cnn", seed=1)
        header, tensors = read_weights(desc.weight_file)
        header["conv"] = header["conv"][:6]
        write_weights(desc.weight_file, header, tensors)
        with pytest.raises(ModelShapeError):
            load_model(desc)

    def test_threshold_validated(self, tmp_path):
        with pytest.raises(Exception):
            ModelDescriptor("lvsd", "cnn", tmp_path / "x.ecgw", threshold=1.5)


class TestPredictAll:
    def test_three_fixture_models(self, tmp_path):
        descriptors, _ = write_default_registry(tmp_path)
        registry = ModelRegistry.from_descriptors(descriptors)
        outputs = predict_all(window(), registry)
        assert [o.model_id for o in outputs] == ["hcm", "lvsd", "structural"]
        for o in outputs:
            assert o.error is None
            assert 0.0 < o.probability < 1.0
            assert o.threshold == 0.5

    def test_corrupt_model_isolated(self, tmp_path):
        descriptors, _ = write_default_registry(tmp_path)
        hcm = next(d for d in descriptors if d.model_id == "hcm")
        hcm.weight_file.write_bytes(b"garbage not a container")
        registry = ModelRegistry.from_descriptors(descriptors)
        outputs = predict_all(window(), registry)
        by_id = {o.model_id: o for o in outputs}
        assert by_id["hcm"].error is not None
        assert by_id["hcm"].probability is None
        assert by_id["lvsd"].error is None
        assert by_id["structural"].error is None

    def test_deterministic_bitwise(self, tmp_path):
        descriptors, _ = write_default_registry(tmp_path)
        registry = ModelRegistry.from_descriptors(descriptors)
        w = window()
        a = predict_all(w, registry)
        b = predict_all(w, registry)
        assert [o.probability for o in a] == [o.probability for o in b]

    def test_hcm_uses_ensemble_head(self, tmp_path):
        descriptors, _ = write_default_registry(tmp_path)
        registry = ModelRegistry.from_descriptors(descriptors)
        from ecgflow.models.cnn import cnn_forward
        from ecgflow.models.trees import ensemble_forward

        w = window()
        hcm = registry.loaded["hcm"]
        _, embedding = cnn_forward(hcm.cnn, w)
        expected = ensemble_forward(hcm.ensemble, embedding)
        out = {o.model_id: o for o in predict_all(w, registry)}["hcm"]
        assert out.probability == expected

    def test_registry_file_round_trip(self, tmp_path):
        descriptors, registry_path = write_default_registry(tmp_path)
        loaded = load_descriptors(registry_path)
        assert [d.model_id for d in loaded] == [d.model_id for d in descriptors]
        assert all(d.weight_file.exists() for d in loaded)

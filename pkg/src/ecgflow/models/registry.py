"""Model descriptors, shape-validated loading, and multi-model prediction."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ecgflow.core import MODEL_INPUT_LENGTH, DomainError, NormalizedWindow
from ecgflow.models.cnn import (
    CnnModel,
    ConvLayer,
    DenseLayer,
    cnn_forward,
    pooled_length_chain,
)
from ecgflow.models.errors import ModelError, ModelShapeError, WeightFormatError
from ecgflow.models.trees import TreeEnsemble, ensemble_forward
from ecgflow.models.weights import read_weights

MODEL_KINDS = ("cnn", "cnn+ensemble")


@dataclass(frozen=True)
class ModelDescriptor:
    model_id: str
    kind: str
    weight_file: Path
    threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}")
        if not 0.0 < self.threshold < 1.0:
            raise DomainError("threshold must lie in (0, 1)")
        object.__setattr__(self, "weight_file", Path(self.weight_file))


@dataclass(frozen=True)
class LoadedModel:
    descriptor: ModelDescriptor
    cnn: CnnModel
    ensemble: TreeEnsemble | None


def _require(header: dict, key: str):
    if key not in header:
        raise WeightFormatError(f"header missing {key!r}")
    return header[key]


def _tensor(tensors: dict, name: str, shape: tuple, layer: str) -> np.ndarray:
    arr = tensors.get(name)
    if arr is None:
        raise ModelShapeError(layer, f"missing tensor {name!r}")
    if arr.shape != shape:
        raise ModelShapeError(
            layer, f"tensor {name!r} has shape {arr.shape}, expected {shape}"
        )
    return arr.astype(np.float64)


def load_model(descriptor: ModelDescriptor) -> LoadedModel:
    """Load and shape-validate a weight file; no side effects on failure.

    Validates the declared chain (channel plan, floor-halving lengths from
    the 5000-sample input, dense widths, ensemble feature bounds) and names
    the offending layer on mismatch.
    """
    header, tensors = read_weights(descriptor.weight_file)
    kind = _require(header, "kind")
    if kind != descriptor.kind:
        raise WeightFormatError(
            f"descriptor kind {descriptor.kind!r} != file kind {kind!r}"
        )
    input_length = int(_require(header, "input_length"))
    if input_length != MODEL_INPUT_LENGTH:
        raise ModelShapeError("input", f"input_length {input_length} != {MODEL_INPUT_LENGTH}")

    conv_spec = _require(header, "conv")
    if len(conv_spec) != 7:
        raise ModelShapeError("conv_layers", f"expected 7 conv layers, got {len(conv_spec)}")
    dense_spec = _require(header, "dense")
    if len(dense_spec) != 2:
        raise ModelShapeError("dense_layers", f"expected 2 dense layers, got {len(dense_spec)}")
    output_spec = _require(header, "output")

    conv_layers = []
    expected_in = 1
    for i, spec in enumerate(conv_spec, start=1):
        layer = f"conv{i}"
        c_in, c_out, k = int(spec["in"]), int(spec["out"]), int(spec["kernel"])
        if c_in != expected_in:
            raise ModelShapeError(
                layer, f"expects {c_in} in-channels against a {expected_in}-channel input"
            )
        conv_layers.append(
            ConvLayer(
                weight=_tensor(tensors, f"{layer}.weight", (c_out, c_in, k), layer),
                bn_gamma=_tensor(tensors, f"{layer}.bn_gamma", (c_out,), layer),
                bn_beta=_tensor(tensors, f"{layer}.bn_beta", (c_out,), layer),
                bn_mean=_tensor(tensors, f"{layer}.bn_mean", (c_out,), layer),
                bn_var=_tensor(tensors, f"{layer}.bn_var", (c_out,), layer),
            )
        )
        expected_in = c_out

    chain = pooled_length_chain(input_length, len(conv_layers))
    flat_dim = expected_in * chain[-1]

    dense_layers = []
    expected_dim = flat_dim
    for j, spec in enumerate(dense_spec, start=1):
        layer = f"dense{j}"
        d_in, d_out = int(spec["in"]), int(spec["out"])
        if d_in != expected_dim:
            raise ModelShapeError(layer, f"in_dim {d_in} != expected {expected_dim}")
        dense_layers.append(
            DenseLayer(
                weight=_tensor(tensors, f"{layer}.weight", (d_out, d_in), layer),
                bias=_tensor(tensors, f"{layer}.bias", (d_out,), layer),
                bn_gamma=_tensor(tensors, f"{layer}.bn_gamma", (d_out,), layer),
                bn_beta=_tensor(tensors, f"{layer}.bn_beta", (d_out,), layer),
                bn_mean=_tensor(tensors, f"{layer}.bn_mean", (d_out,), layer),
                bn_var=_tensor(tensors, f"{layer}.bn_var", (d_out,), layer),
            )
        )
        expected_dim = d_out

    if int(output_spec["in"]) != expected_dim or int(output_spec["out"]) != 1:
        raise ModelShapeError(
            "output",
            f"output layer is {output_spec}, expected in={expected_dim}, out=1",
        )
    output_weight = _tensor(tensors, "output.weight", (1, expected_dim), "output")
    output_bias = _tensor(tensors, "output.bias", (1,), "output")

    model = CnnModel(
        model_id=str(_require(header, "model_id")),
        conv_layers=tuple(conv_layers),
        dense_layers=tuple(dense_layers),
        output_weight=output_weight,
        output_bias=output_bias,
        dropout_rate=float(header.get("dropout_rate", 0.532)),
        input_length=input_length,
    )

    ensemble = None
    if kind == "cnn+ensemble":
        raw = _require(header, "ensemble")
        raw = dict(raw)
        raw.setdefault("n_features", expected_dim)
        if int(raw["n_features"]) != expected_dim:
            raise ModelShapeError(
                "ensemble",
                f"ensemble expects {raw['n_features']} features, embedding has {expected_dim}",
            )
        ensemble = TreeEnsemble.from_jsonable(model.model_id, raw)
    return LoadedModel(descriptor=descriptor, cnn=model, ensemble=ensemble)


@dataclass(frozen=True)
class ModelOutput:
    """One model's outcome for one window; errors are isolated per model."""

    model_id: str
    threshold: float
    probability: float | None = None
    error: str | None = None
    error_detail: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ModelRegistry:
    """Loads descriptors once; load failures become per-model error outputs."""

    def __init__(self):
        self.loaded: dict[str, LoadedModel] = {}
        self.failures: dict[str, tuple[str, str]] = {}
        self.thresholds: dict[str, float] = {}

    @classmethod
    def from_descriptors(cls, descriptors: list[ModelDescriptor]) -> "ModelRegistry":
        if not descriptors:
            raise DomainError("model registry must not be empty")
        registry = cls()
        for desc in descriptors:
            registry.thresholds[desc.model_id] = desc.threshold
            try:
                registry.loaded[desc.model_id] = load_model(desc)
            except ModelError as exc:
                registry.failures[desc.model_id] = (exc.code, str(exc))
        return registry

    @property
    def model_ids(self) -> list[str]:
        return sorted(set(self.loaded) | set(self.failures))


def predict_all(window: NormalizedWindow, registry: ModelRegistry) -> list[ModelOutput]:
    """Run every registered model on the window, order-stable by model_id.

    A failing model yields an error entry; the others still score.
    """
    outputs = []
    for model_id in registry.model_ids:
        threshold = registry.thresholds[model_id]
        if model_id in registry.failures:
            code, detail = registry.failures[model_id]
            outputs.append(
                ModelOutput(model_id=model_id, threshold=threshold, error=code, error_detail=detail)
            )
            continue
        entry = registry.loaded[model_id]
        try:
            probability, embedding = cnn_forward(entry.cnn, window)
            if entry.ensemble is not None:
                probability = ensemble_forward(entry.ensemble, embedding)
            outputs.append(
                ModelOutput(model_id=model_id, threshold=threshold, probability=probability)
            )
        except ModelError as exc:
            outputs.append(
                ModelOutput(
                    model_id=model_id, threshold=threshold, error=exc.code, error_detail=str(exc)
                )
            )
    return outputs


def load_descriptors(registry_path: Path) -> list[ModelDescriptor]:
    """Read a registry JSON file; weight paths resolve relative to it."""
    registry_path = Path(registry_path)
    data = json.loads(registry_path.read_text())
    descriptors = []
    for item in data["models"]:
        weight_file = Path(item["weight_file"])
        if not weight_file.is_absolute():
            weight_file = registry_path.parent / weight_file
        descriptors.append(
            ModelDescriptor(
                model_id=item["model_id"],
                kind=item["kind"],
                weight_file=weight_file,
                threshold=float(item.get("threshold", 0.5)),
            )
        )
    return descriptors

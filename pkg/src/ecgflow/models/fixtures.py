"""Deterministic fixture weights for the three screening models.

No pretrained weights are shipped or claimed: every tensor comes from a
fixed-seed PRNG at initialization scale, so goldens regenerate bit-exact
and probabilities stay well inside (0, 1).
"""

import json
from pathlib import Path

import numpy as np

from ecgflow.core import MODEL_INPUT_LENGTH
from ecgflow.models.cnn import CnnModel, ConvLayer, DenseLayer
from ecgflow.models.trees import TreeEnsemble

# Default layer plan: the seven conv blocks and two dense layers, recorded in
# every weight-file header so alternate plans load without code changes.
DEFAULT_CONV_CHANNELS = (16, 16, 32, 32, 64, 64, 64)
DEFAULT_CONV_KERNELS = (7, 7, 5, 5, 3, 3, 3)
DEFAULT_DENSE_WIDTHS = (64, 32)
DEFAULT_DROPOUT_RATE = 0.532

FIXTURE_SEEDS = {"lvsd": 1001, "hcm": 1002, "structural": 1003}


def _conv_layer(rng, c_in: int, c_out: int, k: int, zero: bool) -> ConvLayer:
    if zero:
        weight = np.zeros((c_out, c_in, k))
    else:
        weight = rng.normal(0.0, 1.0 / np.sqrt(c_in * k), size=(c_out, c_in, k))
    return ConvLayer(
        weight=weight,
        bn_gamma=np.ones(c_out) if zero else rng.uniform(0.8, 1.2, size=c_out),
        bn_beta=np.zeros(c_out) if zero else rng.normal(0.0, 0.1, size=c_out),
        bn_mean=np.zeros(c_out) if zero else rng.normal(0.0, 0.1, size=c_out),
        bn_var=np.ones(c_out) if zero else rng.uniform(0.5, 1.5, size=c_out),
    )


def _dense_layer(rng, d_in: int, d_out: int, zero: bool) -> DenseLayer:
    if zero:
        weight = np.zeros((d_out, d_in))
    else:
        weight = rng.normal(0.0, 1.0 / np.sqrt(d_in), size=(d_out, d_in))
    return DenseLayer(
        weight=weight,
        bias=np.zeros(d_out) if zero else rng.normal(0.0, 0.05, size=d_out),
        bn_gamma=np.ones(d_out) if zero else rng.uniform(0.8, 1.2, size=d_out),
        bn_beta=np.zeros(d_out) if zero else rng.normal(0.0, 0.1, size=d_out),
        bn_mean=np.zeros(d_out) if zero else rng.normal(0.0, 0.1, size=d_out),
        bn_var=np.ones(d_out) if zero else rng.uniform(0.5, 1.5, size=d_out),
    )


def build_fixture_cnn(
    model_id: str,
    seed: int,
    zero_weights: bool = False,
    dropout_rate: float = DEFAULT_DROPOUT_RATE,
    conv_channels: tuple[int, ...] = DEFAULT_CONV_CHANNELS,
    conv_kernels: tuple[int, ...] = DEFAULT_CONV_KERNELS,
    dense_widths: tuple[int, ...] = DEFAULT_DENSE_WIDTHS,
) -> CnnModel:
    rng = np.random.default_rng(seed)
    conv_layers = []
    c_in = 1
    length = MODEL_INPUT_LENGTH
    for c_out, k in zip(conv_channels, conv_kernels):
        conv_layers.append(_conv_layer(rng, c_in, c_out, k, zero_weights))
        c_in = c_out
        length //= 2
    dense_layers = []
    d_in = c_in * length
    for d_out in dense_widths:
        dense_layers.append(_dense_layer(rng, d_in, d_out, zero_weights))
        d_in = d_out
    embedding_dim = dense_widths[-1]
    if zero_weights:
        output_weight = np.zeros((1, embedding_dim))
        output_bias = np.zeros(1)
    else:
        output_weight = rng.normal(0.0, 1.0 / np.sqrt(embedding_dim), size=(1, embedding_dim))
        output_bias = rng.normal(0.0, 0.2, size=1)
    return CnnModel(
        model_id=model_id,
        conv_layers=tuple(conv_layers),
        dense_layers=tuple(dense_layers),
        output_weight=output_weight,
        output_bias=output_bias,
        dropout_rate=dropout_rate,
        input_length=MODEL_INPUT_LENGTH,
    )


def build_fixture_ensemble(
    model_id: str, seed: int, n_features: int = DEFAULT_DENSE_WIDTHS[-1], n_trees: int = 12
) -> TreeEnsemble:
    """Random depth-2 trees over the embedding; thresholds sit in the
    post-ReLU activation range so both branches actually route."""
    rng = np.random.default_rng(seed)

    def leaf():
        return {"leaf": float(rng.normal(0.0, 0.25))}

    def stump():
        return {
            "feature": int(rng.integers(0, n_features)),
            "threshold": float(rng.uniform(0.0, 1.5)),
            "left": leaf(),
            "right": leaf(),
        }

    trees = []
    for _ in range(n_trees):
        if rng.uniform() < 0.5:
            trees.append(stump())
        else:
            trees.append(
                {
                    "feature": int(rng.integers(0, n_features)),
                    "threshold": float(rng.uniform(0.0, 1.5)),
                    "left": stump(),
                    "right": stump(),
                }
            )
    return TreeEnsemble(
        model_id=model_id,
        trees=tuple(trees),
        base_score=float(rng.normal(0.0, 0.1)),
        n_features=n_features,
    )


def write_fixture_model(directory, model_id: str, kind: str, seed: int, threshold: float = 0.5):
    """Generate and write one fixture weight file; returns its descriptor."""
    from ecgflow.models.registry import ModelDescriptor
    from ecgflow.models.weights import model_to_container, write_weights

    model = build_fixture_cnn(model_id, seed=seed)
    ensemble = None
    if kind == "cnn+ensemble":
        ensemble = build_fixture_ensemble(model_id, seed=seed + 7)
    header, tensors = model_to_container(model, kind, ensemble)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{model_id}.ecgw"
    write_weights(path, header, tensors)
    return ModelDescriptor(model_id=model_id, kind=kind, weight_file=path, threshold=threshold)


def write_default_registry(directory, thresholds: dict | None = None):
    """Write the three screening models plus a registry.json pointing at them.

    Returns (descriptors, registry_path). Thresholds default to 0.5 and are
    overridable per model id.
    """
    directory = Path(directory)
    thresholds = thresholds or {}
    plan = [("lvsd", "cnn"), ("hcm", "cnn+ensemble"), ("structural", "cnn")]
    descriptors = [
        write_fixture_model(
            directory,
            model_id,
            kind,
            seed=FIXTURE_SEEDS[model_id],
            threshold=thresholds.get(model_id, 0.5),
        )
        for model_id, kind in plan
    ]
    registry_path = directory / "registry.json"
    registry_path.write_text(
        json.dumps(
            {
                "models": [
                    {
                        "model_id": d.model_id,
                        "kind": d.kind,
                        "weight_file": d.weight_file.name,
                        "threshold": d.threshold,
                    }
                    for d in descriptors
                ]
            },
            indent=2,
        )
    )
    return descriptors, registry_path

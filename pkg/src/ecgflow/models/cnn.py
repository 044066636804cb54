"""Deterministic forward pass for the seven-conv-block ECG classifier.

Each conv block is conv(stride 1, zero same-padding) -> batch-norm in
inference mode -> ReLU -> max-pool(2, floor). The flattened conv output
feeds two dense+batch-norm+ReLU layers (dropout is stored but an identity
at inference), then a one-unit dense layer squashed by the logistic
function. Convolutions over the (5000, 1, 1)-shaped input are mathematically
one-dimensional and implemented that way; all arithmetic is float64.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ecgflow.core import MODEL_INPUT_LENGTH, NormalizedWindow, sigmoid
from ecgflow.models.errors import ModelShapeError, NumericError

BATCHNORM_EPS = 1e-5


@dataclass(frozen=True)
class ConvLayer:
    weight: np.ndarray  # (out_channels, in_channels, kernel_length)
    bn_gamma: np.ndarray
    bn_beta: np.ndarray
    bn_mean: np.ndarray
    bn_var: np.ndarray

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def kernel_length(self) -> int:
        return self.weight.shape[2]


@dataclass(frozen=True)
class DenseLayer:
    weight: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray
    bn_gamma: np.ndarray
    bn_beta: np.ndarray
    bn_mean: np.ndarray
    bn_var: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


@dataclass(frozen=True)
class CnnModel:
    model_id: str
    conv_layers: tuple[ConvLayer, ...]
    dense_layers: tuple[DenseLayer, ...]
    output_weight: np.ndarray  # (1, embedding_dim)
    output_bias: np.ndarray  # (1,)
    dropout_rate: float = 0.532
    input_length: int = MODEL_INPUT_LENGTH

    @property
    def conv_output_length(self) -> int:
        return pooled_length_chain(self.input_length, len(self.conv_layers))[-1]

    @property
    def embedding_dim(self) -> int:
        return self.dense_layers[-1].out_dim


def conv1d_same(x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Stride-1 convolution with zero same-padding; (C_in, L) -> (C_out, L).

    Lowered to one matrix product over unrolled windows (im2col), which is
    an order of magnitude faster here than einsum on strided views.
    """
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    c_out, c_in, k = weight.shape
    length = x.shape[1]
    pad_left = (k - 1) // 2
    padded = np.pad(x, ((0, 0), (pad_left, k - 1 - pad_left)))
    windows = sliding_window_view(padded, k, axis=1)  # (C_in, L, k)
    columns = windows.transpose(0, 2, 1).reshape(c_in * k, length)
    return weight.reshape(c_out, c_in * k) @ columns


def batchnorm_inference(x, gamma, beta, mean, var) -> np.ndarray:
    """(x - mean) / sqrt(var + eps) * gamma + beta with running statistics.

    Folded into one scale and one shift per channel before touching the
    activation array.
    """
    x = np.asarray(x, dtype=np.float64)
    scale = gamma / np.sqrt(var + BATCHNORM_EPS)
    shift = beta - mean * scale
    if x.ndim == 2:
        scale, shift = scale[:, None], shift[:, None]
    return x * scale + shift


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def maxpool2(x: np.ndarray) -> np.ndarray:
    """Non-overlapping max-pool of 2 along the last axis, floor semantics."""
    c, length = x.shape
    half = length // 2
    return x[:, : 2 * half].reshape(c, half, 2).max(axis=2)


def pooled_length_chain(length: int, n_blocks: int) -> list[int]:
    """Lengths after each conv block's pool (same-padding conv is neutral)."""
    chain = []
    for _ in range(n_blocks):
        length //= 2
        chain.append(length)
    return chain


def cnn_forward(model: CnnModel, window: NormalizedWindow) -> tuple[float, np.ndarray]:
    """Run the full forward pass; returns (probability, embedding).

    The embedding is the second dense layer's post-activation vector, which
    also feeds the tree-ensemble head where one is configured.
    """
    values = np.asarray(window.values, dtype=np.float64)
    if values.size != model.input_length:
        raise ModelShapeError(
            "input", f"expected {model.input_length} samples, got {values.size}"
        )
    x = values[np.newaxis, :]
    for i, layer in enumerate(model.conv_layers, start=1):
        x = conv1d_same(x, layer.weight)
        x = batchnorm_inference(x, layer.bn_gamma, layer.bn_beta, layer.bn_mean, layer.bn_var)
        x = maxpool2(relu(x))
        if not np.isfinite(x).all():
            raise NumericError(f"conv{i}", "non-finite activation")
    v = x.reshape(-1)
    for j, layer in enumerate(model.dense_layers, start=1):
        v = layer.weight @ v + layer.bias
        v = batchnorm_inference(v, layer.bn_gamma, layer.bn_beta, layer.bn_mean, layer.bn_var)
        v = relu(v)
        # dropout_rate applies only in training, which is out of scope here
        if not np.isfinite(v).all():
            raise NumericError(f"dense{j}", "non-finite activation")
    embedding = v
    logit = (model.output_weight @ embedding + model.output_bias).item()
    if not math.isfinite(logit):
        raise NumericError("output", "non-finite logit")
    return sigmoid(logit), embedding

"""Self-describing weight-file container.

Layout (stable on-disk format, covered by a golden test):

    bytes 0..3   magic "ECGW"
    bytes 4..7   format version, uint32 little-endian (currently 1)
    bytes 8..11  header length in bytes, uint32 little-endian
    header       canonical JSON (sorted keys, compact separators), UTF-8
    payload      per header["tensors"] order: float32 little-endian values,
                 C order, no padding between tensors

The header carries the layer plan (conv/dense/output dims, dropout rate,
input length) plus tree-ensemble structure where present, so alternate
plans load without code changes.
"""

import json
import struct
from pathlib import Path

import numpy as np

from ecgflow.models.cnn import CnnModel
from ecgflow.models.errors import ModelNotFound, WeightFormatError
from ecgflow.models.trees import TreeEnsemble

MAGIC = b"ECGW"
VERSION = 1
_PREFIX = struct.Struct("<II")


def _canonical_header(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_weights(path: Path, header: dict, tensors: dict[str, np.ndarray]) -> None:
    """Write a container; tensor order and shapes come from header["tensors"]."""
    declared = header.get("tensors")
    if not isinstance(declared, list):
        raise WeightFormatError("header must declare a tensors list")
    blobs = []
    for entry in declared:
        name, shape = entry["name"], tuple(entry["shape"])
        if name not in tensors:
            raise WeightFormatError(f"tensor {name!r} declared but not provided")
        arr = np.ascontiguousarray(tensors[name], dtype=np.float32)
        if arr.shape != shape:
            raise WeightFormatError(
                f"tensor {name!r} has shape {arr.shape}, header says {shape}"
            )
        blobs.append(arr.tobytes())
    header_bytes = _canonical_header(header)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_PREFIX.pack(VERSION, len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)


def read_weights(path: Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container back into (header, {name: float32 array})."""
    path = Path(path)
    if not path.exists():
        raise ModelNotFound(f"weight file {path} does not exist")
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise WeightFormatError(f"{path} is not a weight container")
    version, header_len = _PREFIX.unpack_from(data, 4)
    if version != VERSION:
        raise WeightFormatError(f"unsupported container version {version}")
    header_end = 12 + header_len
    if len(data) < header_end:
        raise WeightFormatError("truncated header")
    try:
        header = json.loads(data[12:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightFormatError(f"bad header JSON: {exc}") from exc
    declared = header.get("tensors")
    if not isinstance(declared, list):
        raise WeightFormatError("header lacks a tensors list")
    tensors = {}
    offset = header_end
    for entry in declared:
        name, shape = entry["name"], tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(data):
            raise WeightFormatError(f"truncated payload at tensor {name!r}")
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset).reshape(shape)
        tensors[name] = arr
        offset += nbytes
    if offset != len(data):
        raise WeightFormatError(f"{len(data) - offset} trailing bytes after tensors")
    return header, tensors


def model_to_container(
    model: CnnModel, kind: str, ensemble: TreeEnsemble | None = None
) -> tuple[dict, dict[str, np.ndarray]]:
    """Flatten an in-memory model into (header, tensors) for write_weights."""
    tensors: dict[str, np.ndarray] = {}
    conv_spec = []
    for i, layer in enumerate(model.conv_layers, start=1):
        conv_spec.append(
            {"in": layer.in_channels, "out": layer.out_channels, "kernel": layer.kernel_length}
        )
        tensors[f"conv{i}.weight"] = layer.weight
        tensors[f"conv{i}.bn_gamma"] = layer.bn_gamma
        tensors[f"conv{i}.bn_beta"] = layer.bn_beta
        tensors[f"conv{i}.bn_mean"] = layer.bn_mean
        tensors[f"conv{i}.bn_var"] = layer.bn_var
    dense_spec = []
    for j, layer in enumerate(model.dense_layers, start=1):
        dense_spec.append({"in": layer.in_dim, "out": layer.out_dim})
        tensors[f"dense{j}.weight"] = layer.weight
        tensors[f"dense{j}.bias"] = layer.bias
        tensors[f"dense{j}.bn_gamma"] = layer.bn_gamma
        tensors[f"dense{j}.bn_beta"] = layer.bn_beta
        tensors[f"dense{j}.bn_mean"] = layer.bn_mean
        tensors[f"dense{j}.bn_var"] = layer.bn_var
    tensors["output.weight"] = model.output_weight
    tensors["output.bias"] = model.output_bias
    header = {
        "model_id": model.model_id,
        "kind": kind,
        "input_length": model.input_length,
        "dropout_rate": model.dropout_rate,
        "dtype": "float32",
        "conv": conv_spec,
        "dense": dense_spec,
        "output": {"in": model.output_weight.shape[1], "out": 1},
        "tensors": [
            {"name": name, "shape": list(np.shape(arr))} for name, arr in tensors.items()
        ],
    }
    if ensemble is not None:
        header["ensemble"] = ensemble.to_jsonable()
    return header, tensors

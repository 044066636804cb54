"""Inference engine: CNN forward passes, tree-ensemble head, weight files."""

from ecgflow.models.cnn import CnnModel, cnn_forward
from ecgflow.models.errors import (
    ModelError,
    ModelNotFound,
    ModelShapeError,
    NumericError,
    WeightFormatError,
)
from ecgflow.models.trees import TreeEnsemble, ensemble_forward

__all__ = [
    "CnnModel",
    "cnn_forward",
    "TreeEnsemble",
    "ensemble_forward",
    "ModelError",
    "ModelNotFound",
    "ModelShapeError",
    "NumericError",
    "WeightFormatError",
]

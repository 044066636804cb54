"""Additive binary decision-tree ensemble head over CNN embeddings.

Trees are stored as plain nested dicts (JSON-natural): internal nodes carry
``feature``, ``threshold``, ``left``, ``right``; leaves carry ``leaf``.
Routing compares the embedding feature against the threshold with ties going
left (value <= threshold descends left). Tree scores add onto the base score
and the sum is squashed by the logistic function.
"""

import math
from dataclasses import dataclass

import numpy as np

from ecgflow.core import sigmoid
from ecgflow.models.errors import ModelShapeError


def _validate_node(node, n_features: int) -> None:
    if not isinstance(node, dict):
        raise ModelShapeError("ensemble", f"tree node must be a mapping, got {type(node)}")
    if "leaf" in node:
        if not math.isfinite(float(node["leaf"])):
            raise ModelShapeError("ensemble", "non-finite leaf value")
        return
    for key in ("feature", "threshold", "left", "right"):
        if key not in node:
            raise ModelShapeError("ensemble", f"internal node missing {key!r}")
    feature = node["feature"]
    if not isinstance(feature, int) or not 0 <= feature < n_features:
        raise ModelShapeError(
            "ensemble", f"feature index {feature!r} out of range [0, {n_features})"
        )
    if not math.isfinite(float(node["threshold"])):
        raise ModelShapeError("ensemble", "non-finite threshold")
    _validate_node(node["left"], n_features)
    _validate_node(node["right"], n_features)


@dataclass(frozen=True)
class TreeEnsemble:
    model_id: str
    trees: tuple
    base_score: float
    n_features: int

    def __post_init__(self):
        if self.n_features <= 0:
            raise ModelShapeError("ensemble", "n_features must be positive")
        for tree in self.trees:
            _validate_node(tree, self.n_features)

    def to_jsonable(self) -> dict:
        return {
            "base_score": self.base_score,
            "n_features": self.n_features,
            "trees": list(self.trees),
        }

    @classmethod
    def from_jsonable(cls, model_id: str, data: dict) -> "TreeEnsemble":
        return cls(
            model_id=model_id,
            trees=tuple(data["trees"]),
            base_score=float(data["base_score"]),
            n_features=int(data["n_features"]),
        )


def _route(node: dict, embedding: np.ndarray) -> float:
    while "leaf" not in node:
        if embedding[node["feature"]] <= node["threshold"]:
            node = node["left"]
        else:
            node = node["right"]
    return float(node["leaf"])


def ensemble_forward(ensemble: TreeEnsemble, embedding: np.ndarray) -> float:
    """Sum routed leaf scores onto the base score; return sigmoid(score)."""
    embedding = np.asarray(embedding, dtype=np.float64)
    if embedding.ndim != 1 or embedding.size != ensemble.n_features:
        raise ModelShapeError(
            "ensemble",
            f"embedding has {embedding.size} features, expected {ensemble.n_features}",
        )
    score = ensemble.base_score
    for tree in ensemble.trees:
        score += _route(tree, embedding)
    return sigmoid(score)

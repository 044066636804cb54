"""Typed errors shared across the inference engine."""

from ecgflow.core import EcgflowError


class ModelError(EcgflowError):
    code = "ModelError"


class ModelShapeError(ModelError):
    """A declared dimension does not line up; carries the offending layer."""

    code = "ModelShapeError"

    def __init__(self, layer: str, message: str = ""):
        super().__init__(f"{layer}: {message}" if message else layer)
        self.layer = layer


class NumericError(ModelError):
    """A non-finite value appeared mid-forward; carries the layer name."""

    code = "NumericError"

    def __init__(self, layer: str, message: str = ""):
        super().__init__(f"{layer}: {message}" if message else layer)
        self.layer = layer


class WeightFormatError(ModelError):
    code = "WeightFormatError"


class ModelNotFound(ModelError):
    code = "NotFound"

"""Desk-scale forward-pass inference engine.

Float32 numpy kernels for a modernized-convnet classifier: depthwise and
pointwise convolutions, channel layer norm, exact-erf GELU, and a small
binary weights container.
"""

from dingdate.nn.kernels import (
    EmptyInputError,
    ShapeMismatchError,
    conv2d,
    depthwise_conv2d,
    gelu,
    global_avg_pool,
    layer_norm,
    linear,
    softmax,
)
from dingdate.nn.model import BlockParams, Model, ModelConfig, convnext_block
from dingdate.nn.weights import (
    BadMagicError,
    MissingTensorError,
    UnexpectedTensorError,
    VersionUnsupportedError,
    WeightsFormatError,
    load_weights,
    save_weights,
)

__all__ = [
    "BadMagicError",
    "BlockParams",
    "EmptyInputError",
    "MissingTensorError",
    "Model",
    "ModelConfig",
    "ShapeMismatchError",
    "UnexpectedTensorError",
    "VersionUnsupportedError",
    "WeightsFormatError",
    "conv2d",
    "convnext_block",
    "depthwise_conv2d",
    "gelu",
    "global_avg_pool",
    "layer_norm",
    "linear",
    "load_weights",
    "save_weights",
    "softmax",
]

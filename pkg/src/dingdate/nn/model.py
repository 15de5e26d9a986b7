"""Classifier model: stem, residual blocks, stage downsampling, head.

Block composition: depthwise 7x7 -> channel layer norm -> 1x1 expand (4x)
-> GELU -> 1x1 project -> residual add. Between stages: layer norm then a
non-overlapping strided 2x2 convolution. The embedding is the post-pool,
post-norm encoder output; logits are a linear head over it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dingdate.nn.kernels import (
    ShapeMismatchError,
    conv2d,
    depthwise_conv2d,
    gelu,
    global_avg_pool,
    layer_norm,
    linear,
)

NUM_CLASSES = 11
STEM_KERNEL = 4
STEM_STRIDE = 4
BLOCK_KERNEL = 7
EXPAND_RATIO = 4
DOWNSAMPLE_KERNEL = 2
DOWNSAMPLE_STRIDE = 2


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters; carried inside the weights file."""

    input_size: int
    stage_depths: tuple[int, ...]
    stage_widths: tuple[int, ...]
    num_classes: int = NUM_CLASSES
    embedding_dim: int = 0

    def __post_init__(self) -> None:
        if self.num_classes != NUM_CLASSES:
            raise ValueError(f"num_classes must be {NUM_CLASSES}, got {self.num_classes}")
        if len(self.stage_depths) != len(self.stage_widths) or not self.stage_depths:
            raise ValueError("stage_depths and stage_widths must be same length >= 1")
        if any(d < 1 for d in self.stage_depths) or any(w < 1 for w in self.stage_widths):
            raise ValueError("stage depths and widths must be >= 1")
        if self.input_size < STEM_KERNEL:
            raise ValueError(f"input_size must be >= {STEM_KERNEL}")
        if self.embedding_dim == 0:
            object.__setattr__(self, "embedding_dim", self.stage_widths[-1])
        elif self.embedding_dim != self.stage_widths[-1]:
            raise ValueError("embedding_dim must equal the last stage width")

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        """Every required parameter name with its shape, in file order."""
        shapes: dict[str, tuple[int, ...]] = {}
        w0 = self.stage_widths[0]
        shapes["stem.conv.weight"] = (w0, 3, STEM_KERNEL, STEM_KERNEL)
        shapes["stem.conv.bias"] = (w0,)
        shapes["stem.norm.gamma"] = (w0,)
        shapes["stem.norm.beta"] = (w0,)
        for s, (depth, width) in enumerate(zip(self.stage_depths, self.stage_widths)):
            if s > 0:
                prev = self.stage_widths[s - 1]
                shapes[f"downsample.{s}.norm.gamma"] = (prev,)
                shapes[f"downsample.{s}.norm.beta"] = (prev,)
                shapes[f"downsample.{s}.conv.weight"] = (
                    width, prev, DOWNSAMPLE_KERNEL, DOWNSAMPLE_KERNEL,
                )
                shapes[f"downsample.{s}.conv.bias"] = (width,)
            for b in range(depth):
                prefix = f"stages.{s}.blocks.{b}"
                hidden = EXPAND_RATIO * width
                shapes[f"{prefix}.dwconv.weight"] = (width, BLOCK_KERNEL, BLOCK_KERNEL)
                shapes[f"{prefix}.dwconv.bias"] = (width,)
                shapes[f"{prefix}.norm.gamma"] = (width,)
                shapes[f"{prefix}.norm.beta"] = (width,)
                shapes[f"{prefix}.pw1.weight"] = (hidden, width)
                shapes[f"{prefix}.pw1.bias"] = (hidden,)
                shapes[f"{prefix}.pw2.weight"] = (width, hidden)
                shapes[f"{prefix}.pw2.bias"] = (width,)
        last = self.stage_widths[-1]
        shapes["final_norm.gamma"] = (last,)
        shapes["final_norm.beta"] = (last,)
        shapes["head.weight"] = (self.num_classes, last)
        shapes["head.bias"] = (self.num_classes,)
        return shapes


@dataclass(frozen=True)
class BlockParams:
    """Parameters of one residual block over `dim` channels."""

    dw_weight: np.ndarray   # (dim, 7, 7)
    dw_bias: np.ndarray     # (dim,)
    norm_gamma: np.ndarray  # (dim,)
    norm_beta: np.ndarray   # (dim,)
    pw1_weight: np.ndarray  # (4*dim, dim)
    pw1_bias: np.ndarray    # (4*dim,)
    pw2_weight: np.ndarray  # (dim, 4*dim)
    pw2_bias: np.ndarray    # (dim,)


def _pointwise(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """1x1 convolution expressed through the audited conv2d kernel."""
    return conv2d(x, weight[:, :, None, None], bias, stride=1, padding=0)


def convnext_block(x: np.ndarray, params: BlockParams, epsilon: float = 1e-6) -> np.ndarray:
    """One residual block; output shape equals input shape."""
    if x.ndim != 3 or x.shape[0] != params.dw_weight.shape[0]:
        raise ShapeMismatchError(
            f"block over {params.dw_weight.shape[0]} channels got input {x.shape}"
        )
    pad = BLOCK_KERNEL // 2
    branch = depthwise_conv2d(x, params.dw_weight, params.dw_bias, padding=pad)
    branch = layer_norm(branch, params.norm_gamma, params.norm_beta, epsilon)
    branch = _pointwise(branch, params.pw1_weight, params.pw1_bias)
    branch = gelu(branch)
    branch = _pointwise(branch, params.pw2_weight, params.pw2_bias)
    return x + branch


@dataclass
class Model:
    """A loaded, immutable model: config plus named parameter tensors."""

    config: ModelConfig
    params: dict[str, np.ndarray]
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        expected = self.config.parameter_shapes()
        for name, shape in expected.items():
            if name not in self.params:
                raise ShapeMismatchError(f"model is missing parameter {name}")
            if tuple(self.params[name].shape) != shape:
                raise ShapeMismatchError(
                    f"parameter {name} has shape {self.params[name].shape}, "
                    f"expected {shape}"
                )
        extras = set(self.params) - set(expected)
        if extras:
            raise ShapeMismatchError(f"unexpected parameters: {sorted(extras)}")

    def _block_params(self, stage: int, block: int) -> BlockParams:
        p = self.params
        prefix = f"stages.{stage}.blocks.{block}"
        return BlockParams(
            dw_weight=p[f"{prefix}.dwconv.weight"],
            dw_bias=p[f"{prefix}.dwconv.bias"],
            norm_gamma=p[f"{prefix}.norm.gamma"],
            norm_beta=p[f"{prefix}.norm.beta"],
            pw1_weight=p[f"{prefix}.pw1.weight"],
            pw1_bias=p[f"{prefix}.pw1.bias"],
            pw2_weight=p[f"{prefix}.pw2.weight"],
            pw2_bias=p[f"{prefix}.pw2.bias"],
        )

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Run the full forward pass.

        Returns (logits, embedding) where logits has num_classes entries
        and embedding is the pooled, normalized encoder output.
        """
        x = np.asarray(x, dtype=np.float32)
        size = self.config.input_size
        if x.shape != (3, size, size):
            raise ShapeMismatchError(
                f"model input must be (3, {size}, {size}), got {x.shape}"
            )
        p = self.params
        x = conv2d(x, p["stem.conv.weight"], p["stem.conv.bias"], stride=STEM_STRIDE)
        x = layer_norm(x, p["stem.norm.gamma"], p["stem.norm.beta"], self.epsilon)
        for s, depth in enumerate(self.config.stage_depths):
            if s > 0:
                x = layer_norm(
                    x,
                    p[f"downsample.{s}.norm.gamma"],
                    p[f"downsample.{s}.norm.beta"],
                    self.epsilon,
                )
                x = conv2d(
                    x,
                    p[f"downsample.{s}.conv.weight"],
                    p[f"downsample.{s}.conv.bias"],
                    stride=DOWNSAMPLE_STRIDE,
                )
            for b in range(depth):
                x = convnext_block(x, self._block_params(s, b), self.epsilon)
        pooled = global_avg_pool(x)
        embedding = layer_norm(
            pooled, p["final_norm.gamma"], p["final_norm.beta"], self.epsilon
        )
        logits = linear(embedding, p["head.weight"], p["head.bias"])
        return logits, embedding

    def descriptor(self) -> str:
        cfg = self.config
        return (
            f"nnx:in{cfg.input_size}"
            f":d{','.join(map(str, cfg.stage_depths))}"
            f":w{','.join(map(str, cfg.stage_widths))}"
            f":c{cfg.num_classes}"
        )


def random_model(config: ModelConfig, seed: int = 0, scale: float = 0.1) -> Model:
    """Model with seeded Gaussian parameters, for fixtures and demos."""
    rng = np.random.default_rng(seed)
    params = {
        name: (rng.standard_normal(shape) * scale).astype(np.float32)
        for name, shape in config.parameter_shapes().items()
    }
    return Model(config=config, params=params)

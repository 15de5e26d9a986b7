"""Numeric kernels, all float32 in and out with float32 accumulation.

Tensors are plain numpy arrays, channel-first for spatial data. Every
kernel here is checked against an independent nested-loop oracle in the
test suite.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import erf


class ShapeMismatchError(ValueError):
    """Operand shapes are inconsistent with the kernel's contract."""


class EmptyInputError(ValueError):
    pass


def _as_f32(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float32)


def conv2d(
    x: np.ndarray,
    kernel: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """Cross-correlation of a (C,H,W) input with an (O,C,kh,kw) kernel.

    Output extent per axis is floor((in + 2*pad - k) / stride) + 1.
    """
    x, kernel, bias = _as_f32(x), _as_f32(kernel), _as_f32(bias)
    if x.ndim != 3 or kernel.ndim != 4:
        raise ShapeMismatchError("conv2d expects x (C,H,W) and kernel (O,C,kh,kw)")
    if stride < 1:
        raise ShapeMismatchError("stride must be >= 1")
    c_in, h, w = x.shape
    c_out, kc, kh, kw = kernel.shape
    if kc != c_in:
        raise ShapeMismatchError(f"kernel expects {kc} input channels, got {c_in}")
    if bias.shape != (c_out,):
        raise ShapeMismatchError(f"bias must have shape ({c_out},)")
    out_h = (h + 2 * padding - kh) // stride + 1
    out_w = (w + 2 * padding - kw) // stride + 1
    if out_h < 1 or out_w < 1:
        raise ShapeMismatchError("kernel larger than padded input")
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    out = np.einsum("chwij,ocij->ohw", windows, kernel, dtype=np.float32)
    return out + bias[:, None, None]


def depthwise_conv2d(
    x: np.ndarray, kernel: np.ndarray, bias: np.ndarray, padding: int = 0
) -> np.ndarray:
    """Per-channel spatial convolution; channels never mix."""
    x, kernel, bias = _as_f32(x), _as_f32(kernel), _as_f32(bias)
    if x.ndim != 3 or kernel.ndim != 3:
        raise ShapeMismatchError(
            "depthwise_conv2d expects x (C,H,W) and kernel (C,kh,kw)"
        )
    c, h, w = x.shape
    kc, kh, kw = kernel.shape
    if kc != c:
        raise ShapeMismatchError(f"kernel has {kc} filters for {c} channels")
    if bias.shape != (c,):
        raise ShapeMismatchError(f"bias must have shape ({c},)")
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise ShapeMismatchError("kernel larger than padded input")
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x, (kh, kw), axis=(1, 2))
    out = np.einsum("chwij,cij->chw", windows, kernel, dtype=np.float32)
    return out + bias[:, None, None]


def layer_norm(
    x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, epsilon: float = 1e-6
) -> np.ndarray:
    """Normalize over the channel axis (axis 0) per spatial position.

    Uses the population variance. Accepts a (C,) vector or a (C,H,W)
    tensor; gamma and beta are per-channel.
    """
    x, gamma, beta = _as_f32(x), _as_f32(gamma), _as_f32(beta)
    if x.ndim not in (1, 3):
        raise ShapeMismatchError("layer_norm expects a (C,) or (C,H,W) tensor")
    c = x.shape[0]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeMismatchError(f"gamma and beta must have shape ({c},)")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    mean = x.mean(axis=0, dtype=np.float32)
    var = np.square(x - mean).mean(axis=0, dtype=np.float32)
    normed = (x - mean) / np.sqrt(var + np.float32(epsilon))
    if x.ndim == 1:
        return gamma * normed + beta
    return gamma[:, None, None] * normed + beta[:, None, None]


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact Gaussian-error-function GELU: x * Phi(x), elementwise."""
    x = np.asarray(x, dtype=np.float32)
    return (x * 0.5 * (1.0 + erf(x / np.float32(np.sqrt(2.0))))).astype(np.float32)


def linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map of a vector: weight (out, in) @ x + bias."""
    x, weight, bias = _as_f32(x), _as_f32(weight), _as_f32(bias)
    if x.ndim != 1 or weight.ndim != 2:
        raise ShapeMismatchError("linear expects x (in,) and weight (out, in)")
    out_dim, in_dim = weight.shape
    if x.shape != (in_dim,):
        raise ShapeMismatchError(f"weight expects input ({in_dim},), got {x.shape}")
    if bias.shape != (out_dim,):
        raise ShapeMismatchError(f"bias must have shape ({out_dim},)")
    return weight @ x + bias


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    """Per-channel spatial mean of a (C,H,W) tensor, yielding (C,)."""
    x = _as_f32(x)
    if x.ndim != 3:
        raise ShapeMismatchError("global_avg_pool expects a (C,H,W) tensor")
    return x.mean(axis=(1, 2), dtype=np.float32)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax of a nonempty finite vector."""
    logits = np.asarray(logits, dtype=np.float32)
    if logits.ndim != 1 or logits.size == 0:
        raise EmptyInputError("softmax expects a nonempty vector")
    if not np.isfinite(logits).all():
        raise EmptyInputError("softmax input must be finite")
    shifted = logits - logits.max()
    exps = np.exp(shifted)
    return exps / exps.sum(dtype=np.float32)

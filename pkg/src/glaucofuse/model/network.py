"""Toy convolutional backbone with a VCDR-fused classification head.

Backbone: optional average-pool of the input, then ``len(block_widths)``
blocks of 3x3 conv -> ReLU -> 2x2 average pool, then a 1x1 conv to
``feature_dim`` channels -> ReLU -> global average pool. With fusion enabled
the head sees ``[features, vcdr * features]``; otherwise it sees the features
alone. The head is a single linear layer to two logits.
"""
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from ..errors import ChannelCountMismatch, DimensionMismatch, InvalidConfig
from .layers import (avg_pool, avg_pool_backward, conv3x3_backward, conv3x3_forward,
                     softmax)

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class BackboneConfig:
    in_channels: int = 5
    block_widths: Tuple[int, ...] = (8, 16, 32)
    feature_dim: int = 64
    input_pool: int = 8

    def __post_init__(self):
        object.__setattr__(self, "block_widths", tuple(int(b) for b in self.block_widths))
        if self.in_channels not in (3, 5):
            raise InvalidConfig(f"in_channels must be 3 or 5, got {self.in_channels}")
        if self.feature_dim < 1 or self.input_pool < 1 or any(b < 1 for b in self.block_widths):
            raise InvalidConfig(f"non-positive backbone size in {self}")

    def to_dict(self):
        d = asdict(self)
        d["block_widths"] = list(self.block_widths)
        return d

    def check_input(self, shape):
        if len(shape) != 4:
            raise DimensionMismatch(f"expected (N, C, H, W) input, got {shape}")
        if shape[1] != self.in_channels:
            raise ChannelCountMismatch(
                f"backbone expects {self.in_channels} channels, input has {shape[1]}")
        factor = self.input_pool * 2 ** len(self.block_widths)
        if shape[2] % factor or shape[3] % factor:
            raise DimensionMismatch(
                f"spatial size {shape[2:]} must be divisible by {factor} for this backbone")


def fuse(features, vcdr):
    """Concatenate features with their VCDR-scaled copy along the last axis.

    ``features`` is ``(D,)`` or ``(N, D)``; ``vcdr`` a scalar or ``(N,)``.
    """
    features = np.asarray(features, dtype=np.float64)
    v = np.asarray(vcdr, dtype=np.float64)
    if features.ndim == 2:
        v = v.reshape(-1, 1)
    return np.concatenate([features, v * features], axis=-1)


def head_width(config: BackboneConfig, use_vcdr: bool) -> int:
    return 2 * config.feature_dim if use_vcdr else config.feature_dim


def init_params(config: BackboneConfig, use_vcdr: bool, rng: np.random.Generator) -> Params:
    """He-normal conv weights, zero biases, small normal head."""
    params = {}
    c = config.in_channels
    for i, f in enumerate(config.block_widths):
        params[f"conv{i}.w"] = rng.normal(0.0, np.sqrt(2.0 / (9 * c)), size=(f, c, 3, 3))
        params[f"conv{i}.b"] = np.zeros(f)
        c = f
    d = config.feature_dim
    params["proj.w"] = rng.normal(0.0, np.sqrt(2.0 / c), size=(d, c))
    params["proj.b"] = np.zeros(d)
    params["head.w"] = rng.normal(0.0, 0.01, size=(2, head_width(config, use_vcdr)))
    params["head.b"] = np.zeros(2)
    return params


def param_shapes(config: BackboneConfig, use_vcdr: bool):
    return {k: v.shape for k, v in init_params(config, use_vcdr, np.random.default_rng(0)).items()}


def forward(params: Params, x, vcdr, config: BackboneConfig, use_vcdr: bool):
    """Logits ``(N, 2)`` and the cache needed by :func:`backward`.

    ``vcdr`` is ignored when ``use_vcdr`` is false.
    """
    x = np.asarray(x, dtype=np.float64)
    config.check_input(x.shape)
    cache = {"blocks": []}
    a = avg_pool(x, config.input_pool)
    for i in range(len(config.block_widths)):
        z, cols = conv3x3_forward(a, params[f"conv{i}.w"], params[f"conv{i}.b"])
        cache["blocks"].append((a.shape, cols, z > 0))
        a = avg_pool(np.maximum(z, 0.0), 2)
    z = np.einsum("nchw,dc->ndhw", a, params["proj.w"]) + params["proj.b"][:, None, None]
    r = np.maximum(z, 0.0)
    feats = r.mean(axis=(2, 3))
    cache.update(proj_in=a, proj_active=z > 0)
    if use_vcdr:
        v = np.asarray(vcdr, dtype=np.float64).reshape(-1)
        if v.shape[0] != x.shape[0]:
            raise DimensionMismatch(f"{v.shape[0]} VCDR values for {x.shape[0]} inputs")
        h = fuse(feats, v)
        cache["vcdr"] = v
    else:
        h = feats
    cache["h"] = h
    logits = h @ params["head.w"].T + params["head.b"]
    return logits, cache


def cross_entropy(logits, y):
    """Mean softmax cross-entropy and its gradient with respect to the logits."""
    y = np.asarray(y, dtype=np.intp)
    p = softmax(logits)
    n = logits.shape[0]
    loss = -np.mean(np.log(np.clip(p[np.arange(n), y], 1e-300, None)))
    dlogits = p.copy()
    dlogits[np.arange(n), y] -= 1.0
    return float(loss), dlogits / n


def backward(params: Params, dlogits, cache, config: BackboneConfig, use_vcdr: bool) -> Params:
    """Parameter gradients given the loss gradient at the logits.

    VCDR enters as a constant multiplier; nothing is propagated into it.
    """
    grads = {}
    grads["head.w"] = dlogits.T @ cache["h"]
    grads["head.b"] = dlogits.sum(axis=0)
    dh = dlogits @ params["head.w"]
    d = config.feature_dim
    if use_vcdr:
        dfeat = dh[:, :d] + cache["vcdr"][:, None] * dh[:, d:]
    else:
        dfeat = dh
    a = cache["proj_in"]
    hw = a.shape[2] * a.shape[3]
    dz = np.broadcast_to(dfeat[:, :, None, None] / hw, cache["proj_active"].shape) * cache["proj_active"]
    grads["proj.w"] = np.einsum("ndhw,nchw->dc", dz, a)
    grads["proj.b"] = dz.sum(axis=(0, 2, 3))
    da = np.einsum("ndhw,dc->nchw", dz, params["proj.w"])
    for i in reversed(range(len(config.block_widths))):
        in_shape, cols, active = cache["blocks"][i]
        dz = avg_pool_backward(da, 2) * active
        da, grads[f"conv{i}.w"], grads[f"conv{i}.b"] = conv3x3_backward(
            dz, cols, params[f"conv{i}.w"], in_shape, need_dx=i > 0)
    return {k: grads[k] for k in params}


def loss_and_grads(params: Params, x, y, vcdr, config: BackboneConfig, use_vcdr: bool):
    logits, cache = forward(params, x, vcdr, config, use_vcdr)
    loss, dlogits = cross_entropy(logits, y)
    return loss, backward(params, dlogits, cache, config, use_vcdr)


def predict_proba(params: Params, x, vcdr, config: BackboneConfig, use_vcdr: bool):
    logits, _ = forward(params, x, vcdr, config, use_vcdr)
    return softmax(logits)

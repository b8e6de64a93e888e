import numpy as np
import pytest

from glaucofuse.errors import ChannelCountMismatch, DimensionMismatch, InvalidConfig
from glaucofuse.model import network
from glaucofuse.model.layers import (avg_pool, avg_pool_backward, blur_pool, conv3x3_forward,
                                     softmax)
from glaucofuse.model.network import BackboneConfig, fuse
from scipy.ndimage import gaussian_filter

TINY = BackboneConfig(in_channels=5, block_widths=(3,), feature_dim=4, input_pool=1)


def test_fuse_examples(rng):
    f = rng.random(8)
    out = fuse(f, 0.5)
    assert out.shape == (16,) and np.allclose(out[8:], 0.5 * f)
    assert not fuse(f, 0.0)[8:].any()
    assert np.array_equal(fuse(f, 1.0), np.r_[f, f])
    batch = fuse(np.ones((2, 3)), [0.2, 0.4])
    assert batch[:, 3:].tolist() == [[0.2] * 3, [0.4] * 3]


def test_backbone_config_validation():
    with pytest.raises(InvalidConfig):
        BackboneConfig(in_channels=4)
    with pytest.raises(InvalidConfig):
        BackboneConfig(feature_dim=0)
    with pytest.raises(DimensionMismatch):
        BackboneConfig().check_input((1, 5, 100, 100))
    with pytest.raises(ChannelCountMismatch):
        BackboneConfig().check_input((1, 3, 256, 256))


def test_zero_input_gives_head_bias(rng):
    params = network.init_params(TINY, True, rng)
    params["head.w"][:] = 0
    params["head.b"][:] = [0.3, -0.2]
    logits, _ = network.forward(params, np.zeros((2, 5, 4, 4)), [0.1, 0.9], TINY, True)
    assert np.allclose(logits, [[0.3, -0.2]] * 2)


def test_vcdr_changes_logits_only_with_fusion(rng):
    x = rng.normal(size=(1, 5, 4, 4))
    params = network.init_params(TINY, True, rng)
    params["proj.b"][:] = 1.0  # guarantees nonzero features
    a, _ = network.forward(params, x, [0.2], TINY, True)
    b, _ = network.forward(params, x, [0.7], TINY, True)
    assert not np.allclose(a, b)
    plain = network.init_params(TINY, False, rng)
    c, _ = network.forward(plain, x, [0.2], TINY, False)
    d, _ = network.forward(plain, x, [0.7], TINY, False)
    assert np.array_equal(c, d)


def test_softmax_rows_sum_to_one(rng):
    p = softmax(rng.normal(size=(7, 2)) * 50)
    assert np.allclose(p.sum(axis=1), 1.0)


def test_conv_matches_direct_sum(rng):
    x = rng.normal(size=(1, 2, 5, 5))
    w = rng.normal(size=(3, 2, 3, 3))
    b = rng.normal(size=3)
    out, _ = conv3x3_forward(x, w, b)
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    ref = np.empty_like(out)
    for f in range(3):
        for i in range(5):
            for j in range(5):
                ref[0, f, i, j] = np.sum(xp[0, :, i:i + 3, j:j + 3] * w[f]) + b[f]
    assert np.allclose(out, ref)


def test_avg_pool_adjoint(rng):
    x = rng.normal(size=(2, 3, 8, 8))
    g = rng.normal(size=(2, 3, 4, 4))
    assert np.sum(avg_pool(x, 2) * g) == pytest.approx(np.sum(x * avg_pool_backward(g, 2)))


@pytest.mark.parametrize("sigma", [0.1, 0.7, 2.0])
def test_blur_pool_equals_blur_then_pool(rng, sigma):
    planes = rng.integers(0, 256, (3, 32, 32)).astype(float)
    ref = np.stack([gaussian_filter(p, sigma, mode="reflect") for p in planes])
    assert np.allclose(blur_pool(planes, sigma, 4), avg_pool(ref[None], 4)[0], atol=1e-10)


def numeric_grads(params, x, y, v, config, use_vcdr, eps=1e-6):
    out = {}
    for k, p in params.items():
        g = np.empty_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + eps
            lp, _ = network.loss_and_grads(params, x, y, v, config, use_vcdr)
            p[idx] = old - eps
            lm, _ = network.loss_and_grads(params, x, y, v, config, use_vcdr)
            p[idx] = old
            g[idx] = (lp - lm) / (2 * eps)
        out[k] = g
    return out


@pytest.mark.parametrize("use_vcdr", [True, False])
def test_backward_matches_finite_differences(use_vcdr):
    rng = np.random.default_rng(7)
    cfg = BackboneConfig(5, (3, 2), 4, 1)
    params = network.init_params(cfg, use_vcdr, rng)
    # random biases keep pre-activations away from the ReLU kink at exactly 0
    for k in params:
        if k.endswith(".b"):
            params[k] = rng.normal(0.0, 0.3, size=params[k].shape)
    params["head.w"] = rng.normal(size=params["head.w"].shape)
    x = rng.normal(size=(3, 5, 8, 8))
    y = np.array([0, 1, 1])
    v = rng.random(3)
    _, analytic = network.loss_and_grads(params, x, y, v, cfg, use_vcdr)
    numeric = numeric_grads(params, x, y, v, cfg, use_vcdr)
    for k in params:
        assert np.allclose(analytic[k], numeric[k], rtol=1e-4, atol=1e-8), k


def test_param_shapes_match_head_width():
    shapes = network.param_shapes(BackboneConfig(), True)
    assert shapes["head.w"] == (2, 128)
    assert network.param_shapes(BackboneConfig(), False)["head.w"] == (2, 64)

"""Scikit-learn style estimator around the fusion network."""
import logging
from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..channels import (IMAGENET_MEAN, IMAGENET_STD, AugmentConfig, Normalization,
                        draw_augmentation)
from ..errors import ChannelCountMismatch, DimensionMismatch, EmptySplit, NumericError
from ..metrics import roc_auc
from . import network
from .layers import avg_pool, blur_pool
from .network import BackboneConfig

log = logging.getLogger(__name__)


def default_normalization(n_channels):
    if n_channels == 5:
        return Normalization()
    return Normalization(IMAGENET_MEAN, IMAGENET_STD)


class FusionNetClassifier(BaseEstimator, ClassifierMixin):
    """Glaucoma classifier over 3- or 5-plane inputs with optional VCDR fusion.

    ``X`` holds planes on the 8-bit scale, shape ``(n, C, H, W)``; they are
    divided by 255 and standardized with ``channel_mean``/``channel_std``
    (per-channel defaults when left as ``None``). The per-sample VCDR is
    passed separately as ``vcdr``. Training is plain minibatch SGD with
    momentum on mean cross-entropy; after every epoch the validation AUC is
    logged and the best snapshot is kept.

    Inputs are average-pooled by ``input_pool`` before anything else reaches
    the network. Standardization, flips and pooling commute, so un-blurred
    samples come from a pooled copy of ``X`` built once per call. Blurred
    planes go through :func:`~.layers.blur_pool`, which applies blur and
    pooling as one linear map.

    Parameters
    ----------
    use_vcdr : bool
        Feed ``[features, vcdr * features]`` to the head instead of the
        features alone.
    block_widths, feature_dim, input_pool
        Backbone shape, see :class:`BackboneConfig`.
    blur_channels : tuple of int
        Planes eligible for random Gaussian blur. Flips apply to every plane.
    random_state : int
        Seeds initialization, shuffling and augmentation.
    """

    def __init__(self, use_vcdr=True, block_widths=(8, 16, 32), feature_dim=64, input_pool=8,
                 epochs=20, learning_rate=0.02, momentum=0.9, batch_size=32, weight_decay=0.0,
                 p_flip=0.5, p_blur=0.5, sigma_range=(0.1, 2.0), blur_channels=(0, 1, 2),
                 channel_mean=None, channel_std=None, random_state=0):
        self.use_vcdr = use_vcdr
        self.block_widths = block_widths
        self.feature_dim = feature_dim
        self.input_pool = input_pool
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.weight_decay = weight_decay
        self.p_flip = p_flip
        self.p_blur = p_blur
        self.sigma_range = sigma_range
        self.blur_channels = blur_channels
        self.channel_mean = channel_mean
        self.channel_std = channel_std
        self.random_state = random_state

    def _normalization(self, n_channels):
        if self.channel_mean is None and self.channel_std is None:
            return default_normalization(n_channels)
        default = default_normalization(n_channels)
        mean = default.mean if self.channel_mean is None else tuple(self.channel_mean)
        std = default.std if self.channel_std is None else tuple(self.channel_std)
        return Normalization(mean, std)

    def _check_X(self, X, vcdr, n_channels=None):
        X = np.asarray(X)
        if X.ndim != 4:
            raise DimensionMismatch(f"expected (n, C, H, W) planes, got shape {X.shape}")
        if X.shape[0] == 0:
            raise EmptySplit("no samples")
        if n_channels is not None and X.shape[1] != n_channels:
            raise ChannelCountMismatch(f"fitted on {n_channels} channels, got {X.shape[1]}")
        if self.use_vcdr:
            if vcdr is None:
                raise ValueError("vcdr values are required when use_vcdr=True")
            vcdr = np.asarray(vcdr, dtype=np.float64).ravel()
            if vcdr.shape[0] != X.shape[0] or not np.all(np.isfinite(vcdr)):
                raise ValueError("vcdr must be finite with one value per sample")
        else:
            vcdr = np.zeros(X.shape[0])
        return X, vcdr

    def fit(self, X, y, vcdr=None, X_val=None, y_val=None, vcdr_val=None):
        X, vcdr = self._check_X(X, vcdr)
        y = np.asarray(y).astype(np.intp).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"{y.shape[0]} labels for {X.shape[0]} samples")
        has_val = X_val is not None
        if has_val:
            X_val, vcdr_val = self._check_X(X_val, vcdr_val, X.shape[1])
            y_val = np.asarray(y_val).astype(np.intp).ravel()

        self.config_ = BackboneConfig(X.shape[1], self.block_widths, self.feature_dim, self.input_pool)
        self.config_.check_input(X.shape)
        self.normalization_ = self._normalization(X.shape[1])
        aug = AugmentConfig(self.p_flip, self.p_blur, tuple(self.sigma_range),
                            tuple(c for c in self.blur_channels if c < X.shape[1]))
        rng = np.random.default_rng(self.random_state)
        params = network.init_params(self.config_, self.use_vcdr, rng)
        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]

        net_config = replace(self.config_, input_pool=1)
        pooled = self._pool(X)
        pooled_val = self._pool(X_val) if has_val else None
        best_auc, best = -np.inf, None
        self.history_ = []
        n = X.shape[0]
        for epoch in range(1, self.epochs + 1):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                xb = self._augmented_batch(X, pooled, idx, rng, aug)
                loss, grads = network.loss_and_grads(params, xb, y[idx], vcdr[idx],
                                                     net_config, self.use_vcdr)
                if not np.isfinite(loss):
                    raise NumericError(f"non-finite training loss at epoch {epoch}")
                total += loss * idx.size
                for k, g in grads.items():
                    if self.weight_decay:
                        g = g + self.weight_decay * params[k]
                    velocity[k] = self.momentum * velocity[k] + g
                    params[k] = params[k] - self.learning_rate * velocity[k]
            train_loss = total / n
            if not all(np.all(np.isfinite(v)) for v in params.values()):
                raise NumericError(f"non-finite parameters after epoch {epoch}")
            self.params_ = params
            if has_val:
                _, val_auc = roc_auc(self._predict_pooled(pooled_val, vcdr_val)[:, 1], y_val)
            else:
                val_auc = float("nan")
            log.info("epoch %d loss %.5f val_auc %.4f", epoch, train_loss, val_auc)
            self.history_.append({"epoch": epoch, "train_loss": train_loss, "val_auc": val_auc})
            if best is None or not has_val or val_auc > best_auc:
                best_auc = val_auc
                best = {k: v.copy() for k, v in params.items()}
                self.best_epoch_ = epoch
        if best is None:
            best = {k: v.copy() for k, v in params.items()}
            self.best_epoch_ = 0
        self.params_ = best
        return self

    def _pool(self, X, chunk=64):
        k = self.config_.input_pool
        n, c, h, w = X.shape
        out = np.empty((n, c, h // k, w // k))
        for start in range(0, n, chunk):
            out[start:start + chunk] = avg_pool(np.asarray(X[start:start + chunk], dtype=np.float64), k)
        return out

    def _augmented_batch(self, X, pooled, idx, rng, aug):
        k = self.config_.input_pool
        batch = pooled[idx]
        blur = list(aug.blur_channels)
        for j, i in enumerate(idx):
            flip, sigma = draw_augmentation(rng, aug)
            if flip:
                batch[j] = batch[j, :, :, ::-1]
            if sigma is not None:
                full = X[i, blur]
                if flip:
                    full = full[..., ::-1]
                batch[j, blur] = blur_pool(full, sigma, k)
        return self.normalization_.apply(batch)

    def _predict_pooled(self, pooled, vcdr):
        net_config = replace(self.config_, input_pool=1)
        step = max(self.batch_size, 1)
        out = []
        for start in range(0, pooled.shape[0], step):
            sl = slice(start, start + step)
            xb = self.normalization_.apply(pooled[sl])
            out.append(network.predict_proba(self.params_, xb, vcdr[sl], net_config, self.use_vcdr))
        return np.concatenate(out)

    def predict_proba(self, X, vcdr=None):
        check_is_fitted(self, "params_")
        X, vcdr = self._check_X(X, vcdr, self.config_.in_channels)
        self.config_.check_input(X.shape)
        return self._predict_pooled(self._pool(X), vcdr)

    def predict(self, X, vcdr=None):
        return self.predict_proba(X, vcdr).argmax(axis=1)

    def decision_function(self, X, vcdr=None):
        return self.predict_proba(X, vcdr)[:, 1]

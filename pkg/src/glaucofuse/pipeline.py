"""From raw image/mask pairs to per-variant model inputs, fits and scores."""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .channels import SynthesizedSample, synthesize
from .config import RunConfig
from .data import Manifest, ManifestRow, crop_roi, read_image, read_mask_gray
from .errors import EmptySplit
from .masks import TriMask, parse_mask
from .metrics import roc_auc
from .model.classifier import FusionNetClassifier
from .model.logistic import VcdrLogisticRegression, log_loss

log = logging.getLogger(__name__)

# variant -> (input planes, VCDR fusion)
VARIANT_SPECS = {
    "proposed": ("five", True),
    "fundus_vcdr": ("rgb", True),
    "fundus": ("rgb", False),
    "mask_vcdr": ("mask", True),
    "mask": ("mask", False),
    "vcdr_logistic": ("vcdr", None),
}


@dataclass
class PreparedSet:
    """Un-augmented per-sample channels for one split.

    ``planes`` is ``(n, 5, H, W)`` uint8 (R, G, B, vessel, reduced) and
    ``masks`` the ``(n, H, W)`` gray trimaps.
    """

    ids: List[str]
    planes: np.ndarray
    masks: np.ndarray
    vcdr: np.ndarray
    labels: np.ndarray
    stats: list

    def __len__(self):
        return len(self.ids)


def prepare_pair(image, mask: TriMask, config: RunConfig) -> SynthesizedSample:
    roi, roi_mask = crop_roi(image, mask, config.roi_size, config.crop_margin)
    return synthesize(roi, roi_mask, config.t, config.milestone_strategy, config.vessel_polarity)


def load_row(manifest: Manifest, row: ManifestRow, config: RunConfig):
    image = read_image(manifest.resolve(row.image))
    mask = parse_mask(read_mask_gray(manifest.resolve(row.mask)), config.encoding())
    return image, mask


def prepare_samples(items: Iterable[Tuple[str, np.ndarray, TriMask, int]], n: int,
                    config: RunConfig) -> PreparedSet:
    """Prepare ``n`` ``(id, image, mask, label)`` items into preallocated arrays."""
    s = config.roi_size
    planes = np.empty((n, 5, s, s), dtype=np.uint8)
    masks = np.empty((n, s, s), dtype=np.uint8)
    vcdr = np.empty(n)
    labels = np.empty(n, dtype=np.intp)
    ids, stats = [], []
    count = 0
    for i, (sid, image, mask, label) in enumerate(items):
        smp = prepare_pair(image, mask, config)
        for w in smp.warnings:
            log.warning("%s: %s", sid, w)
        planes[i], masks[i], vcdr[i], labels[i] = smp.planes, smp.mask_gray, smp.vcdr, label
        ids.append(sid)
        stats.append(smp.stats)
        count += 1
    if count != n:
        raise ValueError(f"expected {n} items, got {count}")
    return PreparedSet(ids, planes, masks, vcdr, labels, stats)


def prepare_split(manifest: Manifest, split: str, config: RunConfig) -> PreparedSet:
    rows = manifest.split(split)
    if not rows:
        raise EmptySplit(f"split {split!r} has no rows")
    items = ((r.sample_id, *load_row(manifest, r, config), r.target) for r in rows)
    return prepare_samples(items, len(rows), config)


def variant_inputs(variant: str, data: PreparedSet):
    kind, _ = VARIANT_SPECS[variant]
    if kind == "five":
        return data.planes
    if kind == "rgb":
        return data.planes[:, :3]
    if kind == "mask":
        n, h, w = data.masks.shape
        return np.broadcast_to(data.masks[:, None], (n, 3, h, w))
    return data.vcdr[:, None]


def build_estimator(config: RunConfig):
    kind, use_vcdr = VARIANT_SPECS[config.variant]
    if kind == "vcdr":
        return VcdrLogisticRegression(config.logistic_iterations, config.logistic_learning_rate)
    if kind == "five":
        mean = config.rgb_mean + (config.synth_mean,) * 2
        std = config.rgb_std + (config.synth_std,) * 2
    elif kind == "rgb":
        mean, std = config.rgb_mean, config.rgb_std
    else:
        mean, std = (config.mask_mean,) * 3, (config.mask_std,) * 3
    return FusionNetClassifier(
        use_vcdr=use_vcdr, block_widths=config.block_widths, feature_dim=config.feature_dim,
        input_pool=config.input_pool, epochs=config.epochs, learning_rate=config.learning_rate,
        momentum=config.momentum, batch_size=config.batch_size, weight_decay=config.weight_decay,
        p_flip=config.p_flip, p_blur=config.p_blur,
        sigma_range=(config.blur_sigma_min, config.blur_sigma_max),
        # synthesized planes and masks are never blurred
        blur_channels=(0, 1, 2) if kind != "mask" else (),
        channel_mean=mean, channel_std=std, random_state=config.seed)


def fit_variant(config: RunConfig, train: PreparedSet, val: PreparedSet):
    """Fit the configured variant; returns ``(estimator, epoch log rows)``."""
    if len(train) == 0 or len(val) == 0:
        raise EmptySplit("train and validation splits must be nonempty")
    est = build_estimator(config)
    if isinstance(est, VcdrLogisticRegression):
        est.fit(train.vcdr, train.labels)
        _, val_auc = roc_auc(est.predict_proba(val.vcdr)[:, 1], val.labels)
        history = [{"epoch": 1, "train_loss": log_loss(est.model_, train.vcdr, train.labels),
                    "val_auc": val_auc}]
        return est, history
    est.fit(variant_inputs(config.variant, train), train.labels, vcdr=train.vcdr,
            X_val=variant_inputs(config.variant, val), y_val=val.labels, vcdr_val=val.vcdr)
    return est, est.history_


def predict_scores(est, variant: str, data: PreparedSet) -> np.ndarray:
    """Glaucoma probability per sample."""
    if isinstance(est, VcdrLogisticRegression):
        return est.predict_proba(data.vcdr)[:, 1]
    return est.predict_proba(variant_inputs(variant, data), data.vcdr)[:, 1]

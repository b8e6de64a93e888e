"""Rough vessel map, complexity-reduced channel and 5-channel input assembly."""
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Tuple

import numpy as np
from scipy.ndimage import gaussian_filter
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DimensionMismatch, InvalidConfig, NonPositiveT, UnsortedMilestones
from .masks import TriMask, compute_vcdr, render_mask
from .stats import RegionStats, compute_stats, green_channel

MILESTONE_STRATEGIES = ("band", "means")
POLARITIES = ("dark", "bright")

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def vessel_map(green, mask: TriMask, t_v: float, polarity: str = "dark") -> np.ndarray:
    """Global threshold of the green plane, restricted to the disc.

    Returns a uint8 plane that is 255 where a disc pixel lies below ``t_v``
    (above it for ``polarity="bright"``) and 0 everywhere else.
    """
    green = np.asarray(green)
    if green.shape != mask.shape:
        raise DimensionMismatch(f"green {green.shape} vs mask {mask.shape}")
    if polarity == "dark":
        hit = green < t_v
    elif polarity == "bright":
        hit = green > t_v
    else:
        raise InvalidConfig(f"unknown vessel polarity {polarity!r}")
    return np.where(hit & mask.disc, 255, 0).astype(np.uint8)


def milestones(stats: RegionStats, t: float = 20.0, strategy: str = "band") -> np.ndarray:
    """Quantization boundaries derived from the region means.

    ``band`` places a boundary ``t`` below and above each of Back, Rim and Cup;
    ``means`` uses the three means themselves and ignores ``t`` beyond
    validation. A missing cup mean is skipped. The result is clamped to
    [0, 255], deduplicated and strictly increasing.
    """
    if not t > 0:
        raise NonPositiveT(t)
    centers = [m for m in (stats.back_mean, stats.rim_mean, stats.cup_mean) if m is not None]
    if strategy == "band":
        raw = [c + s * t for c in centers for s in (-1, 1)]
    elif strategy == "means":
        raw = centers
    else:
        raise InvalidConfig(f"unknown milestone strategy {strategy!r}")
    return np.unique(np.clip(np.asarray(raw, dtype=np.float64), 0.0, 255.0))


class ReducedChannel(NamedTuple):
    values: np.ndarray
    palette: Tuple[int, ...]


def palette_for(k: int) -> Tuple[int, ...]:
    # round half up: 255 * 1/6 = 42.5 -> 43
    return tuple(int(np.floor(255 * i / k + 0.5)) for i in range(k + 1))


def reduce_complexity(green, mask: TriMask, ms) -> ReducedChannel:
    """Quantize the green plane into ``len(ms) + 1`` evenly spread levels.

    Bin ``i`` covers ``[ms[i-1], ms[i])`` with open ends at both extremes and
    maps to ``round(255 * i / K)``. Background pixels are set to 0 afterward.
    """
    ms = np.asarray(ms, dtype=np.float64)
    if ms.ndim != 1 or ms.size == 0:
        raise UnsortedMilestones("milestone list must be a nonempty 1-D sequence")
    if np.any(np.diff(ms) < 0):
        raise UnsortedMilestones(f"milestones not ascending: {ms.tolist()}")
    green = np.asarray(green)
    if green.shape != mask.shape:
        raise DimensionMismatch(f"green {green.shape} vs mask {mask.shape}")
    palette = palette_for(ms.size)
    bins = np.searchsorted(ms, green, side="right")
    values = np.asarray(palette, dtype=np.uint8)[bins]
    values[~mask.disc] = 0
    return ReducedChannel(values, palette)


@dataclass(frozen=True)
class Normalization:
    mean: Tuple[float, ...] = IMAGENET_MEAN + (0.5, 0.5)
    std: Tuple[float, ...] = IMAGENET_STD + (0.5, 0.5)

    def __post_init__(self):
        if len(self.mean) != len(self.std):
            raise InvalidConfig("normalization mean and std lengths differ")
        if any(s <= 0 for s in self.std):
            raise InvalidConfig("normalization std must be positive")

    def apply(self, planes) -> np.ndarray:
        """Scale ``(..., C, H, W)`` 8-bit-range planes to standardized float64."""
        planes = np.asarray(planes, dtype=np.float64)
        c = planes.shape[-3]
        if c != len(self.mean):
            raise DimensionMismatch(f"{c} planes but {len(self.mean)} normalization entries")
        mean = np.asarray(self.mean).reshape(c, 1, 1)
        std = np.asarray(self.std).reshape(c, 1, 1)
        return (planes / 255.0 - mean) / std


@dataclass
class FiveChannelInput:
    """Standardized R, G, B, vessel and reduced planes plus the sample's VCDR."""

    channels: np.ndarray
    vcdr: float


def stack_planes(image, vessel, reduced) -> np.ndarray:
    """R, G, B, vessel, reduced as a ``(5, H, W)`` uint8 stack."""
    image = np.asarray(image)
    vessel = np.asarray(vessel)
    reduced_values = reduced.values if isinstance(reduced, ReducedChannel) else np.asarray(reduced)
    shape = image.shape[:2]
    if image.ndim != 3 or image.shape[2] != 3:
        raise DimensionMismatch(f"image must be (H, W, 3), got {image.shape}")
    if vessel.shape != shape or reduced_values.shape != shape:
        raise DimensionMismatch(
            f"plane shapes differ: image {shape}, vessel {vessel.shape}, reduced {reduced_values.shape}")
    return np.concatenate(
        [np.moveaxis(image, 2, 0), vessel[None], reduced_values[None]]).astype(np.uint8)


def assemble(image, vessel, reduced, vcdr: float, normalization: Normalization = None,
             size: int = 256) -> FiveChannelInput:
    planes = stack_planes(image, vessel, reduced)
    if size is not None and planes.shape[1:] != (size, size):
        raise DimensionMismatch(f"planes are {planes.shape[1:]}, expected {size}x{size}")
    norm = normalization or Normalization()
    return FiveChannelInput(norm.apply(planes), vcdr)


@dataclass(frozen=True)
class AugmentConfig:
    p_flip: float = 0.5
    p_blur: float = 0.5
    sigma_range: Tuple[float, float] = (0.1, 2.0)
    blur_channels: Tuple[int, ...] = (0, 1, 2)

    def __post_init__(self):
        for name in ("p_flip", "p_blur"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {p}")
        lo, hi = self.sigma_range
        if not 0 < lo <= hi:
            raise InvalidConfig(f"bad blur sigma range {self.sigma_range}")


def draw_augmentation(rng: np.random.Generator, config: AugmentConfig):
    """Sample ``(flip, sigma)`` for one sample; ``sigma`` is None when not blurring.

    Three variates are drawn whatever the outcome, so the random stream
    advances identically for every sample.
    """
    u_flip, u_blur = rng.random(2)
    sigma = rng.uniform(*config.sigma_range)
    blur = u_blur < config.p_blur and bool(config.blur_channels)
    return bool(u_flip < config.p_flip), (float(sigma) if blur else None)


def apply_augmentation(planes: np.ndarray, flip: bool, sigma, blur_channels) -> np.ndarray:
    out = planes
    if flip:
        out = out[..., ::-1]
    if sigma is not None:
        out = np.array(out, dtype=np.float64)
        for c in blur_channels:
            out[c] = gaussian_filter(out[c], sigma, mode="reflect")
    return np.ascontiguousarray(out)


def augment_planes(planes: np.ndarray, rng: np.random.Generator, config: AugmentConfig) -> np.ndarray:
    """Random horizontal flip of all planes and Gaussian blur of ``blur_channels``."""
    flip, sigma = draw_augmentation(rng, config)
    return apply_augmentation(planes, flip, sigma, config.blur_channels)


def augment(inp: FiveChannelInput, rng: np.random.Generator,
            config: AugmentConfig = AugmentConfig()) -> FiveChannelInput:
    return FiveChannelInput(augment_planes(inp.channels, rng, config), inp.vcdr)


@dataclass
class SynthesizedSample:
    planes: np.ndarray  # (5, H, W) uint8
    mask_gray: np.ndarray
    vcdr: float
    stats: RegionStats
    warnings: list = field(default_factory=list)


def synthesize(image, mask: TriMask, t: float = 20.0, strategy: str = "band",
               polarity: str = "dark") -> SynthesizedSample:
    """Run the full per-ROI channel pipeline on an un-augmented ROI.

    A sample without a cup gets VCDR 0 and milestones built from background
    and rim only; a warning is recorded rather than raising.
    """
    warnings = []
    vcdr = compute_vcdr(mask)
    stats = compute_stats(image, mask, require_cup=False)
    if stats.cup_mean is None:
        warnings.append("empty cup: VCDR set to 0, cup milestones omitted")
    green = green_channel(image)
    vessel = vessel_map(green, mask, stats.t_v, polarity)
    reduced = reduce_complexity(green, mask, milestones(stats, t, strategy))
    return SynthesizedSample(stack_planes(image, vessel, reduced), render_mask(mask),
                             vcdr, stats, warnings)


class ChannelSynthesizer(BaseEstimator, TransformerMixin):
    """Stateless transformer from ``(image, TriMask)`` pairs to 5-plane stacks.

    ``transform`` returns a ``(n, 5, H, W)`` uint8 array; the per-sample VCDR
    values and region statistics of the last call are kept in ``vcdr_`` and
    ``stats_``.
    """

    def __init__(self, t=20.0, milestone_strategy="band", polarity="dark"):
        self.t = t
        self.milestone_strategy = milestone_strategy
        self.polarity = polarity

    def fit(self, X=None, y=None):
        if not self.t > 0:
            raise NonPositiveT(self.t)
        if self.milestone_strategy not in MILESTONE_STRATEGIES:
            raise InvalidConfig(f"unknown milestone strategy {self.milestone_strategy!r}")
        if self.polarity not in POLARITIES:
            raise InvalidConfig(f"unknown vessel polarity {self.polarity!r}")
        return self

    def transform(self, X: Sequence):
        self.fit()
        samples = [synthesize(img, mask, self.t, self.milestone_strategy, self.polarity)
                   for img, mask in X]
        if not samples:
            raise ValueError("no samples to transform")
        self.vcdr_ = np.array([s.vcdr for s in samples])
        self.stats_ = [s.stats for s in samples]
        return np.stack([s.planes for s in samples])

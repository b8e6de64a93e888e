"""Green-channel region statistics and the adaptive vessel threshold."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ChannelCountMismatch, CoordOutOfBounds, DimensionMismatch, EmptyRegion
from .masks import Region, TriMask, region_coords


@dataclass(frozen=True)
class RegionStats:
    back_mean: float
    rim_mean: float
    cup_mean: Optional[float]
    t_v: float


def green_channel(image) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ChannelCountMismatch(f"expected an (H, W, 3) image, got shape {img.shape}")
    return img[:, :, 1].astype(np.float64)


def region_mean(green, coords) -> float:
    """Mean of ``green`` over ``(row, col)`` coordinates, accumulated in float64."""
    green = np.asarray(green)
    coords = np.asarray(coords, dtype=np.intp).reshape(-1, 2)
    if coords.shape[0] == 0:
        raise EmptyRegion("coordinate set")
    rows, cols = coords[:, 0], coords[:, 1]
    if (rows.min() < 0 or cols.min() < 0
            or rows.max() >= green.shape[0] or cols.max() >= green.shape[1]):
        raise CoordOutOfBounds(f"coordinates fall outside a {green.shape} image")
    return float(np.sum(green[rows, cols], dtype=np.float64) / coords.shape[0])


def vessel_threshold(back_mean: float, rim_mean: float) -> float:
    return back_mean + (rim_mean - back_mean) / 2


def compute_stats(image, mask: TriMask, require_cup: bool = True) -> RegionStats:
    """Background, rim and cup green means plus the vessel threshold.

    With ``require_cup=False`` an empty cup yields ``cup_mean=None`` instead
    of raising; background and rim are always required.
    """
    green = green_channel(image)
    if green.shape != mask.shape:
        raise DimensionMismatch(f"image {green.shape} vs mask {mask.shape}")
    means = {}
    for region in Region:
        coords = region_coords(mask, region)
        if coords.shape[0] == 0:
            if region is Region.CUP and not require_cup:
                means[region] = None
                continue
            raise EmptyRegion(region.name.title())
        means[region] = region_mean(green, coords)
    back, rim = means[Region.BACKGROUND], means[Region.RIM]
    return RegionStats(back, rim, means[Region.CUP], vessel_threshold(back, rim))

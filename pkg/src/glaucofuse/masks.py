"""Trimap segmentation masks and vertical cup-to-disc ratio."""
from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, EmptyDisc, EmptyImage, UnknownLabelValue


class Region(IntEnum):
    BACKGROUND = 0
    RIM = 1
    CUP = 2


# REFUGE convention: black cup, gray rim, white background
DEFAULT_ENCODING = {255: Region.BACKGROUND, 128: Region.RIM, 0: Region.CUP}


@dataclass(frozen=True)
class TriMask:
    """Per-pixel region codes (``Region`` values) on a ``(height, width)`` grid.

    The disc is never stored; it is ``RIM | CUP``.
    """

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2 or labels.size == 0:
            raise EmptyImage(f"mask must be a nonempty 2-D array, got shape {labels.shape}")
        if labels.min() < 0 or labels.max() > Region.CUP:
            raise ValueError("mask labels must be Region codes")
        labels = labels.astype(np.uint8, copy=True)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self):
        return self.labels.shape

    def region(self, code) -> np.ndarray:
        return self.labels == code

    @property
    def disc(self) -> np.ndarray:
        return self.labels != Region.BACKGROUND

    def flip_lr(self) -> "TriMask":
        return TriMask(self.labels[:, ::-1])


def parse_mask(image, encoding: Mapping[int, Region] = None) -> TriMask:
    """Map an 8-bit grayscale mask image to region codes.

    Every gray level present must appear in ``encoding``; the first unmapped
    level (in ascending order) is reported with its pixel count.
    """
    enc = DEFAULT_ENCODING if encoding is None else encoding
    img = np.asarray(image)
    if img.size == 0:
        raise EmptyImage("mask image is empty")
    if img.ndim != 2:
        raise DimensionMismatch(f"mask image must be single-channel, got shape {img.shape}")
    lut = np.full(256, 255, dtype=np.uint8)
    for gray, code in enc.items():
        lut[int(gray)] = Region(code)
    levels, counts = np.unique(img, return_counts=True)
    for level, count in zip(levels, counts):
        if lut[level] == 255:
            raise UnknownLabelValue(int(level), int(count))
    return TriMask(lut[img.astype(np.uint8)])


def render_mask(mask: TriMask, encoding: Mapping[int, Region] = None) -> np.ndarray:
    """Inverse of :func:`parse_mask`: region codes back to gray levels."""
    enc = DEFAULT_ENCODING if encoding is None else encoding
    lut = np.zeros(3, dtype=np.uint8)
    for gray, code in enc.items():
        lut[int(code)] = gray
    return lut[mask.labels]


def region_coords(mask: TriMask, region) -> np.ndarray:
    """Return the ``(row, col)`` coordinates of every pixel labelled ``region``
    as an ``(n, 2)`` integer array in row-major order."""
    return np.argwhere(mask.labels == region)


def vertical_extent(region: np.ndarray) -> int:
    """Inclusive row span of the True pixels, 0 if there are none."""
    rows = np.flatnonzero(region.any(axis=1))
    if rows.size == 0:
        return 0
    return int(rows[-1] - rows[0] + 1)


def compute_vcdr(mask: TriMask) -> float:
    """Vertical cup diameter over vertical disc diameter.

    Diameters are bounding extents along the row axis, so multi-component
    cups count from their topmost to their bottommost pixel.
    """
    vdd = vertical_extent(mask.disc)
    if vdd == 0:
        raise EmptyDisc("mask has neither rim nor cup pixels")
    vcd = vertical_extent(mask.region(Region.CUP))
    return vcd / vdd

"""Dataset manifests, image I/O and disc-centred ROI cropping."""
import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, EmptyDisc, MalformedRow, MissingFile, UnknownLabel, UnknownSplit
from .masks import TriMask

log = logging.getLogger(__name__)

HEADER = ("image", "mask", "label", "split")
LABELS = {"glaucoma": 1, "normal": 0}
SPLITS = ("train", "val", "test")
ROI_SIZE = 256
MARGIN = 2.0


@dataclass(frozen=True)
class ManifestRow:
    image: str
    mask: str
    label: str
    split: str

    @property
    def target(self) -> int:
        return LABELS[self.label]

    @property
    def sample_id(self) -> str:
        return Path(self.image).stem


@dataclass
class Manifest:
    rows: List[ManifestRow]
    root: Path = Path(".")

    def __len__(self):
        return len(self.rows)

    def split(self, name: str) -> List[ManifestRow]:
        return [r for r in self.rows if r.split == name]

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.root / p

    def counts(self):
        return Counter((r.split, r.label) for r in self.rows)


def load_manifest(path, check_paths: bool = True) -> Manifest:
    """Read and validate a ``image,mask,label,split`` CSV.

    Relative paths are resolved against the manifest's directory. Line
    numbers in errors are 1-based and count the header.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    manifest = Manifest([], path.parent)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise MalformedRow(1, f"expected header {','.join(HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(HEADER):
                raise MalformedRow(line, f"expected {len(HEADER)} fields, got {len(row)}")
            image, mask, label, split = (c.strip() for c in row)
            if not image or not mask:
                raise MalformedRow(line, "empty path")
            if label not in LABELS:
                raise UnknownLabel(label, line)
            if split not in SPLITS:
                raise UnknownSplit(split, line)
            item = ManifestRow(image, mask, label, split)
            if check_paths:
                for p in (item.image, item.mask):
                    if not manifest.resolve(p).is_file():
                        raise MissingFile(f"line {line}: {p} does not exist")
            manifest.rows.append(item)
    for (split, label), n in sorted(manifest.counts().items()):
        log.info("manifest %s: %s/%s = %d", path.name, split, label, n)
    return manifest


def write_manifest(manifest: Manifest, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for r in manifest.rows:
            w.writerow([r.image, r.mask, r.label, r.split])


def read_image(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"image not found: {path}")
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def read_mask_gray(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"mask not found: {path}")
    with Image.open(path) as im:
        return np.asarray(im.convert("L"))


def write_png(path, array):
    # fixed PNG options keep the bytes reproducible
    Image.fromarray(np.asarray(array, dtype=np.uint8)).save(path, format="PNG", optimize=False, compress_level=6)


def disc_window(mask: TriMask, size: int = ROI_SIZE, margin: float = MARGIN):
    """Square crop window ``(top, left, side)`` around the disc bounding box."""
    rows = np.flatnonzero(mask.disc.any(axis=1))
    cols = np.flatnonzero(mask.disc.any(axis=0))
    if rows.size == 0:
        raise EmptyDisc("cannot centre a crop on an empty disc")
    r0, r1, c0, c1 = rows[0], rows[-1], cols[0], cols[-1]
    box = max(r1 - r0 + 1, c1 - c0 + 1)
    side = max(int(math.ceil(box * margin)), size)
    side = min(side, mask.height, mask.width)
    cr, cc = (r0 + r1 + 1) / 2, (c0 + c1 + 1) / 2
    top = int(np.clip(round(cr - side / 2), 0, mask.height - side))
    left = int(np.clip(round(cc - side / 2), 0, mask.width - side))
    return top, left, side


def crop_roi(image, mask: TriMask, size: int = ROI_SIZE, margin: float = MARGIN):
    """Disc-centred square crop resampled to ``size`` x ``size``.

    The window side is ``max(margin * disc box side, size)`` clipped to the
    image, centred on the disc box and shifted to stay in bounds. Images are
    resampled bilinearly, masks with nearest neighbour.
    """
    image = np.asarray(image)
    if image.shape[:2] != mask.shape:
        raise DimensionMismatch(f"image {image.shape[:2]} vs mask {mask.shape}")
    top, left, side = disc_window(mask, size, margin)
    img = image[top:top + side, left:left + side]
    lab = mask.labels[top:top + side, left:left + side]
    if side != size:
        img = np.asarray(Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8))
                         .resize((size, size), Image.BILINEAR))
        lab = np.asarray(Image.fromarray(np.ascontiguousarray(lab)).resize((size, size), Image.NEAREST))
    return np.ascontiguousarray(img), TriMask(lab)

"""Synthetic disc-centred ROIs with exact trimaps and VCDR-driven labels."""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Tuple

import numpy as np
from PIL import Image, ImageDraw
from scipy.ndimage import gaussian_filter

from .data import Manifest, ManifestRow, write_manifest, write_png
from .errors import InvalidConfig
from .masks import Region, TriMask, render_mask

MODES = ("separated", "overlap")


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 400
    seed: int = 0
    size: int = 256
    mode: str = "separated"
    glaucoma_fraction: float = 0.5
    vcdr_glaucoma: Tuple[float, float] = (0.6, 0.9)
    vcdr_normal: Tuple[float, float] = (0.2, 0.5)
    disc_radius: Tuple[float, float] = (45.0, 70.0)
    disc_aspect: Tuple[float, float] = (0.88, 1.05)
    center_jitter: float = 8.0
    back_level: float = 90.0
    rim_level: float = 150.0
    cup_level: float = 200.0
    level_jitter: float = 10.0
    # extra cup brightening for glaucoma samples (cup pallor)
    pallor: float = 0.0
    # rim brightening for glaucoma samples, a label cue unrelated to cup geometry
    rim_pallor: float = 0.0
    # softens the cup's brightness edge in the image; the trimap stays sharp
    cup_edge_sigma: float = 0.0
    vessel_count: Tuple[int, int] = (3, 6)
    vessel_width: Tuple[int, int] = (2, 5)
    vessel_depth: Tuple[float, float] = (30.0, 50.0)
    noise_sigma: float = 4.0
    split_fractions: Tuple[float, float, float] = (0.70, 0.15, 0.15)

    def __post_init__(self):
        if self.n_samples <= 0:
            raise InvalidConfig("n_samples must be positive")
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}")
        for name in ("vcdr_glaucoma", "vcdr_normal"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi <= 1:
                raise InvalidConfig(f"{name} must lie within (0, 1], got {(lo, hi)}")
        if not 0 <= self.glaucoma_fraction <= 1:
            raise InvalidConfig("glaucoma_fraction must lie in [0, 1]")
        if self.noise_sigma < 0 or self.level_jitter < 0 or self.cup_edge_sigma < 0:
            raise InvalidConfig("noise and jitter must be non-negative")
        lo, hi = self.disc_radius
        if not 2 <= lo <= hi or hi * max(self.disc_aspect) + self.center_jitter >= self.size / 2 - 2:
            raise InvalidConfig("disc must fit inside the ROI with a background margin")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9 or min(self.split_fractions) < 0:
            raise InvalidConfig("split fractions must be non-negative and sum to 1")

    @classmethod
    def overlap(cls, **kwargs) -> "SynthConfig":
        """Preset with overlapping class VCDR ranges and a rim-pallor cue.

        VCDR alone no longer separates the classes, so a model must also use
        image content to beat a VCDR-only baseline. The cup is drawn with low,
        blurred contrast, which makes its extent hard to read from RGB alone.
        """
        preset = dict(mode="overlap", vcdr_glaucoma=(0.45, 0.8), vcdr_normal=(0.3, 0.65),
                      cup_level=160.0, cup_edge_sigma=4.0, rim_pallor=12.0)
        preset.update(kwargs)
        return cls(**preset)

    def to_dict(self):
        return asdict(self)


@dataclass
class SynthSample:
    index: int
    image: np.ndarray
    mask: TriMask
    label: int
    split: str
    ratio: float
    cup_axis: float
    disc_axis: float
    levels: Dict[str, float] = field(default_factory=dict)

    @property
    def sample_id(self) -> str:
        return f"s{self.index:05d}"


def assign(config: SynthConfig):
    """Per-index labels and splits, stratified by class so every split has both."""
    n = config.n_samples
    rng = np.random.default_rng([config.seed, 0xA55])
    n_g = int(round(n * config.glaucoma_fraction))
    labels = np.zeros(n, dtype=int)
    labels[rng.permutation(n)[:n_g]] = 1
    splits = np.empty(n, dtype=object)
    f_train, f_val, _ = config.split_fractions
    for cls_ in (0, 1):
        idx = rng.permutation(np.flatnonzero(labels == cls_))
        a = int(round(idx.size * f_train))
        b = a + int(round(idx.size * f_val))
        splits[idx[:a]] = "train"
        splits[idx[a:b]] = "val"
        splits[idx[b:]] = "test"
    return labels, splits


def _ellipse(shape, center, axis_rows, axis_cols):
    rr, cc = np.ogrid[:shape[0], :shape[1]]
    return ((rr - center[0]) / axis_rows) ** 2 + ((cc - center[1]) / axis_cols) ** 2 <= 1.0


def _vessel_layer(rng, config: SynthConfig, center, disc_axis):
    s = config.size
    layer = Image.new("L", (s, s), 0)
    draw = ImageDraw.Draw(layer)
    t = np.linspace(0.0, 1.0, 64)[:, None]
    for _ in range(rng.integers(config.vessel_count[0], config.vessel_count[1] + 1)):
        start = np.array([0.0, rng.uniform(0.15, 0.85) * s])
        end = np.array([s - 1.0, rng.uniform(0.15, 0.85) * s])
        # control point near the disc so the stroke crosses the rim
        ctrl = np.array(center) + rng.uniform(-0.9, 0.9, 2) * disc_axis
        pts = (1 - t) ** 2 * start + 2 * (1 - t) * t * ctrl + t ** 2 * end
        width = int(rng.integers(config.vessel_width[0], config.vessel_width[1] + 1))
        draw.line([(float(c), float(r)) for r, c in pts], fill=255, width=width)
    return np.asarray(layer) > 0


def render(config: SynthConfig, index: int, label: int, split: str) -> SynthSample:
    """Draw one sample from its own random stream ``(seed, index)``."""
    rng = np.random.default_rng([config.seed, index])
    s = config.size
    lo, hi = config.vcdr_glaucoma if label else config.vcdr_normal
    ratio = float(rng.uniform(lo, hi))
    b_disc = float(rng.uniform(*config.disc_radius))
    a_disc = b_disc * float(rng.uniform(*config.disc_aspect))
    center = s / 2 + rng.uniform(-config.center_jitter, config.center_jitter, 2)
    b_cup = ratio * b_disc
    a_cup = a_disc * float(np.clip(ratio * rng.uniform(0.85, 1.1), 0.05, 0.95))

    disc = _ellipse((s, s), center, b_disc, a_disc)
    cup = _ellipse((s, s), center, b_cup, a_cup) & disc
    labels = np.full((s, s), Region.BACKGROUND, dtype=np.uint8)
    labels[disc] = Region.RIM
    labels[cup] = Region.CUP

    j = config.level_jitter
    levels = {
        "back": config.back_level + rng.uniform(-j, j),
        "rim": config.rim_level + rng.uniform(-j, j) + (config.rim_pallor if label else 0.0),
        "cup": config.cup_level + rng.uniform(-j, j) + (config.pallor if label else 0.0),
    }
    if config.cup_edge_sigma > 0:
        base = np.where(disc, levels["rim"], levels["back"])
        spread = gaussian_filter(cup.astype(np.float64), config.cup_edge_sigma)
        base = base + (levels["cup"] - levels["rim"]) * spread * disc
    else:
        base = np.choose(labels, [levels["back"], levels["rim"], levels["cup"]]).astype(np.float64)

    green = base.copy()
    if config.vessel_count[1] > 0:
        vessels = _vessel_layer(rng, config, center, b_disc)
        green[vessels] -= rng.uniform(*config.vessel_depth)
    sigma = config.noise_sigma
    noise = rng.normal(0.0, sigma, size=(3, s, s)) if sigma > 0 else np.zeros((3, s, s))
    red = 0.55 * base + 95.0 + noise[0]
    green = green + noise[1]
    blue = 0.35 * base + 10.0 + noise[2]
    image = np.clip(np.rint(np.stack([red, green, blue], axis=-1)), 0, 255).astype(np.uint8)
    return SynthSample(index, image, TriMask(labels), int(label), str(split), ratio,
                       b_cup, b_disc, levels)


def iter_samples(config: SynthConfig) -> Iterator[SynthSample]:
    labels, splits = assign(config)
    for i in range(config.n_samples):
        yield render(config, i, labels[i], splits[i])


def generate(config: SynthConfig):
    """All samples in memory: ``(images, masks, manifest)``.

    Manifest paths follow the on-disk layout used by :func:`write_dataset`.
    """
    images, masks, rows = [], [], []
    for smp in iter_samples(config):
        images.append(smp.image)
        masks.append(smp.mask)
        rows.append(_row(smp))
    return images, masks, Manifest(rows)


def _row(smp: SynthSample) -> ManifestRow:
    return ManifestRow(f"images/{smp.sample_id}.png", f"masks/{smp.sample_id}.png",
                       "glaucoma" if smp.label else "normal", smp.split)


def write_dataset(config: SynthConfig, out_dir) -> Manifest:
    """Write ``images/``, ``masks/``, ``manifest.csv`` and ``truth.csv``."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rows, truth = [], ["id,ratio,cup_axis,disc_axis,back,rim,cup"]
    for smp in iter_samples(config):
        write_png(out / "images" / f"{smp.sample_id}.png", smp.image)
        write_png(out / "masks" / f"{smp.sample_id}.png", render_mask(smp.mask))
        rows.append(_row(smp))
        lv = smp.levels
        truth.append(f"{smp.sample_id},{smp.ratio!r},{smp.cup_axis!r},{smp.disc_axis!r},"
                     f"{lv['back']!r},{lv['rim']!r},{lv['cup']!r}")
    manifest = Manifest(rows, out)
    write_manifest(manifest, out / "manifest.csv")
    (out / "truth.csv").write_text("\n".join(truth) + "\n")
    return manifest


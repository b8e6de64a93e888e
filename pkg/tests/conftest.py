import numpy as np
import pytest

from glaucofuse.masks import Region, TriMask
from glaucofuse.synth import SynthConfig, render


def small_config(**kw):
    """64x64 synthetic ROIs: fast enough for property tests."""
    base = dict(size=64, disc_radius=(12.0, 20.0), center_jitter=3.0,
                vessel_width=(1, 2), n_samples=50)
    base.update(kw)
    return SynthConfig(**base)


def random_roi(seed, **kw):
    cfg = small_config(seed=seed, **kw)
    smp = render(cfg, 0, seed % 2, "train")
    return smp.image, smp.mask


def band_mask(shape, disc_rows, cup_rows, cols=None):
    """Trimap with the disc and cup spanning the given inclusive row ranges."""
    labels = np.full(shape, Region.BACKGROUND, dtype=np.uint8)
    c = slice(None) if cols is None else slice(*cols)
    if disc_rows is not None:
        labels[disc_rows[0]:disc_rows[1] + 1, c] = Region.RIM
    if cup_rows is not None:
        labels[cup_rows[0]:cup_rows[1] + 1, c] = Region.CUP
    return TriMask(labels)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

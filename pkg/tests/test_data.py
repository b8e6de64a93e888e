import numpy as np
import pytest

from glaucofuse.data import (Manifest, ManifestRow, crop_roi, disc_window, load_manifest,
                             read_image, write_manifest, write_png)
from glaucofuse.errors import (DimensionMismatch, EmptyDisc, MalformedRow, MissingFile,
                               UnknownLabel, UnknownSplit)
from glaucofuse.masks import Region, TriMask, parse_mask, render_mask

ROWS = ["a.png,a_m.png,glaucoma,train", "b.png,b_m.png,normal,train",
        "c.png,c_m.png,glaucoma,val", "d.png,d_m.png,normal,test"]


def write(tmp_path, lines, name="m.csv"):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n")
    return p


def test_four_row_manifest(tmp_path):
    m = load_manifest(write(tmp_path, ["image,mask,label,split", *ROWS]), check_paths=False)
    assert len(m) == 4
    assert [r.target for r in m.rows] == [1, 0, 1, 0]
    assert [r.sample_id for r in m.split("train")] == ["a", "b"]
    assert m.resolve("a.png") == tmp_path / "a.png"


@pytest.mark.parametrize("lines, error, line", [
    (["image,mask,label,split", ROWS[0], "x.png,y.png,maybe,train"], UnknownLabel, 3),
    (["image,mask,label,split", "x.png,y.png,normal,holdout"], UnknownSplit, 2),
    (["image,mask,label,split", "x.png,y.png,normal"], MalformedRow, 2),
])
def test_row_errors_carry_line_numbers(tmp_path, lines, error, line):
    with pytest.raises(error) as exc:
        load_manifest(write(tmp_path, lines), check_paths=False)
    assert exc.value.line == line


def test_empty_file_is_missing_header(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(MalformedRow) as exc:
        load_manifest(p)
    assert exc.value.line == 1


def test_missing_manifest_and_paths(tmp_path):
    with pytest.raises(MissingFile):
        load_manifest(tmp_path / "nope.csv")
    with pytest.raises(MissingFile):
        load_manifest(write(tmp_path, ["image,mask,label,split", ROWS[0]]))


def test_manifest_round_trip(tmp_path):
    first = load_manifest(write(tmp_path, ["image,mask,label,split", *ROWS]), check_paths=False)
    write_manifest(first, tmp_path / "again.csv")
    second = load_manifest(tmp_path / "again.csv", check_paths=False)
    assert second.rows == first.rows
    assert (tmp_path / "again.csv").read_text() == (tmp_path / "m.csv").read_text()


def test_png_round_trip(tmp_path):
    img = np.arange(48, dtype=np.uint8).reshape(4, 4, 3)
    write_png(tmp_path / "x.png", img)
    assert np.array_equal(read_image(tmp_path / "x.png"), img)


def disc_mask(shape, center, radius):
    rr, cc = np.ogrid[:shape[0], :shape[1]]
    d2 = (rr - center[0]) ** 2 + (cc - center[1]) ** 2
    labels = np.zeros(shape, np.uint8)
    labels[d2 <= radius ** 2] = Region.RIM
    labels[d2 <= (radius / 2) ** 2] = Region.CUP
    return TriMask(labels)


def test_crop_centred_on_small_disc():
    mask = disc_mask((600, 600), (300, 300), 40)
    image = np.zeros((600, 600, 3), np.uint8)
    top, left, side = disc_window(mask, 256)
    assert side == 256 and (top, left) == (172, 172)
    roi, roi_mask = crop_roi(image, mask, 256)
    assert roi.shape == (256, 256, 3)
    assert set(np.unique(roi_mask.labels)) == {0, 1, 2}


def test_crop_clamped_at_corner():
    mask = disc_mask((500, 500), (30, 470), 25)
    roi, roi_mask = crop_roi(np.zeros((500, 500, 3), np.uint8), mask, 256)
    top, left, side = disc_window(mask, 256)
    assert top == 0 and left + side == 500
    assert roi.shape == (256, 256, 3) and roi_mask.shape == (256, 256)


def test_crop_resamples_large_disc():
    mask = disc_mask((800, 800), (400, 400), 150)
    roi, roi_mask = crop_roi(np.zeros((800, 800, 3), np.uint8), mask, 256)
    assert disc_window(mask, 256)[2] == 602
    assert roi_mask.shape == (256, 256)


def test_nearest_resampling_keeps_label_set():
    gray = render_mask(disc_mask((8, 8), (4, 4), 3))
    from PIL import Image
    up = np.asarray(Image.fromarray(gray).resize((13, 13), Image.NEAREST))
    assert set(np.unique(up)) == {0, 128, 255}
    assert set(np.unique(parse_mask(up).labels)) == {0, 1, 2}


def test_crop_errors():
    with pytest.raises(EmptyDisc):
        crop_roi(np.zeros((10, 10, 3)), TriMask(np.zeros((10, 10))), 4)
    with pytest.raises(DimensionMismatch):
        crop_roi(np.zeros((9, 10, 3)), TriMask(np.ones((10, 10))), 4)


def test_manifest_row_properties():
    row = ManifestRow("dir/x1.jpg", "m.png", "normal", "val")
    assert row.sample_id == "x1" and row.target == 0
    assert Manifest([row]).counts()[("val", "normal")] == 1

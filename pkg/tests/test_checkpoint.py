import numpy as np
import pytest

from glaucofuse import checkpoint
from glaucofuse.errors import CheckpointMismatch, MissingFile
from glaucofuse.model import FusionNetClassifier, VcdrLogisticRegression


def test_network_round_trip(tmp_path, rng):
    X = rng.integers(0, 256, (8, 5, 16, 16)).astype(np.uint8)
    y = np.array([0, 1] * 4)
    v = rng.random(8)
    clf = FusionNetClassifier(block_widths=(2,), feature_dim=3, input_pool=4, epochs=1).fit(X, y, v)
    checkpoint.save_network(tmp_path / "m.ckpt", clf, "proposed", run_config="epochs = 1\n")
    header, loaded = checkpoint.load(tmp_path / "m.ckpt")
    assert header["variant"] == "proposed" and header["run_config"] == "epochs = 1\n"
    assert loaded.get_params() == clf.get_params()
    assert np.array_equal(loaded.predict_proba(X, v), clf.predict_proba(X, v))


def test_logistic_round_trip(tmp_path):
    est = VcdrLogisticRegression().fit([0.2, 0.3, 0.7, 0.8], [0, 0, 1, 1])
    checkpoint.save_logistic(tmp_path / "l.ckpt", est.model_)
    header, loaded = checkpoint.load(tmp_path / "l.ckpt")
    assert header["kind"] == "vcdr_logistic"
    assert loaded.model_ == est.model_


def test_bad_files(tmp_path):
    with pytest.raises(MissingFile):
        checkpoint.load(tmp_path / "absent.ckpt")
    (tmp_path / "junk").write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointMismatch):
        checkpoint.load(tmp_path / "junk")
    est = VcdrLogisticRegression().fit([0.2, 0.8], [0, 1])
    checkpoint.save_logistic(tmp_path / "l.ckpt", est.model_)
    raw = (tmp_path / "l.ckpt").read_bytes()
    (tmp_path / "cut.ckpt").write_bytes(raw[:-8])
    with pytest.raises(CheckpointMismatch):
        checkpoint.load(tmp_path / "cut.ckpt")

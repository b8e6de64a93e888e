"""Checkpoint files: versioned JSON header followed by raw float64 parameters.

Layout::

    b"GFCKPT"            6-byte magic
    uint16 LE            format version
    uint32 LE            header length in bytes
    header               UTF-8 JSON (sorted keys)
    payload              little-endian float64 values of every parameter,
                         concatenated in the order listed in the header
"""
import json
import struct
from pathlib import Path

import numpy as np

from .channels import Normalization
from .errors import CheckpointMismatch, MissingFile
from .model import network
from .model.classifier import FusionNetClassifier
from .model.logistic import LogisticVcdrModel, VcdrLogisticRegression
from .model.network import BackboneConfig

MAGIC = b"GFCKPT"
VERSION = 1
_PREFIX = struct.Struct("<6sHI")


def _write(path, header: dict, arrays):
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in arrays)
    Path(path).write_bytes(_PREFIX.pack(MAGIC, VERSION, len(blob)) + blob + payload)


def read_checkpoint(path):
    """Return ``(header, flat float64 payload)``."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _PREFIX.size:
        raise CheckpointMismatch(f"{path} is too short to be a checkpoint")
    magic, version, hlen = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointMismatch(f"{path} is not a checkpoint file")
    if version != VERSION:
        raise CheckpointMismatch(f"unsupported checkpoint version {version}")
    header = json.loads(raw[_PREFIX.size:_PREFIX.size + hlen].decode("utf-8"))
    payload = raw[_PREFIX.size + hlen:]
    if len(payload) % 8:
        raise CheckpointMismatch("payload is not a whole number of float64 values")
    return header, np.frombuffer(payload, dtype="<f8").astype(np.float64)


def save_network(path, clf: FusionNetClassifier, variant: str, run_config: str = ""):
    names = list(clf.params_)
    header = {
        "kind": "fusion_net",
        "variant": variant,
        "run_config": run_config,
        "use_vcdr": bool(clf.use_vcdr),
        "backbone": clf.config_.to_dict(),
        "normalization": {"mean": list(clf.normalization_.mean), "std": list(clf.normalization_.std)},
        "params": [[k, list(clf.params_[k].shape)] for k in names],
        "estimator": {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in clf.get_params().items()},
    }
    _write(path, header, [clf.params_[k] for k in names])


def save_logistic(path, model: LogisticVcdrModel, variant: str = "vcdr_logistic", run_config: str = ""):
    header = {"kind": "vcdr_logistic", "variant": variant, "run_config": run_config,
              "params": [["slope", []], ["intercept", []]]}
    _write(path, header, [np.array([model.slope]), np.array([model.intercept])])


def load(path):
    """Rebuild a fitted estimator from a checkpoint.

    Returns ``(header, estimator)`` where the estimator is a fitted
    :class:`FusionNetClassifier` or :class:`VcdrLogisticRegression`.
    """
    header, flat = read_checkpoint(path)
    kind = header.get("kind")
    if kind == "vcdr_logistic":
        if flat.size != 2:
            raise CheckpointMismatch("logistic checkpoint must hold two values")
        est = VcdrLogisticRegression()
        est.model_ = LogisticVcdrModel(float(flat[0]), float(flat[1]))
        est.classes_ = np.array([0, 1])
        est.n_features_in_ = 1
        return header, est
    if kind != "fusion_net":
        raise CheckpointMismatch(f"unknown checkpoint kind {kind!r}")
    cfg_dict = header["backbone"]
    config = BackboneConfig(cfg_dict["in_channels"], tuple(cfg_dict["block_widths"]),
                            cfg_dict["feature_dim"], cfg_dict["input_pool"])
    use_vcdr = header["use_vcdr"]
    expected = network.param_shapes(config, use_vcdr)
    params, offset = {}, 0
    for name, shape in header["params"]:
        shape = tuple(shape)
        if expected.get(name) != shape:
            raise CheckpointMismatch(f"parameter {name} has shape {shape}, backbone expects {expected.get(name)}")
        size = int(np.prod(shape))
        params[name] = flat[offset:offset + size].reshape(shape).copy()
        offset += size
    if offset != flat.size or set(params) != set(expected):
        raise CheckpointMismatch("payload does not match the parameter list")
    est_params = {k: (tuple(v) if isinstance(v, list) else v) for k, v in header["estimator"].items()}
    est = FusionNetClassifier(**est_params)
    est.config_ = config
    est.normalization_ = Normalization(tuple(header["normalization"]["mean"]),
                                       tuple(header["normalization"]["std"]))
    est.params_ = params
    est.classes_ = np.array([0, 1])
    est.n_features_in_ = config.in_channels
    return header, est

"""Command line front end.

Subcommands: ``synth``, ``prep``, ``train``, ``eval``, ``roc`` and the
``manifest`` helper for folder-per-class datasets. Exit codes: 0 success,
1 usage or configuration error, 2 data error, 3 numeric failure.
"""
import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import checkpoint
from .config import VARIANTS, RunConfig, dump_config, load_config, parse_config
from .data import (SPLITS, Manifest, ManifestRow, load_manifest, write_manifest, write_png)
from .errors import ConfigError, DataError, GlaucoFuseError, NumericError
from .metrics import evaluate, roc_auc, roc_curve, select_threshold
from .pipeline import fit_variant, load_row, predict_scores, prepare_pair, prepare_split
from .synth import MODES, SynthConfig, write_dataset

log = logging.getLogger("glaucofuse")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _run_config(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in ("variant", "seed", "manifest", "out")}
    if getattr(args, "config", None):
        return load_config(args.config, **overrides)
    return parse_config("", **overrides)


def _require(value, flag):
    if not value:
        raise ConfigError(f"{flag} is required (on the command line or in the config file)")
    return value


def cmd_synth(args):
    kwargs = {"n_samples": args.n_samples, "seed": args.seed if args.seed is not None else 0}
    config = SynthConfig.overlap(**kwargs) if args.mode == "overlap" else SynthConfig(**kwargs)
    out = Path(_require(args.out, "--out"))
    manifest = write_dataset(config, out)
    log.info("wrote %d samples to %s", len(manifest), out)


def cmd_prep(args):
    config = _run_config(args)
    manifest = load_manifest(_require(config.manifest, "--manifest"), check_paths=False)
    out = Path(_require(config.out, "--out"))
    out.mkdir(parents=True, exist_ok=True)
    stats_rows, errors = [], []
    for row in manifest.rows:
        sid = row.sample_id
        try:
            image, mask = load_row(manifest, row, config)
            smp = prepare_pair(image, mask, config)
        except (GlaucoFuseError, OSError) as exc:
            log.error("%s: %s", sid, exc)
            errors.append((sid, f"{type(exc).__name__}: {exc}"))
            continue
        for w in smp.warnings:
            log.warning("%s: %s", sid, w)
        d = out / sid
        d.mkdir(exist_ok=True)
        write_png(d / "roi.png", np.moveaxis(smp.planes[:3], 0, 2))
        write_png(d / "mask.png", smp.mask_gray)
        write_png(d / "vessel.png", smp.planes[3])
        write_png(d / "reduced.png", smp.planes[4])
        st = smp.stats
        stats_rows.append((sid, st.back_mean, st.rim_mean, st.cup_mean, st.t_v, smp.vcdr))
    _write_csv(out / "stats.csv", ("id", "back", "rim", "cup", "t_v", "vcdr"), stats_rows)
    _write_csv(out / "errors.csv", ("id", "error"), errors)
    log.info("prepared %d rows, %d errors", len(stats_rows), len(errors))


def cmd_train(args):
    config = _run_config(args)
    manifest = load_manifest(_require(config.manifest, "--manifest"))
    out = Path(_require(config.out, "--out"))
    out.mkdir(parents=True, exist_ok=True)
    train = prepare_split(manifest, "train", config)
    val = prepare_split(manifest, "val", config)
    est, history = fit_variant(config, train, val)
    ckpt = out / "model.ckpt"
    # paths stay out of the outputs so reruns elsewhere are byte-identical
    portable = dump_config(replace(config, manifest=None, out=None))
    if config.variant == "vcdr_logistic":
        checkpoint.save_logistic(ckpt, est.model_, run_config=portable)
    else:
        checkpoint.save_network(ckpt, est, config.variant, run_config=portable)
    _write_csv(out / "epochs.csv", ("epoch", "train_loss", "val_auc"),
               [(h["epoch"], h["train_loss"], h["val_auc"]) for h in history])
    (out / "run.cfg").write_text(portable, encoding="utf-8")
    log.info("saved %s", ckpt)


def cmd_eval(args):
    header, est = checkpoint.load(_require(args.checkpoint, "--checkpoint"))
    config = parse_config(header.get("run_config", ""), variant=header["variant"],
                          manifest=args.manifest)
    manifest = load_manifest(_require(args.manifest or config.manifest, "--manifest"))
    split = args.split or "test"
    out = Path(_require(args.out, "--out"))
    out.mkdir(parents=True, exist_ok=True)
    val = prepare_split(manifest, "val", config)
    threshold = select_threshold(predict_scores(est, config.variant, val), val.labels)
    data = val if split == "val" else prepare_split(manifest, split, config)
    scores = predict_scores(est, config.variant, data)
    report = evaluate(scores, data.labels, threshold)
    row = {"variant": config.variant, "split": split, **report.as_row()}
    _write_csv(out / f"report_{split}.csv", list(row), [list(row.values())])
    _write_csv(out / f"roc_{split}.csv", ("fpr", "tpr"), report.roc_points.tolist())
    _write_csv(out / f"scores_{split}.csv", ("id", "label", "score"),
               zip(data.ids, data.labels.tolist(), scores))
    print(f"{config.variant} {split}: auc={report.auc:.4f} f1={report.f1:.4f} "
          f"sens={report.sensitivity:.4f} spec={report.specificity:.4f} threshold={threshold:.6f}")


def cmd_roc(args):
    path = Path(_require(args.scores, "--scores"))
    if not path.is_file():
        raise DataError(f"scores file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        scores = np.array([float(r["score"]) for r in rows])
        labels = np.array([int(r["label"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: need numeric 'score' and 0/1 'label' columns ({exc})") from None
    fpr, tpr, thr = roc_curve(scores, labels)
    _, auc = roc_auc(scores, labels)
    out = Path(_require(args.out, "--out"))
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "roc.csv", ("fpr", "tpr", "threshold"), zip(fpr, tpr, thr))
    _write_csv(out / "auc.csv", ("auc", "n_pos", "n_neg"),
               [(auc, int(labels.sum()), int((1 - labels).sum()))])
    print(f"auc={auc:.6f}")


def cmd_manifest(args):
    """Index ``<images>/<ClassDir>/*`` with masks matched by file stem."""
    images, masks = Path(args.images), Path(args.masks)
    out = Path(_require(args.out, "--out"))
    split = args.split or "train"
    mask_index = {p.stem: p for p in masks.rglob("*") if p.is_file()}
    rows = []
    for img in sorted(p for p in images.rglob("*") if p.is_file()):
        cls = img.parent.name.lower().replace("_", "-")
        if cls in ("glaucoma", "g"):
            label = "glaucoma"
        elif cls in ("non-glaucoma", "normal", "n"):
            label = "normal"
        else:
            continue
        if img.stem not in mask_index:
            log.warning("no mask for %s", img)
            continue
        rows.append(ManifestRow(str(img.resolve()), str(mask_index[img.stem].resolve()), label, split))
    if not rows:
        raise DataError(f"no labelled images found under {images}")
    write_manifest(Manifest(rows), out)
    log.info("indexed %d images into %s", len(rows), out)


def build_parser():
    parser = _Parser(prog="glaucofuse", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(p, *flags):
        if "config" in flags:
            p.add_argument("--config", help="key = value run configuration file")
        if "manifest" in flags:
            p.add_argument("--manifest", help="image,mask,label,split CSV")
        p.add_argument("--out", help="output path")
        if "variant" in flags:
            p.add_argument("--variant", choices=VARIANTS)
        if "seed" in flags:
            p.add_argument("--seed", type=int)
        if "split" in flags:
            p.add_argument("--split", choices=SPLITS)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    common(p, "seed")
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--mode", choices=MODES, default="separated")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prep", help="dump ROI, vessel and reduced channels plus region stats")
    common(p, "config", "manifest")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="train one model variant")
    common(p, "config", "manifest", "variant", "seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    common(p, "manifest", "split")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roc", help="ROC points and AUC from a score,label CSV")
    common(p)
    p.add_argument("--scores", required=True)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("manifest", help="build a manifest from Glaucoma/Non-Glaucoma folders")
    common(p, "split")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.set_defaults(func=cmd_manifest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

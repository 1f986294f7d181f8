"""Command-line surface: corpus generation, feature extraction, training,
classification, segmentation, evaluation, and the feature-count sweep.

Every artifact written here embeds the feature-catalog hash; commands
refuse to combine artifacts whose hashes disagree. Exit codes: 0 success,
2 validation error, 3 data error (missing or unreadable files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import learn, pipeline, synth
from .imgcore import read_frame, write_png

ABNORMAL_CLASSES = ("tumor", "bleeding", "disease")
OVERLAY_COLORS = {
    "tumor": (255, 215, 0),
    "bleeding": (255, 0, 0),
    "disease": (0, 200, 90),
}
BUNDLE_FORMAT = "endotex-model-v1"


class DataError(Exception):
    """A referenced file is missing or unreadable."""


# ---------------------------------------------------------------------------
# Model bundle persistence
# ---------------------------------------------------------------------------

def save_bundle(path, bundle: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(bundle, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_bundle(path) -> dict:
    if not os.path.exists(path):
        raise DataError(f"model file not found: {path}")
    with open(path, "r", encoding="ascii") as fh:
        bundle = json.load(fh)
    if bundle.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"{path}: unsupported model format {bundle.get('format')!r}")
    return bundle


def bundle_heads(bundle: dict) -> list[pipeline.ClassifierHead]:
    heads = []
    for name in sorted(bundle["heads"]):
        head_dict = bundle["heads"][name]
        heads.append(pipeline.ClassifierHead(
            name=name,
            normalizer=pipeline.Normalizer.from_dict(head_dict["normalizer"]),
            selected=np.asarray(head_dict["selected"], dtype=np.intp),
            model=learn.mlp_from_dict(head_dict["network"]),
            catalog_hash=bundle["catalog_hash"],
        ))
    return heads


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _load_manifest(path):
    if not os.path.exists(path):
        raise DataError(f"manifest not found: {path}")
    try:
        return synth.load_manifest(path), synth.manifest_base(path)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from exc


def _load_features(path) -> pipeline.FeatureTable:
    if not os.path.exists(path):
        raise DataError(f"feature file not found: {path}")
    return pipeline.load_feature_table(path)


def _check_hash(artifact: str, got: str, expected: str) -> None:
    if got != expected:
        raise ValueError(f"catalog hash mismatch: {artifact} has {got}, expected {expected}")


def _frame_stems(ids) -> list[str]:
    return [sid.split(":")[0] for sid in ids]


def _subset_rows(table: pipeline.FeatureTable, bundle: dict, subset: str) -> np.ndarray:
    stems = np.asarray(_frame_stems(table.ids))
    if subset == "all":
        return np.ones(len(table.ids), dtype=bool)
    test_frames = bundle.get("test_frames", [])
    if not test_frames:
        raise ValueError("model records no held-out frames; use --subset all")
    return np.isin(stems, test_frames)


def _pipeline_config(args) -> pipeline.PipelineConfig:
    return pipeline.PipelineConfig(
        levels=args.levels,
        gabor_coords=args.gabor_coords,
        hu_variant=args.hu_variant,
    )


def _parse_hidden(text: str) -> tuple:
    return tuple(int(part) for part in text.split(",") if part.strip())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    config = synth.SynthConfig(seed=args.seed, frames_per_class=args.frames_per_class,
                               frames_per_patient=args.frames_per_patient)
    try:
        entries = synth.generate_corpus(args.out, config)
    except OSError as exc:
        raise DataError(f"cannot write corpus: {exc}") from exc
    print(f"wrote {len(entries)} frames to {args.out} "
          f"({config.frames_per_class} per class, seed {args.seed})")
    print(f"manifest: {os.path.join(args.out, 'manifest.tsv')}")
    return 0


def cmd_extract(args) -> int:
    entries, base = _load_manifest(args.manifest)
    config = _pipeline_config(args)
    catalog = pipeline.catalog_for(args.mode)

    ids: list[str] = []
    labels: list[str] = []
    rows: list[np.ndarray] = []
    if args.mode == "frame":
        # Bleeding frames are left out of the frame-level corpus: their
        # color signature would dominate a task aimed at shape and texture.
        entries = [e for e in entries if e.label != "bleeding"]
    for done, entry in enumerate(entries):
        frame = read_frame(os.path.join(base, entry.frame_path))
        stem = _stem(entry.frame_path)
        if args.mode == "frame":
            ids.append(stem)
            labels.append(entry.label)
            rows.append(pipeline.frame_features(frame, config))
        else:
            matrix, coords = pipeline.frame_block_matrix(frame, config)
            mask = synth.load_block_mask(os.path.join(base, entry.mask_path))
            for (r, c), vec in zip(coords, matrix):
                ids.append(f"{stem}:r{r:02d}c{c:02d}")
                labels.append(entry.label if mask[r, c] else "normal")
                rows.append(vec)
        if args.progress and (done + 1) % 10 == 0:
            print(f"  extracted {done + 1}/{len(entries)} frames", flush=True)

    table = pipeline.FeatureTable(args.mode, catalog.hash, config, ids, labels,
                                  np.asarray(rows))
    pipeline.save_feature_table(args.out, table)
    print(f"wrote {table.x.shape[0]} x {table.x.shape[1]} feature matrix to {args.out}")
    if args.catalog_out:
        pipeline.save_catalog(args.catalog_out, catalog)
        print(f"wrote catalog to {args.catalog_out}")
    return 0


def _default_hidden(mode: str) -> tuple:
    return (30, 20, 10) if mode == "block" else (20,)


def _train_head(name, x, y, k, hidden, epochs, lr, seed):
    normalizer = pipeline.fit_normalizer(x)
    xn = normalizer.apply(x)
    selected = learn.select_top_k(learn.fisher_scores(xn, y), k)
    model = learn.mlp_train(xn[:, selected], y, hidden_sizes=hidden, seed=seed,
                            epochs=epochs, learning_rate=lr)
    return {
        "normalizer": normalizer.to_dict(),
        "selected": [int(i) for i in selected],
        "network": learn.mlp_to_dict(model),
    }, model.final_mse


def cmd_train(args) -> int:
    table = _load_features(args.features)
    catalog = pipeline.catalog_for(table.mode)
    _check_hash(args.features, table.catalog_hash, catalog.hash)
    entries, _ = _load_manifest(args.manifest)
    patient_of = {_stem(e.frame_path): e.patient for e in entries}
    class_of = {_stem(e.frame_path): e.label for e in entries}

    stems = _frame_stems(table.ids)
    missing = sorted({s for s in stems if s not in patient_of})
    if missing:
        raise ValueError(f"feature rows not in manifest: {missing[:3]}...")
    groups = np.asarray([patient_of[s] for s in stems])
    frame_class = np.asarray([class_of[s] for s in stems])

    train_mask, test_mask = learn.grouped_split(
        groups, labels=frame_class, test_fraction=args.test_fraction, seed=args.seed)
    labels = np.asarray(table.labels)
    hidden = _parse_hidden(args.hidden) if args.hidden else _default_hidden(table.mode)

    heads = {}
    if table.mode == "frame":
        y = (labels == "tumor").astype(int)
        head_dict, mse = _train_head("tumor", table.x[train_mask], y[train_mask], args.k,
                                hidden, args.epochs, args.lr,
                                learn.splitmix64(args.seed, 1) % 2 ** 32)
        heads["tumor"] = head_dict
        print(f"tumor network: training MSE {mse:.6f}")
    else:
        for index, name in enumerate(ABNORMAL_CLASSES):
            eligible = train_mask & np.isin(frame_class, (name, "normal"))
            pos = eligible & (labels == name)
            neg = eligible & (labels == "normal")
            n_pos = int(pos.sum())
            if n_pos == 0:
                raise ValueError(f"no {name} blocks in the training split")
            rng = np.random.default_rng(learn.splitmix64(args.seed, 100 + index))
            neg_idx = np.flatnonzero(neg)
            keep = min(len(neg_idx), int(round(args.neg_ratio * n_pos)))
            neg_idx = neg_idx[rng.permutation(len(neg_idx))[:keep]]
            idx = np.concatenate([np.flatnonzero(pos), neg_idx])
            idx.sort()
            y = (labels[idx] == name).astype(int)
            head_dict, mse = _train_head(name, table.x[idx], y, args.k, hidden,
                                    args.epochs, args.lr,
                                    learn.splitmix64(args.seed, index) % 2 ** 32)
            heads[name] = head_dict
            print(f"{name} network: {n_pos} positive / {keep} negative blocks, "
                  f"training MSE {mse:.6f}")

    bundle = {
        "format": BUNDLE_FORMAT,
        "mode": table.mode,
        "catalog_hash": catalog.hash,
        "config": pipeline.config_to_fields(table.config),
        "seed": args.seed,
        "threshold": 0.5,
        "k": args.k,
        "test_frames": sorted({s for s, is_test in zip(stems, test_mask) if is_test}),
        "heads": heads,
    }
    save_bundle(args.out, bundle)
    print(f"wrote model bundle to {args.out} "
          f"({len(bundle['test_frames'])} held-out frames)")
    return 0


def cmd_classify(args) -> int:
    bundle = load_bundle(args.model)
    if bundle["mode"] != "frame":
        raise ValueError("classify expects a frame-mode model; use segment for block models")
    table = _load_features(args.features)
    _check_hash(args.features, table.catalog_hash, bundle["catalog_hash"])

    keep = _subset_rows(table, bundle, args.subset)
    if not keep.any():
        raise ValueError("no feature rows fall in the requested subset")
    head = bundle_heads(bundle)[0]
    xn = head.normalizer.apply(table.x[keep])[:, head.selected]
    probs = learn.mlp_predict(head.model, xn)
    preds = (probs >= bundle["threshold"]).astype(int)
    truth = (np.asarray(table.labels)[keep] == "tumor").astype(int)

    if args.out:
        _write_predictions(args.out, "tumor",
                           np.asarray(table.ids)[keep], np.asarray(table.labels)[keep],
                           truth, probs, preds)
        print(f"wrote predictions to {args.out}")
    report = learn.evaluate(preds, truth)
    print(f"frame classification on subset '{args.subset}' "
          f"({int(keep.sum())} frames):")
    print(learn.format_report(report))
    return 0


def _write_predictions(path, task, ids, labels, truth, probs, preds) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# endotex-predictions v1 task={task}\n")
        fh.write("sample_id\tlabel\ttruth\tprob\tpred\n")
        for sid, label, t, prob, pred in zip(ids, labels, truth, probs, preds):
            fh.write(f"{sid}\t{label}\t{int(t)}\t{repr(float(prob))}\t{int(pred)}\n")


def cmd_segment(args) -> int:
    bundle = load_bundle(args.model)
    if bundle["mode"] != "block":
        raise ValueError("segment expects a block-mode model")
    catalog = pipeline.block_catalog()
    _check_hash(args.model, bundle["catalog_hash"], catalog.hash)
    entries, base = _load_manifest(args.manifest)
    config = pipeline.config_from_fields(bundle["config"])
    heads = bundle_heads(bundle)
    os.makedirs(args.out, exist_ok=True)

    if args.subset == "test":
        test_frames = set(bundle.get("test_frames", []))
        if not test_frames:
            raise ValueError("model records no held-out frames; use --subset all")
        entries = [e for e in entries if _stem(e.frame_path) in test_frames]
    if not entries:
        raise ValueError("no frames selected to segment")

    confusion = {name: [0, 0, 0, 0] for name in ABNORMAL_CLASSES}  # tp, fp, tn, fn
    for entry in entries:
        frame = read_frame(os.path.join(base, entry.frame_path))
        stem = _stem(entry.frame_path)
        results = pipeline.segment_frame(frame, heads, window=args.window,
                                         smooth_target=args.median_target, config=config)
        truth_mask = synth.load_block_mask(os.path.join(base, entry.mask_path))
        overlay = frame.pixels.astype(np.float64)
        for name, result in results.items():
            write_png(os.path.join(args.out, f"{stem}_{name}_mask.png"),
                      (result.pixel_mask * 255).astype(np.uint8))
            if entry.label in (name, "normal"):
                truth = (truth_mask == 1) if entry.label == name else np.zeros_like(truth_mask, bool)
                pred = result.smoothed_labels == 1
                confusion[name][0] += int(np.sum(pred & truth))
                confusion[name][1] += int(np.sum(pred & ~truth))
                confusion[name][2] += int(np.sum(~pred & ~truth))
                confusion[name][3] += int(np.sum(~pred & truth))
            overlay = _tint_blocks(overlay, result.smoothed_labels, OVERLAY_COLORS[name])
        write_png(os.path.join(args.out, f"{stem}_overlay.png"),
                  np.clip(np.rint(overlay), 0, 255).astype(np.uint8))

    lines = []
    for name in ABNORMAL_CLASSES:
        tp, fp, tn, fn = confusion[name]
        if tp + fp + tn + fn == 0:
            continue
        preds = [1] * tp + [1] * fp + [0] * tn + [0] * fn
        truths = [1] * tp + [0] * fp + [0] * tn + [1] * fn
        report = learn.evaluate(preds, truths)
        lines.append(f"[{name}] blocks: " + learn.format_report(report).replace("\n", "; "))
    summary = "\n".join(lines) if lines else "no ground truth available for the selection"
    print(summary)
    with open(os.path.join(args.out, "segment_report.txt"), "w", encoding="ascii") as fh:
        fh.write(summary + "\n")
    return 0


def _tint_blocks(overlay: np.ndarray, block_labels: np.ndarray, color) -> np.ndarray:
    from scipy import ndimage

    b = pipeline.BLOCK_SIZE
    mask = np.kron(block_labels.astype(bool), np.ones((b, b), dtype=bool))
    tinted = overlay.copy()
    tinted[mask] = 0.6 * overlay[mask] + 0.4 * np.asarray(color, dtype=np.float64)
    # outline positive blocks at full opacity
    edge = mask & ~ndimage.binary_erosion(mask, structure=np.ones((3, 3), dtype=bool))
    tinted[edge] = np.asarray(color, dtype=np.float64)
    return tinted


def cmd_eval(args) -> int:
    if not os.path.exists(args.predictions):
        raise DataError(f"prediction file not found: {args.predictions}")
    truth, preds = [], []
    with open(args.predictions, "r", encoding="ascii") as fh:
        first = fh.readline()
        if not first.startswith("# endotex-predictions"):
            raise ValueError(f"{args.predictions}: not a predictions file")
        fh.readline()
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            truth.append(int(parts[2]))
            preds.append(int(parts[4]))
    report = learn.evaluate(preds, truth)
    print(learn.format_report(report))
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(learn.report_to_tsv(report) + "\n")
    return 0


def cmd_sweep(args) -> int:
    table = _load_features(args.features)
    catalog = pipeline.catalog_for(table.mode)
    _check_hash(args.features, table.catalog_hash, catalog.hash)
    entries, _ = _load_manifest(args.manifest)
    patient_of = {_stem(e.frame_path): e.patient for e in entries}
    class_of = {_stem(e.frame_path): e.label for e in entries}
    stems = _frame_stems(table.ids)
    groups = np.asarray([patient_of[s] for s in stems])
    frame_class = np.asarray([class_of[s] for s in stems])
    labels = np.asarray(table.labels)

    if table.mode == "block":
        keep = np.isin(frame_class, (args.target, "normal"))
        groups, frame_class, labels = groups[keep], frame_class[keep], labels[keep]
        x = table.x[keep]
        y = (labels == args.target).astype(int)
    else:
        x = table.x
        y = (labels == "tumor").astype(int)

    train_mask, test_mask = learn.grouped_split(
        groups, labels=frame_class, test_fraction=args.test_fraction, seed=args.seed)
    k_list = [int(v) for v in args.k_list.split(",")]
    hidden = _parse_hidden(args.hidden) if args.hidden else _default_hidden(table.mode)
    rows = learn.feature_sweep(x[train_mask], y[train_mask], x[test_mask], y[test_mask],
                               k_list, seed=args.seed, hidden_sizes=hidden,
                               epochs=args.epochs, learning_rate=args.lr)
    text = learn.format_sweep_table(rows)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="endotex",
        description="Feature pipelines for abnormality detection in endoscopy-style frames")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames-per-class", type=int, default=10)
    p.add_argument("--frames-per-patient", type=int, default=5)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract a feature matrix from a corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("frame", "block"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--gabor-coords", choices=("normalized", "pixel"), default="normalized")
    p.add_argument("--hu-variant", choices=("canonical", "alternate"), default="canonical")
    p.add_argument("--catalog-out", default=None,
                   help="also write the feature catalog as structured text")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit normalizer, feature selection, and networks")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--hidden", default=None, help="comma-separated layer sizes")
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--neg-ratio", type=float, default=3.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="label frames with a frame-mode model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--subset", choices=("test", "all"), default="test")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("segment", help="mask abnormal regions with a block-mode model")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--subset", choices=("test", "all"), default="test")
    p.add_argument("--median-target", choices=("blocks", "pixels"), default="blocks")
    p.add_argument("--window", type=int, default=5)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="recompute metrics from a predictions file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="train and evaluate across feature counts")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--k-list", default="10,20,25,30,35,40")
    p.add_argument("--target", choices=ABNORMAL_CLASSES, default="tumor")
    p.add_argument("--hidden", default=None)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

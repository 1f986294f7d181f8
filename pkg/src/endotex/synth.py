"""Synthetic endoscopy-style corpus generator.

Produces deterministic 512x512 frames in four classes over a pink, smoothly
varying mucosa background:

* normal: background only;
* tumor: bright, smooth raised blobs (a geometry and intensity signal);
* bleeding: blobs recolored to saturated red (a color signal);
* disease: blobs carrying high-frequency texture (a pattern signal).

Each frame gets a ground-truth mask at block granularity: a 16x16 grid cell
is positive when at least half of its pixels lie inside a lesion. Frames
are grouped into synthetic "patients" so split logic that keeps a patient's
frames together can be exercised.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgcore import Frame, tile, write_pgm, write_png

CLASSES = ("normal", "tumor", "bleeding", "disease")
FRAME_SIZE = 512
BLOCK_SIZE = 32
BASE_COLOR = (178.0, 128.0, 118.0)
BLEEDING_COLOR = (168.0, 22.0, 28.0)
MAX_BLOB_RADIUS = FRAME_SIZE // 4 - 3  # invariant: blob radius < frame size / 4


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    frames_per_class: int = 10
    frames_per_patient: int = 5

    def __post_init__(self):
        if self.frames_per_class < 1:
            raise ValueError("need at least one frame per class")
        if self.frames_per_patient < 1:
            raise ValueError("need at least one frame per patient")


@dataclass(frozen=True)
class ManifestEntry:
    frame_path: str
    label: str
    patient: str
    mask_path: str


def _smooth_field(rng, cells: int, size: int) -> np.ndarray:
    coarse = rng.standard_normal((cells, cells))
    return ndimage.zoom(coarse, size / cells, order=3)[:size, :size]


def _blob_field(rng, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Superellipse lesion support and its visual blend weight for one blob.

    The weight is 1 from the center out to a halo reaching roughly one
    block beyond the support and 0 elsewhere (a hard edge). Blocks in the
    first ring outside the truth boundary therefore look exactly like
    interior blocks, the classifiers mark them positive, and the median
    smoothing erodes that ring back onto the truth; with a soft or absent
    halo the smoothing instead clips lesion corners and costs sensitivity.
    """
    cy = rng.uniform(size * 0.3, size * 0.7)
    cx = rng.uniform(size * 0.3, size * 0.7)
    ry = rng.uniform(110.0, MAX_BLOB_RADIUS)
    rx = rng.uniform(110.0, MAX_BLOB_RADIUS)
    angle = rng.uniform(0.0, np.pi)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    dx = x - cx
    dy = y - cy
    u = (dx * np.cos(angle) + dy * np.sin(angle)) / rx
    v = (-dx * np.sin(angle) + dy * np.cos(angle)) / ry
    q = u ** 4 + v ** 4
    support = q <= 1.0
    weight = (q <= 3.4).astype(np.float64)
    return support, weight


def make_frame(label: str, rng) -> tuple[Frame, np.ndarray]:
    """One frame and its block-level ground-truth mask (1 = lesion block)."""
    if label not in CLASSES:
        raise ValueError(f"unknown class {label!r}")
    size = FRAME_SIZE
    lum = _smooth_field(rng, 9, size)
    jitter = [_smooth_field(rng, 5, size) for _ in range(3)]
    grain = rng.standard_normal((size, size))

    channels = [BASE_COLOR[c] + 20.0 * lum + 8.0 * jitter[c] for c in range(3)]
    lesion = np.zeros((size, size), dtype=bool)
    grain_damp = np.ones((size, size))

    if label != "normal":
        for _ in range(int(rng.integers(1, 3))):
            support, weight = _blob_field(rng, size)
            lesion |= support
            if label == "tumor":
                amp = rng.uniform(55.0, 80.0)
                for c, ratio in enumerate((1.0, 0.92, 0.70)):
                    channels[c] = channels[c] + weight * amp * ratio
                grain_damp = np.minimum(grain_damp, 1.0 - 0.85 * weight)
            elif label == "bleeding":
                blend = 0.85 * weight
                for c in range(3):
                    target = BLEEDING_COLOR[c] + rng.uniform(-6.0, 6.0)
                    channels[c] = channels[c] * (1.0 - blend) + target * blend
                grain_damp = np.minimum(grain_damp, 1.0 - 0.5 * weight)
            else:  # disease: high-frequency texture patch
                y, x = np.mgrid[0:size, 0:size].astype(np.float64)
                p1 = rng.uniform(3.5, 5.5)
                p2 = rng.uniform(3.5, 5.5)
                phase1 = rng.uniform(0.0, 2 * np.pi)
                phase2 = rng.uniform(0.0, 2 * np.pi)
                tex = (48.0 * np.sin(2 * np.pi * x / p1 + phase1)
                       * np.sin(2 * np.pi * y / p2 + phase2)
                       + 22.0 * rng.standard_normal((size, size)))
                for c, ratio in enumerate((1.0, 0.88, 0.82)):
                    channels[c] = channels[c] + weight * tex * ratio

    pixels = np.stack(channels, axis=2) + (5.0 * grain * grain_damp)[:, :, None]
    frame = Frame(np.clip(np.rint(pixels), 0, 255).astype(np.uint8))

    coverage = tile(lesion.astype(np.float64), BLOCK_SIZE).mean(axis=(2, 3))
    block_mask = (coverage >= 0.5).astype(np.uint8)
    return frame, block_mask


def generate_corpus(out_dir, config: SynthConfig) -> list[ManifestEntry]:
    """Write frames, block masks, and a manifest under out_dir.

    Deterministic: the same config yields byte-identical output. Returns
    the manifest entries (paths relative to out_dir).
    """
    frames_dir = os.path.join(out_dir, "frames")
    masks_dir = os.path.join(out_dir, "masks")
    os.makedirs(frames_dir, exist_ok=True)
    os.makedirs(masks_dir, exist_ok=True)

    entries = []
    for class_index, label in enumerate(CLASSES):
        for frame_index in range(config.frames_per_class):
            rng = np.random.default_rng([config.seed, class_index, frame_index])
            frame, block_mask = make_frame(label, rng)
            patient = f"{label}_p{frame_index // config.frames_per_patient:02d}"
            stem = f"{label}_{frame_index:03d}"
            frame_rel = os.path.join("frames", stem + ".png")
            mask_rel = os.path.join("masks", stem + ".pgm")
            write_png(os.path.join(out_dir, frame_rel), frame.pixels)
            write_pgm(os.path.join(out_dir, mask_rel), block_mask * 255.0)
            entries.append(ManifestEntry(frame_rel, label, patient, mask_rel))

    save_manifest(os.path.join(out_dir, "manifest.tsv"), entries, config.seed)
    return entries


def save_manifest(path, entries: list[ManifestEntry], seed: int) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# endotex-manifest v1 seed={seed}\n")
        fh.write("frame\tlabel\tpatient\tmask\n")
        for e in entries:
            fh.write(f"{e.frame_path}\t{e.label}\t{e.patient}\t{e.mask_path}\n")


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest and verify every referenced file exists."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, "r", encoding="ascii") as fh:
        first = fh.readline()
        if not first.startswith("# endotex-manifest"):
            raise ValueError(f"{path}: not a manifest")
        fh.readline()  # column header
        for line in fh:
            frame_rel, label, patient, mask_rel = line.rstrip("\n").split("\t")
            for rel in (frame_rel, mask_rel):
                if not os.path.exists(os.path.join(base, rel)):
                    raise FileNotFoundError(f"manifest references missing file: "
                                            f"{os.path.join(base, rel)}")
            entries.append(ManifestEntry(frame_rel, label, patient, mask_rel))
    return entries


def manifest_base(path) -> str:
    return os.path.dirname(os.path.abspath(path))


def load_block_mask(path) -> np.ndarray:
    from .imgcore import read_pgm

    return (read_pgm(path) > 127).astype(np.uint8)

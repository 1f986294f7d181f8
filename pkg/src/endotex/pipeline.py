"""Assembles the two feature pipelines and their catalogs.

The frame pipeline produces 1160 features per frame: 33 features for each
of 30 Gabor-bank images (990), 75 Laws features, 88 co-occurrence features
at four angles, and 7 moment invariants, all on the central 412x412 crop of
the grayscale plane. The block pipeline produces 381 features per 32x32
sub-image: 110 LBP, 92 co-occurrence (22 + the gray mean, per angle), 105
Laws, 50 Gabor statistics, and 24 channel statistics.

A FeatureCatalog freezes the feature order; its hash is embedded in every
persisted artifact so models and matrices from different catalog versions
cannot be mixed silently.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import filters, glcm, learn
from .imgcore import crop_center, median_filter, stats, tile, to_grayscale, to_hsv, GRAY_WEIGHTS
from .lbp import lbp1_pair, lbp2_features
from .moments import hu_moments

CATALOG_VERSION = 1
FRAME_CROP = 412
BLOCK_SIZE = 32
GLCM_ANGLES = (0, 45, 90, 135)
FRAME_LENGTH = 1160
BLOCK_LENGTH = 381

HU_NAMES = tuple(f"hu{i}" for i in range(1, 8))
FOUR_STATS = ("mean", "variance", "skewness", "kurtosis")
FIVE_STATS = FOUR_STATS + ("entropy",)
COLOR_CHANNELS = ("red", "green", "blue", "hue", "saturation", "gray")


@dataclass(frozen=True)
class PipelineConfig:
    levels: int = 16
    distance: int = 1
    symmetric: bool = True
    gabor_coords: str = "normalized"
    hu_variant: str = "canonical"

    def glcm_config(self, angle: int) -> glcm.GlcmConfig:
        return glcm.GlcmConfig(self.levels, angle, self.distance, self.symmetric)


@dataclass(frozen=True)
class CatalogEntry:
    index: int
    family: str
    source: str
    statistic: str

    @property
    def tag(self) -> str:
        return f"{self.family}:{self.source}:{self.statistic}"


@dataclass(frozen=True)
class FeatureCatalog:
    mode: str  # "frame" or "block"
    entries: tuple[CatalogEntry, ...]
    version: int = CATALOG_VERSION

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def hash(self) -> str:
        body = f"{self.mode} v{self.version}\n" + "\n".join(e.tag for e in self.entries)
        return hashlib.sha256(body.encode("ascii")).hexdigest()[:12]

    def tags(self) -> list[str]:
        return [e.tag for e in self.entries]

    def family_counts(self) -> dict:
        counts: dict = {}
        for e in self.entries:
            counts[e.family] = counts.get(e.family, 0) + 1
        return counts

    def indices_for(self, family: str) -> list[int]:
        return [e.index for e in self.entries if e.family == family]


def _lbp1_stat_names() -> list[str]:
    names = [f"r16_bin{i:02d}" for i in range(1, 16)]
    names += [f"r12_bin{i:02d}" for i in range(1, 12)]
    names += [f"r8_bin{i:02d}" for i in range(1, 8)]
    names += ["r16_pct_top", "r16_pct_next", "r12_pct_top", "r8_pct_top"]
    return names


def _lbp2_stat_names() -> list[str]:
    return ([f"r16_n{i:02d}" for i in range(1, 17)]
            + [f"r12_n{i:02d}" for i in range(1, 13)]
            + [f"r8_n{i:02d}" for i in range(1, 9)])


@lru_cache(maxsize=None)
def frame_catalog() -> FeatureCatalog:
    entries: list[CatalogEntry] = []

    def add(family, source, statistic):
        entries.append(CatalogEntry(len(entries), family, source, statistic))

    for label in filters.bank1_labels():
        for stat in glcm.FEATURE_NAMES:
            add("gabor-glcm", label, stat)
        for name in HU_NAMES:
            add("gabor-moment", label, name)
        for stat in FOUR_STATS:
            add("gabor-stat", label, stat)
    for mask in filters.laws_feature_labels(5):
        for stat in FIVE_STATS:
            add("laws", mask, stat)
    for angle in GLCM_ANGLES:
        for stat in glcm.FEATURE_NAMES:
            add("glcm", f"gray[a{angle}]", stat)
    for name in HU_NAMES:
        add("moment", "gray", name)

    catalog = FeatureCatalog("frame", tuple(entries))
    counts = catalog.family_counts()
    gabor_total = counts["gabor-glcm"] + counts["gabor-moment"] + counts["gabor-stat"]
    assert len(catalog) == FRAME_LENGTH
    assert (gabor_total, counts["laws"], counts["glcm"], counts["moment"]) == (990, 75, 88, 7)
    return catalog


@lru_cache(maxsize=None)
def block_catalog() -> FeatureCatalog:
    entries: list[CatalogEntry] = []

    def add(family, source, statistic):
        entries.append(CatalogEntry(len(entries), family, source, statistic))

    for channel in ("gray", "green"):
        for stat in _lbp1_stat_names():
            add("lbp1", channel, stat)
    for stat in _lbp2_stat_names():
        add("lbp2", "gray", stat)
    for angle in GLCM_ANGLES:
        for stat in glcm.FEATURE_NAMES:
            add("glcm", f"gray[a{angle}]", stat)
        add("glcm", f"gray[a{angle}]", "gray_mean")
    for mask in filters.laws_feature_labels(7):
        for stat in FIVE_STATS:
            add("laws", mask, stat)
    for label in filters.bank2_labels():
        for stat in FIVE_STATS:
            add("gabor-stat", label, stat)
    for channel in COLOR_CHANNELS:
        for stat in FOUR_STATS:
            add("color-stat", channel, stat)

    catalog = FeatureCatalog("block", tuple(entries))
    counts = catalog.family_counts()
    assert len(catalog) == BLOCK_LENGTH
    assert counts["lbp1"] + counts["lbp2"] == 110
    assert (counts["glcm"], counts["laws"], counts["gabor-stat"], counts["color-stat"]) == (92, 105, 50, 24)
    return catalog


def catalog_for(mode: str) -> FeatureCatalog:
    if mode == "frame":
        return frame_catalog()
    if mode == "block":
        return block_catalog()
    raise ValueError(f"unknown feature mode {mode!r}")


def _rescale_255(image: np.ndarray) -> np.ndarray:
    """Min-max rescale a derived response image onto [0, 255].

    Filter responses are not 8-bit data, so they are conditioned onto the
    co-occurrence quantization range before pair counting; a constant image
    maps to all zeros.
    """
    lo = float(image.min())
    hi = float(image.max())
    if hi <= lo:
        return np.zeros_like(image)
    return (image - lo) * (255.0 / (hi - lo))


def _hu_or_zeros(image: np.ndarray, variant: str) -> np.ndarray:
    # Derived responses can be identically zero; moment invariants are
    # undefined there and the pipeline substitutes zeros.
    total = float(np.sum(image))
    if not np.isfinite(total) or total <= 0:
        return np.zeros(7)
    return hu_moments(image, variant)


def frame_features(frame, config: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """The 1160-feature vector of a frame, in frame_catalog() order."""
    gray = to_grayscale(frame)
    if gray.shape[0] < FRAME_CROP or gray.shape[1] < FRAME_CROP:
        raise ValueError(f"frame {gray.shape} smaller than central crop {FRAME_CROP}")
    crop = crop_center(gray, FRAME_CROP, FRAME_CROP)

    values: list[float] = []
    glcm_cfg = config.glcm_config(0)
    for _, img in filters.gabor_bank_method1(crop, config.gabor_coords):
        values.extend(glcm.glcm_features(glcm.compute_glcm(_rescale_255(img), glcm_cfg)))
        values.extend(_hu_or_zeros(img, config.hu_variant))
        s = stats(img)
        values.extend((s.mean, s.variance, s.skewness, s.kurtosis))
    values.extend(filters.laws_features(crop, 5))
    for angle in GLCM_ANGLES:
        values.extend(glcm.glcm_features(glcm.compute_glcm(crop, config.glcm_config(angle))))
    values.extend(_hu_or_zeros(crop, config.hu_variant))

    vec = np.asarray(values)
    if vec.size != FRAME_LENGTH:
        raise AssertionError(f"frame feature length {vec.size} != {FRAME_LENGTH}")
    return vec


def block_features(rgb_block: np.ndarray, config: PipelineConfig = PipelineConfig()) -> np.ndarray:
    """The 381-feature vector of one 32x32 RGB sub-image, in block_catalog() order."""
    px = np.asarray(rgb_block, dtype=np.float64)
    if px.shape != (BLOCK_SIZE, BLOCK_SIZE, 3):
        raise ValueError(f"sub-image must be {BLOCK_SIZE}x{BLOCK_SIZE} RGB, got {px.shape}")
    red, green, blue = px[:, :, 0], px[:, :, 1], px[:, :, 2]
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * red + wg * green + wb * blue
    hue, sat = to_hsv(px)

    values: list[float] = []
    values.extend(lbp1_pair(gray, green))
    values.extend(lbp2_features(gray))
    gray_mean = float(gray.mean())
    for angle in GLCM_ANGLES:
        values.extend(glcm.glcm_features(glcm.compute_glcm(gray, config.glcm_config(angle))))
        values.append(gray_mean)
    values.extend(filters.laws_features(gray, 7))
    for _, img in filters.gabor_bank_method2(gray, config.gabor_coords):
        values.extend(stats(img))
    for channel in (red, green, blue, hue, sat, gray):
        s = stats(channel)
        values.extend((s.mean, s.variance, s.skewness, s.kurtosis))

    vec = np.asarray(values)
    if vec.size != BLOCK_LENGTH:
        raise AssertionError(f"block feature length {vec.size} != {BLOCK_LENGTH}")
    return vec


def frame_block_matrix(frame, config: PipelineConfig = PipelineConfig()) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Feature matrix for every tile of a frame, row-major, with coordinates.

    Runs the batched extractor, which matches block_features row by row (to
    roundoff on the filter-response statistics, exactly elsewhere).
    """
    from . import batch

    px = frame.pixels if hasattr(frame, "pixels") else np.asarray(frame)
    blocks = tile(px, BLOCK_SIZE)
    rows, cols = blocks.shape[0], blocks.shape[1]
    coords = [(r, c) for r in range(rows) for c in range(cols)]
    matrix = batch.block_feature_matrix(blocks.reshape(rows * cols, BLOCK_SIZE, BLOCK_SIZE, 3),
                                        config)
    return matrix, coords


# ---------------------------------------------------------------------------
# Min-max normalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Normalizer:
    lo: np.ndarray
    hi: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        out = (x - self.lo) / safe
        out = np.where(span > 0, out, 0.0)
        return np.clip(out, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"lo": [float(v) for v in self.lo], "hi": [float(v) for v in self.hi]}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        return cls(np.asarray(d["lo"], dtype=np.float64), np.asarray(d["hi"], dtype=np.float64))


def fit_normalizer(x: np.ndarray) -> Normalizer:
    """Per-column min/max over training rows; apply() maps into [0, 1] with
    clamping for unseen values and sends constant columns to 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("normalizer needs a non-empty 2-D matrix")
    return Normalizer(x.min(axis=0), x.max(axis=0))


def apply_normalizer(normalizer: Normalizer, x: np.ndarray) -> np.ndarray:
    return normalizer.apply(x)


# ---------------------------------------------------------------------------
# Block-level segmentation
# ---------------------------------------------------------------------------

@dataclass
class ClassifierHead:
    """One trained binary decision: normalizer, feature subset, and network."""

    name: str
    normalizer: Normalizer
    selected: np.ndarray
    model: "learn.MlpModel"
    catalog_hash: str


@dataclass
class SegmentationResult:
    probabilities: np.ndarray  # per-block probability grid
    raw_labels: np.ndarray  # thresholded, before smoothing
    smoothed_labels: np.ndarray
    pixel_mask: np.ndarray  # block labels replicated to frame resolution


def segment_frame(frame, heads, window: int = 5, smooth_target: str = "blocks",
                  config: PipelineConfig = PipelineConfig()) -> dict:
    """Run every classifier head over the frame's 32x32 tiles.

    Returns {head name: SegmentationResult}. Labels are probability >= 0.5;
    smoothing is a median filter over the block-label grid (default) or over
    the replicated pixel mask when smooth_target is "pixels".
    """
    if smooth_target not in ("blocks", "pixels"):
        raise ValueError(f"unknown smoothing target {smooth_target!r}")
    catalog_hash = block_catalog().hash
    heads = list(heads)
    for head in heads:
        if head.catalog_hash != catalog_hash:
            raise ValueError(
                f"head {head.name!r} was trained against catalog {head.catalog_hash}, "
                f"extractor is {catalog_hash}")
        if len(head.selected) != head.model.layer_sizes[0]:
            raise ValueError(f"head {head.name!r}: {len(head.selected)} selected features "
                             f"but network expects {head.model.layer_sizes[0]}")

    matrix, coords = frame_block_matrix(frame, config)
    rows = coords[-1][0] + 1
    cols = coords[-1][1] + 1

    results = {}
    for head in heads:
        xn = head.normalizer.apply(matrix)[:, head.selected]
        probs = learn.mlp_predict(head.model, xn).reshape(rows, cols)
        raw = (probs >= 0.5).astype(np.uint8)
        if smooth_target == "blocks":
            smoothed = median_filter(raw, window)
            mask = np.kron(smoothed, np.ones((BLOCK_SIZE, BLOCK_SIZE), dtype=np.uint8))
        else:
            mask = median_filter(
                np.kron(raw, np.ones((BLOCK_SIZE, BLOCK_SIZE), dtype=np.uint8)), window)
            smoothed = (tile(mask, BLOCK_SIZE).mean(axis=(2, 3)) >= 0.5).astype(np.uint8)
        results[head.name] = SegmentationResult(probs, raw, smoothed, mask)
    return results


# ---------------------------------------------------------------------------
# Feature matrix persistence
# ---------------------------------------------------------------------------

@dataclass
class FeatureTable:
    mode: str
    catalog_hash: str
    config: PipelineConfig
    ids: list[str]
    labels: list[str]
    x: np.ndarray


def config_to_fields(config: PipelineConfig) -> dict:
    return {
        "levels": str(config.levels),
        "distance": str(config.distance),
        "symmetric": "1" if config.symmetric else "0",
        "coords": config.gabor_coords,
        "hu": config.hu_variant,
    }


def config_from_fields(fields: dict) -> PipelineConfig:
    return PipelineConfig(
        levels=int(fields["levels"]),
        distance=int(fields["distance"]),
        symmetric=fields["symmetric"] == "1",
        gabor_coords=fields["coords"],
        hu_variant=fields["hu"],
    )


def save_feature_table(path, table: FeatureTable) -> None:
    """Delimited text: a comment line carrying the catalog hash and the
    extraction settings, a header of catalog tags, then one full-precision
    row per sample."""
    catalog = catalog_for(table.mode)
    if table.catalog_hash != catalog.hash:
        raise ValueError(f"table hash {table.catalog_hash} != catalog {catalog.hash}")
    if table.x.shape[1] != len(catalog):
        raise ValueError(f"matrix width {table.x.shape[1]} != catalog {len(catalog)}")
    cfg = " ".join(f"{k}={v}" for k, v in config_to_fields(table.config).items())
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# endotex-features v{CATALOG_VERSION} mode={table.mode} "
                 f"catalog={table.catalog_hash} {cfg}\n")
        fh.write("sample_id\tlabel\t" + "\t".join(catalog.tags()) + "\n")
        for sid, label, row in zip(table.ids, table.labels, table.x):
            fh.write(f"{sid}\t{label}\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def load_feature_table(path) -> FeatureTable:
    with open(path, "r", encoding="ascii") as fh:
        meta = fh.readline().strip()
        if not meta.startswith("# endotex-features"):
            raise ValueError(f"{path}: not a feature table")
        fields = dict(part.split("=", 1) for part in meta.split() if "=" in part)
        fh.readline()  # header of tags
        ids, labels, rows = [], [], []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            ids.append(parts[0])
            labels.append(parts[1])
            rows.append([float(v) for v in parts[2:]])
    x = np.asarray(rows, dtype=np.float64)
    return FeatureTable(fields["mode"], fields["catalog"], config_from_fields(fields),
                        ids, labels, x)


def save_catalog(path, catalog: FeatureCatalog) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# endotex-catalog v{catalog.version} mode={catalog.mode} hash={catalog.hash}\n")
        fh.write("index\tfamily\tsource\tstatistic\n")
        for e in catalog.entries:
            fh.write(f"{e.index}\t{e.family}\t{e.source}\t{e.statistic}\n")


# Catalog structure is validated once at import.
frame_catalog()
block_catalog()

"""Image primitives: frames, color conversion, cropping, tiling, convolution,
median filtering, and the scalar statistics shared by every feature family.

All operations are pure functions; images are never mutated in place. Gray
images are plain 2-D float64 arrays with intensities nominally in [0, 255].
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage, signal

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # BT.601 luma


@dataclass(frozen=True)
class Frame:
    """An RGB raster with 8-bit channel planes, the unit of pipeline input."""

    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"frame pixels must be (H, W, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("frame must be at least 1x1")
        if px.dtype != np.uint8:
            raise ValueError(f"frame pixels must be uint8, got {px.dtype}")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def red(self) -> np.ndarray:
        return self.pixels[:, :, 0].astype(np.float64)

    @property
    def green(self) -> np.ndarray:
        return self.pixels[:, :, 1].astype(np.float64)

    @property
    def blue(self) -> np.ndarray:
        return self.pixels[:, :, 2].astype(np.float64)


class StatSummary(NamedTuple):
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    entropy: float


def _rgb_planes(frame) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accept a Frame or an (H, W, 3) array and return float64 channel planes."""
    px = frame.pixels if isinstance(frame, Frame) else np.asarray(frame)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValueError(f"expected an RGB image, got shape {px.shape}")
    px = px.astype(np.float64)
    return px[:, :, 0], px[:, :, 1], px[:, :, 2]


def to_grayscale(frame) -> np.ndarray:
    """BT.601 luma: 0.299 R + 0.587 G + 0.114 B, kept as real values."""
    r, g, b = _rgb_planes(frame)
    wr, wg, wb = GRAY_WEIGHTS
    return wr * r + wg * g + wb * b


def to_hsv(frame) -> tuple[np.ndarray, np.ndarray]:
    """Hexcone hue and saturation planes.

    Hue is in degrees [0, 360), saturation in [0, 1]. Achromatic pixels
    (max == min) get hue 0 and saturation 0.
    """
    r, g, b = _rgb_planes(frame)
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    chroma = mx - mn

    safe_c = np.where(chroma == 0, 1.0, chroma)
    hue = np.select(
        [chroma == 0, mx == r, mx == g],
        [0.0,
         60.0 * np.mod((g - b) / safe_c, 6.0),
         60.0 * ((b - r) / safe_c + 2.0)],
        default=60.0 * ((r - g) / safe_c + 4.0),
    )
    hue = np.mod(hue, 360.0)
    sat = np.where(mx == 0, 0.0, chroma / np.where(mx == 0, 1.0, mx))
    return hue, sat


def crop_center(image: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Crop the central target_w x target_h region (odd margins floor the offset)."""
    image = np.asarray(image)
    h, w = image.shape[:2]
    if target_w > w or target_h > h:
        raise ValueError(f"crop {target_w}x{target_h} exceeds source {w}x{h}")
    top = (h - target_h) // 2
    left = (w - target_w) // 2
    return image[top:top + target_h, left:left + target_w].copy()


def tile(image: np.ndarray, block_size: int) -> np.ndarray:
    """Split an image into non-overlapping block_size x block_size tiles.

    Returns an array of shape (rows, cols, block, block[, channels]) in
    row-major tile order; dimensions must divide evenly.
    """
    image = np.asarray(image)
    h, w = image.shape[:2]
    if h % block_size or w % block_size:
        raise ValueError(f"{h}x{w} image not divisible into {block_size}px tiles")
    rows, cols = h // block_size, w // block_size
    trailing = image.shape[2:]
    tiles = image.reshape(rows, block_size, cols, block_size, *trailing)
    return tiles.swapaxes(1, 2).copy()


def untile(tiles: np.ndarray) -> np.ndarray:
    """Inverse of tile: reassemble (rows, cols, b, b[, channels]) into an image."""
    tiles = np.asarray(tiles)
    rows, cols, b = tiles.shape[0], tiles.shape[1], tiles.shape[2]
    trailing = tiles.shape[4:]
    return tiles.swapaxes(1, 2).reshape(rows * b, cols * b, *trailing).copy()


def convolve2d(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """True 2-D convolution (kernel flipped) with edge-replicated borders.

    Output has the same size as the input. The kernel must be odd in both
    dimensions. Complex kernels are supported; the response is then complex.
    """
    image = np.asarray(image, dtype=np.complex128 if np.iscomplexobj(kernel) else np.float64)
    kernel = np.asarray(kernel)
    if kernel.ndim != 2 or kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise ValueError(f"kernel must be 2-D with odd sides, got {kernel.shape}")
    ph, pw = kernel.shape[0] // 2, kernel.shape[1] // 2
    padded = np.pad(image, ((ph, ph), (pw, pw)), mode="edge")
    return signal.convolve(padded, kernel, mode="valid", method="auto")


def median_filter(grid: np.ndarray, window: int = 5) -> np.ndarray:
    """Replace each cell by the median of its window x window neighborhood.

    Borders are edge-replicated; window must be odd. Works on label grids
    and gray images alike.
    """
    if window % 2 == 0:
        raise ValueError(f"median window must be odd, got {window}")
    grid = np.asarray(grid)
    if window == 1:
        return grid.copy()
    return ndimage.median_filter(grid, size=window, mode="nearest")


def stats(values) -> StatSummary:
    """Mean, population variance, skewness, kurtosis, and histogram entropy.

    Skewness is m3 / sigma^3 and kurtosis m4 / sigma^4 (non-excess, so a
    Gaussian scores 3); both are 0 by convention when the variance is 0.
    Entropy is the base-2 Shannon entropy of a 256-bin histogram over
    [0, 255]; values outside that range are clipped into the end bins.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("stats of empty input")
    mean = float(v.mean())
    centered = v - mean
    c2 = centered * centered
    variance = float(c2.mean())
    if variance > 0:
        sigma = np.sqrt(variance)
        skewness = float(np.mean(c2 * centered) / (variance * sigma))
        kurtosis = float(np.mean(c2 * c2) / (variance * variance))
    else:
        skewness = 0.0
        kurtosis = 0.0
    return StatSummary(mean, variance, skewness, kurtosis, histogram_entropy(v))


def histogram_entropy(values) -> float:
    """Base-2 entropy of a 256-equal-bin histogram over [0, 255] (0 log 0 = 0).

    Values are clipped into the range first, so out-of-range filter
    responses still contribute (to the end bins). Bin k covers
    [255 k / 256, 255 (k + 1) / 256), with 255 itself in the top bin.
    """
    v = np.clip(np.asarray(values, dtype=np.float64).ravel(), 0.0, 255.0)
    bins = np.minimum((v * (256.0 / 255.0)).astype(np.intp), 255)
    p = np.bincount(bins, minlength=256) / v.size
    terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return float(-terms.sum())


# ---------------------------------------------------------------------------
# Raster file I/O (8-bit PNG / PGM / PPM)
# ---------------------------------------------------------------------------

def write_pgm(path, gray: np.ndarray) -> None:
    """Write a gray image as binary PGM, rounded to the nearest 8-bit value."""
    g = np.asarray(gray, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError("PGM output expects a 2-D image")
    data = np.clip(np.rint(g), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    magic, (w, h), data = _read_netpbm(path)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM file")
    return np.frombuffer(data, dtype=np.uint8, count=w * h).reshape(h, w).astype(np.float64)


def write_ppm(path, frame: Frame) -> None:
    with open(path, "wb") as fh:
        fh.write(f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii"))
        fh.write(frame.pixels.tobytes())


def read_ppm(path) -> Frame:
    magic, (w, h), data = _read_netpbm(path)
    if magic != b"P6":
        raise ValueError(f"{path}: not a binary PPM file")
    px = np.frombuffer(data, dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)
    return Frame(px.copy())


def _read_netpbm(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    fields = []
    pos = 2  # past magic
    while len(fields) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(raw[start:pos]))
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit rasters are supported")
    return raw[:2], (w, h), raw[pos + 1:]


def write_png(path, pixels: np.ndarray) -> None:
    """Write an 8-bit grayscale (H, W) or RGB (H, W, 3) PNG.

    Hand-rolled encoder (filter 0 only) so output bytes depend on nothing
    but the pixel values.
    """
    px = np.asarray(pixels)
    if px.dtype != np.uint8:
        raise ValueError("PNG output expects uint8 pixels")
    if px.ndim == 2:
        color_type, channels = 0, 1
    elif px.ndim == 3 and px.shape[2] == 3:
        color_type, channels = 2, 3
    else:
        raise ValueError(f"unsupported PNG shape {px.shape}")
    h, w = px.shape[:2]

    def chunk(tag: bytes, body: bytes) -> bytes:
        return (struct.pack(">I", len(body)) + tag + body
                + struct.pack(">I", zlib.crc32(tag + body) & 0xFFFFFFFF))

    header = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    rows = px.reshape(h, w * channels)
    raw = b"".join(b"\x00" + rows[i].tobytes() for i in range(h))
    payload = zlib.compress(raw, 9)
    with open(path, "wb") as fh:
        fh.write(b"\x89PNG\r\n\x1a\n")
        fh.write(chunk(b"IHDR", header))
        fh.write(chunk(b"IDAT", payload))
        fh.write(chunk(b"IEND", b""))


def read_png(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG into a uint8 array."""
    from PIL import Image

    with Image.open(path) as img:
        if img.mode == "L":
            return np.asarray(img, dtype=np.uint8)
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def read_frame(path) -> Frame:
    """Load a PNG or PPM file as a Frame; grayscale files are replicated to RGB."""
    name = str(path).lower()
    if name.endswith(".ppm"):
        return read_ppm(path)
    px = read_png(path)
    if px.ndim == 2:
        px = np.stack([px, px, px], axis=2)
    return Frame(px)

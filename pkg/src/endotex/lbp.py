"""Local binary pattern features over 7x7 blocks slid across 32x32 sub-images.

Two feature sets are produced per channel:

* histogram features of rotation-invariant codes, binned by a fixed edge
  series per neighbor ring (37 values);
* per-neighbor bit frequencies of the raw codes, telling which neighbor
  positions fire most often (36 values).

Conventions: a neighbor ties-or-exceeds the center to set its bit
(neighbor >= center), and the first neighbor in ring order is the least
significant bit. Counting bins are half-open [edge_i, edge_i+1); the four
"top of range" percentage features use closed intervals so the all-ones
code is representable. The edge value 32768 in the 16-neighbor series is
kept verbatim even though the surrounding pattern suggests 32767.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Neighbor cells per ring, numbered 1..49 row-major over the 7x7 block
# (center = cell 25), listed in neighbor order.
_RING16_CELLS = (3, 4, 5, 13, 21, 28, 35, 41, 47, 46, 45, 37, 29, 22, 15, 9)
_RING12_CELLS = (10, 11, 12, 20, 27, 34, 40, 39, 38, 30, 23, 16)
_RING8_CELLS = (17, 18, 19, 26, 33, 32, 31, 24)

# Histogram edges per ring (16-, 12-, and 8-neighbor codes respectively).
EDGES16 = (1, 3, 7, 15, 31, 63, 127, 255, 511, 1023, 2047, 4095, 8191, 16383, 32768, 65535)
EDGES12 = (1, 3, 7, 15, 31, 63, 127, 255, 511, 1023, 2047, 4095)
EDGES8 = (1, 3, 7, 15, 31, 63, 127, 255)

BLOCK = 7
SUBIMAGE = 32
PLACEMENTS = (SUBIMAGE - BLOCK + 1) ** 2  # 676
LBP1_LENGTH = 37
LBP2_LENGTH = 36


@dataclass(frozen=True)
class LbpRing:
    radius: int
    neighbor_count: int
    offsets: tuple[tuple[int, int], ...]  # (drow, dcol) from the block center


def _decode_cells(cells) -> tuple[tuple[int, int], ...]:
    offsets = []
    for cell in cells:
        row, col = divmod(cell - 1, BLOCK)
        offsets.append((row - BLOCK // 2, col - BLOCK // 2))
    return tuple(offsets)


RING16 = LbpRing(3, 16, _decode_cells(_RING16_CELLS))
RING12 = LbpRing(2, 12, _decode_cells(_RING12_CELLS))
RING8 = LbpRing(1, 8, _decode_cells(_RING8_CELLS))
RINGS = (RING16, RING12, RING8)


def _check_ring_geometry():
    # Each label series must decode to a closed ring of distinct offsets at
    # (rounded) Euclidean distance equal to the nominal radius.
    for ring in RINGS:
        offs = ring.offsets
        assert len(set(offs)) == ring.neighbor_count
        for dr, dc in offs:
            assert (dr, dc) != (0, 0)
            assert round(np.hypot(dr, dc)) == ring.radius
        for (r1, c1), (r2, c2) in zip(offs, offs[1:] + offs[:1]):
            assert max(abs(r1 - r2), abs(c1 - c2)) == 1


_check_ring_geometry()


def lbp_code(block: np.ndarray, ring: LbpRing) -> int:
    """Binary code of a 7x7 block: bit j set when neighbor j >= center."""
    b = np.asarray(block, dtype=np.float64)
    if b.shape != (BLOCK, BLOCK):
        raise ValueError(f"LBP block must be {BLOCK}x{BLOCK}, got {b.shape}")
    center = b[BLOCK // 2, BLOCK // 2]
    code = 0
    for bit, (dr, dc) in enumerate(ring.offsets):
        if b[BLOCK // 2 + dr, BLOCK // 2 + dc] >= center:
            code |= 1 << bit
    return code


def rotation_invariant(code: int, neighbor_count: int) -> int:
    """Minimum value over all circular bit-rotations of a P-bit code."""
    p = neighbor_count
    if not 0 <= code < (1 << p):
        raise ValueError(f"code {code} out of range for {p} bits")
    return int(_rotation_table(p)[code])


@lru_cache(maxsize=None)
def _rotation_table(p: int) -> np.ndarray:
    codes = np.arange(1 << p, dtype=np.int64)
    mask = (1 << p) - 1
    best = codes.copy()
    for k in range(1, p):
        rotated = ((codes >> k) | (codes << (p - k))) & mask
        np.minimum(best, rotated, out=best)
    return best


@dataclass(frozen=True)
class BlockCodes:
    """Raw codes of every block placement in one channel, one grid per ring."""

    ring16: np.ndarray
    ring12: np.ndarray
    ring8: np.ndarray


def _bit_planes(channel: np.ndarray, ring: LbpRing) -> np.ndarray:
    c = np.asarray(channel, dtype=np.float64)
    if c.shape != (SUBIMAGE, SUBIMAGE):
        raise ValueError(f"sub-image must be {SUBIMAGE}x{SUBIMAGE}, got {c.shape}")
    half = BLOCK // 2
    lo, hi = half, SUBIMAGE - half
    center = c[lo:hi, lo:hi]
    bits = np.empty((ring.neighbor_count, hi - lo, hi - lo), dtype=bool)
    for k, (dr, dc) in enumerate(ring.offsets):
        bits[k] = c[lo + dr:hi + dr, lo + dc:hi + dc] >= center
    return bits


def _codes_from_bits(bits: np.ndarray) -> np.ndarray:
    weights = (1 << np.arange(bits.shape[0], dtype=np.int64))
    return np.tensordot(weights, bits.astype(np.int64), axes=1)


def block_codes(channel: np.ndarray) -> BlockCodes:
    """Raw (not rotation-invariant) codes for all 676 placements and rings."""
    return BlockCodes(*(_codes_from_bits(_bit_planes(channel, ring)) for ring in RINGS))


def _histogram_features(values: np.ndarray, edges) -> list[float]:
    n = values.size
    return [float(np.count_nonzero((values >= lo) & (values < hi))) / n
            for lo, hi in zip(edges, edges[1:])]


def lbp1_features(channel: np.ndarray) -> np.ndarray:
    """37 rotation-invariant histogram features of one 32x32 channel.

    15 + 11 + 7 half-open bin fractions for the 16/12/8-neighbor rings,
    then the closed-interval fractions for the top two 16-neighbor ranges
    and the top 12- and 8-neighbor ranges.
    """
    codes = block_codes(channel)
    ri16 = _rotation_table(16)[codes.ring16].ravel()
    ri12 = _rotation_table(12)[codes.ring12].ravel()
    ri8 = _rotation_table(8)[codes.ring8].ravel()

    out = []
    out += _histogram_features(ri16, EDGES16)
    out += _histogram_features(ri12, EDGES12)
    out += _histogram_features(ri8, EDGES8)
    for values, (lo, hi) in (
        (ri16, (EDGES16[14], EDGES16[15])),
        (ri16, (EDGES16[13], EDGES16[14])),
        (ri12, (EDGES12[10], EDGES12[11])),
        (ri8, (EDGES8[6], EDGES8[7])),
    ):
        out.append(float(np.count_nonzero((values >= lo) & (values <= hi))) / values.size)
    return np.array(out)


def lbp2_features(channel: np.ndarray) -> np.ndarray:
    """36 per-neighbor bit frequencies of the raw codes (16 + 12 + 8)."""
    out = []
    for ring in RINGS:
        bits = _bit_planes(channel, ring)
        out.extend(bits.reshape(ring.neighbor_count, -1).mean(axis=1))
    return np.array(out)


def lbp1_pair(gray: np.ndarray, green: np.ndarray) -> np.ndarray:
    """Concatenated 37-feature vectors of the gray and green channels (74)."""
    gray = np.asarray(gray)
    green = np.asarray(green)
    if gray.shape != green.shape:
        raise ValueError(f"channel shapes differ: {gray.shape} vs {green.shape}")
    return np.concatenate([lbp1_features(gray), lbp1_features(green)])

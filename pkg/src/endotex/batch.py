"""Batched block-feature extraction.

Computes the same 381 features as pipeline.block_features for a whole stack
of 32x32 sub-images at once: convolutions run over the stacked blocks in
the frequency domain and the statistics are vectorized across blocks. The
LBP, co-occurrence, and channel statistics are arithmetically identical to
the per-block path; the filter responses take a different (FFT) route, so
those columns agree to roundoff rather than bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from . import filters, glcm, lbp
from .imgcore import GRAY_WEIGHTS, to_hsv


def _convolve_stack(stack: np.ndarray, kernels) -> list[np.ndarray]:
    """True convolution of (N, H, W) with each 2-D kernel, edge replicated.

    All kernels must share one shape; the stack transform is reused across
    them. Complex kernels yield complex responses.
    """
    n, h, w = stack.shape
    kh, kw = kernels[0].shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(stack, ((0, 0), (ph, ph), (pw, pw)), mode="edge")
    fh, fw = h + 2 * ph + kh - 1, w + 2 * pw + kw - 1
    fa = np.fft.rfft2(padded, s=(fh, fw))
    out = []
    for kernel in kernels:
        if kernel.shape != (kh, kw):
            raise ValueError("kernels in one batch must share a shape")
        if np.iscomplexobj(kernel):
            fr = np.fft.rfft2(kernel.real, s=(fh, fw))
            fi = np.fft.rfft2(kernel.imag, s=(fh, fw))
            full = (np.fft.irfft2(fa * fr, s=(fh, fw))
                    + 1j * np.fft.irfft2(fa * fi, s=(fh, fw)))
        else:
            fk = np.fft.rfft2(kernel, s=(fh, fw))
            full = np.fft.irfft2(fa * fk, s=(fh, fw))
        out.append(full[:, kh - 1:kh - 1 + h, kw - 1:kw - 1 + w])
    return out


def _stats_stack(responses: np.ndarray) -> np.ndarray:
    """(mean, variance, skewness, kurtosis, entropy) per block: (N, 5)."""
    flat = responses.reshape(responses.shape[0], -1)
    n = flat.shape[1]
    mean = flat.mean(axis=1)
    centered = flat - mean[:, None]
    c2 = centered * centered
    variance = c2.mean(axis=1)
    safe_var = np.where(variance > 0, variance, 1.0)
    sigma = np.sqrt(safe_var)
    skew = np.where(variance > 0, np.mean(c2 * centered, axis=1) / (safe_var * sigma), 0.0)
    kurt = np.where(variance > 0, np.mean(c2 * c2, axis=1) / (safe_var * safe_var), 0.0)

    v = np.clip(flat, 0.0, 255.0)
    bins = np.minimum((v * (256.0 / 255.0)).astype(np.intp), 255)
    offsets = (np.arange(flat.shape[0], dtype=np.intp) * 256)[:, None]
    counts = np.bincount((bins + offsets).ravel(), minlength=flat.shape[0] * 256)
    p = counts.reshape(flat.shape[0], 256) / n
    terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    entropy = -terms.sum(axis=1)
    return np.stack([mean, variance, skew, kurt, entropy], axis=1)


def _bits_stack(stack: np.ndarray, ring) -> np.ndarray:
    half = lbp.BLOCK // 2
    lo, hi = half, lbp.SUBIMAGE - half
    center = stack[:, lo:hi, lo:hi]
    bits = np.empty((ring.neighbor_count,) + center.shape, dtype=bool)
    for k, (dr, dc) in enumerate(ring.offsets):
        bits[k] = stack[:, lo + dr:hi + dr, lo + dc:hi + dc] >= center
    return bits


def _lbp1_stack(stack: np.ndarray) -> np.ndarray:
    """(N, 37) rotation-invariant histogram features per block."""
    n = stack.shape[0]
    columns = []
    ri = {}
    for ring, edges in ((lbp.RING16, lbp.EDGES16), (lbp.RING12, lbp.EDGES12),
                        (lbp.RING8, lbp.EDGES8)):
        codes = np.tensordot(1 << np.arange(ring.neighbor_count, dtype=np.int64),
                             _bits_stack(stack, ring).astype(np.int64), axes=1)
        v = lbp._rotation_table(ring.neighbor_count)[codes].reshape(n, -1)
        ri[ring.neighbor_count] = v
        for lo, hi in zip(edges, edges[1:]):
            columns.append(((v >= lo) & (v < hi)).sum(axis=1) / v.shape[1])
    for p, (lo, hi) in ((16, (lbp.EDGES16[14], lbp.EDGES16[15])),
                        (16, (lbp.EDGES16[13], lbp.EDGES16[14])),
                        (12, (lbp.EDGES12[10], lbp.EDGES12[11])),
                        (8, (lbp.EDGES8[6], lbp.EDGES8[7]))):
        v = ri[p]
        columns.append(((v >= lo) & (v <= hi)).sum(axis=1) / v.shape[1])
    return np.stack(columns, axis=1)


def _lbp2_stack(stack: np.ndarray) -> np.ndarray:
    """(N, 36) per-neighbor bit frequencies per block."""
    n = stack.shape[0]
    columns = []
    for ring in lbp.RINGS:
        bits = _bits_stack(stack, ring).reshape(ring.neighbor_count, n, -1)
        columns.append(bits.mean(axis=2).T)
    return np.concatenate(columns, axis=1)


def _glcm_stack(gray: np.ndarray, cfg: glcm.GlcmConfig) -> np.ndarray:
    """(N, levels, levels) normalized co-occurrence matrices."""
    q = glcm.quantize(gray, cfg.levels)
    n, h, w = q.shape
    dc, dr = cfg.offset
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r0 >= r1 or c0 >= c1:
        raise ValueError(f"blocks too small for offset {(dc, dr)}")
    a = q[:, r0:r1, c0:c1].reshape(n, -1)
    b = q[:, r0 + dr:r1 + dr, c0 + dc:c1 + dc].reshape(n, -1)
    g2 = cfg.levels * cfg.levels
    codes = a * cfg.levels + b + (np.arange(n, dtype=np.intp) * g2)[:, None]
    counts = np.bincount(codes.ravel(), minlength=n * g2).astype(np.float64)
    m = counts.reshape(n, cfg.levels, cfg.levels)
    if cfg.symmetric:
        m = m + m.transpose(0, 2, 1)
    return m / m.sum(axis=(1, 2))[:, None, None]


def block_feature_matrix(blocks: np.ndarray, config) -> np.ndarray:
    """Feature matrix (N, 381) for a stack of (N, 32, 32, 3) sub-images."""
    px = np.ascontiguousarray(np.asarray(blocks, dtype=np.float64))
    if px.ndim != 4 or px.shape[1:] != (32, 32, 3):
        raise ValueError(f"expected a stack of 32x32 RGB blocks, got {px.shape}")
    n = px.shape[0]
    red = np.ascontiguousarray(px[..., 0])
    green = np.ascontiguousarray(px[..., 1])
    blue = np.ascontiguousarray(px[..., 2])
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * red + wg * green + wb * blue
    hue, sat = to_hsv(px.reshape(n * 32, 32, 3))
    hue = hue.reshape(n, 32, 32)
    sat = sat.reshape(n, 32, 32)

    parts = [_lbp1_stack(gray), _lbp1_stack(green), _lbp2_stack(gray)]

    gray_mean = gray.reshape(n, -1).mean(axis=1)
    for angle in (0, 45, 90, 135):
        matrices = _glcm_stack(gray, config.glcm_config(angle))
        feats = np.stack([glcm.glcm_features(matrices[i]) for i in range(n)])
        parts.append(feats)
        parts.append(gray_mean[:, None])

    masks = [mask for _, mask in filters.laws_masks(7).masks]
    for response in _convolve_stack(gray, masks):
        parts.append(_stats_stack(response))

    kernels = [filters.gabor_kernel(filters.GaborParams(
        freq, theta, support=filters.BANK2_RANGE, coords=config.gabor_coords))
        for freq in filters.BANK_FREQUENCIES for theta in filters.BANK_ORIENTATIONS]
    magnitudes = [np.abs(r) for r in _convolve_stack(gray, kernels)]
    n_orient = len(filters.BANK_ORIENTATIONS)
    means = [np.mean(magnitudes[g * n_orient:(g + 1) * n_orient], axis=0)
             for g in range(len(filters.BANK_FREQUENCIES))]
    for response in magnitudes + means:
        parts.append(_stats_stack(response))

    for channel in (red, green, blue, hue, sat, gray):
        parts.append(_stats_stack(channel)[:, :4])

    return np.concatenate(parts, axis=1)

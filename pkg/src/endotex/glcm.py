"""Gray-level co-occurrence matrices and the 22 texture features derived
from them.

Conventions frozen here so results are reproducible:

* intensities are quantized uniformly over [0, 255] into ``levels`` bins
  (values outside the range clamp into the end bins);
* feature formulas index the matrix by 0-based bin number;
* every entropy-flavored feature uses base-2 logarithms with 0 log 0 = 0;
* correlation and the maximum correlation coefficient are 0 when a marginal
  has zero variance or the co-occurrence support is a single bin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

FEATURE_NAMES = (
    "contrast",
    "correlation",
    "entropy",
    "energy",
    "difference_variance",
    "difference_entropy",
    "imc1",
    "imc2",
    "inverse_difference",
    "sum_average",
    "sum_variance",
    "sum_of_squares",
    "sum_entropy",
    "max_correlation_coeff",
    "autocorrelation",
    "cluster_prominence",
    "cluster_shade",
    "dissimilarity",
    "homogeneity",
    "maximum_probability",
    "inverse_difference_normalized",
    "inverse_difference_moment_normalized",
)

FEATURE_COUNT = len(FEATURE_NAMES)

# (delta_col, delta_row) per direction, distance 1
_ANGLE_OFFSETS = {0: (1, 0), 45: (1, -1), 90: (0, -1), 135: (-1, -1)}

@dataclass(frozen=True)
class GlcmConfig:
    levels: int = 16
    angle: int = 0
    distance: int = 1
    symmetric: bool = True

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError(f"levels must be >= 2, got {self.levels}")
        if self.angle not in _ANGLE_OFFSETS:
            raise ValueError(f"angle must be one of {sorted(_ANGLE_OFFSETS)}, got {self.angle}")
        if self.distance < 1:
            raise ValueError(f"distance must be >= 1, got {self.distance}")

    @property
    def offset(self) -> tuple[int, int]:
        """Pixel offset as (delta_col, delta_row)."""
        dc, dr = _ANGLE_OFFSETS[self.angle]
        return dc * self.distance, dr * self.distance


def quantize(image: np.ndarray, levels: int) -> np.ndarray:
    """Map intensities in [0, 255] to uniform bins 0..levels-1."""
    v = np.asarray(image, dtype=np.float64)
    bins = np.floor(v * (levels / 256.0)).astype(np.intp)
    return np.clip(bins, 0, levels - 1)


def compute_glcm(image: np.ndarray, cfg: GlcmConfig = GlcmConfig()) -> np.ndarray:
    """Normalized co-occurrence matrix of an image at the configured offset."""
    q = quantize(image, cfg.levels)
    if q.ndim != 2:
        raise ValueError("co-occurrence input must be a 2-D image")
    dc, dr = cfg.offset
    h, w = q.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r0 >= r1 or c0 >= c1:
        raise ValueError(f"image {h}x{w} too small for offset {(dc, dr)}")
    a = q[r0:r1, c0:c1].ravel()
    b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
    counts = np.bincount(a * cfg.levels + b, minlength=cfg.levels * cfg.levels)
    m = counts.reshape(cfg.levels, cfg.levels).astype(np.float64)
    if cfg.symmetric:
        m = m + m.T
    return m / m.sum()


def glcm_features(m: np.ndarray) -> np.ndarray:
    """The 22-feature vector of a normalized co-occurrence matrix.

    Order follows FEATURE_NAMES.
    """
    p = np.asarray(m, dtype=np.float64)
    g = p.shape[0]
    if p.shape != (g, g):
        raise ValueError("co-occurrence matrix must be square")
    idx = np.arange(g, dtype=np.float64)
    i = idx[:, None]
    j = idx[None, :]

    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(np.dot(idx, px))
    mu_y = float(np.dot(idx, py))
    var_x = float(np.dot((idx - mu_x) ** 2, px))
    var_y = float(np.dot((idx - mu_y) ** 2, py))

    # p_{x+y} over k = 0..2g-2 and p_{x-y} over k = 0..g-1
    p_sum = np.zeros(2 * g - 1)
    p_diff = np.zeros(g)
    ii, jj = np.indices((g, g))
    np.add.at(p_sum, (ii + jj).ravel(), p.ravel())
    np.add.at(p_diff, np.abs(ii - jj).ravel(), p.ravel())
    k_sum = np.arange(2 * g - 1, dtype=np.float64)
    k_diff = idx

    contrast = float(np.sum((i - j) ** 2 * p))
    if var_x > 0 and var_y > 0:
        correlation = float(np.sum((i - mu_x) * (j - mu_y) * p) / np.sqrt(var_x * var_y))
    else:
        correlation = 0.0
    entropy = _entropy(p)
    energy = float(np.sum(p * p))

    diff_mean = float(np.dot(k_diff, p_diff))
    difference_variance = float(np.dot((k_diff - diff_mean) ** 2, p_diff))
    difference_entropy = _entropy(p_diff)

    hx = _entropy(px)
    hy = _entropy(py)
    log_pxpy = _safe_log2(np.outer(px, py))
    hxy1 = float(-np.sum(p * log_pxpy))
    hxy2 = float(-np.sum(np.outer(px, py) * log_pxpy))
    denom = max(hx, hy)
    imc1 = (entropy - hxy1) / denom if denom > 0 else 0.0
    imc2 = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - entropy)))))

    abs_diff = np.abs(i - j)
    inverse_difference = float(np.sum(p / (1.0 + abs_diff)))
    sum_average = float(np.dot(k_sum, p_sum))
    sum_variance = float(np.dot((k_sum - sum_average) ** 2, p_sum))
    sum_of_squares = float(np.sum((i - mu_x) ** 2 * p))
    sum_entropy = _entropy(p_sum)
    mcc = _max_correlation_coefficient(p, px, py)
    autocorrelation = float(np.sum(i * j * p))
    spread = i + j - mu_x - mu_y
    cluster_prominence = float(np.sum(spread ** 4 * p))
    cluster_shade = float(np.sum(spread ** 3 * p))
    dissimilarity = float(np.sum(abs_diff * p))
    homogeneity = float(np.sum(p / (1.0 + (i - j) ** 2)))
    maximum_probability = float(p.max())
    inn = float(np.sum(p / (1.0 + abs_diff / g)))
    idmn = float(np.sum(p / (1.0 + (i - j) ** 2 / (g * g))))

    return np.array([
        contrast, correlation, entropy, energy,
        difference_variance, difference_entropy, imc1, imc2,
        inverse_difference, sum_average, sum_variance, sum_of_squares,
        sum_entropy, mcc, autocorrelation, cluster_prominence,
        cluster_shade, dissimilarity, homogeneity, maximum_probability,
        inn, idmn,
    ])


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _safe_log2(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    np.log2(p, out=out, where=p > 0)
    return out


def _max_correlation_coefficient(p, px, py) -> float:
    """sqrt of the second-largest eigenvalue of Haralick's Q matrix.

    Q = Dx^-1 P Dy^-1 P^T restricted to the marginal support. It shares its
    spectrum with the symmetric positive semidefinite matrix S = M M^T,
    M = Dx^-1/2 P Dy^-1/2, so the eigenvalues come from a symmetric
    eigensolve (iterative schemes stall when the top eigenvalues nearly
    coincide, which random images hit routinely). A failed solve yields 0
    with a warning. Support smaller than 2 bins also yields 0.
    """
    rows = px > 0
    cols = py > 0
    sub = p[np.ix_(rows, cols)]
    sx = np.sqrt(px[rows])
    sy = np.sqrt(py[cols])
    if sx.size < 2 or sy.size < 2:
        return 0.0
    m = sub / np.outer(sx, sy)
    s = m @ m.T
    try:
        eigenvalues = np.linalg.eigvalsh(s)
    except np.linalg.LinAlgError:
        warnings.warn("max correlation coefficient eigensolve failed",
                      RuntimeWarning, stacklevel=3)
        return 0.0
    return float(np.sqrt(max(eigenvalues[-2], 0.0)))

"""Gabor filter banks and Laws texture-energy masks.

Gabor kernels are sampled on an odd support grid whose coordinates are, by
default, normalized to [-1, 1] in both axes; that makes the bank's sigma of
0.5 a meaningful envelope width for every support size. The alternative
"pixel" coordinate mode (one unit per pixel) is kept selectable for
comparison. Bank outputs are complex-response magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .imgcore import convolve2d, stats

BANK_FREQUENCIES = (0.5, 1.5)
BANK_ORIENTATIONS = (0, 45, 90, 135)
BANK1_RANGES = (10, 20, 40)
BANK2_RANGE = 10
BANK_SIGMA = 0.5

LAWS_KERNELS_5 = (
    ("L5", (1, 4, 6, 4, 1)),
    ("E5", (-1, -2, 0, 2, 1)),
    ("S5", (-1, 0, 2, 0, -1)),
    ("W5", (-1, 2, 0, -2, 1)),
    ("R5", (1, -4, 6, -4, 1)),
)
LAWS_KERNELS_7 = (
    ("L7", (1, 6, 15, 20, 15, 6, 1)),
    ("E7", (-1, -4, -5, 0, 5, 4, 1)),
    ("S7", (-1, -2, 1, 4, 1, -2, -1)),
    ("W7", (-1, 0, 3, 0, -3, 0, 1)),
    ("R7", (1, -2, -1, 4, -1, -2, 1)),
    ("O7", (-1, 6, -15, 20, -15, 6, -1)),
)


@dataclass(frozen=True)
class GaborParams:
    frequency: float
    theta: float  # degrees
    phase: float = 0.0  # radians
    sigma_x: float = BANK_SIGMA
    sigma_y: float = BANK_SIGMA
    support: int = BANK2_RANGE  # kernel side in pixels; made odd on construction
    coords: str = "normalized"

    def __post_init__(self):
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise ValueError("gabor sigmas must be positive")
        if self.coords not in ("normalized", "pixel"):
            raise ValueError(f"unknown coordinate mode {self.coords!r}")
        if self.support % 2 == 0:
            object.__setattr__(self, "support", self.support + 1)


def gabor_kernel(p: GaborParams) -> np.ndarray:
    """Complex Gabor kernel sampled on a support x support grid.

    The Gaussian envelope is divided by 2 pi sigma_x sigma_y and the carrier
    runs along the axis rotated by theta.
    """
    n = p.support
    if p.coords == "normalized":
        axis = np.linspace(-1.0, 1.0, n)
    else:
        axis = np.arange(n, dtype=np.float64) - n // 2
    x = axis[None, :]
    y = axis[:, None]
    t = np.deg2rad(p.theta)
    big_x = x * np.cos(t) + y * np.sin(t)
    big_y = -x * np.sin(t) + y * np.cos(t)
    envelope = np.exp(-(big_x ** 2 / (2 * p.sigma_x ** 2) + big_y ** 2 / (2 * p.sigma_y ** 2)))
    envelope /= 2 * np.pi * p.sigma_x * p.sigma_y
    return envelope * np.exp(1j * (2 * np.pi * p.frequency * big_x + p.phase))


def _bank1_params(coords: str):
    for f in BANK_FREQUENCIES:
        for support in BANK1_RANGES:
            for theta in BANK_ORIENTATIONS:
                yield GaborParams(f, theta, support=support, coords=coords)


@lru_cache(maxsize=None)
def _bank1_kernels(coords: str):
    return tuple((p, gabor_kernel(p)) for p in _bank1_params(coords))


@lru_cache(maxsize=None)
def _bank2_kernels(coords: str):
    return tuple(
        (p, gabor_kernel(p))
        for f in BANK_FREQUENCIES
        for p in (GaborParams(f, theta, support=BANK2_RANGE, coords=coords)
                  for theta in BANK_ORIENTATIONS)
    )


def bank1_labels() -> list[str]:
    labels = [f"gabor[f{f},r{r},t{t}]"
              for f in BANK_FREQUENCIES for r in BANK1_RANGES for t in BANK_ORIENTATIONS]
    labels += [f"gaboravg[f{f},r{r}]" for f in BANK_FREQUENCIES for r in BANK1_RANGES]
    return labels


def bank2_labels() -> list[str]:
    labels = [f"gabor[f{f},t{t}]" for f in BANK_FREQUENCIES for t in BANK_ORIENTATIONS]
    labels += [f"gaboravg[f{f}]" for f in BANK_FREQUENCIES]
    return labels


def gabor_bank_method1(image: np.ndarray, coords: str = "normalized") -> list[tuple[str, np.ndarray]]:
    """30 labeled response images: 24 magnitudes (2 frequencies x 3 supports
    x 4 orientations) plus the 6 per-(frequency, support) orientation means.
    """
    responses = [np.abs(convolve2d(image, k)) for _, k in _bank1_kernels(coords)]
    labels = bank1_labels()
    out = list(zip(labels[:24], responses))
    n_orient = len(BANK_ORIENTATIONS)
    means = [np.mean(responses[g * n_orient:(g + 1) * n_orient], axis=0)
             for g in range(len(BANK_FREQUENCIES) * len(BANK1_RANGES))]
    out += list(zip(labels[24:], means))
    return out


def gabor_bank_method2(subimage: np.ndarray, coords: str = "normalized") -> list[tuple[str, np.ndarray]]:
    """10 labeled responses for a sub-image: 8 magnitudes plus 2 per-frequency
    orientation means (single support of 10, made odd to 11).
    """
    responses = [np.abs(convolve2d(subimage, k)) for _, k in _bank2_kernels(coords)]
    labels = bank2_labels()
    out = list(zip(labels[:8], responses))
    n_orient = len(BANK_ORIENTATIONS)
    means = [np.mean(responses[g * n_orient:(g + 1) * n_orient], axis=0)
             for g in range(len(BANK_FREQUENCIES))]
    out += list(zip(labels[8:], means))
    return out


@dataclass(frozen=True)
class LawsMaskSet:
    tap: int
    masks: tuple[tuple[str, np.ndarray], ...]


@lru_cache(maxsize=None)
def laws_masks(tap: int) -> LawsMaskSet:
    """2-D Laws masks: outer products of the 1-D kernels, with unordered
    cross pairs symmetrized as (a'b + b'a) / 2. 15 masks for tap 5, 21 for
    tap 7.
    """
    if tap == 5:
        kernels = LAWS_KERNELS_5
    elif tap == 7:
        kernels = LAWS_KERNELS_7
    else:
        raise ValueError(f"laws masks exist for taps 5 and 7, got {tap}")
    masks = []
    for i, (name_i, ki) in enumerate(kernels):
        vi = np.asarray(ki, dtype=np.float64)
        for name_j, kj in kernels[i:]:
            vj = np.asarray(kj, dtype=np.float64)
            if name_i == name_j:
                masks.append((name_i + name_j, np.outer(vi, vi)))
            else:
                masks.append((name_i + name_j, (np.outer(vi, vj) + np.outer(vj, vi)) / 2.0))
    return LawsMaskSet(tap, tuple(masks))


def laws_feature_labels(tap: int) -> list[str]:
    return [name for name, _ in laws_masks(tap).masks]


def laws_features(image: np.ndarray, tap: int) -> np.ndarray:
    """Mean, variance, skewness, kurtosis, and entropy of each mask response,
    concatenated in mask order (75 values for tap 5, 105 for tap 7).
    """
    out = []
    for _, mask in laws_masks(tap).masks:
        out.extend(stats(convolve2d(image, mask)))
    return np.array(out)

"""Raw, central, and normalized image moments plus the seven rotation/scale/
translation invariants built from them.

Coordinates: x is the column index and y the row index, origin at the
top-left pixel. Central moments are intensity weighted, and normalization
divides by the zeroth moment raised to 1 + (p + q) / 2.

Two variants of the invariant set exist: "canonical" (the default, which
satisfies the mirror antisymmetry of the seventh invariant) and
"alternate", which reproduces a commonly circulated misprint of the fifth
and seventh formulas and is kept only for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HU_VARIANTS = ("canonical", "alternate")


@dataclass(frozen=True)
class MomentSet:
    raw: dict  # (p, q) -> M_pq for p + q <= 3
    centroid: tuple[float, float]  # (x_bar, y_bar)
    central: dict  # (p, q) -> mu_pq
    normalized: dict  # (p, q) -> tau_pq


def moment_set(image: np.ndarray) -> MomentSet:
    """All moments of order p + q <= 3 of a non-empty gray image."""
    f = np.asarray(image, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError("moments expect a 2-D image")
    m00 = float(f.sum())
    if not np.isfinite(m00) or m00 <= 0:
        raise ValueError("image has no mass; centroid undefined")

    h, w = f.shape
    x = np.arange(w, dtype=np.float64)[None, :]
    y = np.arange(h, dtype=np.float64)[:, None]

    raw = {}
    for p in range(4):
        for q in range(4 - p):
            raw[(p, q)] = float(np.sum(x ** p * y ** q * f))
    x_bar = raw[(1, 0)] / m00
    y_bar = raw[(0, 1)] / m00

    cx = x - x_bar
    cy = y - y_bar
    central = {}
    normalized = {}
    for p in range(4):
        for q in range(4 - p):
            mu = float(np.sum(cx ** p * cy ** q * f))
            central[(p, q)] = mu
            gamma = (p + q) / 2.0 + 1.0
            normalized[(p, q)] = mu / m00 ** gamma
    return MomentSet(raw, (x_bar, y_bar), central, normalized)


def hu_from_normalized(t: dict, variant: str = "canonical") -> np.ndarray:
    """Seven invariants from normalized central moments."""
    if variant not in HU_VARIANTS:
        raise ValueError(f"variant must be one of {HU_VARIANTS}, got {variant!r}")
    t20, t02, t11 = t[(2, 0)], t[(0, 2)], t[(1, 1)]
    t30, t03 = t[(3, 0)], t[(0, 3)]
    t21, t12 = t[(2, 1)], t[(1, 2)]
    a = t30 + t12
    b = t21 + t03

    phi1 = t20 + t02
    phi2 = (t20 - t02) ** 2 + 4 * t11 ** 2
    phi3 = (t30 - 3 * t12) ** 2 + (3 * t21 - t03) ** 2
    phi4 = a ** 2 + b ** 2
    phi6 = (t20 - t02) * (a ** 2 - b ** 2) + 4 * t11 * a * b
    if variant == "canonical":
        phi5 = ((t30 - 3 * t12) * a * (a ** 2 - 3 * b ** 2)
                + (3 * t21 - t03) * b * (3 * a ** 2 - b ** 2))
        phi7 = ((3 * t21 - t03) * a * (a ** 2 - 3 * b ** 2)
                - (t30 - 3 * t12) * b * (3 * a ** 2 - b ** 2))
    else:
        phi5 = ((3 * t30 - 3 * t12) * a * (a ** 2 - 3 * b ** 2)
                + (3 * t21 - 3 * t03) * b * (3 * a ** 2 - b ** 2))
        phi7 = ((3 * t21 - t03) * a * (a ** 2 - 3 * b ** 2)
                + (3 * t21 - 3 * t03) * b * (3 * a ** 2 - b ** 2))
    return np.array([phi1, phi2, phi3, phi4, phi5, phi6, phi7])


def hu_moments(image: np.ndarray, variant: str = "canonical") -> np.ndarray:
    return hu_from_normalized(moment_set(image).normalized, variant)

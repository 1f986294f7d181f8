"""Independent brute-force reference implementations used by the tests.

Everything here is written as plain loops straight from the published
formulas, deliberately sharing no code with the library. Keep it slow and
obvious.
"""

import math

import numpy as np


def glcm_brute_force(image, levels, angle, distance, symmetric):
    """Count co-occurring quantized pairs by looping over every pixel."""
    img = np.asarray(image, dtype=float)
    h, w = img.shape
    q = [[min(int(img[r][c] * levels / 256.0), levels - 1) for c in range(w)]
         for r in range(h)]
    offsets = {0: (1, 0), 45: (1, -1), 90: (0, -1), 135: (-1, -1)}
    dc, dr = offsets[angle]
    dc, dr = dc * distance, dr * distance
    m = np.zeros((levels, levels))
    for r in range(h):
        for c in range(w):
            r2, c2 = r + dr, c + dc
            if 0 <= r2 < h and 0 <= c2 < w:
                m[q[r][c], q[r2][c2]] += 1
    if symmetric:
        m = m + m.T
    return m / m.sum()


def glcm_features_brute_force(p):
    """The 22 features, each coded directly from its published formula."""
    g = p.shape[0]

    def log2(v):
        return math.log2(v) if v > 0 else 0.0

    px = [sum(p[i][j] for j in range(g)) for i in range(g)]
    py = [sum(p[i][j] for i in range(g)) for j in range(g)]
    mu_x = sum(i * px[i] for i in range(g))
    mu_y = sum(j * py[j] for j in range(g))
    var_x = sum((i - mu_x) ** 2 * px[i] for i in range(g))
    var_y = sum((j - mu_y) ** 2 * py[j] for j in range(g))

    p_sum = [0.0] * (2 * g - 1)
    p_diff = [0.0] * g
    for i in range(g):
        for j in range(g):
            p_sum[i + j] += p[i][j]
            p_diff[abs(i - j)] += p[i][j]

    contrast = sum((i - j) ** 2 * p[i][j] for i in range(g) for j in range(g))
    if var_x > 0 and var_y > 0:
        correlation = sum((i - mu_x) * (j - mu_y) * p[i][j]
                          for i in range(g) for j in range(g)) / math.sqrt(var_x * var_y)
    else:
        correlation = 0.0
    entropy = -sum(p[i][j] * log2(p[i][j]) for i in range(g) for j in range(g))
    energy = sum(p[i][j] ** 2 for i in range(g) for j in range(g))

    diff_mean = sum(k * p_diff[k] for k in range(g))
    difference_variance = sum((k - diff_mean) ** 2 * p_diff[k] for k in range(g))
    difference_entropy = -sum(p_diff[k] * log2(p_diff[k]) for k in range(g))

    hx = -sum(v * log2(v) for v in px)
    hy = -sum(v * log2(v) for v in py)
    hxy1 = -sum(p[i][j] * log2(px[i] * py[j]) for i in range(g) for j in range(g))
    hxy2 = -sum(px[i] * py[j] * log2(px[i] * py[j]) for i in range(g) for j in range(g))
    imc1 = (entropy - hxy1) / max(hx, hy) if max(hx, hy) > 0 else 0.0
    imc2 = math.sqrt(max(0.0, 1.0 - math.exp(-2.0 * (hxy2 - entropy))))

    inverse_difference = sum(p[i][j] / (1 + abs(i - j)) for i in range(g) for j in range(g))
    sum_average = sum(k * p_sum[k] for k in range(2 * g - 1))
    sum_variance = sum((k - sum_average) ** 2 * p_sum[k] for k in range(2 * g - 1))
    sum_of_squares = sum((i - mu_x) ** 2 * p[i][j] for i in range(g) for j in range(g))
    sum_entropy = -sum(p_sum[k] * log2(p_sum[k]) for k in range(2 * g - 1))

    mcc = _mcc_brute_force(p, px, py)
    autocorrelation = sum(i * j * p[i][j] for i in range(g) for j in range(g))
    cluster_prominence = sum((i + j - mu_x - mu_y) ** 4 * p[i][j]
                             for i in range(g) for j in range(g))
    cluster_shade = sum((i + j - mu_x - mu_y) ** 3 * p[i][j]
                        for i in range(g) for j in range(g))
    dissimilarity = sum(abs(i - j) * p[i][j] for i in range(g) for j in range(g))
    homogeneity = sum(p[i][j] / (1 + (i - j) ** 2) for i in range(g) for j in range(g))
    maximum_probability = max(p[i][j] for i in range(g) for j in range(g))
    inn = sum(p[i][j] / (1 + abs(i - j) / g) for i in range(g) for j in range(g))
    idmn = sum(p[i][j] / (1 + (i - j) ** 2 / g ** 2) for i in range(g) for j in range(g))

    return np.array([
        contrast, correlation, entropy, energy,
        difference_variance, difference_entropy, imc1, imc2,
        inverse_difference, sum_average, sum_variance, sum_of_squares,
        sum_entropy, mcc, autocorrelation, cluster_prominence,
        cluster_shade, dissimilarity, homogeneity, maximum_probability,
        inn, idmn,
    ])


def _mcc_brute_force(p, px, py):
    """sqrt of the second-largest eigenvalue of the literal Q matrix."""
    g = p.shape[0]
    rows = [i for i in range(g) if px[i] > 0]
    cols = [j for j in range(g) if py[j] > 0]
    if len(rows) < 2 or len(cols) < 2:
        return 0.0
    q = np.zeros((len(rows), len(rows)))
    for a, i in enumerate(rows):
        for b, j in enumerate(rows):
            q[a][b] = sum(p[i][k] * p[j][k] / (px[i] * py[k]) for k in cols)
    eigenvalues = sorted(abs(v) for v in np.linalg.eigvals(q))
    return math.sqrt(max(eigenvalues[-2], 0.0))


# ---------------------------------------------------------------------------
# LBP oracles: explicit loops over every 7x7 placement
# ---------------------------------------------------------------------------

LBP_OFFSETS = {
    16: [(-3, -1), (-3, 0), (-3, 1), (-2, 2), (-1, 3), (0, 3), (1, 3), (2, 2),
         (3, 1), (3, 0), (3, -1), (2, -2), (1, -3), (0, -3), (-1, -3), (-2, -2)],
    12: [(-2, -1), (-2, 0), (-2, 1), (-1, 2), (0, 2), (1, 2), (2, 1), (2, 0),
         (2, -1), (1, -2), (0, -2), (-1, -2)],
    8: [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)],
}

LBP_EDGES = {
    16: [1, 3, 7, 15, 31, 63, 127, 255, 511, 1023, 2047, 4095, 8191, 16383, 32768, 65535],
    12: [1, 3, 7, 15, 31, 63, 127, 255, 511, 1023, 2047, 4095],
    8: [1, 3, 7, 15, 31, 63, 127, 255],
}


def lbp_codes_brute_force(channel, neighbors):
    """Raw codes of every placement, via two explicit loops."""
    img = np.asarray(channel, dtype=float)
    codes = []
    for top in range(26):
        for left in range(26):
            center = img[top + 3][left + 3]
            code = 0
            for bit, (dr, dc) in enumerate(LBP_OFFSETS[neighbors]):
                if img[top + 3 + dr][left + 3 + dc] >= center:
                    code += 2 ** bit
            codes.append(code)
    return codes


def min_rotation_brute_force(code, p):
    best = code
    for k in range(1, p):
        rotated = ((code >> k) | (code << (p - k))) & ((1 << p) - 1)
        best = min(best, rotated)
    return best


def lbp1_brute_force(channel):
    out = []
    ri = {n: [min_rotation_brute_force(c, n) for c in lbp_codes_brute_force(channel, n)]
          for n in (16, 12, 8)}
    for n in (16, 12, 8):
        edges = LBP_EDGES[n]
        for lo, hi in zip(edges, edges[1:]):
            out.append(sum(1 for v in ri[n] if lo <= v < hi) / 676)
    for n, lo, hi in ((16, 32768, 65535), (16, 16383, 32768),
                      (12, 2047, 4095), (8, 127, 255)):
        out.append(sum(1 for v in ri[n] if lo <= v <= hi) / 676)
    return np.array(out)


def lbp2_brute_force(channel):
    out = []
    for n in (16, 12, 8):
        codes = lbp_codes_brute_force(channel, n)
        for bit in range(n):
            out.append(sum(1 for c in codes if (c >> bit) & 1) / 676)
    return np.array(out)

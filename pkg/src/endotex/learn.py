"""Feature ranking, MLP training and inference, and evaluation metrics.

The feature score for a binary task is the two-class discriminant ratio
(mean gap squared over the summed within-class variances). Networks are
fully connected with sigmoid activations everywhere, trained by full-batch
gradient descent on mean squared error; everything is deterministic given
the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SCORE_SENTINEL = 1e300  # stands in for an infinite ratio (zero variance, distinct means)
MSE_STOP = 1e-4


@dataclass(frozen=True)
class FisherRanking:
    scores: np.ndarray
    order: np.ndarray  # feature indices, best first; ties broken by lower index


def fisher_scores(x: np.ndarray, y: np.ndarray) -> FisherRanking:
    """Score each column by (mu_pos - mu_neg)^2 / (var_pos + var_neg).

    Columns constant within both classes score 0 when the class means agree
    and a large sentinel (ranked first) when they differ.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(int)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("feature matrix and labels disagree")
    pos = x[y == 1]
    neg = x[y == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("both classes must be present to rank features")
    gap = (pos.mean(axis=0) - neg.mean(axis=0)) ** 2
    denom = pos.var(axis=0) + neg.var(axis=0)
    scores = np.where(denom > 0, gap / np.where(denom > 0, denom, 1.0),
                      np.where(gap > 0, SCORE_SENTINEL, 0.0))
    order = np.argsort(-scores, kind="stable")
    return FisherRanking(scores, order)


def select_top_k(ranking: FisherRanking, k: int = 30) -> np.ndarray:
    if k > ranking.order.size:
        raise ValueError(f"cannot select {k} of {ranking.order.size} features")
    return ranking.order[:k].copy()


@dataclass(eq=False)
class MlpModel:
    layer_sizes: tuple
    weights: list  # per layer, shape (n_in, n_out)
    biases: list  # per layer, shape (n_out,)
    activation: str
    seed: int
    final_mse: float
    loss_history: np.ndarray = field(repr=False, default=None)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _forward(model_weights, model_biases, x: np.ndarray) -> list:
    activations = [x]
    for w, b in zip(model_weights, model_biases):
        activations.append(_sigmoid(activations[-1] @ w + b))
    return activations


def mlp_train(x: np.ndarray, y: np.ndarray, hidden_sizes=(20,), seed: int = 0,
              epochs: int = 1000, learning_rate: float = 0.5) -> MlpModel:
    """Train a sigmoid MLP with full-batch gradient descent on MSE.

    Weights and biases start uniform in [-0.5, 0.5] from the seeded
    generator. Training stops after `epochs` updates or as soon as the
    batch MSE falls below 1e-4.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("feature matrix and targets disagree")
    sizes = (x.shape[1], *hidden_sizes, 1)
    rng = np.random.default_rng(seed)
    weights = [rng.uniform(-0.5, 0.5, (sizes[i], sizes[i + 1])) for i in range(len(sizes) - 1)]
    biases = [rng.uniform(-0.5, 0.5, sizes[i + 1]) for i in range(len(sizes) - 1)]

    n = x.shape[0]
    target = y[:, None]
    history = []
    for _ in range(epochs):
        acts = _forward(weights, biases, x)
        err = acts[-1] - target
        mse = float(np.mean(err ** 2))
        history.append(mse)
        if mse < MSE_STOP:
            break
        delta = (2.0 / n) * err * acts[-1] * (1.0 - acts[-1])
        for layer in range(len(weights) - 1, -1, -1):
            grad_w = acts[layer].T @ delta
            grad_b = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ weights[layer].T) * acts[layer] * (1.0 - acts[layer])
            weights[layer] -= learning_rate * grad_w
            biases[layer] -= learning_rate * grad_b

    final = float(np.mean((_forward(weights, biases, x)[-1] - target) ** 2))
    return MlpModel(sizes, weights, biases, "sigmoid", seed, final,
                    np.asarray(history))


def mlp_predict(model: MlpModel, x: np.ndarray):
    """Forward pass. A single sample returns a float, a matrix one value per row."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.layer_sizes[0]:
        raise ValueError(f"input width {x.shape[1]} != network input {model.layer_sizes[0]}")
    out = _forward(model.weights, model.biases, x)[-1][:, 0]
    return float(out[0]) if single else out


def mlp_to_dict(model: MlpModel) -> dict:
    return {
        "layer_sizes": list(model.layer_sizes),
        "weights": [[[float(v) for v in row] for row in w] for w in model.weights],
        "biases": [[float(v) for v in b] for b in model.biases],
        "activation": model.activation,
        "seed": model.seed,
        "final_mse": model.final_mse,
    }


def mlp_from_dict(d: dict) -> MlpModel:
    return MlpModel(
        tuple(d["layer_sizes"]),
        [np.asarray(w, dtype=np.float64) for w in d["weights"]],
        [np.asarray(b, dtype=np.float64) for b in d["biases"]],
        d["activation"],
        int(d["seed"]),
        float(d["final_mse"]),
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    sensitivity: Optional[float]
    specificity: Optional[float]
    accuracy: Optional[float]
    precision: Optional[float]


def evaluate(preds, labels) -> EvalReport:
    """Confusion counts and the four ratios; a ratio with a zero denominator
    is reported as None rather than 0."""
    p = np.asarray(preds).astype(int).reshape(-1)
    t = np.asarray(labels).astype(int).reshape(-1)
    if p.size != t.size:
        raise ValueError(f"{p.size} predictions vs {t.size} labels")
    if p.size == 0:
        raise ValueError("nothing to evaluate")
    tp = int(np.sum((p == 1) & (t == 1)))
    fp = int(np.sum((p == 1) & (t == 0)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))

    def ratio(num, den):
        return num / den if den > 0 else None

    return EvalReport(tp, fp, tn, fn,
                      ratio(tp, tp + fn), ratio(tn, tn + fp),
                      ratio(tp + tn, p.size), ratio(tp, tp + fp))


def format_report(report: EvalReport) -> str:
    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    lines = [
        f"TP={report.tp}  FP={report.fp}  TN={report.tn}  FN={report.fn}",
        f"sensitivity  {fmt(report.sensitivity)}",
        f"specificity  {fmt(report.specificity)}",
        f"accuracy     {fmt(report.accuracy)}",
        f"precision    {fmt(report.precision)}",
    ]
    return "\n".join(lines)


def report_to_tsv(report: EvalReport) -> str:
    def fmt(v):
        return "" if v is None else repr(v)

    header = "tp\tfp\ttn\tfn\tsensitivity\tspecificity\taccuracy\tprecision"
    row = (f"{report.tp}\t{report.fp}\t{report.tn}\t{report.fn}\t"
           f"{fmt(report.sensitivity)}\t{fmt(report.specificity)}\t"
           f"{fmt(report.accuracy)}\t{fmt(report.precision)}")
    return header + "\n" + row


# ---------------------------------------------------------------------------
# Grouped splitting and the feature-count sweep
# ---------------------------------------------------------------------------

def splitmix64(seed: int, salt: int = 0) -> int:
    """Deterministic sub-seed derivation (splitmix64 finalizer)."""
    z = (seed + 0x9E3779B97F4A7C15 * (salt + 1)) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def grouped_split(groups, labels=None, test_fraction: float = 0.25, seed: int = 0):
    """Split sample indices into train/test masks by whole groups.

    Groups never straddle the split. When labels are given the group pool is
    stratified by each group's label so both sides keep every class.
    """
    groups = np.asarray(groups)
    n = groups.size
    if labels is None:
        strata = {None: sorted(set(groups.tolist()))}
    else:
        labels = np.asarray(labels)
        strata = {}
        for g in sorted(set(groups.tolist())):
            label = labels[groups == g][0]
            strata.setdefault(label, []).append(g)
    rng = np.random.default_rng(seed)
    test_groups = set()
    for label in sorted(strata, key=str):
        pool = strata[label]
        n_test = max(1, round(test_fraction * len(pool))) if len(pool) > 1 else 0
        picked = rng.permutation(len(pool))[:n_test]
        test_groups.update(pool[i] for i in picked)
    test_mask = np.isin(groups, sorted(test_groups))
    train_mask = ~test_mask
    if not train_mask.any() or not test_mask.any():
        raise ValueError("grouped split produced an empty side")
    return train_mask, test_mask


@dataclass(frozen=True)
class SweepRow:
    k: int
    report: EvalReport


def feature_sweep(train_x, train_y, test_x, test_y, k_list, seed: int = 0,
                  hidden_sizes=(20,), epochs: int = 2000,
                  learning_rate: float = 1.0) -> list[SweepRow]:
    """Train and evaluate one network per feature count.

    For each k: rank features on the training side, keep the top k, fit the
    normalizer and network on training rows, then score the held-out rows.
    Each k gets an independent sub-seed derived from the master seed.
    """
    from .pipeline import fit_normalizer  # local import to avoid a cycle

    rows = []
    for k in k_list:
        sub_seed = splitmix64(seed, k) % (2 ** 32)
        normalizer = fit_normalizer(np.asarray(train_x, dtype=np.float64))
        xn_train = normalizer.apply(train_x)
        xn_test = normalizer.apply(test_x)
        selected = select_top_k(fisher_scores(xn_train, train_y), k)
        model = mlp_train(xn_train[:, selected], train_y, hidden_sizes=hidden_sizes,
                          seed=sub_seed, epochs=epochs, learning_rate=learning_rate)
        preds = (mlp_predict(model, xn_test[:, selected]) >= 0.5).astype(int)
        rows.append(SweepRow(int(k), evaluate(preds, test_y)))
    return rows


def format_sweep_table(rows: list[SweepRow]) -> str:
    def fmt(v):
        return "n/a" if v is None else f"{v:.4f}"

    lines = ["features\tsensitivity\tspecificity"]
    for row in rows:
        lines.append(f"{row.k}\t{fmt(row.report.sensitivity)}\t{fmt(row.report.specificity)}")
    return "\n".join(lines)

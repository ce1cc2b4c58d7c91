"""Clustering quality measures: Davies-Bouldin index, purity, NMI.

Also the weighted score used to pick the vigilance in a parameter sweep.
"""
from __future__ import annotations

import numpy as np

XI_MAX = 1e6


class MetricError(ValueError):
    pass


def _codes(labels) -> tuple[np.ndarray, int]:
    _, codes = np.unique(np.asarray(labels), return_inverse=True)
    codes = codes.ravel()
    return codes, int(codes.max()) + 1 if codes.size else 0


def contingency(predicted, truth) -> np.ndarray:
    """Counts of (cluster, class) co-occurrences."""
    p, n_p = _codes(predicted)
    t, n_t = _codes(truth)
    if p.size != t.size:
        raise MetricError(f"length mismatch: {p.size} predicted vs {t.size} truth")
    if p.size == 0:
        raise MetricError("empty assignment")
    table = np.zeros((n_p, n_t), dtype=np.int64)
    np.add.at(table, (p, t), 1)
    return table


def dbi(points, predicted) -> float:
    """Davies-Bouldin index (lower is better).

    Scatter is the mean Euclidean distance of a cluster's members to its
    centroid.  Coincident centroids make the index infinite.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    codes, k = _codes(predicted)
    if codes.size != X.shape[0]:
        raise MetricError("points and labels differ in length")
    if k < 2:
        raise MetricError("DBI undefined for fewer than two clusters")
    counts = np.bincount(codes, minlength=k).astype(float)
    centroids = np.zeros((k, X.shape[1]))
    np.add.at(centroids, codes, X)
    centroids /= counts[:, None]
    spread = np.linalg.norm(X - centroids[codes], axis=1)
    scatter = np.bincount(codes, weights=spread, minlength=k) / counts

    sep = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (scatter[:, None] + scatter[None, :]) / sep
    # 0/0 for two coincident zero-scatter clusters is still unseparated
    ratio[sep == 0] = np.inf
    np.fill_diagonal(ratio, -np.inf)
    return float(ratio.max(axis=1).mean())


def purity(predicted, truth) -> float:
    table = contingency(predicted, truth)
    return float(table.max(axis=1).sum() / table.sum())


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(predicted, truth) -> float:
    """Normalized mutual information, ``2 I / (H(pred) + H(truth))``.

    Two trivial partitions (both entropies zero) are treated as identical.
    """
    table = contingency(predicted, truth).astype(float)
    n = table.sum()
    h_p = _entropy(table.sum(axis=1))
    h_t = _entropy(table.sum(axis=0))
    if h_p + h_t == 0:
        return 1.0
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / n**2
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / outer[nz])).sum())
    return float(np.clip(2.0 * mi / (h_p + h_t), 0.0, 1.0))


def _xi(values) -> float:
    sd = float(np.std(values))
    if sd == 0 or 1.0 / sd > XI_MAX:
        return XI_MAX
    return 1.0 / sd


def combined_score(dbi_runs, cp_runs, nmi_runs) -> float:
    """Weighted selection score; each term is scaled by 1/std over the runs."""
    runs = [np.asarray(r, dtype=float) for r in (dbi_runs, cp_runs, nmi_runs)]
    if any(r.size < 2 for r in runs):
        raise MetricError("combined score needs at least two runs per metric")
    d, c, n = runs
    return (
        _xi(d) * float(np.mean(d))
        + _xi(c) * (1.0 - float(np.mean(c)))
        + _xi(n) * (1.0 - float(np.mean(n)))
    )

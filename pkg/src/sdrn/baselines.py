"""Reference competitors: batch k-means and a DRN-like ablation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import SDRN, Hyperparams, InputError


@dataclass(frozen=True)
class KMeansModel:
    k: int
    centroids: np.ndarray
    seed: int
    max_iters: int
    inertia: float
    n_iter: int
    inertia_history: tuple = field(default=(), repr=False)

    def assign(self, x) -> int:
        return kmeans_assign(self, x)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.argmin(_sq_dist(X, self.centroids), axis=1)


def _sq_dist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _plus_plus(X, k, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total == 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def kmeans_fit(data, k: int, seed: int = 0, max_iters: int = 300) -> KMeansModel:
    """Lloyd's algorithm from k-means++ seeding.

    Stops after ``max_iters`` iterations or once no centroid moves by more
    than 1e-9.  An emptied cluster is re-seeded at the point farthest from
    its current centroid.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise InputError("k-means needs at least one point")
    if not 1 <= k <= X.shape[0]:
        raise InputError(f"k={k} must lie in [1, {X.shape[0]}]")
    rng = np.random.default_rng(seed)
    C = _plus_plus(X, k, rng)
    history = []
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        d2 = _sq_dist(X, C)
        labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(X)), labels].sum()))
        new = C.copy()
        closest = d2[np.arange(len(X)), labels]
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = X[members].mean(axis=0)
            else:
                far = int(np.argmax(closest))
                new[j] = X[far]
                closest[far] = 0.0
        shift = np.abs(new - C).max()
        C = new
        if shift < 1e-9:
            break
    d2 = _sq_dist(X, C)
    inertia = float(d2.min(axis=1).sum())
    history.append(inertia)
    return KMeansModel(k, C, seed, max_iters, inertia, n_iter, tuple(history))


def kmeans_assign(model: KMeansModel, x) -> int:
    x = np.asarray(x, dtype=float).ravel()
    return int(np.argmin(((model.centroids - x) ** 2).sum(axis=1)))


class DRNLike(SDRN):
    """Ablation of s-DRN: raw exponential choice function, no node grouping.

    The activation is ``sum_k gamma_k * exp(-alpha * d_k)`` with the raw L1
    distance, so for inputs of large magnitude every activation underflows to
    zero and the winner defaults to the first node.
    """

    def __init__(self, channels, params: Optional[Hyperparams] = None):
        super().__init__(channels, params, grouping=False, normalized=False)


def drn_like_step(state: SDRN, x) -> int:
    if state.normalized or state.grouping_enabled:
        raise InputError("drn_like_step needs a network built with DRNLike")
    return state.train_step(x)

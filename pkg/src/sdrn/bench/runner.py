"""Repeated shuffled trials, vigilance sweeps and input-scale sweeps."""
from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..baselines import DRNLike, kmeans_fit
from ..core import SDRN, ChannelSpec, Hyperparams, InputError
from ..metrics import MetricError, combined_score, dbi, nmi, purity
from . import datasets

log = logging.getLogger(__name__)

ALGORITHMS = ("sdrn", "drn_like", "kmeans")
DEFAULT_RHOS = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_SCALES = tuple(10.0**i for i in range(6))
METRICS = ("dbi", "cp", "nmi")


def normalize_algorithm(name: str) -> str:
    key = name.lower().replace("-", "_")
    if key not in ALGORITHMS:
        raise InputError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    return key


@dataclass
class ExperimentConfig:
    dataset: str
    algorithm: str = "sdrn"
    params: Hyperparams = field(default_factory=Hyperparams)
    trials: int = 100
    seed: int = 0
    split_ratio: float = 0.5
    scale: float = 1.0
    channels: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        self.algorithm = normalize_algorithm(self.algorithm)
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if not 0.0 < self.split_ratio < 1.0:
            raise InputError("split_ratio must lie in (0, 1)")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise InputError("scale must be a positive finite number")
        if self.channels is not None:
            self.channels = tuple(int(c) for c in self.channels)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["params"] = dataclasses.asdict(self.params)
        for key in ("gamma", "lr", "glr"):
            val = out["params"][key]
            if isinstance(val, tuple):
                out["params"][key] = list(val)
        if self.channels is not None:
            out["channels"] = list(self.channels)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["params"] = Hyperparams(**d.get("params", {}))
        if d.get("channels") is not None:
            d["channels"] = tuple(d["channels"])
        return cls(**d)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class Dataset:
    name: str
    X: np.ndarray
    y: np.ndarray
    channels: ChannelSpec

    @classmethod
    def load(cls, name: str, cache_dir=None, offline=False) -> "Dataset":
        X, y, ch = datasets.load(name, cache_dir=cache_dir, offline=offline)
        return cls(datasets.get_spec(name).name, X, y, ch)


@dataclass
class TrialReport:
    """Per-trial metrics and their aggregates.

    ``dbi`` holds NaN for trials with fewer than two clusters; aggregates
    ignore those trials and ``dbi_undefined`` counts them.  Timings are kept
    apart from the metrics so that reports of identical runs compare equal.
    """

    config: dict
    dbi: list
    cp: list
    nmi: list
    n_clusters: list
    wall_time: list = field(default_factory=list)
    step_time: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.cp)
        if not (len(self.dbi) == len(self.nmi) == len(self.n_clusters) == n):
            raise ValueError("per-trial lists differ in length")

    @property
    def n_trials(self) -> int:
        return len(self.cp)

    @property
    def dbi_undefined(self) -> int:
        return int(np.isnan(np.asarray(self.dbi, dtype=float)).sum())

    def values(self, metric: str) -> np.ndarray:
        vals = np.asarray(getattr(self, metric), dtype=float)
        return vals[~np.isnan(vals)]

    def mean(self, metric: str) -> float:
        v = self.values(metric)
        return float(v.mean()) if v.size else float("nan")

    def std(self, metric: str) -> float:
        v = self.values(metric)
        return float(v.std()) if v.size else float("nan")

    def aggregates(self) -> dict:
        out = {}
        for m in METRICS + ("n_clusters",):
            out[m] = {"mean": self.mean(m), "std": self.std(m)}
        out["dbi_undefined"] = self.dbi_undefined
        return out

    def combined_score(self) -> float:
        return combined_score(self.values("dbi"), self.values("cp"), self.values("nmi"))

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "config": self.config,
            "trials": [
                {"trial": t, "dbi": _num(d), "cp": c, "nmi": n, "n_clusters": k}
                for t, (d, c, n, k) in enumerate(
                    zip(self.dbi, self.cp, self.nmi, self.n_clusters)
                )
            ],
            "aggregates": _clean(self.aggregates()),
        }
        if timing:
            out["timing"] = {"wall_time": self.wall_time, "step_time": self.step_time}
        return out

    @classmethod
    def from_dict(cls, d: dict, check: bool = True) -> "TrialReport":
        rows = d["trials"]
        timing = d.get("timing", {})
        rep = cls(
            d["config"],
            [float("nan") if r["dbi"] is None else r["dbi"] for r in rows],
            [r["cp"] for r in rows],
            [r["nmi"] for r in rows],
            [r["n_clusters"] for r in rows],
            list(timing.get("wall_time", [])),
            list(timing.get("step_time", [])),
        )
        if check:
            rep.check_aggregates(d["aggregates"])
        return rep

    def check_aggregates(self, stored: dict, tol: float = 1e-12) -> None:
        fresh = self.aggregates()
        for m in METRICS + ("n_clusters",):
            for stat in ("mean", "std"):
                a, b = stored[m][stat], fresh[m][stat]
                if a is None and np.isnan(b):
                    continue
                if a is None or abs(a - b) > tol * max(1.0, abs(b)):
                    raise ValueError(f"stored {m} {stat} {a} != recomputed {b}")


def _num(x):
    return None if x is None or (isinstance(x, float) and np.isnan(x)) else x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, float):
        return _num(obj)
    return obj


def _safe_dbi(X, labels) -> float:
    try:
        return dbi(X, labels)
    except MetricError:
        return float("nan")


def _make_network(cfg: ExperimentConfig, channels: ChannelSpec) -> SDRN:
    if cfg.algorithm == "sdrn":
        return SDRN(channels, dataclasses.replace(cfg.params))
    return DRNLike(channels, dataclasses.replace(cfg.params))


def run_trials(cfg: ExperimentConfig, data: Optional[Dataset] = None, cache_dir=None,
               offline: bool = False) -> TrialReport:
    """Run ``cfg.trials`` independently shuffled trials.

    Trial ``t`` shuffles with seed ``cfg.seed + t``.  Online algorithms see
    every point once and are then scored on all points.  k-means is fitted on
    the first ``split_ratio`` share of the shuffled data with k set to the
    number of classes, and scored on the remainder.
    """
    if data is None:
        data = Dataset.load(cfg.dataset, cache_dir=cache_dir, offline=offline)
    X = data.X * cfg.scale
    y = data.y
    channels = ChannelSpec(cfg.channels) if cfg.channels else data.channels
    if channels.total_dim != X.shape[1]:
        raise InputError(f"channel split {channels.dims} does not cover {X.shape[1]} features")
    n_classes = len(np.unique(y))
    if cfg.algorithm == "kmeans" and len(X) <= n_classes:
        raise InputError(f"k-means needs more points than classes ({len(X)} <= {n_classes})")

    dbis, cps, nmis, ks, walls, steps = [], [], [], [], [], []
    for t in range(cfg.trials):
        order = np.random.default_rng(cfg.seed + t).permutation(len(X))
        start = time.perf_counter()
        if cfg.algorithm == "kmeans":
            n_train = int(round(cfg.split_ratio * len(X)))
            n_train = min(max(n_train, n_classes), len(X) - 1)
            train, test = order[:n_train], order[n_train:]
            model = kmeans_fit(X[train], n_classes, seed=cfg.seed + t)
            labels = model.predict(X[test])
            Xe, ye = X[test], y[test]
            n_steps = 1
            k = n_classes
        else:
            net = _make_network(cfg, channels)
            for i in order:
                net.train_step(X[i])
            labels = net.predict(X)
            Xe, ye = X, y
            n_steps = len(X)
            k = net.n_nodes
        wall = time.perf_counter() - start
        dbis.append(_safe_dbi(Xe, labels))
        cps.append(purity(labels, ye))
        nmis.append(nmi(labels, ye))
        ks.append(int(k))
        walls.append(wall)
        steps.append(wall / n_steps)
    return TrialReport(cfg.to_dict() | {"dataset": data.name}, dbis, cps, nmis, ks, walls, steps)


@dataclass
class SweepResult:
    parameter: str
    values: list
    reports: list

    def scores(self) -> list:
        out = []
        for rep in self.reports:
            try:
                out.append(rep.combined_score())
            except MetricError:
                out.append(float("nan"))
        return out

    def best(self):
        scores = np.asarray(self.scores(), dtype=float)
        if np.all(np.isnan(scores)):
            return None
        return self.values[int(np.nanargmin(scores))]

    def dbi_std(self) -> float:
        """Spread of mean DBI across the swept values."""
        means = np.array([r.mean("dbi") for r in self.reports], dtype=float)
        means = means[~np.isnan(means)]
        return float(means.std()) if means.size else float("nan")

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "parameter": self.parameter,
            "values": list(self.values),
            "scores": [_num(s) for s in self.scores()],
            "best": self.best(),
            "dbi_std": _num(self.dbi_std()),
            "reports": [r.to_dict(timing) for r in self.reports],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        return cls(d["parameter"], list(d["values"]),
                   [TrialReport.from_dict(r) for r in d["reports"]])


def sweep_vigilance(cfg: ExperimentConfig, rhos: Sequence[float] = DEFAULT_RHOS,
                    data: Optional[Dataset] = None, **load_kw) -> SweepResult:
    if cfg.algorithm == "kmeans":
        raise InputError("vigilance sweeps apply to sdrn and drn_like only")
    if data is None:
        data = Dataset.load(cfg.dataset, **load_kw)
    reports = []
    for rho in rhos:
        params = dataclasses.replace(cfg.params, rho=float(rho))
        log.info("%s %s rho=%.2f", data.name, cfg.algorithm, rho)
        reports.append(run_trials(cfg.replace(params=params), data))
    return SweepResult("rho", [float(r) for r in rhos], reports)


def sweep_scale(cfg: ExperimentConfig, factors: Sequence[float] = DEFAULT_SCALES,
                data: Optional[Dataset] = None, **load_kw) -> SweepResult:
    if data is None:
        data = Dataset.load(cfg.dataset, **load_kw)
    reports = []
    for f in factors:
        log.info("%s %s scale=%g", data.name, cfg.algorithm, f)
        reports.append(run_trials(cfg.replace(scale=float(f)), data))
    return SweepResult("scale", [float(f) for f in factors], reports)

"""Result files: JSON records, a summary table and sweep plot data."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

from .runner import METRICS, SweepResult, TrialReport

RESULTS_FILE = "results.json"
SUMMARY_FILE = "summary.csv"
ALGO_LABELS = {"sdrn": "s-DRN", "drn_like": "DRN-like", "kmeans": "k-means"}


def _split(items) -> tuple[list, list]:
    runs, sweeps = [], []
    for item in items:
        (sweeps if isinstance(item, SweepResult) else runs).append(item)
    return runs, sweeps


def results_dict(items: Iterable, timing: bool = True) -> dict:
    runs, sweeps = _split(items)
    return {
        "runs": [r.to_dict(timing) for r in runs],
        "sweeps": [s.to_dict(timing) for s in sweeps],
    }


def load_results(path) -> list:
    """Parse a results file back into TrialReport / SweepResult objects."""
    path = Path(path)
    if path.is_dir():
        path = path / RESULTS_FILE
    doc = json.loads(path.read_text())
    return [TrialReport.from_dict(r) for r in doc.get("runs", [])] + [
        SweepResult.from_dict(s) for s in doc.get("sweeps", [])
    ]


def _fmt(mean, std) -> str:
    if mean != mean:  # NaN
        return "n/a"
    return f"{mean:.4f} ({std:.4f})"


def summary_rows(reports: list[TrialReport]) -> list[list[str]]:
    """Algorithms as rows, a (DBI, CP, NMI) column triple per dataset."""
    datasets, algos, cells = [], [], {}
    for rep in reports:
        ds, algo = rep.config["dataset"], rep.config["algorithm"]
        if ds not in datasets:
            datasets.append(ds)
        if algo not in algos:
            algos.append(algo)
        cells[(algo, ds)] = rep
    header = ["algorithm"] + [f"{ds} {m.upper()}" for ds in datasets for m in METRICS]
    rows = [header]
    for algo in algos:
        row = [ALGO_LABELS.get(algo, algo)]
        for ds in datasets:
            rep = cells.get((algo, ds))
            for m in METRICS:
                row.append(_fmt(rep.mean(m), rep.std(m)) if rep else "")
        rows.append(row)
    return rows


def plot_rows(sweep: SweepResult) -> list[list]:
    rows = [["metric", sweep.parameter, "mean", "std"]]
    for m in METRICS + ("n_clusters",):
        for x, rep in zip(sweep.values, sweep.reports):
            rows.append([m, x, rep.mean(m), rep.std(m)])
    return rows


def _sweep_name(sweep: SweepResult) -> str:
    cfg = sweep.reports[0].config
    return f"sweep_{cfg['dataset']}_{cfg['algorithm']}_{sweep.parameter}"


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def emit_report(items, out_dir, plots: bool = False, timing: bool = True) -> list[Path]:
    """Write results.json, summary.csv and one plot-data CSV per sweep."""
    items = list(items)
    if not items:
        raise ValueError("nothing to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / RESULTS_FILE
    path.write_text(json.dumps(results_dict(items, timing), indent=1, allow_nan=False))
    written.append(path)

    runs, sweeps = _split(items)
    if runs:
        path = out / SUMMARY_FILE
        _write_csv(path, summary_rows(runs))
        written.append(path)
    for sweep in sweeps:
        path = out / f"{_sweep_name(sweep)}.csv"
        _write_csv(path, plot_rows(sweep))
        written.append(path)
        if plots:
            written.append(_plot(sweep, out / f"{_sweep_name(sweep)}.svg"))
    return written


def _plot(sweep: SweepResult, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, len(METRICS), figsize=(4 * len(METRICS), 3))
    for ax, m in zip(axes, METRICS):
        means = [r.mean(m) for r in sweep.reports]
        stds = [r.std(m) for r in sweep.reports]
        ax.errorbar(sweep.values, means, yerr=stds, marker="o", capsize=3)
        ax.set_xlabel(sweep.parameter)
        ax.set_ylabel(m.upper())
        if sweep.parameter == "scale":
            ax.set_xscale("log")
    cfg = sweep.reports[0].config
    fig.suptitle(f"{cfg['dataset']} / {ALGO_LABELS.get(cfg['algorithm'], cfg['algorithm'])}")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path

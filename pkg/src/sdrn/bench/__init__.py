"""Benchmark harness: datasets, repeated trials, sweeps and reports."""
from .datasets import DATASETS, PAPER_DATASETS, DatasetSpec, fetch_dataset, load_dataset
from .report import emit_report, load_results
from .runner import (
    Dataset,
    ExperimentConfig,
    SweepResult,
    TrialReport,
    run_trials,
    sweep_scale,
    sweep_vigilance,
)

__all__ = [
    "DATASETS",
    "PAPER_DATASETS",
    "Dataset",
    "DatasetSpec",
    "ExperimentConfig",
    "SweepResult",
    "TrialReport",
    "emit_report",
    "fetch_dataset",
    "load_dataset",
    "load_results",
    "run_trials",
    "sweep_scale",
    "sweep_vigilance",
]

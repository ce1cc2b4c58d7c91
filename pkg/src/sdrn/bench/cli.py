"""Command line entry point: ``sdrn-bench``.

Exit codes: 0 success, 1 input or configuration error, 2 dataset acquisition
error, 3 internal error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from ..core import ChannelSpec, Hyperparams, InputError
from . import datasets
from .datasets import DatasetError
from .report import emit_report, load_results, summary_rows
from .runner import (
    DEFAULT_RHOS,
    DEFAULT_SCALES,
    Dataset,
    ExperimentConfig,
    run_trials,
    sweep_scale,
    sweep_vigilance,
)

log = logging.getLogger("sdrn.bench")

EXIT_OK, EXIT_INPUT, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(InputError):
    pass


def _bool(value) -> bool:
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off", ""):
            return False
        raise ValueError(value)
    return bool(value)


# config-file key -> (type, default)
SETTINGS = {
    "dataset": (str, None),
    "algo": (str, "sdrn"),
    "rho": (float, 0.5),
    "tau": (float, 0.85),
    "alpha": (float, 1.0),
    "lr": (float, 1.0),
    "glr": (float, 1.0),
    "trials": (int, 100),
    "seed": (int, 0),
    "scale": (float, 1.0),
    "split_ratio": (float, 0.5),
    "channels": (str, None),
    "out": (str, "results"),
    "offline": (_bool, False),
    "cache_dir": (str, None),
    "data_file": (str, None),
    "delimiter": (str, ","),
    "header": (_bool, False),
    "label_column": (int, -1),
}


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML or JSON file of settings; flags override it")
    p.add_argument("--dataset", help=f"registered dataset ({', '.join(datasets.DATASETS)})")
    p.add_argument("--data-file", help="local delimited file instead of a registered dataset")
    p.add_argument("--delimiter")
    p.add_argument("--header", action="store_true", default=None)
    p.add_argument("--label-column", type=int)
    p.add_argument("--algo", choices=["sdrn", "drn-like", "drn_like", "kmeans"])
    p.add_argument("--rho", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--glr", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--scale", type=float)
    p.add_argument("--split-ratio", type=float)
    p.add_argument("--channels", help="channel sizes, e.g. 2,2")
    p.add_argument("--out", help="output directory")
    p.add_argument("--offline", action="store_true", default=None)
    p.add_argument("--cache-dir")
    p.add_argument("--plots", action="store_true", help="also write SVG plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdrn-bench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and verify a dataset")
    p.add_argument("name", help="dataset name or 'all'")
    p.add_argument("--offline", action="store_true", default=None)
    p.add_argument("--cache-dir")

    p = sub.add_parser("run", help="repeated shuffled trials")
    _add_experiment_flags(p)

    p = sub.add_parser("sweep-vigilance", help="trials for each vigilance value")
    _add_experiment_flags(p)
    p.add_argument("--rhos", type=_floats, default=list(DEFAULT_RHOS))

    p = sub.add_parser("sweep-scale", help="trials for each input scale factor")
    _add_experiment_flags(p)
    p.add_argument("--factors", type=_floats, default=list(DEFAULT_SCALES))

    p = sub.add_parser("report", help="re-emit tables and plot data from results.json")
    p.add_argument("results", nargs="+", help="results.json files or directories holding one")
    p.add_argument("--out", default=None)
    p.add_argument("--plots", action="store_true")
    return parser


def read_config(path) -> dict:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a flat mapping")
    out = {}
    for key, value in doc.items():
        key = str(key).replace("-", "_")
        if key == "algorithm":
            key = "algo"
        if key not in SETTINGS:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, (dict, list)) and key != "channels":
            raise ConfigError(f"config key {key!r} must be a scalar")
        out[key] = value
    return out


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = {k: default for k, (_, default) in SETTINGS.items()}
    if getattr(args, "config", None):
        settings.update(read_config(args.config))
    for key in SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    for key, (kind, _) in SETTINGS.items():
        value = settings[key]
        if value is None:
            continue
        if key == "channels" and isinstance(value, list):
            settings[key] = ",".join(str(v) for v in value)
            continue
        try:
            settings[key] = kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if settings["dataset"] is None and settings["data_file"] is None:
        raise ConfigError("either --dataset or --data-file is required")
    return settings


def experiment_from_settings(s: dict) -> tuple[ExperimentConfig, Dataset]:
    channels = None
    if s["channels"]:
        channels = tuple(int(c) for c in str(s["channels"]).split(",") if c.strip())
    params = Hyperparams(rho=s["rho"], tau=s["tau"], alpha=s["alpha"], lr=s["lr"], glr=s["glr"])
    if s["data_file"]:
        spec = datasets.local_spec(
            s["data_file"], s["label_column"], s["delimiter"], s["header"], name=s["dataset"]
        )
        X, y, layout = datasets.load_local(s["data_file"], spec, channels)
        data = Dataset(spec.name, X, y, layout)
    else:
        data = Dataset.load(s["dataset"], cache_dir=s["cache_dir"], offline=s["offline"])
    cfg = ExperimentConfig(
        dataset=data.name,
        algorithm=s["algo"],
        params=params,
        trials=s["trials"],
        seed=s["seed"],
        split_ratio=s["split_ratio"],
        scale=s["scale"],
        channels=channels,
    )
    params.validate(ChannelSpec(channels) if channels else data.channels)
    return cfg, data


def _print_summary(reports) -> None:
    for row in summary_rows(reports):
        print("  ".join(row))


def cmd_fetch(args) -> int:
    names = datasets.PAPER_DATASETS if args.name == "all" else [args.name]
    failed = 0
    for name in names:
        try:
            path = datasets.fetch_dataset(name, args.cache_dir, bool(args.offline))
            print(f"{name}: {path}")
        except DatasetError as exc:
            print(f"{name}: FAILED: {exc}", file=sys.stderr)
            failed += 1
    return EXIT_DATA if failed else EXIT_OK


def cmd_run(args) -> int:
    s = resolve_settings(args)
    cfg, data = experiment_from_settings(s)
    report = run_trials(cfg, data)
    files = emit_report([report], s["out"], plots=args.plots)
    _print_summary([report])
    print(f"mean clusters {report.mean('n_clusters'):.1f}; wrote {', '.join(map(str, files))}")
    return EXIT_OK


def cmd_sweep(args, kind: str) -> int:
    s = resolve_settings(args)
    cfg, data = experiment_from_settings(s)
    if kind == "rho":
        sweep = sweep_vigilance(cfg, args.rhos, data=data)
    else:
        sweep = sweep_scale(cfg, args.factors, data=data)
    files = emit_report([sweep], s["out"], plots=args.plots)
    for x, rep, score in zip(sweep.values, sweep.reports, sweep.scores()):
        print(
            f"{sweep.parameter}={x:g}  DBI {rep.mean('dbi'):.4f}  CP {rep.mean('cp'):.4f}  "
            f"NMI {rep.mean('nmi'):.4f}  clusters {rep.mean('n_clusters'):.1f}  score {score:.4g}"
        )
    if kind == "rho":
        print(f"best rho {sweep.best()}; std of mean DBI over rho {sweep.dbi_std():.4f}")
    print(f"wrote {', '.join(map(str, files))}")
    return EXIT_OK


def cmd_report(args) -> int:
    items = []
    for path in args.results:
        items.extend(load_results(path))
    out = args.out or str(Path(args.results[0]).parent if Path(args.results[0]).is_file()
                          else args.results[0])
    files = emit_report(items, out, plots=args.plots)
    runs = [i for i in items if hasattr(i, "cp")]
    if runs:
        _print_summary(runs)
    print(f"wrote {', '.join(map(str, files))}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "fetch":
            return cmd_fetch(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep-vigilance":
            return cmd_sweep(args, "rho")
        if args.command == "sweep-scale":
            return cmd_sweep(args, "scale")
        return cmd_report(args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

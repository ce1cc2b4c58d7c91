"""Benchmark dataset registry, download cache and loader.

Files are cached under ``$SDRN_DATA`` (default ``~/.cache/sdrn``).  A cached
file is verified against the source checksum when one is known; otherwise
the digest recorded on first download (``<file>.sha256``) is used.  Writes
are serialized with a lock file so concurrent fetches of the same dataset
leave exactly one intact copy.

Feature scales are never normalized here.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import logging
import os
import urllib.error
import urllib.request
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from filelock import FileLock

from ..core import ChannelSpec

log = logging.getLogger(__name__)

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
KEEL_WHEEL = (
    "https://files.pythonhosted.org/packages/77/88/"
    "c99136c61bb85663bd8cfb328fada55846eb10bd7271058160526e9674bf/"
    "keel_ds-0.2.5-py3-none-any.whl"
)


class DatasetError(RuntimeError):
    """Dataset could not be obtained or failed verification."""


class ChecksumError(DatasetError):
    pass


class DataFormatError(ValueError):
    """A data file could not be parsed."""


@dataclass(frozen=True)
class Source:
    """One place a dataset file can come from.

    ``member`` names a file inside a zip archive at ``url``.  ``generator``
    names a function in GENERATORS that writes the file from its documented
    construction rule.
    """

    url: Optional[str] = None
    sha256: Optional[str] = None
    member: Optional[str] = None
    generator: Optional[str] = None

    def describe(self) -> str:
        if self.generator:
            return f"generator:{self.generator}"
        return self.url + (f"!{self.member}" if self.member else "")


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    source_url: Optional[str]
    checksum: Optional[str]
    filename: str
    label_columns: tuple[int, ...] = (-1,)
    feature_columns: Optional[tuple[int, ...]] = None
    delimiter: str = ","
    header: bool = False
    categorical_encoding: Mapping[int, Mapping[str, float]] = field(default_factory=dict)
    channel_split: Optional[ChannelSpec] = None
    mirrors: tuple[Source, ...] = ()
    notes: str = ""

    def __post_init__(self):
        if isinstance(self.label_columns, int):
            object.__setattr__(self, "label_columns", (self.label_columns,))
        if self.feature_columns is not None:
            object.__setattr__(self, "feature_columns", tuple(self.feature_columns))

    @property
    def sources(self) -> tuple[Source, ...]:
        primary = ()
        if self.source_url:
            primary = (Source(self.source_url, self.checksum),)
        return primary + tuple(self.mirrors)

    def resolve_columns(self, n_cols: int) -> tuple[list[int], list[int]]:
        labels = [c % n_cols for c in self.label_columns]
        if self.feature_columns is None:
            features = [c for c in range(n_cols) if c not in labels]
        else:
            features = [c % n_cols for c in self.feature_columns]
        if set(features) & set(labels):
            raise DataFormatError(f"{self.name}: feature and label columns overlap")
        return features, labels


def _balance_scale() -> bytes:
    # 625 rows: every (left weight, left distance, right weight, right distance)
    # in 1..5; the heavier torque side wins, equal torque balances.
    lines = []
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        cls = "L" if left > right else "R" if right > left else "B"
        lines.append(f"{cls},{lw},{ld},{rw},{rd}\n")
    return "".join(lines).encode()


GENERATORS = {"balance_scale": _balance_scale}

_ORDINAL = {"low": 0, "med": 1, "high": 2, "vhigh": 3}
CAR_ENCODING = {
    0: _ORDINAL,
    1: _ORDINAL,
    2: {"2": 2, "3": 3, "4": 4, "5more": 5},
    3: {"2": 2, "4": 4, "more": 5},
    4: {"small": 0, "med": 1, "big": 2},
    5: {"low": 0, "med": 1, "high": 2},
}

DATASETS: dict[str, DatasetSpec] = {
    spec.name: spec
    for spec in [
        DatasetSpec(
            "balance_scale",
            f"{UCI}/balance-scale/balance-scale.data",
            None,
            "balance-scale.data",
            label_columns=(0,),
            mirrors=(
                Source(
                    generator="balance_scale",
                    sha256="5611187ef7345d807aa8ae22615945ade52a190537c0b1434bd44c3e877c5bb4",
                ),
            ),
            notes="625 x 4 integer features, classes L/B/R.",
        ),
        DatasetSpec(
            "liver_disorders",
            f"{UCI}/liver-disorders/bupa.data",
            None,
            "bupa.data",
            label_columns=(5,),
            feature_columns=(0, 1, 2, 3, 4),
            mirrors=(
                Source(
                    KEEL_WHEEL,
                    "62f04d8e65dcea739d1ed5ef325e27566c2c975242a561cedbce4966c407237b",
                    member="keel_ds/data/balanced/raw/bupa.dat",
                ),
            ),
            notes="Five blood tests; class = drinks per day. The selector column is dropped.",
        ),
        DatasetSpec(
            "blood_transfusion",
            f"{UCI}/blood-transfusion/transfusion.data",
            None,
            "transfusion.data",
            header=True,
            notes="748 x 4, binary donation label.",
        ),
        DatasetSpec(
            "banknote",
            f"{UCI}/00267/data_banknote_authentication.txt",
            None,
            "data_banknote_authentication.txt",
            notes="1372 x 4 wavelet features, binary label.",
        ),
        DatasetSpec(
            "car_evaluation",
            f"{UCI}/car/car.data",
            None,
            "car.data",
            categorical_encoding=CAR_ENCODING,
            notes="1728 x 6 ordinal features, four acceptability classes.",
        ),
        DatasetSpec(
            "wholesale_customers",
            f"{UCI}/00292/Wholesale%20customers%20data.csv",
            None,
            "wholesale-customers.csv",
            label_columns=(0, 1),
            feature_columns=(2, 3, 4, 5, 6, 7),
            header=True,
            notes="440 x 6 annual spending; class = (channel, region) pair.",
        ),
    ]
}

PAPER_DATASETS = (
    "balance_scale",
    "liver_disorders",
    "blood_transfusion",
    "banknote",
    "car_evaluation",
    "wholesale_customers",
)


def get_spec(name: str) -> DatasetSpec:
    key = name.lower().replace("-", "_")
    if key not in DATASETS:
        raise KeyError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}")
    return DATASETS[key]


def default_cache_dir() -> Path:
    return Path(os.environ.get("SDRN_DATA", Path.home() / ".cache" / "sdrn"))


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def download(url: str, timeout: float = 30.0) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def _retrieve(source: Source, timeout: float) -> bytes:
    if source.generator:
        return GENERATORS[source.generator]()
    data = download(source.url, timeout=timeout)
    if source.member:
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            data = zf.read(source.member)
    return data


def _recorded_digest(path: Path) -> Optional[str]:
    sidecar = path.with_name(path.name + ".sha256")
    if sidecar.exists():
        return sidecar.read_text().strip() or None
    return None


def _verified(spec: DatasetSpec, path: Path) -> bool:
    if not path.exists():
        return False
    actual = sha256_file(path)
    recorded = _recorded_digest(path)
    if recorded is not None:
        return actual == recorded
    known = {s.sha256 for s in spec.sources if s.sha256}
    return not known or actual in known


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def fetch_dataset(
    spec: DatasetSpec | str,
    cache_dir=None,
    offline: bool = False,
    timeout: float = 30.0,
) -> Path:
    """Return the path of a verified local copy of ``spec``'s data file.

    Sources are tried in order until one can be retrieved.  A retrieved file
    whose digest does not match its source's checksum is a hard error.
    """
    if isinstance(spec, str):
        spec = get_spec(spec)
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cache.mkdir(parents=True, exist_ok=True)
    path = cache / spec.filename
    sidecar = path.with_name(path.name + ".sha256")

    with FileLock(str(path) + ".lock"):
        if _verified(spec, path):
            return path
        if path.exists():
            if offline:
                raise ChecksumError(f"{path} failed checksum verification (offline)")
            log.warning("cached %s failed verification; downloading again", path)
            path.unlink()
            sidecar.unlink(missing_ok=True)
        elif offline:
            raise DatasetError(f"{spec.name}: not cached at {path} and offline mode is on")

        errors = []
        for source in spec.sources:
            try:
                data = _retrieve(source, timeout)
            except (urllib.error.URLError, OSError, KeyError, zipfile.BadZipFile) as exc:
                errors.append(f"{source.describe()}: {exc}")
                continue
            digest = sha256_bytes(data)
            if source.sha256 and digest != source.sha256:
                raise ChecksumError(
                    f"{spec.name}: checksum mismatch for {source.describe()} "
                    f"(expected {source.sha256}, got {digest})"
                )
            _write_atomic(path, data)
            sidecar.write_text(digest + "\n")
            log.info("fetched %s from %s", spec.name, source.describe())
            return path
        raise DatasetError(f"{spec.name}: no source reachable:\n  " + "\n  ".join(errors))


def _label_key(value: str) -> str:
    # "1", "1.0" and "01" name the same class
    try:
        f = float(value)
    except ValueError:
        return value
    return str(int(f)) if f.is_integer() else repr(f)


def load_dataset(path, spec: DatasetSpec) -> tuple[np.ndarray, np.ndarray]:
    """Parse a delimited file into a float feature matrix and string labels.

    Composite labels (several label columns) are joined with ``|``.
    """
    text = Path(path).read_text()
    rows = [
        [cell.strip() for cell in row]
        for row in csv.reader(io.StringIO(text), delimiter=spec.delimiter)
        if row and any(cell.strip() for cell in row)
    ]
    if spec.header and rows:
        rows = rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    n_cols = len(rows[0])
    features, labels = spec.resolve_columns(n_cols)
    X = np.empty((len(rows), len(features)))
    y = []
    for r, row in enumerate(rows):
        line = r + 1 + int(spec.header)
        if len(row) != n_cols:
            raise DataFormatError(f"{path}: line {line} has {len(row)} fields, expected {n_cols}")
        for out, c in enumerate(features):
            cell = row[c]
            mapping = spec.categorical_encoding.get(c)
            try:
                X[r, out] = mapping[cell] if mapping is not None else float(cell)
            except (KeyError, ValueError):
                raise DataFormatError(
                    f"{path}: line {line}, column {c}: cannot encode {cell!r}"
                ) from None
        y.append("|".join(_label_key(row[c]) for c in labels))
    if not np.all(np.isfinite(X)):
        raise DataFormatError(f"{path}: non-finite feature values")
    return X, np.asarray(y)


def load(
    name_or_spec,
    cache_dir=None,
    offline: bool = False,
) -> tuple[np.ndarray, np.ndarray, ChannelSpec]:
    """Fetch and load a registered dataset: (features, labels, channel layout)."""
    spec = get_spec(name_or_spec) if isinstance(name_or_spec, str) else name_or_spec
    X, y = load_dataset(fetch_dataset(spec, cache_dir, offline), spec)
    channels = spec.channel_split or ChannelSpec.single(X.shape[1])
    if channels.total_dim != X.shape[1]:
        raise DataFormatError(
            f"{spec.name}: channel split {channels.dims} does not cover {X.shape[1]} features"
        )
    return X, y, channels


def local_spec(
    path,
    label_column: int = -1,
    delimiter: str = ",",
    header: bool = False,
    name: Optional[str] = None,
) -> DatasetSpec:
    """Spec for an arbitrary local delimited file (no download)."""
    path = Path(path)
    return DatasetSpec(
        name or path.stem,
        None,
        None,
        path.name,
        label_columns=(label_column,),
        delimiter=delimiter,
        header=header,
    )


def load_local(path, spec: DatasetSpec, channels: Optional[Sequence[int]] = None):
    X, y = load_dataset(path, spec)
    layout = ChannelSpec(tuple(channels)) if channels else ChannelSpec.single(X.shape[1])
    if layout.total_dim != X.shape[1]:
        raise DataFormatError(f"channel split {layout.dims} does not cover {X.shape[1]} features")
    return X, y, layout

"""CSV ingestion and sample-archive serialization.

Archives are comma-separated text with a header row naming each parameter
coordinate, one row per posterior sample, plus a JSON sidecar
(``<archive>.meta.json``) holding the resolved configuration, seeds,
per-sample objectives and restart indices, failures, and timings. Floats
are written with 17 significant digits so a read-back reproduces the
in-memory matrix exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .sampler import PosteriorSamples

__all__ = [
    "ingest_csv",
    "standardize_columns",
    "write_archive",
    "read_archive",
    "metadata_path",
]


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def ingest_csv(
    path,
    kind: str = "features",
    label_column: str | None = None,
    standardize: bool = False,
) -> tuple[np.ndarray, list[str]]:
    """Parse a headed CSV into an atom array.

    ``kind="features"`` keeps every column as a coordinate. With
    ``kind="labeled"``, the named label column (which must hold only 0/1)
    is moved to coordinate 0 and the remaining columns follow in file
    order. Standardization rescales every non-label column to mean 0 and
    standard deviation 1; a constant column is an error. Any non-numeric
    cell is reported with its row and column.
    """
    if kind not in ("features", "labeled"):
        raise DataFormatError(f"unknown data kind {kind!r}")
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"data file not found: {path}")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: row {line_no} has {len(row)} cells, header has "
                    f"{len(header)}"
                )
            values = []
            for col, cell in zip(header, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: non-numeric cell at row {line_no}, "
                        f"column {col!r}: {cell!r}"
                    )
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    data = np.array(rows)

    if kind == "labeled":
        if label_column is None:
            raise DataFormatError("labeled data needs a label_column")
        if label_column not in header:
            raise DataFormatError(
                f"label column {label_column!r} not in header {header}"
            )
        label_idx = header.index(label_column)
        labels = data[:, label_idx]
        bad = np.nonzero(~np.isin(labels, (0.0, 1.0)))[0]
        if bad.size:
            raise DataFormatError(
                f"{path}: label not in {{0, 1}} at data row {bad[0] + 1}"
            )
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        features = data[:, feature_idx]
        if standardize:
            features = standardize_columns(
                features, [header[i] for i in feature_idx]
            )
        atoms = np.column_stack([labels, features])
        columns = [label_column] + [header[i] for i in feature_idx]
        return atoms, columns

    if standardize:
        data = standardize_columns(data, header)
    return data, header


def standardize_columns(data: np.ndarray, names: list[str]) -> np.ndarray:
    """Center and scale each column to mean 0, standard deviation 1."""
    sd = data.std(axis=0)
    constant = np.nonzero(sd == 0)[0]
    if constant.size:
        raise DataFormatError(
            f"cannot standardize constant column {names[constant[0]]!r}"
        )
    return (data - data.mean(axis=0)) / sd


def metadata_path(archive_path) -> Path:
    return Path(str(archive_path) + ".meta.json")


def write_archive(path, result: PosteriorSamples, extra_metadata: dict | None = None):
    """Write sample rows as full-precision CSV plus the JSON sidecar."""
    path = Path(path)
    names = result.metadata.get("param_names")
    if not names or len(names) != result.param_dim:
        names = [f"theta_{i + 1}" for i in range(result.param_dim)]
    lines = [",".join(names)]
    lines.extend(",".join(_fmt(v) for v in row) for row in result.samples)
    path.write_text("\n".join(lines) + "\n")

    sidecar = {
        "metadata": _jsonable(result.metadata),
        "objectives": [float(v) for v in result.objectives],
        "restart_indices": [int(v) for v in result.restart_indices],
        "sample_indices": [int(v) for v in result.sample_indices],
        "failures": [[int(i), str(m)] for i, m in result.failures],
    }
    if extra_metadata:
        sidecar["config"] = _jsonable(extra_metadata)
    metadata_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def read_archive(path) -> tuple[np.ndarray, list[str], dict]:
    """Read back ``(matrix, column names, sidecar)``; sidecar may be empty."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"archive not found: {path}")
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty archive")
        rows = [[float(cell) for cell in row] for row in reader if row]
    if not rows:
        raise DataFormatError(f"{path}: archive has no sample rows")
    sidecar = {}
    meta_file = metadata_path(path)
    if meta_file.exists():
        sidecar = json.loads(meta_file.read_text())
    return np.array(rows), header, sidecar


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj

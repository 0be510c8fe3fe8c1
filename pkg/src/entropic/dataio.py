"""Datasets: CSV ingestion, a seeded Gaussian-mixture generator, and
permutation-matched clustering error.

Synthetic sampling is pinned so any implementation can reproduce it:

1. ``rng = numpy.random.default_rng(seed)`` (PCG64).
2. For each cluster in order, ``m = count * D`` standard normals come
   from ``ceil(m / 2)`` Box-Muller pairs.  ``u1 = rng.random(pairs)``
   then ``u2 = rng.random(pairs)``; ``r = sqrt(-2 ln(1 - u1))``,
   ``theta = 2 pi u2``; the stream is ``r0 cos0, r0 sin0, r1 cos1, ...``
   truncated to ``m`` and laid out row-major as ``count x D``.  Rows are
   ``center + stddev * z``.
3. Noise columns are then drawn for all rows at once,
   ``low + (high - low) * rng.random((n, noise_dims))``.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .trace import format_value

__all__ = [
    "DataError",
    "Dataset",
    "GaussianCluster",
    "SyntheticSpec",
    "default300_spec",
    "error_rate",
    "generate_synthetic",
    "load_csv",
    "write_dataset_csv",
]

MAX_MATCH_CLUSTERS = 8


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(eq=False)
class Dataset:
    rows: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DataError(f"dataset needs a non-empty n x D table, got shape {rows.shape}")
        self.rows = rows
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (rows.shape[0],):
                raise DataError(f"{rows.shape[0]} rows but {labels.size} labels")
            self.labels = labels

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.rows.shape != other.rows.shape or not np.array_equal(self.rows, other.rows):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)


@dataclass(frozen=True)
class GaussianCluster:
    center: tuple[float, ...]
    stddev: float
    count: int


@dataclass(frozen=True)
class SyntheticSpec:
    clusters: tuple[GaussianCluster, ...]
    noise_dims: int = 0
    noise_interval: tuple[float, float] = (-1.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if not self.clusters:
            raise DataError("synthetic spec needs at least one cluster")
        dims = {len(c.center) for c in self.clusters}
        if len(dims) != 1 or 0 in dims:
            raise DataError("all cluster centers must share one positive dimensionality")
        for c in self.clusters:
            if c.count < 1:
                raise DataError(f"cluster count must be >= 1, got {c.count}")
            if not (c.stddev >= 0 and math.isfinite(c.stddev)):
                raise DataError(f"cluster stddev must be finite and >= 0, got {c.stddev}")
        if self.noise_dims < 0:
            raise DataError("noise_dims must be >= 0")
        low, high = self.noise_interval
        if not low < high:
            raise DataError(f"noise interval needs low < high, got {self.noise_interval}")
        if self.seed < 0:
            raise DataError("seed must be unsigned")

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        """Build from the JSON layout accepted by ``entropic generate --spec``::

            {"clusters": [{"center": [0, 0, 0], "stddev": 0.5, "count": 100}, ...],
             "noise_dims": 0, "noise_interval": [-1, 1], "seed": 1}
        """
        try:
            clusters = tuple(
                GaussianCluster(
                    tuple(float(x) for x in c["center"]), float(c["stddev"]), int(c["count"])
                )
                for c in d["clusters"]
            )
            return cls(
                clusters,
                int(d.get("noise_dims", 0)),
                tuple(float(x) for x in d.get("noise_interval", (-1.0, 1.0))),
                int(d.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"malformed synthetic spec: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "SyntheticSpec":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read spec {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise DataError("synthetic spec must be a JSON object")
        return cls.from_dict(payload)


def default300_spec(noise_dims: int = 0, seed: int = 1) -> SyntheticSpec:
    """Three well separated Gaussians in R^3, 100 points each, stddev 0.5."""
    centers = [(0.0, 0.0, 0.0), (4.0, 4.0, 0.0), (0.0, 4.0, 4.0)]
    return SyntheticSpec(
        tuple(GaussianCluster(c, 0.5, 100) for c in centers), noise_dims=noise_dims, seed=seed
    )


def _standard_normals(rng: np.random.Generator, m: int) -> np.ndarray:
    pairs = (m + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:m]


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    blocks, labels = [], []
    for k, c in enumerate(spec.clusters):
        center = np.asarray(c.center, dtype=float)
        z = _standard_normals(rng, c.count * center.size).reshape(c.count, center.size)
        blocks.append(center + c.stddev * z)
        labels.append(np.full(c.count, k, dtype=np.int64))
    rows = np.vstack(blocks)
    if spec.noise_dims:
        low, high = spec.noise_interval
        noise = low + (high - low) * rng.random((rows.shape[0], spec.noise_dims))
        rows = np.hstack([rows, noise])
    return Dataset(rows, np.concatenate(labels))


def load_csv(path, has_header: bool = False, label_column: int | None = None) -> Dataset:
    """Read comma-separated numeric rows.

    ``label_column`` (0-based, negative indexes from the end) is split off
    as integer labels.  Errors name the offending line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows, labels = [], []
    width = None
    reader = csv.reader(text.splitlines())
    for lineno, fields in enumerate(reader, start=1):
        if has_header and lineno == 1:
            continue
        if not fields or all(not f.strip() for f in fields):
            continue
        if width is None:
            width = len(fields)
            if label_column is not None and not -width <= label_column < width:
                raise DataError(f"label column {label_column} out of range for {width} columns")
        elif len(fields) != width:
            raise DataError(f"line {lineno}: expected {width} fields, got {len(fields)}")
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric field in {','.join(fields)!r}") from None
        if label_column is not None:
            lab = values.pop(label_column % width)
            if lab != int(lab):
                raise DataError(f"line {lineno}: label {lab} is not an integer")
            labels.append(int(lab))
        rows.append(values)
    if not rows:
        raise DataError(f"{path} contains no data rows")
    if not rows[0]:
        raise DataError(f"{path} has no feature columns")
    return Dataset(np.array(rows), np.array(labels) if label_column is not None else None)


def write_dataset_csv(ds: Dataset, path, header: bool = False) -> None:
    """Write features (and labels as the last column, if present)."""
    lines = []
    if header:
        names = [f"x{i}" for i in range(ds.dim)] + (["label"] if ds.labels is not None else [])
        lines.append(",".join(names))
    for i, row in enumerate(ds.rows):
        cells = [format_value(v) for v in row]
        if ds.labels is not None:
            cells.append(str(int(ds.labels[i])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def error_rate(assignment, labels: Sequence[int]) -> float:
    """Fraction of misassigned rows under the best cluster-to-label bijection.

    ``assignment`` may be a Partition or a bare index vector.  Bijections
    are searched exhaustively, so at most 8 clusters/labels are accepted.
    """
    a = np.asarray(getattr(assignment, "assignment", assignment), dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if a.shape != y.shape:
        raise DataError(f"{a.size} assignments but {y.size} labels")
    if a.size == 0:
        raise DataError("cannot score an empty assignment")
    if a.min() < 0 or y.min() < 0:
        raise DataError("cluster and label indices must be non-negative")
    size = max(int(a.max()), int(y.max())) + 1
    if size > MAX_MATCH_CLUSTERS:
        raise DataError(f"bijection search limited to {MAX_MATCH_CLUSTERS} clusters, got {size}")
    confusion = np.zeros((size, size), dtype=np.int64)
    np.add.at(confusion, (a, y), 1)
    cols = np.arange(size)
    best = max(int(confusion[cols, perm].sum()) for perm in itertools.permutations(range(size)))
    return 1.0 - best / a.size

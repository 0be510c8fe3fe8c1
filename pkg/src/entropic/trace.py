"""Per-iteration run records shared by every engine, plus CSV/JSON writers.

Files are written with ``repr``-style floats (shortest round-trip form),
``\\n`` line endings and no locale dependence, so a fixed seed produces
byte-identical output.  Wall-clock time is kept in ``metadata`` only and
never written to the data files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

KINDS = ("learning", "selforg", "explore")


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if f == 0.0:
        f = 0.0  # drop the sign of -0.0
    return repr(f)


def write_csv(path, columns: Sequence[str], rows) -> None:
    lines = [",".join(columns)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False)
    Path(path).write_text(text + "\n", encoding="ascii", newline="\n")


@dataclass
class RunTrace:
    """Ordered records of one engine run.

    ``columns`` names the fields of every record; the schema depends on
    ``kind``:

    * ``learning``: ``t, loss, distance, entropy_shannon, entropy_renyi_<a>..., rate``
    * ``selforg``: ``generation, best_objective``
    * ``explore``: ``t, x, y, z, entropy``
    """

    kind: str
    columns: tuple[str, ...]
    records: list[tuple] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown trace kind {self.kind!r}")
        self.columns = tuple(self.columns)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.records.append(tuple(values))

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.records])

    def last(self, name: str):
        return self.records[-1][self.columns.index(name)]

    def to_csv(self, path) -> None:
        if not self.records:
            raise ValueError("refusing to write an empty trace")
        write_csv(path, self.columns, self.records)

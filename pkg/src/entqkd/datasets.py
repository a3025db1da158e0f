"""Column datasets written as CSV for external plotting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class Dataset:
    columns: tuple[str, ...]
    data: np.ndarray  # float array of shape (rows, len(columns))

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.data = np.asarray(self.data, dtype=float).reshape(-1, len(self.columns))

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.data:
            writer.writerow([repr(float(v)) for v in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def write_rows(fh, header: Sequence[str], rows) -> None:
    """RFC 4180 CSV with a header row (quoting only where needed)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def read_csv(fh) -> Dataset:
    reader = csv.reader(fh)
    header = next(reader)
    rows = [[float(v) for v in r] for r in reader if r]
    return Dataset(tuple(header), np.array(rows, dtype=float).reshape(-1, len(header)))

"""Rectangular numeric datasets and their CSV representation.

Columns are float64 throughout; discrete variables are stored as
integer-coded reals and flagged in the metadata.  The CSV dialect is
comma-separated UTF-8 with a header row, ``.`` decimal point, and no quoting
of numeric fields.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np


class DataError(Exception):
    pass


class CsvParseError(DataError):
    """Malformed CSV; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Dataset:
    """An n x D table with per-column metadata.

    ``target`` names the column to be predicted; it may be left unset for
    data that is only augmented, but learning entry points require it.
    """

    columns: tuple[str, ...]
    values: np.ndarray  # (n, D) float64
    discrete: tuple[bool, ...]
    target: str | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(self.columns):
            raise DataError(
                f"values must be 2-D with {len(self.columns)} columns, got shape {vals.shape}"
            )
        if len(self.discrete) != len(self.columns):
            raise DataError("discrete flags must align with columns")
        if len(set(self.columns)) != len(self.columns):
            raise DataError("duplicate column names")
        if self.target is not None and self.target not in self.columns:
            raise DataError(f"target column {self.target!r} not in columns")
        if not np.all(np.isfinite(vals)):
            raise DataError("values must be finite (no missing entries)")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise DataError(f"no column named {name!r}") from None

    @property
    def target_index(self) -> int:
        if self.target is None:
            raise DataError("dataset has no designated target column")
        return self.column_index(self.target)

    def feature_columns(self) -> tuple[str, ...]:
        t = self.target_index
        return tuple(c for i, c in enumerate(self.columns) if i != t)

    def feature_matrix(self) -> np.ndarray:
        t = self.target_index
        keep = [i for i in range(self.d) if i != t]
        return self.values[:, keep]

    def target_vector(self) -> np.ndarray:
        return self.values[:, self.target_index]

    def take_rows(self, rows: Sequence[int]) -> "Dataset":
        return replace(self, values=self.values[np.asarray(rows, dtype=np.intp)])


def make_dataset(
    columns: Sequence[str],
    values,
    discrete: Iterable[str] = (),
    target: str | None = None,
) -> Dataset:
    """Convenience constructor taking discrete columns by name."""
    columns = tuple(columns)
    discrete = set(discrete)
    unknown = discrete - set(columns)
    if unknown:
        raise DataError(f"discrete names not in columns: {sorted(unknown)}")
    return Dataset(
        columns=columns,
        values=np.asarray(values, dtype=np.float64),
        discrete=tuple(c in discrete for c in columns),
        target=target,
    )


def parse_csv_text(
    text: str, discrete: Iterable[str] = (), target: str | None = None
) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvParseError(1, "empty file") from None
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise CsvParseError(1, "empty column name in header")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise CsvParseError(
                lineno, f"expected {len(header)} fields, got {len(rec)}"
            )
        try:
            rows.append([float(tok) for tok in rec])
        except ValueError as exc:
            raise CsvParseError(lineno, str(exc)) from None
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    try:
        return make_dataset(header, values, discrete=discrete, target=target)
    except DataError as exc:
        raise CsvParseError(1, str(exc)) from None


def load_csv(path: str, discrete: Iterable[str] = (), target: str | None = None) -> Dataset:
    with open(path, encoding="utf-8") as f:
        return parse_csv_text(f.read(), discrete=discrete, target=target)


def format_float(x: float) -> str:
    """Shortest decimal that round-trips the float64 exactly."""
    return repr(float(x))


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow(list(row))
    atomic_write_text(path, buf.getvalue())


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    import os
    import tempfile

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise

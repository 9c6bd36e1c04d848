"""Dataset ingestion and the bundled annual-maximum rainfall series."""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np


class DataError(ValueError):
    """Unreadable, empty, or malformed input data."""


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    years: np.ndarray | None = None
    name: str = ""
    units: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise DataError("dataset is empty")
        if not np.all(np.isfinite(v)):
            raise DataError("dataset contains non-finite values")
        object.__setattr__(self, "values", v)
        if self.years is not None:
            y = np.asarray(self.years, dtype=int)
            if y.size != v.size:
                raise DataError("year and value columns have different lengths")
            object.__setattr__(self, "years", y)
        if v.size < 20:
            warnings.warn(f"only {v.size} observations; estimates for n < 20 "
                          "are unreliable", RuntimeWarning)

    @property
    def n(self) -> int:
        return self.values.size


def _is_numeric(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def ingest(path, fmt: str | None = None, name: str | None = None) -> Dataset:
    """Read a dataset from a text file.

    Formats: ``csv_single_column`` (one value per line) and ``csv_year_value``
    (two comma-separated columns, year then value).  When ``fmt`` is None the
    format is inferred from the first data row.  A non-numeric first line is
    treated as a header; lines starting with '#' are comments.
    """
    path = os.fspath(path)
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    rows = [(i + 1, line.strip()) for i, line in enumerate(raw)
            if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: no data rows")

    first_fields = rows[0][1].split(",")
    if not all(_is_numeric(f) for f in first_fields):
        rows = rows[1:]  # header
        if not rows:
            raise DataError(f"{path}: header but no data rows")

    if fmt is None:
        fmt = "csv_year_value" if len(rows[0][1].split(",")) >= 2 else "csv_single_column"
    if fmt not in ("csv_single_column", "csv_year_value"):
        raise DataError(f"unknown format {fmt!r}")

    years, values = [], []
    for lineno, line in rows:
        fields = [f.strip() for f in line.split(",")]
        try:
            if fmt == "csv_year_value":
                if len(fields) < 2:
                    raise ValueError("expected two columns")
                years.append(int(float(fields[0])))
                values.append(float(fields[1]))
            else:
                values.append(float(fields[0]))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: cannot parse {line!r} ({exc})") from exc

    return Dataset(values=np.array(values),
                   years=np.array(years) if fmt == "csv_year_value" else None,
                   name=name or os.path.basename(path))


def load_haenam() -> Dataset:
    """Annual maximum daily rainfall at Hae-nam, Korea, 1971-2022 (mm).

    Set the GEVMA_HAENAM environment variable to a year,value CSV of the
    original station records to use them instead of the bundled calibrated
    reconstruction (see the data file header for how it was built).
    """
    override = os.environ.get("GEVMA_HAENAM")
    if override:
        ds = ingest(override, name="haenam")
        return Dataset(ds.values, ds.years, name="haenam", units="mm")
    ref = resources.files("gevma").joinpath("data/haenam_reconstructed.csv")
    with resources.as_file(ref) as p:
        ds = ingest(p, fmt="csv_year_value", name="haenam")
    return Dataset(ds.values, ds.years, name="haenam", units="mm")

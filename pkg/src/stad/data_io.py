"""Point-cloud and distance-matrix ingestion.

Distances are held in condensed form: the upper triangle of the symmetric
matrix, row by row, without the diagonal (the same layout scipy uses).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

METRICS = ("euclidean", "manhattan", "cosine")

_SYMMETRY_RTOL = 1e-9
_DIAGONAL_ATOL = 1e-9


class DataError(ValueError):
    """Input data is malformed or violates a precondition."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: Optional[list[str]] = None
    columns: Optional[list[str]] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise DataError(f"points must be a 2-d table, got shape {pts.shape}")
        if pts.shape[0] < 3:
            raise DataError(f"n < 3: need at least 3 points, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            bad = np.argwhere(~np.isfinite(pts))[0]
            raise DataError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise DataError("label count does not match row count")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    def column(self, name: str) -> np.ndarray:
        if self.columns is None or name not in self.columns:
            raise DataError(f"no column named {name!r}")
        return self.points[:, self.columns.index(name)]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric zero-diagonal dissimilarities in condensed storage."""

    n: int
    condensed: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.condensed, dtype=float)
        if self.n < 3:
            raise DataError(f"n < 3: need at least 3 points, got {self.n}")
        if c.shape != (self.n * (self.n - 1) // 2,):
            raise DataError(f"condensed vector has length {c.size}, expected {self.n * (self.n - 1) // 2}")
        if not np.all(np.isfinite(c)):
            raise DataError("non-finite distance")
        if np.any(c < 0):
            raise DataError("negative distance")
        c.setflags(write=False)
        object.__setattr__(self, "condensed", c)

    @classmethod
    def from_square(cls, square) -> "DistanceMatrix":
        sq = np.asarray(square, dtype=float)
        iu = np.triu_indices(sq.shape[0], k=1)
        return cls(sq.shape[0], sq[iu])

    def index(self, i: int, j: int) -> int:
        return condensed_index(self.n, i, j)

    def __getitem__(self, ij) -> float:
        i, j = ij
        if i == j:
            return 0.0
        return float(self.condensed[condensed_index(self.n, i, j)])

    def square(self) -> np.ndarray:
        sq = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, k=1)
        sq[iu] = self.condensed
        sq[(iu[1], iu[0])] = self.condensed
        return sq


def condensed_index(n: int, i: int, j: int) -> int:
    if i == j:
        raise IndexError("diagonal has no condensed entry")
    if i > j:
        i, j = j, i
    return n * i - i * (i + 1) // 2 + (j - i - 1)


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column of every condensed entry, in storage order."""
    return np.triu_indices(n, k=1)


def _read_rows(path: Path, delimiter: str) -> list[list[str]]:
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh, delimiter=delimiter) if row]


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"cannot parse {cell!r} as a number at row {row}, column {col}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite value {cell!r} at row {row}, column {col}")
    return value


def load_points(
    source,
    delimiter: str = ",",
    header: bool = False,
    labels: bool = False,
) -> PointCloud:
    """Read a rectangular numeric table, optionally with a header row and a
    leading label column. Row/column numbers in errors are 1-based file
    coordinates."""
    path = Path(source)
    rows = _read_rows(path, delimiter)
    columns = None
    start = 0
    if header:
        if not rows:
            raise DataError(f"{path}: empty file")
        columns = [c.strip() for c in rows[0]]
        if labels:
            columns = columns[1:]
        start = 1
    body = rows[start:]
    if not body:
        raise DataError(f"{path}: no data rows")
    width = len(body[0])
    values, names = [], []
    for r, row in enumerate(body, start=start + 1):
        if len(row) != width:
            raise DataError(f"{path}: ragged row {r} has {len(row)} cells, expected {width}")
        cells = row
        if labels:
            names.append(row[0].strip())
            cells = row[1:]
        offset = 2 if labels else 1
        values.append([_parse_float(c, r, k + offset) for k, c in enumerate(cells)])
    if columns is not None and len(columns) != len(values[0]):
        raise DataError(f"{path}: header has {len(columns)} numeric names for {len(values[0])} columns")
    return PointCloud(np.array(values, dtype=float), names if labels else None, columns)


def load_distance_matrix(source, delimiter: str = ",") -> DistanceMatrix:
    path = Path(source)
    rows = _read_rows(path, delimiter)
    if not rows or any(len(row) != len(rows) for row in rows):
        raise DataError(f"{path}: distance matrix is not square")
    sq = np.array(
        [[_parse_float(c, r + 1, k + 1) for k, c in enumerate(row)] for r, row in enumerate(rows)]
    )
    return validate_square(sq, str(path))


def validate_square(sq: np.ndarray, where: str = "matrix") -> DistanceMatrix:
    """Check a dense matrix and fold it into condensed storage.

    Near-symmetric input is averaged with its transpose; a diagonal within
    1e-9 of zero is forced to exactly zero.
    """
    if sq.ndim != 2 or sq.shape[0] != sq.shape[1]:
        raise DataError(f"{where}: distance matrix is not square")
    if np.any(sq < 0):
        i, j = np.argwhere(sq < 0)[0]
        raise DataError(f"{where}: negative distance {sq[i, j]} at ({i}, {j})")
    if np.any(np.abs(np.diag(sq)) > _DIAGONAL_ATOL):
        raise DataError(f"{where}: diagonal is not zero")
    gap = np.abs(sq - sq.T)
    scale = np.maximum(np.abs(sq), np.abs(sq.T))
    if np.any(gap > _SYMMETRY_RTOL * scale):
        i, j = np.argwhere(gap > _SYMMETRY_RTOL * scale)[0]
        raise DataError(f"{where}: asymmetric entries at ({i}, {j}): {sq[i, j]} vs {sq[j, i]}")
    return DistanceMatrix.from_square(0.5 * (sq + sq.T))


def write_distance_matrix(d: DistanceMatrix, dest, delimiter: str = ",") -> None:
    sq = d.square()
    with Path(dest).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        for row in sq:
            w.writerow([format(v, ".17g") for v in row])


def compute_distances(cloud: PointCloud, metric: str = "euclidean") -> DistanceMatrix:
    pts = cloud.points
    if metric == "euclidean":
        c = pdist(pts, "euclidean")
    elif metric == "manhattan":
        c = pdist(pts, "cityblock")
    elif metric == "cosine":
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0):
            raise DataError(f"zero-norm row {int(np.argmin(norms))} has no cosine dissimilarity")
        c = np.clip(pdist(pts, "cosine"), 0.0, None)
    else:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    return DistanceMatrix(cloud.n, c)

"""Pairwise dissimilarities in condensed form.

A :class:`DistanceMatrix` stores the ``n*(n-1)/2`` unique dissimilarities of a
symmetric, zero-diagonal matrix in row-major pair order
``(0,1), (0,2), ..., (0,n-1), (1,2), ...``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO, Union

import numpy as np

__all__ = [
    "DistanceMatrix",
    "Metric",
    "pairwise_distances",
    "load_distance_matrix",
    "load_data_csv",
    "n_from_condensed",
]


class DistanceError(ValueError):
    """Raised for invalid coordinate data or dissimilarity input."""


def n_from_condensed(m: int) -> int:
    """Number of observations whose condensed matrix has ``m`` entries."""
    n = int(round((1 + math.sqrt(1 + 8 * m)) / 2))
    if n * (n - 1) // 2 != m:
        raise DistanceError(f"{m} values is not a valid condensed length n(n-1)/2")
    return n


@dataclass(frozen=True)
class Metric:
    """Minkowski-family metric. ``kind`` is euclidean, manhattan or minkowski."""

    kind: str = "euclidean"
    q: float = 2.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind == "euclidean":
            object.__setattr__(self, "q", 2.0)
        elif kind == "manhattan":
            object.__setattr__(self, "q", 1.0)
        elif kind == "minkowski":
            if not (math.isfinite(self.q) and self.q > 0):
                raise DistanceError(f"Minkowski exponent must be finite and > 0, got {self.q}")
        else:
            raise DistanceError(f"unknown metric {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Metric":
        """Parse ``euclidean``, ``manhattan`` or ``minkowski:<q>``."""
        if ":" in text:
            kind, q = text.split(":", 1)
            return cls(kind, float(q))
        return cls(text)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Immutable condensed dissimilarity matrix over ``n`` observations."""

    values: np.ndarray
    n: int = field(default=-1)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        n = n_from_condensed(v.size) if self.n < 0 else self.n
        if n < 2:
            raise DistanceError("need at least 2 observations")
        if v.size != n * (n - 1) // 2:
            raise DistanceError(f"expected {n * (n - 1) // 2} values for n={n}, got {v.size}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise DistanceError(f"non-finite dissimilarity at pair {self.pair_of(bad, n)}")
        if np.any(v < 0):
            bad = int(np.flatnonzero(v < 0)[0])
            raise DistanceError(f"negative dissimilarity at pair {self.pair_of(bad, n)}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_square", None)

    @staticmethod
    def pair_of(pos: int, n: int) -> tuple[int, int]:
        """Inverse of :meth:`index`: the pair ``(i, h)`` stored at ``pos``."""
        i = 0
        while pos >= n - 1 - i:
            pos -= n - 1 - i
            i += 1
        return i, i + 1 + pos

    def index(self, i: int, h: int) -> int:
        if i > h:
            i, h = h, i
        return self.n * i - i * (i + 1) // 2 + (h - i - 1)

    def lookup(self, i: int, h: int) -> float:
        if i == h:
            return 0.0
        return float(self.values[self.index(i, h)])

    def square(self) -> np.ndarray:
        """Read-only dense ``n x n`` view, built once and cached."""
        sq = self._square
        if sq is None:
            sq = np.zeros((self.n, self.n))
            iu = np.triu_indices(self.n, 1)
            sq[iu] = self.values
            sq.T[iu] = self.values
            sq.setflags(write=False)
            object.__setattr__(self, "_square", sq)
        return sq

    @classmethod
    def from_square(cls, square, rtol: float = 1e-9, diag_tol: float = 1e-12) -> "DistanceMatrix":
        """Validate a dense matrix and store its upper triangle."""
        sq = np.asarray(square, dtype=np.float64)
        if sq.ndim != 2 or sq.shape[0] != sq.shape[1]:
            raise DistanceError(f"square matrix expected, got shape {sq.shape}")
        n = sq.shape[0]
        if not np.all(np.isfinite(sq)):
            i, h = np.argwhere(~np.isfinite(sq))[0]
            raise DistanceError(f"non-finite entry at ({i},{h})")
        diag = np.abs(np.diag(sq))
        if np.any(diag > diag_tol):
            i = int(np.flatnonzero(diag > diag_tol)[0])
            raise DistanceError(f"nonzero diagonal at ({i},{i})")
        if np.any(sq < 0):
            i, h = np.argwhere(sq < 0)[0]
            raise DistanceError(f"negative entry at ({i},{h})")
        gap = np.abs(sq - sq.T)
        scale = np.maximum(np.abs(sq), np.abs(sq.T))
        bad = np.triu(gap > rtol * scale, 1)
        if bad.any():
            i, h = np.argwhere(bad)[0]
            raise DistanceError(f"asymmetric entry at ({i},{h}): {sq[i, h]} vs {sq[h, i]}")
        return cls(sq[np.triu_indices(n, 1)], n)

    def scaled(self, c: float) -> "DistanceMatrix":
        return DistanceMatrix(self.values * c, self.n)

    def subset(self, idx) -> "DistanceMatrix":
        idx = np.asarray(idx)
        sub = self.square()[np.ix_(idx, idx)]
        return DistanceMatrix(sub[np.triu_indices(len(idx), 1)], len(idx))

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"DistanceMatrix(n={self.n})"


def _check_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DistanceError(f"data must be 2-D (n x p), got {x.ndim}-D")
    if x.shape[0] < 2 or x.shape[1] < 1:
        raise DistanceError(f"need n >= 2 and p >= 1, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        i, j = np.argwhere(~np.isfinite(x))[0]
        raise DistanceError(f"non-finite value at row {i}, column {j}")
    return x


def pairwise_distances(data, metric: Union[Metric, str] = "euclidean") -> DistanceMatrix:
    """Condensed distances between the rows of ``data``.

    Parameters
    ----------
    data : array_like, shape (n, p)
        Observations in rows. A 1-D array is read as ``p = 1``.
    metric : Metric or str
        ``"euclidean"``, ``"manhattan"``, ``"minkowski:<q>"`` or a :class:`Metric`.
    """
    x = _check_data(data)
    if isinstance(metric, str):
        metric = Metric.parse(metric)
    n = x.shape[0]
    out = np.empty(n * (n - 1) // 2)
    pos = 0
    # row-block loop keeps memory at O(n*p)
    for i in range(n - 1):
        diff = np.abs(x[i + 1 :] - x[i])
        if metric.kind == "euclidean":
            row = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        elif metric.kind == "manhattan":
            row = diff.sum(axis=1)
        else:
            q = metric.q
            row = np.power(np.power(diff, q).sum(axis=1), 1.0 / q)
        out[pos : pos + row.size] = row
        pos += row.size
    return DistanceMatrix(out, n)


def _read_rows(source) -> list[list[str]]:
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode())
    elif isinstance(source, str):
        source = io.StringIO(source)
    elif hasattr(source, "mode") and "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source)
    rows = []
    for row in csv.reader(source):
        cells = [c.strip() for c in row]
        if cells and any(cells):
            rows.append(cells)
    return rows


def _is_numeric(cells: Iterable[str]) -> bool:
    try:
        for c in cells:
            float(c)
    except ValueError:
        return False
    return True


def load_distance_matrix(source: Union[str, bytes, TextIO], fmt: str = "square-csv") -> DistanceMatrix:
    """Read dissimilarities from CSV text.

    ``fmt="condensed-csv"`` expects one value per line in pair order;
    ``fmt="square-csv"`` expects an ``n x n`` matrix, checked for symmetry
    (relative tolerance 1e-9) and zero diagonal (1e-12).
    """
    rows = _read_rows(source)
    if fmt == "condensed-csv":
        vals = []
        for lineno, row in enumerate(rows):
            for c in row:
                try:
                    vals.append(float(c))
                except ValueError:
                    raise DistanceError(f"non-numeric value {c!r} on line {lineno + 1}") from None
        return DistanceMatrix(np.array(vals))
    if fmt != "square-csv":
        raise DistanceError(f"unknown distance format {fmt!r}")
    if rows and not _is_numeric(rows[0]):
        rows = rows[1:]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise DistanceError(f"ragged row {i}: {len(row)} entries, expected {n}")
    try:
        sq = np.array([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise DistanceError(f"non-numeric entry: {exc}") from None
    return DistanceMatrix.from_square(sq)


def load_data_csv(source) -> np.ndarray:
    """Read an ``n x p`` numeric table; a non-numeric first row is a header."""
    rows = _read_rows(source)
    if rows and not _is_numeric(rows[0]):
        rows = rows[1:]
    if not rows:
        raise DistanceError("no data rows")
    p = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != p:
            raise DistanceError(f"ragged row {i}: {len(row)} columns, expected {p}")
    try:
        return _check_data([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        if isinstance(exc, DistanceError):
            raise
        raise DistanceError(f"non-numeric entry: {exc}") from None

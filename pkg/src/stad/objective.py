"""Correlation between graph hop distances and the original distances."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .data_io import DistanceMatrix
from .graph_core import SortedEdgeList, bfs_apsp, build_unit_graph


@numba.njit(cache=True)
def _comoments(a, b):
    # Welford-style running means; fixed sequential order keeps results
    # independent of thread count.
    mean_a = 0.0
    mean_b = 0.0
    m2a = 0.0
    m2b = 0.0
    cab = 0.0
    for k in range(a.shape[0]):
        x = a[k]
        y = b[k]
        n = k + 1
        da = x - mean_a
        mean_a += da / n
        db = y - mean_b
        mean_b += db / n
        m2a += da * (x - mean_a)
        m2b += db * (y - mean_b)
        cab += da * (y - mean_b)
    return m2a, m2b, cab


def pearson(a, b) -> float:
    """Product-moment correlation; 0.0 when either side has no variance."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 3:
        raise ValueError("pearson needs at least 3 values")
    m2a, m2b, cab = _comoments(a, b)
    if m2a <= 0.0 or m2b <= 0.0:
        return 0.0
    r = cab / np.sqrt(m2a * m2b)
    return float(min(1.0, max(-1.0, r)))


@dataclass(frozen=True)
class ObjectiveContext:
    """Everything needed to score U_i for any edge count i.

    ``pair_mask`` is a boolean vector over condensed pairs, or None for all
    pairs.
    """

    reference: np.ndarray
    mst_edges: SortedEdgeList
    sorted_non_tree: SortedEdgeList
    pair_mask: Optional[np.ndarray] = None
    _selected: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ref = np.ascontiguousarray(self.reference, dtype=np.float64)
        if self.pair_mask is not None:
            mask = np.asarray(self.pair_mask, dtype=bool)
            if mask.shape != ref.shape:
                raise ValueError("pair mask does not match reference length")
            object.__setattr__(self, "pair_mask", mask)
            ref = ref[mask]
        if ref.shape[0] < 3:
            raise ValueError("correlation needs at least 3 pairs")
        object.__setattr__(self, "_selected", np.ascontiguousarray(ref))

    @classmethod
    def from_distances(cls, d: DistanceMatrix, mst_edges, sorted_non_tree, pair_mask=None):
        return cls(d.condensed, mst_edges, sorted_non_tree, pair_mask)

    @property
    def n(self) -> int:
        return self.mst_edges.n

    @property
    def max_extra(self) -> int:
        return len(self.sorted_non_tree)

    @property
    def domain_size(self) -> int:
        return self.max_extra + 1

    def hops(self, i: int) -> np.ndarray:
        g = build_unit_graph(self.mst_edges, self.sorted_non_tree, i)
        h = bfs_apsp(g).condensed
        return h if self.pair_mask is None else h[self.pair_mask]


def evaluate(ctx: ObjectiveContext, i: int) -> float:
    return pearson(ctx.hops(i), ctx._selected)


@dataclass(frozen=True)
class CorrelationTrace:
    i: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=np.int64)
        r = np.asarray(self.r, dtype=np.float64)
        order = np.argsort(i, kind="stable")
        object.__setattr__(self, "i", i[order])
        object.__setattr__(self, "r", r[order])
        if np.any(np.diff(self.i) <= 0):
            raise ValueError("trace indices must be distinct")

    @classmethod
    def from_dict(cls, scores: dict[int, float]) -> "CorrelationTrace":
        keys = sorted(scores)
        return cls(np.array(keys, dtype=np.int64), np.array([scores[k] for k in keys]))

    def __len__(self) -> int:
        return self.i.shape[0]

    @property
    def argmax(self) -> int:
        """Position of the best point; the smallest i wins ties."""
        return int(np.argmax(self.r))

    @property
    def best_i(self) -> int:
        return int(self.i[self.argmax])

    @property
    def best_r(self) -> float:
        return float(self.r[self.argmax])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "r"])
        for i, r in zip(self.i.tolist(), self.r.tolist()):
            w.writerow([i, repr(r)])
        return buf.getvalue()


def correlation_trace(ctx: ObjectiveContext, stride: int = 1) -> CorrelationTrace:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    points = list(range(0, ctx.max_extra + 1, stride))
    if points[-1] != ctx.max_extra:
        points.append(ctx.max_extra)
    return CorrelationTrace(np.array(points), np.array([evaluate(ctx, i) for i in points]))

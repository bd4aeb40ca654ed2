"""Filter functions: interval indices, edge classes and the filter-aware MST."""

from __future__ import annotations

import enum
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .community import AffinityGraph, CommunityPartition, distances_to_affinities, walktrap
from .data_io import DataError, DistanceMatrix, pair_indices
from .graph_core import DisconnectedGraphError, SortedEdgeList, UnionFind, kruskal_extend, sort_edges

log = logging.getLogger(__name__)

STRATEGIES = ("equal-width", "equal-frequency", "given")


class EdgeClass(str, enum.Enum):
    INTRA = "intra"
    INTER_ADJACENT = "inter_adjacent"
    INTER_NONADJACENT = "inter_nonadjacent"


@dataclass(frozen=True)
class FilterSpec:
    """One or two filter dimensions.

    ``intervals``, ``strategy`` and ``cyclic`` may be given once for all
    dimensions or once per dimension. Strategy ``given`` takes the values as
    natural indices 1..r already.
    """

    dimensions: Sequence[Sequence[float]]
    intervals: Sequence[int] | int = 2
    strategy: Sequence[str] | str = "equal-width"
    cyclic: Sequence[bool] | bool = False

    def __post_init__(self):
        dims = [np.asarray(d, dtype=float) for d in self.dimensions]
        if len(dims) not in (1, 2):
            raise ValueError(f"filters have 1 or 2 dimensions, got {len(dims)}")
        if len({d.shape for d in dims}) != 1 or dims[0].ndim != 1:
            raise ValueError("filter dimensions must be equal-length vectors")
        for d in dims:
            if not np.all(np.isfinite(d)):
                raise DataError("filter values must be finite")
        p = len(dims)
        object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "intervals", _per_dim(self.intervals, p, "intervals"))
        object.__setattr__(self, "strategy", _per_dim(self.strategy, p, "strategy"))
        object.__setattr__(self, "cyclic", _per_dim(self.cyclic, p, "cyclic"))
        for r in self.intervals:
            if int(r) < 1:
                raise ValueError("intervals per dimension must be >= 1")
        for s in self.strategy:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}; choose from {STRATEGIES}")

    @property
    def p(self) -> int:
        return len(self.dimensions)

    def describe(self) -> dict:
        return {
            "dimensions": self.p,
            "intervals": [int(r) for r in self.intervals],
            "strategy": list(self.strategy),
            "cyclic": [bool(c) for c in self.cyclic],
        }


def _per_dim(value, p, name):
    if isinstance(value, (str, bool, int, np.integer)):
        return tuple([value] * p)
    value = tuple(value)
    if len(value) == 1:
        return value * p
    if len(value) != p:
        raise ValueError(f"{name}: expected 1 or {p} values, got {len(value)}")
    return value


@dataclass(frozen=True)
class FilterAssignment:
    """Vertex -> occupied cell, and the adjacency between occupied cells.

    Cells are 1-based index tuples; ``cell_of`` holds positions into
    ``cells``.
    """

    cell_of: np.ndarray
    cells: list[tuple[int, ...]]
    adjacency: np.ndarray
    shape: tuple[int, ...]
    cyclic: tuple[bool, ...]

    @property
    def n(self) -> int:
        return self.cell_of.shape[0]

    @property
    def occupied(self) -> list:
        return [c[0] for c in self.cells] if len(self.shape) == 1 else list(self.cells)

    def index_of(self, vertex: int):
        cell = self.cells[self.cell_of[vertex]]
        return cell[0] if len(cell) == 1 else cell

    def indices(self) -> list:
        return [self.index_of(x) for x in range(self.n)]

    def adjacent(self, a, b) -> bool:
        pos = {c: k for k, c in enumerate(self.cells)}
        a = (a,) if np.isscalar(a) else tuple(a)
        b = (b,) if np.isscalar(b) else tuple(b)
        return bool(self.adjacency[pos[a], pos[b]])

    def adjacent_pairs(self) -> set:
        occ = self.occupied
        ks = np.argwhere(np.triu(self.adjacency, 1))
        return {(occ[i], occ[j]) for i, j in ks}


def _discretize_dim(values: np.ndarray, r: int, strategy: str) -> tuple[np.ndarray, int]:
    if strategy == "given":
        idx = values.astype(np.int64)
        if np.any(idx != values) or np.any(idx < 1):
            raise DataError("given filter indices must be natural numbers >= 1")
        return idx, max(int(r), int(idx.max()))
    lo, hi = float(values.min()), float(values.max())
    if strategy == "equal-width":
        if hi == lo:
            return np.ones(values.shape[0], dtype=np.int64), r
        idx = np.floor((values - lo) * r / (hi - lo)).astype(np.int64) + 1
        return np.clip(idx, 1, r), r
    # equal-frequency
    if values.shape[0] < r:
        raise DataError(f"equal-frequency needs at least r={r} values, got {values.shape[0]}")
    if hi == lo:
        if r > 1:
            log.warning("all filter values identical; collapsing to a single interval")
        return np.ones(values.shape[0], dtype=np.int64), 1
    cuts = _quantile_cuts(np.sort(values), r)
    # a value equal to a cut belongs to the lower interval
    return np.searchsorted(cuts, values, side="left").astype(np.int64) + 1, r


def _quantile_cuts(s: np.ndarray, r: int) -> np.ndarray:
    """Linear-interpolation quantiles at k/r, with the sample position kept
    in exact integer arithmetic so cuts that land on a data value are exact."""
    n = s.shape[0]
    cuts = np.empty(r - 1)
    for k in range(1, r):
        j, rem = divmod(k * (n - 1), r)
        cuts[k - 1] = s[j] if rem == 0 else s[j] + (s[j + 1] - s[j]) * (rem / r)
    return cuts


def _neighbours(cell, shape, cyclic):
    out = set()
    for step in itertools.product((-1, 0, 1), repeat=len(shape)):
        if not any(step):
            continue
        nxt = []
        for c, s, size, wrap in zip(cell, step, shape, cyclic):
            k = c + s
            if wrap:
                k = (k - 1) % size + 1
            elif not 1 <= k <= size:
                break
            nxt.append(k)
        else:
            nxt = tuple(nxt)
            if nxt != cell:
                out.add(nxt)
    return sorted(out)


def cell_adjacency(cells: list[tuple[int, ...]], shape, cyclic) -> np.ndarray:
    """Occupied cells are adjacent when they touch (8-neighbourhood in 2-d)
    or are joined through a run of empty cells."""
    pos = {c: k for k, c in enumerate(cells)}
    adj = np.zeros((len(cells), len(cells)), dtype=bool)
    for k, start in enumerate(cells):
        seen = {start}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nb in _neighbours(cur, shape, cyclic):
                if nb in seen:
                    continue
                seen.add(nb)
                if nb in pos:
                    adj[k, pos[nb]] = adj[pos[nb], k] = True
                else:
                    queue.append(nb)
    return adj


def discretize(spec: FilterSpec) -> FilterAssignment:
    cols, shape = [], []
    for values, r, strategy in zip(spec.dimensions, spec.intervals, spec.strategy):
        idx, size = _discretize_dim(values, int(r), strategy)
        cols.append(idx)
        shape.append(size)
    per_vertex = list(zip(*[c.tolist() for c in cols]))
    cells = sorted(set(per_vertex))
    pos = {c: k for k, c in enumerate(cells)}
    cell_of = np.array([pos[c] for c in per_vertex], dtype=np.int64)
    cyclic = tuple(bool(c) for c in spec.cyclic)
    adj = cell_adjacency(cells, tuple(shape), cyclic)
    return FilterAssignment(cell_of, cells, adj, tuple(shape), cyclic)


def classify_edge(a: int, b: int, fa: FilterAssignment) -> EdgeClass:
    ca, cb = fa.cell_of[a], fa.cell_of[b]
    if ca == cb:
        return EdgeClass.INTRA
    if fa.adjacency[ca, cb]:
        return EdgeClass.INTER_ADJACENT
    return EdgeClass.INTER_NONADJACENT


def pair_classes(fa: FilterAssignment) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (intra, inter_adjacent) vectors over condensed pairs."""
    u, v = pair_indices(fa.n)
    cu, cv = fa.cell_of[u], fa.cell_of[v]
    intra = cu == cv
    return intra, ~intra & fa.adjacency[cu, cv]


@dataclass(frozen=True)
class ReducedDistanceMatrix:
    base: DistanceMatrix
    retained: np.ndarray

    @property
    def n(self) -> int:
        return self.base.n

    def sorted_edges(self) -> SortedEdgeList:
        return sort_edges(self.base, self.retained)


def reduce_matrix(d: DistanceMatrix, fa: FilterAssignment) -> ReducedDistanceMatrix:
    if fa.n != d.n:
        raise DataError(f"filter covers {fa.n} points but the distance matrix has {d.n}")
    intra, adjacent = pair_classes(fa)
    retained = intra | adjacent
    uf = UnionFind(len(fa.cells))
    for i, j in np.argwhere(np.triu(fa.adjacency, 1)):
        uf.union(int(i), int(j))
    if len(uf.components()) > 1:
        raise DataError("filter intervals split the data into disconnected groups; use larger intervals")
    return ReducedDistanceMatrix(d, retained)


Detector = Callable[[AffinityGraph], CommunityPartition]


@dataclass(frozen=True)
class FilterMST:
    """Filter-aware spanning tree plus the intermediate edge sets."""

    edges: SortedEdgeList
    step1: SortedEdgeList
    kept: SortedEdgeList
    removed: SortedEdgeList
    added: SortedEdgeList
    partition: CommunityPartition


def filter_mst(
    rd: ReducedDistanceMatrix,
    fa: FilterAssignment,
    detector: Optional[Detector] = None,
    walk_length: int = 4,
) -> FilterMST:
    """Three-step spanning tree that favours intra-interval structure.

    1. Kruskal on intra-edges (one MST per index), then cheapest
       inter-adjacent edges until a single component remains.
    2. Communities on that tree, weighted by original distances; only
       intra-edges inside one community survive.
    3. Kruskal over all retained pairs, seeded with the survivors.
    """
    if detector is None:
        detector = lambda g: walktrap(g, walk_length)  # noqa: E731
    n = rd.n
    edges = rd.sorted_edges()
    same = fa.cell_of[edges.u] == fa.cell_of[edges.v]
    intra, inter = edges[same], edges[~same]

    uf = UnionFind(n)
    first = intra[kruskal_extend(intra, uf)]
    bridges = inter[kruskal_extend(inter, uf, limit=n - 1 - len(first))]
    if len(first) + len(bridges) != n - 1:
        raise DisconnectedGraphError(uf.components())
    step1 = first.concat(bridges)

    partition = detector(distances_to_affinities(n, step1.u, step1.v, step1.w))
    com = partition.community_of
    keep = (fa.cell_of[step1.u] == fa.cell_of[step1.v]) & (com[step1.u] == com[step1.v])
    kept, removed = step1[keep], step1[~keep]

    uf = UnionFind(n)
    for a, b in zip(kept.u.tolist(), kept.v.tolist()):
        uf.union(a, b)
    added = edges[kruskal_extend(edges, uf, limit=n - 1 - len(kept))]
    if len(kept) + len(added) != n - 1:
        raise DisconnectedGraphError(uf.components())
    return FilterMST(kept.concat(added), step1, kept, removed, added, partition)

"""Edge ordering, Kruskal MST, unit-distance graphs and BFS all-pairs hops."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .data_io import DataError, DistanceMatrix, pair_indices

# the system TBB is too old for numba and only produces a warning
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


class DisconnectedGraphError(DataError):
    def __init__(self, components: list[list[int]]):
        self.components = components
        shown = "; ".join(_describe(c) for c in components[:5])
        more = f" (+{len(components) - 5} more)" if len(components) > 5 else ""
        super().__init__(f"graph is disconnected into {len(components)} components: {shown}{more}")


def _describe(comp: list[int]) -> str:
    head = ", ".join(map(str, comp[:8]))
    return f"{{{head}{', ...' if len(comp) > 8 else ''}}} ({len(comp)} vertices)"


@dataclass(frozen=True)
class SortedEdgeList:
    """Undirected edges (u < v) ascending by (w, u, v)."""

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __len__(self) -> int:
        return self.u.shape[0]

    def __getitem__(self, k):
        if isinstance(k, (int, np.integer)):
            return int(self.u[k]), int(self.v[k]), float(self.w[k])
        return SortedEdgeList(self.n, self.u[k], self.v[k], self.w[k])

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def total_weight(self) -> float:
        return float(self.w.sum())

    def concat(self, other: "SortedEdgeList") -> "SortedEdgeList":
        """Union of two disjoint edge lists, re-sorted."""
        u = np.concatenate([self.u, other.u])
        v = np.concatenate([self.v, other.v])
        w = np.concatenate([self.w, other.w])
        order = np.lexsort((v, u, w))
        return SortedEdgeList(self.n, u[order], v[order], w[order])


def sort_edges(d: DistanceMatrix, mask: Optional[np.ndarray] = None) -> SortedEdgeList:
    """All pairs (or the masked-in pairs) ordered by weight.

    Condensed storage is already lexicographic in (u, v), so a stable sort on
    the weight alone yields the (w, u, v) order.
    """
    u, v = pair_indices(d.n)
    w = d.condensed
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        u, v, w = u[mask], v[mask], w[mask]
    order = np.argsort(w, kind="stable")
    return SortedEdgeList(d.n, u[order].astype(np.int64), v[order].astype(np.int64), w[order])


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def components(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return sorted(groups.values(), key=lambda c: c[0])


def kruskal_extend(edges: SortedEdgeList, uf: UnionFind, limit: Optional[int] = None) -> np.ndarray:
    """Scan ``edges`` in order, merging components in ``uf``; return the
    positions of the edges that merged something."""
    taken = []
    need = limit if limit is not None else edges.n - 1
    for k, (a, b) in enumerate(zip(edges.u.tolist(), edges.v.tolist())):
        if len(taken) >= need:
            break
        if uf.union(a, b):
            taken.append(k)
    return np.array(taken, dtype=np.int64)


def mst(edges: SortedEdgeList) -> SortedEdgeList:
    uf = UnionFind(edges.n)
    taken = kruskal_extend(edges, uf)
    if taken.size != edges.n - 1:
        raise DisconnectedGraphError(uf.components())
    return edges[taken]


def split_tree(edges: SortedEdgeList, tree: SortedEdgeList) -> SortedEdgeList:
    """The edges of ``edges`` not in ``tree``, order preserved."""
    key = edges.u * edges.n + edges.v
    tree_key = tree.u * tree.n + tree.v
    return edges[~np.isin(key, tree_key)]


@dataclass(frozen=True)
class UnitGraph:
    n: int
    u: np.ndarray
    v: np.ndarray
    tree_edge_count: int
    extra_edge_count: int
    _csr: list = field(default_factory=list, repr=False, compare=False)

    @property
    def edge_count(self) -> int:
        return self.u.shape[0]

    def pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        if not self._csr:
            src = np.concatenate([self.u, self.v])
            dst = np.concatenate([self.v, self.u])
            order = np.lexsort((dst, src))
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
            self._csr.extend([indptr, dst[order].astype(np.int32)])
        return self._csr[0], self._csr[1]


def build_unit_graph(mst_edges: SortedEdgeList, sorted_non_tree: SortedEdgeList, i: int) -> UnitGraph:
    if not 0 <= i <= len(sorted_non_tree):
        raise IndexError(f"edge count {i} outside [0, {len(sorted_non_tree)}]")
    u = np.concatenate([mst_edges.u, sorted_non_tree.u[:i]])
    v = np.concatenate([mst_edges.v, sorted_non_tree.v[:i]])
    return UnitGraph(mst_edges.n, u, v, len(mst_edges), i)


@dataclass(frozen=True)
class HopMatrix:
    n: int
    condensed: np.ndarray

    def __getitem__(self, ij) -> int:
        i, j = ij
        if i == j:
            return 0
        if i > j:
            i, j = j, i
        return int(self.condensed[self.n * i - i * (i + 1) // 2 + (j - i - 1)])

    def square(self) -> np.ndarray:
        sq = np.zeros((self.n, self.n), dtype=np.int32)
        iu = np.triu_indices(self.n, k=1)
        sq[iu] = self.condensed
        sq[(iu[1], iu[0])] = self.condensed
        return sq


@numba.njit(parallel=True, cache=True)
def _bfs_all_sources(indptr, indices, n, out):
    for s in numba.prange(n):
        dist = np.full(n, -1, dtype=np.int32)
        queue = np.empty(n, dtype=np.int32)
        dist[s] = 0
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            x = queue[head]
            head += 1
            dx = dist[x] + 1
            for k in range(indptr[x], indptr[x + 1]):
                y = indices[k]
                if dist[y] < 0:
                    dist[y] = dx
                    queue[tail] = y
                    tail += 1
        base = n * s - s * (s + 1) // 2 - s - 1
        for t in range(s + 1, n):
            out[base + t] = dist[t]


def bfs_apsp(g: UnitGraph) -> HopMatrix:
    """Hop counts between all vertex pairs, one BFS per source."""
    indptr, indices = g.csr()
    out = np.empty(g.n * (g.n - 1) // 2, dtype=np.int32)
    _bfs_all_sources(indptr, indices, g.n, out)
    if out.size and out.min() < 0:
        raise DisconnectedGraphError(_components_from_edges(g.n, g.u, g.v))
    return HopMatrix(g.n, out)


def _components_from_edges(n: int, u, v) -> list[list[int]]:
    uf = UnionFind(n)
    for a, b in zip(np.asarray(u).tolist(), np.asarray(v).tolist()):
        uf.union(a, b)
    return uf.components()


def set_threads(count: Optional[int]) -> None:
    """Bound the worker threads used by the BFS fan-out."""
    if count:
        numba.set_num_threads(max(1, min(count, numba.config.NUMBA_NUM_THREADS)))

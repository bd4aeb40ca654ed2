"""Walktrap community detection (Pons & Latapy random-walk distances).

Communities are merged agglomeratively by the smallest increase in the
Ward-style variance of t-step random-walk profiles; the partition kept is
the one with the highest modularity along the merge sequence.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AffinityGraph:
    n: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.weight) <= 0):
            raise ValueError("affinities must be strictly positive")
        if np.any(np.asarray(self.u) == np.asarray(self.v)):
            raise ValueError("self-loops are not allowed")

    def dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        np.add.at(a, (self.u, self.v), self.weight)
        np.add.at(a, (self.v, self.u), self.weight)
        return a


@dataclass(frozen=True)
class CommunityPartition:
    community_of: np.ndarray
    count: int

    def members(self) -> list[list[int]]:
        groups = [[] for _ in range(self.count)]
        for x, c in enumerate(self.community_of.tolist()):
            groups[c].append(x)
        return groups


def distances_to_affinities(n: int, u, v, distances) -> AffinityGraph:
    """Order-reversing map from distances to strictly positive affinities."""
    d = np.asarray(distances, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    dmax = float(d.max()) if d.size else 0.0
    if dmax == 0.0:
        w = np.ones_like(d)
    else:
        w = (dmax - d + 1e-9 * dmax) / dmax
    return AffinityGraph(n, np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64), w)


def canonical_labels(assignment) -> np.ndarray:
    """Relabel groups 0..k-1 in order of their smallest member."""
    out = np.empty(len(assignment), dtype=np.int64)
    seen: dict = {}
    for x, c in enumerate(assignment):
        out[x] = seen.setdefault(c, len(seen))
    return out


def modularity(g: AffinityGraph, community_of) -> float:
    a = g.dense()
    total = a.sum() / 2
    if total == 0:
        return 0.0
    deg = a.sum(axis=1)
    c = np.asarray(community_of)
    q = 0.0
    for k in np.unique(c):
        idx = np.flatnonzero(c == k)
        q += a[np.ix_(idx, idx)].sum() / (2 * total) - (deg[idx].sum() / (2 * total)) ** 2
    return float(q)


def walktrap(g: AffinityGraph, t: int = 4) -> CommunityPartition:
    if t < 1:
        raise ValueError("walk length must be >= 1")
    n = g.n
    a = g.dense()
    total = a.sum() / 2
    deg = a.sum(axis=1)
    if total == 0:
        return CommunityPartition(np.arange(n), n)

    # each vertex gets a loop weighted by its mean incident affinity, as in
    # the reference implementation; isolated vertices get weight 1
    nbrs = (a > 0).sum(axis=1)
    loops = np.where(nbrs > 0, deg / np.maximum(nbrs, 1), 1.0)
    walk = a + np.diag(loops)
    d = walk.sum(axis=1)
    p = walk / d[:, None]
    pt = np.linalg.matrix_power(p, t)
    inv_d = 1.0 / d

    size = {x: 1 for x in range(n)}
    prof = {x: pt[x] for x in range(n)}
    inner = {x: 0.0 for x in range(n)}
    tot = {x: float(deg[x]) for x in range(n)}
    links: dict[int, dict[int, float]] = {x: {} for x in range(n)}
    for x, y, w in zip(g.u.tolist(), g.v.tolist(), g.weight.tolist()):
        links[x][y] = links[x].get(y, 0.0) + w
        links[y][x] = links[y].get(x, 0.0) + w

    def delta_sigma(c1, c2):
        diff = prof[c1] - prof[c2]
        s1, s2 = size[c1], size[c2]
        return (s1 * s2 / (s1 + s2)) * float(np.dot(diff * diff, inv_d)) / n

    heap = []
    for x in range(n):
        for y in links[x]:
            if x < y:
                heap.append((delta_sigma(x, y), x, y))
    heapq.heapify(heap)

    q = float(sum(inner[c] / total - (tot[c] / (2 * total)) ** 2 for c in size))
    history = [q]
    merges = []
    alive = set(range(n))
    next_id = n
    while heap:
        ds, c1, c2 = heapq.heappop(heap)
        if c1 not in alive or c2 not in alive:
            continue
        w12 = links[c1][c2]
        c = next_id
        next_id += 1
        s = size[c1] + size[c2]
        size[c] = s
        prof[c] = (size[c1] * prof[c1] + size[c2] * prof[c2]) / s
        inner[c] = inner[c1] + inner[c2] + w12
        tot[c] = tot[c1] + tot[c2]
        q += (
            inner[c] / total - (tot[c] / (2 * total)) ** 2
            - inner[c1] / total + (tot[c1] / (2 * total)) ** 2
            - inner[c2] / total + (tot[c2] / (2 * total)) ** 2
        )
        merged: dict[int, float] = {}
        for old in (c1, c2):
            for y, w in links.pop(old).items():
                if y in (c1, c2):
                    continue
                merged[y] = merged.get(y, 0.0) + w
                del links[y][old]
        links[c] = merged
        for y, w in merged.items():
            links[y][c] = w
        alive -= {c1, c2}
        alive.add(c)
        for old in (c1, c2):
            del prof[old]
        for y in sorted(merged):
            heapq.heappush(heap, (delta_sigma(y, c), y, c))
        merges.append((c1, c2, c))
        history.append(q)

    # the finest partition among (numerically) tied modularity maxima
    best = max(history)
    cut = next(k for k, val in enumerate(history) if val >= best - 1e-12)
    parent = list(range(next_id))
    for c1, c2, c in merges[:cut]:
        parent[c1] = c
        parent[c2] = c

    def root(x):
        while parent[x] != x:
            x = parent[x]
        return x

    labels = canonical_labels([root(x) for x in range(n)])
    return CommunityPartition(labels, int(labels.max()) + 1)

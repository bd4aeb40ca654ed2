"""Independent reference implementations used to freeze and check results.

Nothing here imports the code under test beyond plain data containers.
"""

import itertools
import math

import numpy as np


def double_loop_distances(points, metric="euclidean"):
    n = len(points)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = points[i], points[j]
            if metric == "euclidean":
                out.append(math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b))))
            elif metric == "manhattan":
                out.append(sum(abs(x - y) for x, y in zip(a, b)))
            else:
                dot = sum(x * y for x, y in zip(a, b))
                na = math.sqrt(sum(x * x for x in a))
                nb = math.sqrt(sum(y * y for y in b))
                out.append(1 - dot / (na * nb))
    return out


def sorted_pairs(square):
    n = len(square)
    return sorted((square[i][j], i, j) for i in range(n) for j in range(i + 1, n))


def prufer_decode(seq, n):
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(k for k in range(n) if degree[k] == 1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    a, b = [k for k in range(n) if degree[k] == 1]
    edges.append((a, b))
    return edges


def all_spanning_trees(n):
    """Every labelled tree on n vertices (n^(n-2) of them) as edge lists."""
    return [prufer_decode(seq, n) for seq in itertools.product(range(n), repeat=n - 2)]


def tree_weight_table(n):
    """(n^(n-2), n-1) array of condensed indices, one row per spanning tree."""
    rows = []
    for edges in all_spanning_trees(n):
        rows.append([n * i - i * (i + 1) // 2 + (j - i - 1) for i, j in edges])
    return np.array(rows)


def random_prufer_tree(n, rng):
    return prufer_decode(rng.integers(n, size=n - 2).tolist(), n)


def floyd_warshall(adj):
    """Hop counts from a 0/1 adjacency matrix (inf where unreachable)."""
    n = adj.shape[0]
    d = np.where(adj > 0, 1.0, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def textbook_pearson(a, b):
    n = len(a)
    ma = math.fsum(a) / n
    mb = math.fsum(b) / n
    cov = math.fsum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = math.fsum((x - ma) ** 2 for x in a)
    vb = math.fsum((y - mb) ** 2 for y in b)
    if va == 0 or vb == 0:
        return 0.0
    return cov / math.sqrt(va * vb)


def prim_mst(square):
    n = len(square)
    in_tree = [False] * n
    best = [math.inf] * n
    parent = [-1] * n
    best[0] = 0.0
    edges = []
    for _ in range(n):
        x = min((k for k in range(n) if not in_tree[k]), key=lambda k: best[k])
        in_tree[x] = True
        if parent[x] >= 0:
            edges.append((min(x, parent[x]), max(x, parent[x])))
        for y in range(n):
            if not in_tree[y] and square[x][y] < best[y]:
                best[y] = square[x][y]
                parent[y] = x
    return edges


def stad_curve_oracle(square):
    """r(i) for every i, rebuilt from scratch with dense matrices."""
    n = len(square)
    tree = set(prim_mst(square))
    rest = [(i, j) for w, i, j in sorted_pairs(square) if (i, j) not in tree]
    iu = np.triu_indices(n, k=1)
    ref = [square[i][j] for i, j in zip(*iu)]
    adj = np.zeros((n, n))
    for i, j in tree:
        adj[i, j] = adj[j, i] = 1
    out = []
    for k in range(len(rest) + 1):
        if k:
            i, j = rest[k - 1]
            adj[i, j] = adj[j, i] = 1
        hops = floyd_warshall(adj)[iu]
        out.append(textbook_pearson(list(hops), ref))
    return out


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1 :]
        yield [[first]] + part


def modularity_dense(a, groups):
    total = a.sum() / 2
    deg = a.sum(axis=1)
    q = 0.0
    for g in groups:
        idx = np.array(g)
        q += a[np.ix_(idx, idx)].sum() / (2 * total) - (deg[idx].sum() / (2 * total)) ** 2
    return q


def best_partitions(a, tol=1e-12):
    """All set partitions of the vertices attaining maximum modularity."""
    n = a.shape[0]
    scored = [(modularity_dense(a, p), p) for p in set_partitions(list(range(n)))]
    top = max(q for q, _ in scored)
    return top, [p for q, p in scored if q >= top - tol]


def canonical(groups):
    return sorted(sorted(g) for g in groups)

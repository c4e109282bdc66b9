"""Independent brute-force oracles and random-instance generators.

Everything here is deliberately naive: plain nested loops over pairs,
paths, partitions and subsets, written without reference to the library
internals, so the test suite can compare two genuinely different
computations of the same quantity.
"""

from __future__ import annotations

import itertools
import math
import random

from tanglekit import DistanceMatrix, Partition, PointCloud, PreDecomposition, TernaryTree
from tanglekit import Dendrogram, distance_matrix_from_points


# -- brute-force values -------------------------------------------------


def brute_bottleneck(rows, i: int, j: int) -> float:
    """Minimum over all simple paths of the largest step (n <= 7)."""
    n = len(rows)
    best = math.inf
    others = [k for k in range(n) if k not in (i, j)]
    for r in range(len(others) + 1):
        for mids in itertools.permutations(others, r):
            path = [i, *mids, j]
            worst = max(rows[a][b] for a, b in zip(path, path[1:]))
            best = min(best, worst)
    return best


def brute_min_cross_value(rows, mask: int) -> float:
    """Nearest-cross-pair similarity, computed directly on the value axis."""
    n = len(rows)
    full = (1 << n) - 1
    if mask in (0, full):
        return 0.0
    return max(math.exp(-rows[i][j])
               for i in range(n) if (mask >> i) & 1
               for j in range(n) if not ((mask >> j) & 1))


def brute_min_separation(value_fn, n: int, u: int, v: int) -> float:
    best = math.inf
    for mask in range(1 << n):
        if ((mask >> u) & 1) and not ((mask >> v) & 1):
            best = min(best, value_fn(mask))
    return best


def brute_property_violation(table, n: int, submodular: bool):
    """Nested-loop sweep of all 4^n pairs, first violation in lex order."""
    for x in range(1 << n):
        for y in range(1 << n):
            lhs = (table[x] + table[y]) if submodular else max(table[x], table[y])
            rhs = ((table[x & y] + table[x | y]) if submodular
                   else max(table[x & y], table[x | y]))
            if lhs < rhs:
                return x, y
    return None


def brute_width_value(pd: PreDecomposition, value_fn) -> float:
    return max(value_fn(pd.gamma(u, v)) for u, v in pd.tree.edges)


def partitions_iter(n: int):
    """All partitions of {0..n-1} as lists of masks (restricted growth)."""

    def rec(i, blocks):
        if i == n:
            yield [sum(1 << x for x in b) for b in blocks]
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


# -- random instances ---------------------------------------------------


def random_grid_metric(rng: random.Random, n: int) -> DistanceMatrix:
    """Distinct integer grid points: plenty of exact distance ties."""
    points: set[tuple[int, int]] = set()
    while len(points) < n:
        points.add((rng.randint(0, 12), rng.randint(0, 12)))
    cloud = PointCloud(tuple(f"p{i}" for i in range(n)),
                       tuple((float(x), float(y)) for x, y in sorted(points)))
    return distance_matrix_from_points(cloud)


def random_euclidean_metric(rng: random.Random, n: int) -> DistanceMatrix:
    cloud = PointCloud(tuple(f"p{i}" for i in range(n)),
                       tuple((rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10))
                             for _ in range(n)))
    return distance_matrix_from_points(cloud)


def random_metric(rng: random.Random, n: int) -> DistanceMatrix:
    if rng.random() < 0.5:
        return random_grid_metric(rng, n)
    return random_euclidean_metric(rng, n)


def random_dendrogram(rng: random.Random, n: int) -> Dendrogram:
    """Random refinement chain with occasional simultaneous merges."""
    labels = tuple(f"p{i}" for i in range(n))
    blocks = [1 << i for i in range(n)]
    radii = [0.0]
    parts = [Partition(n, tuple(blocks))]
    r = 0.0
    while len(blocks) > 1:
        r += rng.choice((1.0, 0.5, rng.uniform(0.1, 3.0)))
        rng.shuffle(blocks)
        groups = []
        i = 0
        merged_any = False
        while i < len(blocks):
            take = rng.randint(1, len(blocks) - i)
            if not merged_any and i + take >= len(blocks) and take == 1 and len(blocks) - i >= 2:
                take = 2
            group = blocks[i:i + take]
            if len(group) > 1:
                merged_any = True
            groups.append(group)
            i += take
        if not merged_any:
            groups[0] = groups[0] + groups[1]
            del groups[1]
        blocks = [sum(g) if len(g) > 1 else g[0] for g in groups]
        blocks = [b for b in blocks]
        radii.append(r)
        parts.append(Partition(n, tuple(blocks)))
    return Dendrogram(labels, tuple(radii), tuple(parts))


def random_ternary_tree(rng: random.Random, leaves: int) -> TernaryTree:
    """Grow by leaf insertion; vertex ids compacted to 0..V-1."""
    if leaves == 1:
        return TernaryTree(1, ())
    adj = {0: [1], 1: [0]}
    nxt = 2
    for _ in range(leaves - 2):
        edges = [(u, v) for u in adj for v in adj[u] if u < v]
        a, b = rng.choice(edges)
        w, leaf = nxt, nxt + 1
        nxt += 2
        adj[a].remove(b)
        adj[b].remove(a)
        adj[a].append(w)
        adj[b].append(w)
        adj[w] = [a, b, leaf]
        adj[leaf] = [w]
    ids = sorted(adj)
    ren = {v: i for i, v in enumerate(ids)}
    edges = sorted({(min(ren[u], ren[v]), max(ren[u], ren[v]))
                    for u in adj for v in adj[u]})
    return TernaryTree(len(ids), tuple(edges))


def random_predecomposition(rng: random.Random, n: int, labels,
                            max_leaves: int = 6) -> PreDecomposition:
    """Random valid pre-decomposition over an n-point universe.

    Rooted at the lowest leaf, each down-edge set covers the part of its
    parent's set routed to it, optionally padded with extra points; this
    is exactly the union condition, so the result always validates.
    """
    tree = random_ternary_tree(rng, rng.randint(2, max_leaves))
    full = (1 << n) - 1
    root = min(tree.leaves)
    gamma = {}

    def assign(parent, v, need):
        mine = need
        if rng.random() < 0.4:
            mine |= rng.getrandbits(n) & full
        gamma[(parent, v)] = mine
        kids = [w for w in tree.neighbors(v) if w != parent]
        if kids:
            p1 = p2 = 0
            for b in range(n):
                if (mine >> b) & 1:
                    side = rng.choice((0, 1, 2))
                    if side in (0, 2):
                        p1 |= 1 << b
                    if side in (1, 2):
                        p2 |= 1 << b
            assign(v, kids[0], p1)
            assign(v, kids[1], p2)

    (c0,) = tree.neighbors(root)
    assign(root, c0, rng.getrandbits(n) & full)
    return PreDecomposition(tree, gamma, n, labels)


# -- small-graph enumeration (for vertex connectivity) -------------------


def unit_graphs_up_to(max_edges: int):
    """All graphs with 1..max_edges edges and no isolated vertices, up to iso.

    Grown edge by edge with first-use vertex ordering, deduplicated per
    level with exact isomorphism tests (the graphs are tiny).
    """
    import networkx as nx

    def canonical_bucket(edges):
        g = nx.Graph(edges)
        return (g.number_of_nodes(),
                tuple(sorted(d for _, d in g.degree())))

    levels: list[list[tuple[tuple[int, int], ...]]] = [[((0, 1),)]]
    for _ in range(1, max_edges):
        seen: dict = {}
        for edges in levels[-1]:
            used = 1 + max(max(u, v) for u, v in edges)
            candidates = [(i, j) for i in range(used) for j in range(i + 1, used)
                          if (i, j) not in edges]
            candidates += [(i, used) for i in range(used)]
            candidates.append((used, used + 1))
            for e in candidates:
                new = tuple(sorted(edges + (e,)))
                bucket = canonical_bucket(new)
                known = seen.setdefault(bucket, [])
                gnew = nx.Graph(new)
                if not any(nx.is_isomorphic(gnew, nx.Graph(old)) for old in known):
                    known.append(new)
        levels.append([g for bucket in sorted(seen) for g in seen[bucket]])
    for level in levels:
        yield from level

"""Pre-decompositions, branch decompositions, exact branch width and duality.

A pre-decomposition is a ternary tree whose directed edges carry
subsets of the universe: the two directions of an edge carry
complementary sets, and at every internal node the three outgoing sets
cover the universe.  It is a decomposition when those three sets are
also mutually disjoint at every internal node, and a branch
decomposition when additionally every leaf carries a single point.

Width comparisons run on the distance axis (cost = -ln(value)), where
all the functions derived from distance matrices are exact; the
value-axis width is exp(-cost) at the reporting boundary.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

from . import bitset
from .connectivity import ConnectivityFunction, exp_neg, neg_log, separation_cost_matrix
from .errors import CapExceededError, InputFormatError, NotMaxSubmodularError
from .tangles import TangleDescriptor, tangle_number, tangle_number_radius, verify_tangle

__all__ = [
    "TernaryTree",
    "PreDecomposition",
    "DecompositionReport",
    "validate_pre_decomposition",
    "width",
    "width_radius",
    "exactness_transform",
    "from_atoms",
    "branch_width_exact",
    "SubsetFamily",
    "construct_decomposition_over",
    "DualityReport",
    "verify_duality",
    "to_dot",
]

BRANCH_WIDTH_CAP = 8
CONSTRUCT_CAP = 12


@dataclass(frozen=True)
class TernaryTree:
    """Unrooted tree whose internal vertices all have degree three."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        object.__setattr__(self, "edges", edges)
        if self.n_vertices < 1:
            raise InputFormatError("a tree has at least one vertex")
        if len(edges) != self.n_vertices - 1:
            raise InputFormatError("a tree on V vertices has V-1 edges")
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices) or u == v:
                raise InputFormatError(f"bad edge ({u}, {v})")
            adj[u].append(v)
            adj[v].append(u)
        for v, nb in enumerate(adj):
            if len(set(nb)) != len(nb):
                raise InputFormatError(f"parallel edges at vertex {v}")
            if self.n_vertices > 1 and len(nb) not in (1, 3):
                raise InputFormatError(
                    f"vertex {v} has degree {len(nb)}; ternary trees allow 1 or 3")
        # connectivity: walk from 0
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != self.n_vertices:
            raise InputFormatError("tree is not connected")
        object.__setattr__(self, "_adj", tuple(tuple(sorted(nb)) for nb in adj))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    @property
    def leaves(self) -> tuple[int, ...]:
        if self.n_vertices == 1:
            return (0,)
        return tuple(v for v in range(self.n_vertices) if len(self._adj[v]) == 1)

    @property
    def internal(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vertices) if len(self._adj[v]) == 3)


class PreDecomposition:
    """Ternary tree plus directed-edge-to-subset assignment.

    ``gamma`` may supply either or both directions of each edge; the
    missing direction is derived as the complement.  Supplying both
    directions inconsistently is rejected.  The union condition at
    internal nodes is *not* enforced here -- that is what
    :func:`validate_pre_decomposition` reports on.
    """

    def __init__(self, tree: TernaryTree, gamma: Mapping[tuple[int, int], int],
                 n: int, labels: Sequence[str] | None = None):
        bitset.check_universe(n, "PreDecomposition")
        self.tree = tree
        self.n = n
        self.full = bitset.full_mask(n)
        self.labels = tuple(labels) if labels is not None else tuple(
            f"x{i}" for i in range(n))
        if len(self.labels) != n:
            raise InputFormatError("one label per universe point required")
        table: dict[tuple[int, int], int] = {}
        for (s, t), mask in gamma.items():
            if (min(s, t), max(s, t)) not in tree.edges:
                raise InputFormatError(f"gamma given for non-edge ({s}, {t})")
            if not 0 <= mask <= self.full:
                raise InputFormatError(f"gamma mask {mask:#x} outside the universe")
            table[(s, t)] = mask
        for (u, v) in tree.edges:
            a, b = table.get((u, v)), table.get((v, u))
            if a is None and b is None:
                raise InputFormatError(f"edge ({u}, {v}) has no gamma assignment")
            if a is None:
                table[(u, v)] = b ^ self.full
            elif b is None:
                table[(v, u)] = a ^ self.full
            elif (a ^ self.full) != b:
                raise InputFormatError(
                    f"gamma on edge ({u}, {v}) is not complement-consistent")
        self._gamma = table

    def gamma(self, s: int, t: int) -> int:
        """Set assigned to the directed edge (s, t); points toward t."""
        return self._gamma[(s, t)]

    def atom(self, leaf: int) -> int:
        (u,) = self.tree.neighbors(leaf)
        return self._gamma[(u, leaf)]

    def atoms(self) -> tuple[tuple[int, int], ...]:
        """(leaf, atom mask) pairs in ascending leaf order."""
        if self.tree.n_vertices == 1:
            return ()
        return tuple((leaf, self.atom(leaf)) for leaf in self.tree.leaves)

    def exact_at(self, s: int) -> bool:
        nb = self.tree.neighbors(s)
        if len(nb) != 3:
            raise ValueError(f"{s} is not an internal node")
        a, b, c = (self._gamma[(s, t)] for t in nb)
        return not (a & b or a & c or b & c)

    @property
    def is_decomposition(self) -> bool:
        rep = validate_pre_decomposition(self)
        return rep.valid and not rep.inexact_nodes

    @property
    def is_complete(self) -> bool:
        return all(bitset.size(atom) == 1 for _, atom in self.atoms())

    @property
    def is_branch_decomposition(self) -> bool:
        return self.is_decomposition and self.is_complete

    def __eq__(self, other) -> bool:
        return (isinstance(other, PreDecomposition)
                and self.tree == other.tree
                and self.n == other.n
                and self._gamma == other._gamma)

    def __hash__(self):
        return hash((self.tree, self.n, tuple(sorted(self._gamma.items()))))

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        gamma = {}
        for (u, v) in self.tree.edges:
            gamma[f"{u}->{v}"] = bitset.labels_of(self._gamma[(u, v)], self.labels)
        return {
            "labels": list(self.labels),
            "vertices": list(range(self.tree.n_vertices)),
            "edges": [[u, v] for u, v in self.tree.edges],
            "gamma": gamma,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PreDecomposition":
        try:
            labels = tuple(str(x) for x in data["labels"])
            vertex_ids = list(data["vertices"])
            edge_items = data["edges"]
            gamma_items = data["gamma"]
        except (KeyError, TypeError):
            raise InputFormatError(
                "pre-decomposition JSON needs 'labels', 'vertices', 'edges', 'gamma'"
            ) from None
        index = {str(v): i for i, v in enumerate(vertex_ids)}
        if len(index) != len(vertex_ids):
            raise InputFormatError("duplicate vertex ids")
        edges = []
        for item in edge_items:
            if len(item) != 2:
                raise InputFormatError(f"bad edge entry {item!r}")
            s, t = (str(x) for x in item)
            if s not in index or t not in index:
                raise InputFormatError(f"edge ({s}, {t}) uses unknown vertices")
            edges.append((index[s], index[t]))
        tree = TernaryTree(len(vertex_ids), tuple(edges))
        gamma: dict[tuple[int, int], int] = {}
        for key, names in gamma_items.items():
            parts = key.split("->")
            if len(parts) != 2 or parts[0] not in index or parts[1] not in index:
                raise InputFormatError(f"bad gamma key {key!r}")
            mask = bitset.mask_from_labels(names, labels)
            gamma[(index[parts[0]], index[parts[1]])] = mask
        return cls(tree, gamma, len(labels), labels)


@dataclass(frozen=True)
class DecompositionReport:
    """Validation outcome for a pre-decomposition."""

    valid: bool                               # union condition at every internal node
    union_witness: int | None                 # internal node where covering fails
    exact_nodes: tuple[tuple[int, bool], ...]  # (internal node, exact?)
    complete: bool
    atoms: tuple[tuple[int, int], ...]        # (leaf, atom mask)

    @property
    def inexact_nodes(self) -> tuple[int, ...]:
        return tuple(v for v, ok in self.exact_nodes if not ok)

    @property
    def is_decomposition(self) -> bool:
        return self.valid and not self.inexact_nodes

    @property
    def is_branch_decomposition(self) -> bool:
        return self.is_decomposition and self.complete


def validate_pre_decomposition(pd: PreDecomposition) -> DecompositionReport:
    """Check both gamma conditions, exactness per node and completeness.

    Complement pairing is established at construction; the union
    condition and exactness are checked here node by node.
    """
    union_witness = None
    exact_flags = []
    for s in pd.tree.internal:
        nb = pd.tree.neighbors(s)
        sets = [pd.gamma(s, t) for t in nb]
        if sets[0] | sets[1] | sets[2] != pd.full:
            union_witness = union_witness if union_witness is not None else s
        exact_flags.append((s, pd.exact_at(s)))
    atoms = pd.atoms()
    complete = all(bitset.size(a) == 1 for _, a in atoms)
    return DecompositionReport(union_witness is None, union_witness,
                               tuple(exact_flags), complete, atoms)


def _edge_masks(pd: PreDecomposition) -> list[int]:
    """One gamma side per undirected edge (the higher-vertex side)."""
    return [pd.gamma(u, v) for u, v in pd.tree.edges]


def width(pd: PreDecomposition, f: ConnectivityFunction) -> float:
    """Largest function value over the edge sets (each edge counted once)."""
    if f.n != pd.n:
        raise ValueError("universe size mismatch")
    masks = _edge_masks(pd)
    if not masks:
        return 0.0
    return max(f.value(m) for m in masks)


def width_radius(pd: PreDecomposition, f: ConnectivityFunction) -> float:
    """Width on the distance axis: the smallest edge cost."""
    if f.n != pd.n:
        raise ValueError("universe size mismatch")
    masks = _edge_masks(pd)
    if not masks:
        return math.inf
    return min(f.cost(m) for m in masks)


def _prune_empty_leaves(pd: PreDecomposition) -> PreDecomposition:
    """Drop leaves with empty atoms by deleting the leaf and its internal
    neighbor, reconnecting the two open stubs.  Two-vertex trees stay."""
    adj = {v: list(pd.tree.neighbors(v)) for v in range(pd.tree.n_vertices)}
    gamma = dict(pd._gamma)
    alive = set(range(pd.tree.n_vertices))
    changed = True
    while changed:
        changed = False
        for leaf in sorted(alive):
            if len(adj[leaf]) != 1:
                continue
            (s,) = adj[leaf]
            if gamma[(s, leaf)] != 0 or len(adj[s]) != 3:
                continue
            a, b = sorted(x for x in adj[s] if x != leaf)
            for v in (leaf, s):
                alive.remove(v)
            adj[a].remove(s)
            adj[b].remove(s)
            adj[a].append(b)
            adj[b].append(a)
            gamma[(a, b)] = gamma[(s, b)]
            gamma[(b, a)] = gamma[(s, a)]
            for key in list(gamma):
                if leaf in key or s in key:
                    del gamma[key]
            del adj[leaf], adj[s]
            changed = True
            break
    if len(alive) == pd.tree.n_vertices:
        return pd
    order = sorted(alive)
    rename = {v: i for i, v in enumerate(order)}
    edges = sorted({(min(rename[u], rename[v]), max(rename[u], rename[v]))
                    for u in alive for v in adj[u]})
    tree = TernaryTree(len(order), tuple(edges))
    new_gamma = {(rename[s], rename[t]): m for (s, t), m in gamma.items()}
    return PreDecomposition(tree, new_gamma, pd.n, pd.labels)


def exactness_transform(pd: PreDecomposition, f: ConnectivityFunction,
                        prune: bool = True) -> PreDecomposition:
    """Make a pre-decomposition exact without increasing its width.

    Traversal is deterministic: breadth-first from the lowest-index
    leaf, successors in ascending order.  At each internal node the two
    successor sets are first cleared of the already-fixed predecessor
    side and then of each other; maximum-submodularity guarantees both
    updates keep every edge value at or below the incoming width, and a
    detected increase raises ``NotMaxSubmodularError`` with the pair
    that witnesses the failure.

    Output atoms are subsets of the input atoms; with ``prune`` (the
    default), leaves whose atom became empty are removed afterwards.
    """
    if f.n != pd.n:
        raise ValueError("universe size mismatch")
    tree = pd.tree
    if tree.n_vertices <= 2:
        return pd
    full = pd.full
    costs: dict[int, float] = {}

    def cost(mask: int) -> float:
        v = costs.get(mask)
        if v is None:
            v = f.cost(mask)
            costs[mask] = v
        return v

    start = min(tree.leaves)
    (s0,) = tree.neighbors(start)
    gamma2: dict[tuple[int, int], int] = {
        (start, s0): pd.gamma(start, s0),
        (s0, start): pd.gamma(s0, start),
    }
    queue = [(s0, start)]
    while queue:
        s, t = queue.pop(0)
        if len(tree.neighbors(s)) == 1:
            continue
        u1, u2 = (x for x in tree.neighbors(s) if x != t)
        x = gamma2[(s, t)]
        y1, y2 = pd.gamma(s, u1), pd.gamma(s, u2)
        if x & (y1 | y2):
            for y in (y1, y2):
                shrunk = y & (x ^ full)
                if cost(shrunk) < min(cost(y), cost(x)):
                    raise NotMaxSubmodularError(
                        "width would grow while clearing the predecessor side",
                        (y, x ^ full))
            y1 &= x ^ full
            y2 &= x ^ full
        if y1 & y2:
            shrunk = y1 & (y2 ^ full)
            if cost(shrunk) < min(cost(y1), cost(y2)):
                raise NotMaxSubmodularError(
                    "width would grow while separating the successor sides",
                    (y1, y2 ^ full))
            y1 = shrunk
        gamma2[(s, u1)] = y1
        gamma2[(u1, s)] = y1 ^ full
        gamma2[(s, u2)] = y2
        gamma2[(u2, s)] = y2 ^ full
        queue.append((u1, s))
        queue.append((u2, s))
    out = PreDecomposition(tree, gamma2, pd.n, pd.labels)
    return _prune_empty_leaves(out) if prune else out


def from_atoms(tree: TernaryTree, leaf_atoms: Mapping[int, int], n: int,
               labels: Sequence[str] | None = None) -> PreDecomposition:
    """Decomposition determined by a partition of the universe onto leaves.

    Every directed edge receives the union of the atoms it points
    toward; the result is exact at every internal node.
    """
    leaves = tree.leaves if tree.n_vertices > 1 else ()
    if sorted(leaf_atoms) != sorted(leaves):
        raise InputFormatError("exactly one atom per leaf required")
    union = 0
    total = 0
    for a in leaf_atoms.values():
        if a == 0:
            raise InputFormatError("empty atom: leaf_atoms must form a partition")
        union |= a
        total += bitset.size(a)
    if union != bitset.full_mask(n) or total != n:
        raise InputFormatError("leaf atoms must partition the universe")
    root = leaves[0]
    down: dict[tuple[int, int], int] = {}

    def fill(parent: int, v: int) -> int:
        if len(tree.neighbors(v)) == 1 and v != root:
            m = leaf_atoms[v]
        else:
            m = 0
            for w in tree.neighbors(v):
                if w != parent:
                    m |= fill(v, w)
        down[(parent, v)] = m
        return m

    (c0,) = tree.neighbors(root)
    fill(root, c0)
    gamma = dict(down)
    return PreDecomposition(TernaryTree(tree.n_vertices, tree.edges), gamma, n, labels)


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def branch_width_exact(f: ConnectivityFunction,
                       cap: int = BRANCH_WIDTH_CAP) -> tuple[float, PreDecomposition]:
    """Exact branch width by enumerating all leaf-labeled ternary trees.

    Trees are generated by inserting one leaf at a time into every
    existing edge, which produces each of the (2n-5)!! shapes exactly
    once (the count is verified as a self-check).  Ties between optimal
    trees break toward the smallest sorted tuple of edge separations,
    so the witness is deterministic.
    """
    n = f.n
    if not 2 <= n <= cap:
        raise CapExceededError("branch_width_exact", n, cap)
    costs = f.cost_table()
    adj: dict[int, list[int]] = {0: [1], 1: [0]}
    best: dict = {"cost": -math.inf, "serial": None, "edges": None}
    count = 0

    def splits() -> list[int]:
        # leaf mask below each edge, oriented away from leaf 0
        mask_below: dict[tuple[int, int], int] = {}

        def walk(parent: int, v: int) -> int:
            if len(adj[v]) == 1:
                m = 1 << v
            else:
                m = 0
                for w in adj[v]:
                    if w != parent:
                        m |= walk(v, w)
            mask_below[(parent, v)] = m
            return m

        walk(0, adj[0][0])
        return sorted(mask_below.values())

    def consider():
        nonlocal count
        count += 1
        masks = splits()
        w_cost = min(costs[m] for m in masks)
        if w_cost > best["cost"] or (w_cost == best["cost"] and tuple(masks) < best["serial"]):
            best["cost"] = w_cost
            best["serial"] = tuple(masks)
            best["edges"] = tuple(sorted((min(u, v), max(u, v))
                                         for u in adj for v in adj[u] if u < v))

    def insert(next_leaf: int, next_internal: int):
        if next_leaf == n:
            consider()
            return
        edges = sorted((min(u, v), max(u, v)) for u in adj for v in adj[u] if u < v)
        for (a, b) in edges:
            w = next_internal
            adj[a].remove(b)
            adj[b].remove(a)
            adj[a].append(w)
            adj[b].append(w)
            adj[w] = [a, b, next_leaf]
            adj[next_leaf] = [w]
            insert(next_leaf + 1, next_internal + 1)
            del adj[w], adj[next_leaf]
            adj[a].remove(w)
            adj[b].remove(w)
            adj[a].append(b)
            adj[b].append(a)

    if n == 2:
        consider()
    else:
        insert(2, n)
    expected = _double_factorial(2 * n - 5)
    if count != expected:
        raise RuntimeError(f"tree enumeration produced {count}, expected {expected}")

    vertex_count = max(max(u, v) for u, v in best["edges"]) + 1
    tree = TernaryTree(vertex_count, best["edges"])
    witness = from_atoms(tree, {leaf: 1 << leaf for leaf in range(n)}, n, f.labels)
    return exp_neg(best["cost"]), witness


@dataclass(frozen=True)
class SubsetFamily:
    """Subset-closed family containing all singletons, stored by maximal sets."""

    n: int
    maximal: tuple[int, ...]

    def __post_init__(self):
        reduced = []
        for m in sorted(set(self.maximal), key=lambda x: (-x.bit_count(), x)):
            if not any((m & k) == m for k in reduced):
                reduced.append(m)
        object.__setattr__(self, "maximal", tuple(sorted(reduced)))
        covered = 0
        for m in self.maximal:
            covered |= m
        if covered != bitset.full_mask(self.n):
            raise InputFormatError("family must contain every singleton")

    @classmethod
    def singletons(cls, n: int) -> "SubsetFamily":
        return cls(n, tuple(1 << i for i in range(n)))

    def contains(self, mask: int) -> bool:
        return any((mask & m) == mask for m in self.maximal)

    def with_powerset(self, mask: int) -> "SubsetFamily":
        return SubsetFamily(self.n, self.maximal + (mask,))


def _minimal_sets(masks: Iterable[int]) -> list[int]:
    out: list[int] = []
    for m in sorted(masks, key=lambda x: (x.bit_count(), x)):
        if not any((k & m) == k for k in out):
            out.append(m)
    return out


def _star(sets_toward_leaves: Sequence[int], n: int,
          labels: Sequence[str]) -> PreDecomposition:
    tree = TernaryTree(4, ((0, 3), (1, 3), (2, 3)))
    gamma = {(3, i): m for i, m in enumerate(sets_toward_leaves)}
    return PreDecomposition(tree, gamma, n, labels)


def _single_edge(atom_at_1: int, n: int, labels: Sequence[str]) -> PreDecomposition:
    tree = TernaryTree(2, ((0, 1),))
    return PreDecomposition(tree, {(0, 1): atom_at_1}, n, labels)


def construct_decomposition_over(
        f: ConnectivityFunction, family: SubsetFamily,
        order: float | None = None, *, radius: float | None = None,
        cap: int = CONSTRUCT_CAP) -> PreDecomposition | TangleDescriptor:
    """Decide duality constructively at one order threshold.

    Returns either a decomposition over ``family`` of width below the
    order, or a tangle of that order avoiding ``family`` -- exactly one
    exists.  The decomposition is grown inductively: while some subset
    of low value has neither itself nor its complement in the family,
    the smallest such subset splits the problem in two, and the partial
    trees are spliced along it; in the base case the flipped family
    either violates a tangle axiom (giving a two- or four-vertex tree)
    or is itself the tangle.

    The returned object is verified before it is handed back; a failure
    of those checks means ``f`` is not maximum-submodular and raises.
    The order may be given on the value axis (``order``) or exactly on
    the distance axis (``radius``, which wins); it must be positive.
    """
    if f.n > cap:
        raise CapExceededError("construct_decomposition_over", f.n, cap)
    if f.n != family.n:
        raise InputFormatError("family universe does not match the function")
    if radius is None:
        if order is None:
            raise ValueError("construct_decomposition_over needs an order or a radius")
        radius = neg_log(order)
    if radius == math.inf:
        raise ValueError("order must be positive (the empty family has no core)")

    costs = f.cost_table()
    full = f.full
    size = 1 << f.n

    def construct(fam: SubsetFamily) -> PreDecomposition | TangleDescriptor:
        bad = [m for m in range(size)
               if costs[m] > radius
               and not fam.contains(m) and not fam.contains(m ^ full)]
        if not bad:
            return base_case(fam)
        x1 = min(bad, key=lambda m: (m.bit_count(), m))

        res1 = construct(fam.with_powerset(x1))
        if isinstance(res1, TangleDescriptor):
            return res1
        if all(fam.contains(a) for _, a in res1.atoms()):
            return res1
        res2 = construct(fam.with_powerset(x1 ^ full))
        if isinstance(res2, TangleDescriptor):
            return res2
        if all(fam.contains(a) for _, a in res2.atoms()):
            return res2

        d1 = exactness_transform(res1, f)
        bad1 = [(leaf, a) for leaf, a in d1.atoms() if not fam.contains(a)]
        if not bad1:
            return d1
        if len(bad1) != 1 or bad1[0][1] != x1:
            raise NotMaxSubmodularError(
                "exact tree kept an unexpected atom outside the family; "
                "the function is not maximum-submodular")
        leaf1 = bad1[0][0]
        (s1,) = d1.tree.neighbors(leaf1)

        bad2 = [leaf for leaf, a in res2.atoms() if not fam.contains(a)]
        if res2.tree.n_vertices == 2:
            # the other side of a single edge is a family member covering x1;
            # grow the bad atom of d1 to it directly
            (good_leaf,) = (leaf for leaf, a in res2.atoms()
                            if fam.contains(a))
            grown = res2.atom(good_leaf) ^ full  # complement of the bad atom
            if (grown & x1) != x1:
                raise NotMaxSubmodularError(
                    "degenerate splice does not cover the splitting set")
            gamma = dict(d1._gamma)
            gamma[(s1, leaf1)] = grown
            gamma[(leaf1, s1)] = grown ^ full
            return PreDecomposition(d1.tree, gamma, f.n, f.labels)

        # graft one copy of d1 (minus its bad leaf) into every bad leaf of res2
        adj: dict[int, list[int]] = {}
        gamma: dict[tuple[int, int], int] = {}
        for v in range(res2.tree.n_vertices):
            adj[v] = list(res2.tree.neighbors(v))
        for (s, t), m in res2._gamma.items():
            gamma[(s, t)] = m
        offset = res2.tree.n_vertices
        for leaf2 in bad2:
            (s2,) = res2.tree.neighbors(leaf2)
            # re-point the bad leaf edge at the full complement side
            gamma[(s2, leaf2)] = x1 ^ full
            gamma[(leaf2, s2)] = x1
            # splice: replace leaf2 by a copy of d1 without leaf1
            ren = {v: offset + i
                   for i, v in enumerate(v for v in range(d1.tree.n_vertices)
                                         if v != leaf1)}
            offset += d1.tree.n_vertices - 1
            for v, nv in ren.items():
                adj[nv] = [ren[w] for w in d1.tree.neighbors(v) if w != leaf1]
            for (a, b), m in d1._gamma.items():
                if leaf1 in (a, b):
                    continue
                gamma[(ren[a], ren[b])] = m
            # connect s2 -- copy of s1, dropping leaf2
            ns1 = ren[s1]
            adj[s2].remove(leaf2)
            adj[s2].append(ns1)
            adj[ns1].append(s2)
            del adj[leaf2]
            for key in list(gamma):
                if leaf2 in key:
                    del gamma[key]
            gamma[(ns1, s2)] = x1
            gamma[(s2, ns1)] = x1 ^ full
        order_map = {v: i for i, v in enumerate(sorted(adj))}
        edges = sorted({(min(order_map[u], order_map[v]), max(order_map[u], order_map[v]))
                        for u in adj for v in adj[u]})
        tree = TernaryTree(len(order_map), tuple(edges))
        new_gamma = {(order_map[s], order_map[t]): m
                     for (s, t), m in gamma.items()
                     if s in order_map and t in order_map}
        return PreDecomposition(tree, new_gamma, f.n, f.labels)

    def base_case(fam: SubsetFamily) -> PreDecomposition | TangleDescriptor:
        flipped = sorted({m ^ full for m in range(size)
                          if costs[m] > radius and fam.contains(m)})
        minimals = _minimal_sets(flipped)
        for a, b, c in combinations_with_replacement(minimals, 3):
            if (a & b & c) == 0:
                return _star((a ^ full, b ^ full, c ^ full), f.n, f.labels)
        for m in minimals:
            if m.bit_count() == 1:
                return _single_edge(m, f.n, f.labels)
        # the flipped family is a tangle avoiding fam; identify its core
        sep = separation_cost_matrix(f)
        parent = list(range(f.n))

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for u in range(f.n):
            for v in range(u + 1, f.n):
                if sep[u][v] <= radius:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        parent[max(ru, rv)] = min(ru, rv)
        comps: dict[int, int] = {}
        for v in range(f.n):
            comps[find(v)] = comps.get(find(v), 0) | (1 << v)
        cores = [m for m in comps.values() if bitset.size(m) >= 2
                 and all((m & y) == m for y in minimals)]
        if len(cores) != 1:
            raise NotMaxSubmodularError(
                f"expected a unique core component, found {len(cores)}")
        core = cores[0]
        member = set(flipped)
        for m in range(size):
            formula = costs[m] > radius and (m & core) == core
            if formula != (m in member):
                raise NotMaxSubmodularError(
                    "tangle family does not match its core descriptor")
        return TangleDescriptor(f.n, radius, core)

    limit = sys.getrecursionlimit()
    try:
        sys.setrecursionlimit(max(limit, 4 * size + 1000))
        result = construct(family)
    finally:
        sys.setrecursionlimit(limit)

    if isinstance(result, TangleDescriptor):
        for m in range(size):
            if costs[m] > radius and (m & result.core) == result.core:
                if family.contains(m):
                    raise NotMaxSubmodularError(
                        "returned tangle does not avoid the family")
        if f.n <= 8:
            report = verify_tangle(f, result)
            if not report.ok:
                raise NotMaxSubmodularError(
                    f"returned tangle violates {report.violated_axioms()}")
        return result

    final = exactness_transform(result, f)
    rep = validate_pre_decomposition(final)
    if not rep.is_decomposition:
        raise NotMaxSubmodularError("construction did not yield a decomposition")
    if any(not family.contains(a) for _, a in final.atoms()):
        raise NotMaxSubmodularError("construction left an atom outside the family")
    if not (width_radius(final, f) > radius):
        raise NotMaxSubmodularError("construction exceeded the width bound")
    return final


@dataclass(frozen=True)
class DualityReport:
    """Tangle number and branch width computed by independent routes."""

    tangle_number: float
    branch_width: float
    tangle_radius: float
    branch_radius: float
    equal: bool
    witness: PreDecomposition

    def describe(self) -> str:
        flag = "=" if self.equal else "!="
        return (f"tn={self.tangle_number!r} {flag} bw={self.branch_width!r} "
                f"(radius axis: {self.tangle_radius!r} vs {self.branch_radius!r})")


def verify_duality(f: ConnectivityFunction, cap: int = BRANCH_WIDTH_CAP) -> DualityReport:
    """Compare the largest tangle order with the exact branch width.

    The two sides come from independent computations (pairwise
    separation sweep vs. exhaustive tree enumeration) and must agree
    exactly on the distance axis for maximum-submodular functions.
    """
    if not 2 <= f.n <= cap:
        raise CapExceededError("verify_duality", f.n, cap)
    tn_r = tangle_number_radius(f)
    bw, witness = branch_width_exact(f, cap=cap)
    bw_r = width_radius(witness, f)
    return DualityReport(tangle_number(f), bw, tn_r, bw_r, tn_r == bw_r, witness)


def to_dot(pd: PreDecomposition, f: ConnectivityFunction | None = None) -> str:
    """Graphviz rendering with atom-labeled leaves and edge separations."""
    lines = ["graph decomposition {"]
    leaves = set(pd.tree.leaves) if pd.tree.n_vertices > 1 else set()
    for v in range(pd.tree.n_vertices):
        if v in leaves:
            names = ",".join(bitset.labels_of(pd.atom(v), pd.labels))
            lines.append(f'  v{v} [shape=box, label="{{{names}}}"];')
        else:
            lines.append(f'  v{v} [shape=circle, label="{v}"];')
    for u, v in pd.tree.edges:
        names = ",".join(bitset.labels_of(pd.gamma(u, v), pd.labels))
        label = f"γ={{{names}}}"
        if f is not None:
            label += f" κ={f.value(pd.gamma(u, v))!r}"
        lines.append(f'  v{u} -- v{v} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

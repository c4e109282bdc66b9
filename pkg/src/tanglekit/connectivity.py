"""Set functions on the subsets of a finite universe.

Every function here exposes two consistent views of the same quantity:

* ``value(X)`` -- the function value, a similarity-like order in [0, 1)
  for the distance-derived kinds (0 exactly on the trivial sets);
* ``cost(X)``  -- the value pulled back through exp(-r) to the distance
  axis, with value 0 mapping to +inf.

Distance-derived kinds compute ``cost`` directly from matrix entries
(a min or max of stored distances, no arithmetic), so comparisons on
the cost axis are exact; ``value`` is then ``exp(-cost)``.  Kinds whose
natural axis is the value (tabulated tables, vertex connectivity,
average similarity) derive ``cost = -ln(value)``.  Both directions use
monotone library functions, so selections (min/max/argmin) agree on
both axes bit for bit.

The exhaustive property checks (normalization, symmetry, submodularity,
maximum-submodularity) sweep all subsets or all subset pairs and are
capped accordingly; they refuse larger universes up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import bitset
from .errors import CapExceededError, InputFormatError
from .metric import DistanceMatrix

__all__ = [
    "ConnectivityFunction",
    "SingleLinkageConnectivity",
    "CompleteLinkageConnectivity",
    "AverageLinkageConnectivity",
    "VertexConnectivity",
    "TabulatedConnectivity",
    "AxiomViolation",
    "AxiomReport",
    "check_axioms",
    "find_violation",
    "min_separation",
    "separation_cost",
    "ThresholdGraph",
    "threshold_graph",
    "canonical_zero_partition",
    "tabulate",
]

CHECK_AXIOMS_CAP = 24
FIND_VIOLATION_CAP = 13
SEPARATION_CAP = 24
ZERO_PARTITION_CAP = 24


def exp_neg(cost: float) -> float:
    """Order value of a distance-axis cost; exp(-inf) = 0."""
    if cost == math.inf:
        return 0.0
    return math.exp(-cost)


def neg_log(value: float) -> float:
    """Distance-axis cost of an order value; -ln(0) = +inf."""
    if value == 0.0:
        return math.inf
    return -math.log(value)


class ConnectivityFunction:
    """Base class: a total assignment mask -> value over an n-point universe."""

    def __init__(self, n: int, labels: Sequence[str] | None = None):
        bitset.check_universe(n, type(self).__name__)
        self.n = n
        self.full = bitset.full_mask(n)
        if labels is None:
            labels = tuple(f"x{i}" for i in range(n))
        if len(labels) != n:
            raise InputFormatError("one label per universe point required")
        self.labels = tuple(labels)
        self._value_table: list[float] | None = None
        self._cost_table: list[float] | None = None

    # exactly one of value / cost must be overridden
    def value(self, mask: int) -> float:
        return exp_neg(self.cost(mask))

    def cost(self, mask: int) -> float:
        return neg_log(self.value(mask))

    def __call__(self, mask: int) -> float:
        return self.value(mask)

    def _check_mask(self, mask: int) -> None:
        if not 0 <= mask <= self.full:
            raise ValueError(f"mask {mask:#x} outside the {self.n}-point universe")

    # -- full tables over all 2^n subsets (cached) ---------------------

    def _build_cost_table(self) -> list[float]:
        return [self.cost(m) for m in bitset.subsets(self.n)]

    def _build_value_table(self) -> list[float]:
        return [exp_neg(c) for c in self.cost_table()]

    def cost_table(self) -> list[float]:
        if self._cost_table is None:
            self._cost_table = self._build_cost_table()
        return self._cost_table

    def value_table(self) -> list[float]:
        if self._value_table is None:
            self._value_table = self._build_value_table()
        return self._value_table


class _MatrixBacked(ConnectivityFunction):
    def __init__(self, matrix: DistanceMatrix):
        super().__init__(matrix.n, matrix.labels)
        self.matrix = matrix


class SingleLinkageConnectivity(_MatrixBacked):
    """exp(-(smallest distance between the set and its complement)).

    This is the connectivity function whose tangles mirror single-linkage
    clustering: a set scores high when some outside point sits close to it.
    """

    def cost(self, mask: int) -> float:
        self._check_mask(mask)
        return _cross_extreme(self.matrix.rows, mask, self.n, want_min=True)

    def _build_cost_table(self) -> list[float]:
        return _cross_extreme_table(self.matrix.rows, self.n, want_min=True)


class CompleteLinkageConnectivity(_MatrixBacked):
    """exp(-(largest distance between the set and its complement))."""

    def cost(self, mask: int) -> float:
        self._check_mask(mask)
        return _cross_extreme(self.matrix.rows, mask, self.n, want_min=False)

    def _build_cost_table(self) -> list[float]:
        return _cross_extreme_table(self.matrix.rows, self.n, want_min=False)


class AverageLinkageConnectivity(_MatrixBacked):
    """Mean of exp(-d) over all cross pairs, 0 on the trivial sets."""

    def __init__(self, matrix: DistanceMatrix):
        super().__init__(matrix)
        # similarity entries fixed once so scalar and table paths agree bitwise
        self._sim = [[math.exp(-x) for x in row] for row in matrix.rows]

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        if mask == 0 or mask == self.full:
            return 0.0
        total = 0.0
        count = 0
        # unordered pairs in ascending (i, j) order: identical rounding
        # for a set and its complement
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if ((mask >> i) ^ (mask >> j)) & 1:
                    total += self._sim[i][j]
                    count += 1
        return total / count

    def _build_value_table(self) -> list[float]:
        size = 1 << self.n
        idx = np.arange(size, dtype=np.int64)
        total = np.zeros(size)
        count = np.zeros(size, dtype=np.int64)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                cross = (((idx >> i) ^ (idx >> j)) & 1).astype(bool)
                total[cross] += self._sim[i][j]
                count[cross] += 1
        count[0] = count[-1] = 1  # avoid 0/0; trivial sets forced to 0 below
        out = total / count
        out[0] = out[-1] = 0.0
        return out.tolist()

    def _build_cost_table(self) -> list[float]:
        return [neg_log(v) for v in self.value_table()]


class VertexConnectivity(ConnectivityFunction):
    """Weighted vertex connectivity of a graph; the universe is the edge set.

    ``value(X)`` sums the weights of all vertices incident to an edge in
    X and an edge outside X.  Vertex weights default to 1.
    """

    def __init__(self, edges: Sequence[tuple[Hashable, Hashable]],
                 weights: Mapping[Hashable, float] | None = None):
        seen = set()
        vertices: list[Hashable] = []
        norm: list[tuple[Hashable, Hashable]] = []
        for (u, v) in edges:
            if u == v:
                raise InputFormatError(f"self-loop at {u!r}")
            key = frozenset((u, v))
            if key in seen:
                raise InputFormatError(f"duplicate edge {u!r}-{v!r}")
            seen.add(key)
            norm.append((u, v))
            for w in (u, v):
                if w not in vertices:
                    vertices.append(w)
        labels = tuple(f"{u}-{v}" for u, v in norm)
        super().__init__(len(norm), labels)
        self.edges = tuple(norm)
        self.vertices = tuple(vertices)
        self.weights = {v: float((weights or {}).get(v, 1.0)) for v in vertices}
        self._incident = []
        for v in vertices:
            m = 0
            for e, (a, b) in enumerate(norm):
                if v == a or v == b:
                    m |= 1 << e
            self._incident.append(m)

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        total = 0.0
        for v, inc in zip(self.vertices, self._incident):
            part = mask & inc
            if part != 0 and part != inc:
                total += self.weights[v]
        return total

    def _build_value_table(self) -> list[float]:
        size = 1 << self.n
        idx = np.arange(size, dtype=np.int64)
        out = np.zeros(size)
        for v, inc in zip(self.vertices, self._incident):
            part = idx & inc
            out[(part != 0) & (part != inc)] += self.weights[v]
        return out.tolist()

    def _build_cost_table(self) -> list[float]:
        return [neg_log(v) for v in self.value_table()]


class TabulatedConnectivity(ConnectivityFunction):
    """Explicit table of 2^n values indexed by subset bit pattern."""

    def __init__(self, values: Sequence[float], labels: Sequence[str] | None = None):
        size = len(values)
        n = size.bit_length() - 1
        if size != 1 << n:
            raise InputFormatError(f"table length {size} is not a power of two")
        super().__init__(n, labels)
        self.values = tuple(float(v) for v in values)
        for v in self.values:
            if not math.isfinite(v):
                raise InputFormatError(f"non-finite table entry {v!r}")

    def value(self, mask: int) -> float:
        self._check_mask(mask)
        return self.values[mask]

    def _build_value_table(self) -> list[float]:
        return list(self.values)

    def _build_cost_table(self) -> list[float]:
        return [neg_log(v) for v in self.values]

    def to_json_dict(self) -> dict:
        return {"n": self.n, "values": list(self.values), "labels": list(self.labels)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "TabulatedConnectivity":
        try:
            n = int(data["n"])
            values = data["values"]
        except (KeyError, TypeError, ValueError):
            raise InputFormatError("tabulated JSON must carry 'n' and 'values'") from None
        if len(values) != 1 << n:
            raise InputFormatError(f"expected {1 << n} values for n={n}, got {len(values)}")
        labels = data.get("labels")
        return cls([float(v) for v in values], labels)


def tabulate(f: ConnectivityFunction, cap: int = 20) -> TabulatedConnectivity:
    """Materialize any connectivity function as an explicit table."""
    if f.n > cap:
        raise CapExceededError("tabulate", f.n, cap)
    return TabulatedConnectivity(f.value_table(), f.labels)


def _cross_extreme(rows, mask: int, n: int, want_min: bool) -> float:
    if mask == 0 or mask == (1 << n) - 1:
        return math.inf
    best = math.inf if want_min else -math.inf
    for i in range(n):
        side_i = (mask >> i) & 1
        row = rows[i]
        for j in range(i + 1, n):
            if side_i != ((mask >> j) & 1):
                d = row[j]
                if want_min:
                    if d < best:
                        best = d
                elif d > best:
                    best = d
    return best


def _cross_extreme_table(rows, n: int, want_min: bool) -> list[float]:
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    out = np.full(size, math.inf if want_min else -math.inf)
    for i in range(n):
        for j in range(i + 1, n):
            cross = (((idx >> i) ^ (idx >> j)) & 1).astype(bool)
            if want_min:
                out[cross] = np.minimum(out[cross], rows[i][j])
            else:
                out[cross] = np.maximum(out[cross], rows[i][j])
    if size >= 1:
        out[0] = math.inf
        out[-1] = math.inf
    return out.tolist()


# -- structural property checks ---------------------------------------


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str                 # normalized | symmetric | nonnegative
    mask: int
    values: tuple[float, ...]


@dataclass(frozen=True)
class AxiomReport:
    n: int
    violations: tuple[AxiomViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_axioms(f: ConnectivityFunction, cap: int = CHECK_AXIOMS_CAP) -> AxiomReport:
    """Exhaustively verify normalization and symmetry over all 2^n subsets."""
    if f.n > cap:
        raise CapExceededError("check_axioms", f.n, cap)
    table = np.asarray(f.value_table())
    out: list[AxiomViolation] = []
    if table[0] != 0.0:
        out.append(AxiomViolation("normalized", 0, (float(table[0]),)))
    bad = np.nonzero(~((table >= 0.0) & np.isfinite(table)))[0]
    for m in bad[:8]:
        out.append(AxiomViolation("nonnegative", int(m), (float(table[m]),)))
    # complement of m within n bits is (2^n - 1) - m, so the complement
    # view of the table is simply its reversal
    asym = np.nonzero(table != table[::-1])[0]
    for m in asym[:8]:
        mask = int(m)
        out.append(AxiomViolation(
            "symmetric", mask,
            (float(table[mask]), float(table[f.full ^ mask]))))
    return AxiomReport(f.n, tuple(out))


def find_violation(property_name: str, f: ConnectivityFunction,
                   cap: int = FIND_VIOLATION_CAP) -> tuple[int, int] | None:
    """Sweep all 4^n subset pairs for a (maximum-)submodularity violation.

    ``property_name`` is ``"submodular"`` or ``"max-submodular"``.
    Returns None when the inequality holds everywhere, otherwise the
    first violating pair (X, Y) in lexicographic mask order.
    """
    if property_name not in ("submodular", "max-submodular", "max_submodular"):
        raise ValueError(f"unknown property {property_name!r}")
    if f.n > cap:
        raise CapExceededError("find_violation", f.n, cap)
    table = np.asarray(f.value_table())
    idx = np.arange(1 << f.n, dtype=np.int64)
    submodular = property_name == "submodular"
    for x in range(1 << f.n):
        inter = table[x & idx]
        union = table[x | idx]
        if submodular:
            bad = table[x] + table < inter + union
        else:
            bad = np.maximum(table[x], table) < np.maximum(inter, union)
        if bad.any():
            return x, int(np.argmax(bad))
    return None


# -- separations and the threshold graph ------------------------------


def _separator_selection(n: int, u: int, v: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return (((idx >> u) & 1) == 1) & (((idx >> v) & 1) == 0)


def min_separation(f: ConnectivityFunction, u: int, v: int,
                   cap: int = SEPARATION_CAP) -> float:
    """Exact minimum of f over all subsets separating u from v."""
    if u == v:
        raise ValueError("min_separation needs two distinct points")
    if f.n > cap:
        raise CapExceededError("min_separation", f.n, cap)
    sel = _separator_selection(f.n, u, v)
    return float(np.asarray(f.value_table())[sel].min())


def separation_cost(f: ConnectivityFunction, u: int, v: int,
                    cap: int = SEPARATION_CAP) -> float:
    """min_separation pulled back to the distance axis: max cost over separators."""
    if u == v:
        raise ValueError("separation_cost needs two distinct points")
    if f.n > cap:
        raise CapExceededError("separation_cost", f.n, cap)
    sel = _separator_selection(f.n, u, v)
    return float(np.asarray(f.cost_table())[sel].max())


def separation_cost_matrix(f: ConnectivityFunction,
                           cap: int = SEPARATION_CAP) -> list[list[float]]:
    """All pairwise separation costs (0 on the diagonal)."""
    if f.n > cap:
        raise CapExceededError("separation_cost", f.n, cap)
    costs = np.asarray(f.cost_table())
    out = [[0.0] * f.n for _ in range(f.n)]
    for u in range(f.n):
        for v in range(u + 1, f.n):
            c = float(costs[_separator_selection(f.n, u, v)].max())
            out[u][v] = out[v][u] = c
    return out


def _components_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, int] = {}
    for x in range(n):
        r = find(x)
        groups[r] = groups.get(r, 0) | (1 << x)
    return tuple(sorted(groups.values(), key=lambda m: (m & -m, m)))


@dataclass(frozen=True)
class ThresholdGraph:
    """Pairs whose minimum separation stays at or above a threshold order."""

    n: int
    order: float                       # value-axis threshold k
    radius: float | None               # distance-axis threshold, when exact
    edges: tuple[tuple[int, int], ...]
    components: tuple[int, ...]        # masks, sorted by least element


def threshold_graph(f: ConnectivityFunction, order: float | None = None, *,
                    radius: float | None = None,
                    cap: int = SEPARATION_CAP) -> ThresholdGraph:
    """Graph with an edge (u, v) whenever min_separation(u, v) >= k.

    The threshold may be given as an order ``k`` or as a distance-axis
    ``radius`` (k = exp(-radius)); the radius is the exact axis and wins
    when both are supplied.
    """
    if order is None and radius is None:
        raise ValueError("threshold_graph needs an order or a radius")
    if radius is None and order < 0:
        raise ValueError("order must be >= 0")
    sep = separation_cost_matrix(f, cap=cap)
    edges = []
    for u in range(f.n):
        for v in range(u + 1, f.n):
            if radius is not None:
                keep = sep[u][v] <= radius
            else:
                keep = exp_neg(sep[u][v]) >= order
            if keep:
                edges.append((u, v))
    if order is None:
        order = exp_neg(radius)
    return ThresholdGraph(f.n, order, radius, tuple(edges),
                          _components_from_edges(f.n, edges))


def canonical_zero_partition(f: ConnectivityFunction,
                             cap: int = ZERO_PARTITION_CAP) -> tuple[int, ...]:
    """Minimal blocks V_i with f(V_i) = 0 whose maxima reconstruct f.

    For a strictly positive symmetric normalized function this is {U}.
    Raises ValueError when the zero sets are not intersection-closed
    (then no such partition exists; maximum-submodularity guarantees
    closure).
    """
    if f.n > cap:
        raise CapExceededError("canonical_zero_partition", f.n, cap)
    if f.n == 0:
        return ()
    table = np.asarray(f.value_table())
    zero_masks = np.nonzero(table == 0.0)[0]
    blocks = [f.full] * f.n
    for m in zero_masks:
        m = int(m)
        for i in bitset.bits(m):
            blocks[i] &= m
    for i, b in enumerate(blocks):
        if table[b] != 0.0:
            raise ValueError(
                f"zero sets are not intersection-closed: block {b:#x} for "
                f"point {f.labels[i]} has value {float(table[b])!r}")
    unique = sorted(set(blocks), key=lambda m: (m & -m, m))
    if sum(bitset.size(b) for b in unique) != f.n:
        raise ValueError("zero blocks overlap; no canonical partition")
    return tuple(unique)

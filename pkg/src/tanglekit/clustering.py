"""Single-linkage clustering, dendrograms, ultrametrics and the tangle bridge.

A dendrogram is stored as the finite step function it is: strictly
increasing merge radii R_0 = 0 < R_1 < ... < R_m with one partition per
radius, refining from singletons to the whole universe.  Evaluation at
radius r returns the partition of the largest R_i <= r, which makes the
function right-continuous by construction.

Merge radii are minima of stored distances, never arithmetic on them,
so all radius comparisons and cross-structure equalities in this module
are exact float equalities.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from . import bitset
from .connectivity import ConnectivityFunction, SingleLinkageConnectivity, separation_cost_matrix
from .errors import CapExceededError, InputFormatError, NotMaxSubmodularError
from .metric import DistanceMatrix, Ultrametric, ultrametric_check
from .tangles import TangleCatalog, TangleDescriptor, enumerate_tangles, verify_tangle

__all__ = [
    "Partition",
    "Dendrogram",
    "DendrogramReport",
    "Linkage",
    "linkage_eval",
    "single_linkage",
    "validate_dendrogram",
    "dendrogram_to_ultrametric",
    "ultrametric_to_dendrogram",
    "minimax_ultrametric",
    "connectivity_from_dendrogram",
    "dendrogram_from_connectivity",
    "block_tangle_correspondence",
    "BlockTangleReport",
]

DENDROGRAM_FROM_CONNECTIVITY_CAP = 16
CORRESPONDENCE_CAP = 8


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering an n-point universe.

    Blocks are masks, normalized to ascending least-element order.
    """

    n: int
    blocks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks",
                           tuple(sorted(self.blocks, key=lambda m: m & -m)))
        union = 0
        total = 0
        for b in self.blocks:
            if b == 0:
                raise InputFormatError("empty block in partition")
            union |= b
            total += bitset.size(b)
        if union != bitset.full_mask(self.n) or total != self.n:
            raise InputFormatError("blocks must partition the universe")

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls(n, (bitset.full_mask(n),))

    def block_containing(self, i: int) -> int:
        probe = 1 << i
        for b in self.blocks:
            if b & probe:
                return b
        raise IndexError(i)

    def refines(self, other: "Partition") -> bool:
        return all((b & other.block_containing((b & -b).bit_length() - 1)) == b
                   for b in self.blocks)


@dataclass(frozen=True)
class Dendrogram:
    """Step function from merge radii to partitions."""

    labels: tuple[str, ...]
    radii: tuple[float, ...]
    partitions: tuple[Partition, ...]

    def __post_init__(self):
        if len(self.radii) != len(self.partitions) or not self.radii:
            raise InputFormatError("one partition per radius required")
        if self.radii[0] != 0.0:
            raise InputFormatError("the first radius must be 0")
        n = len(self.labels)
        if any(p.n != n for p in self.partitions):
            raise InputFormatError("partition universe does not match labels")

    @property
    def n(self) -> int:
        return len(self.labels)

    def evaluate(self, r: float) -> Partition:
        """Partition at radius r: the step of the largest merge radius <= r."""
        if r < 0:
            raise ValueError("radius must be >= 0")
        return self.partitions[bisect_right(self.radii, r) - 1]

    @property
    def merge_radii(self) -> tuple[float, ...]:
        return self.radii[1:]

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        steps = []
        for r, p in zip(self.radii, self.partitions):
            steps.append({
                "r": r,
                "blocks": [bitset.labels_of(b, self.labels) for b in p.blocks],
            })
        return {"labels": list(self.labels), "steps": steps}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Dendrogram":
        try:
            labels = tuple(str(x) for x in data["labels"])
            steps = data["steps"]
        except (KeyError, TypeError):
            raise InputFormatError("dendrogram JSON needs 'labels' and 'steps'") from None
        radii = []
        parts = []
        for step in steps:
            try:
                radii.append(float(step["r"]))
                blocks = tuple(bitset.mask_from_labels(b, labels) for b in step["blocks"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InputFormatError(f"malformed dendrogram step: {exc}") from None
            parts.append(Partition(len(labels), blocks))
        return cls(labels, tuple(radii), tuple(parts))

    def to_newick(self) -> str:
        """Newick-like rendering of the merge tree with r=<radius> annotations."""
        nodes: dict[int, str] = {1 << i: lab for i, lab in enumerate(self.labels)}
        for r, part in zip(self.radii[1:], self.partitions[1:]):
            for block in part.blocks:
                if block in nodes:
                    continue
                children = sorted((m for m in nodes if (m & block) == m and m != block),
                                  key=lambda m: m & -m)
                # keep only maximal available children
                children = [c for c in children
                            if not any(c != d and (c & d) == c for d in children)]
                nodes[block] = "(" + ",".join(nodes[c] for c in children) + f")r={r!r}"
                for c in children:
                    del nodes[c]
        root = bitset.full_mask(self.n)
        return nodes[root] + ";"


@dataclass(frozen=True)
class DendrogramReport:
    """Outcome of checking the four dendrogram conditions."""

    starts_at_singletons: bool
    ends_at_whole: bool
    refinement_witness: tuple[int, int] | None   # consecutive step indices
    radii_witness: tuple[int, int] | None        # non-increasing radius pair
    right_continuous: bool                       # by the step representation

    @property
    def ok(self) -> bool:
        return (self.starts_at_singletons and self.ends_at_whole
                and self.refinement_witness is None and self.radii_witness is None)

    def describe(self) -> str:
        if self.ok:
            return "valid dendrogram (right-continuity holds by the step representation)"
        problems = []
        if not self.starts_at_singletons:
            problems.append("condition (1): theta(0) is not the singleton partition")
        if not self.ends_at_whole:
            problems.append("condition (2): final partition is not {U}")
        if self.refinement_witness:
            i, j = self.refinement_witness
            problems.append(f"condition (3): step {i} does not refine step {j}")
        if self.radii_witness:
            i, j = self.radii_witness
            problems.append(f"radii not strictly increasing between steps {i} and {j}")
        return "; ".join(problems)


def validate_dendrogram(d: Dendrogram) -> DendrogramReport:
    """Check conditions (1)-(4); (4) holds by the step-function representation."""
    starts = d.partitions[0] == Partition.singletons(d.n)
    ends = d.partitions[-1] == Partition.whole(d.n)
    refinement = None
    radii = None
    for i in range(len(d.radii) - 1):
        if not (d.radii[i] < d.radii[i + 1]):
            radii = radii or (i, i + 1)
        a, b = d.partitions[i], d.partitions[i + 1]
        if not a.refines(b) or a == b:
            refinement = refinement or (i, i + 1)
    return DendrogramReport(starts, ends, refinement, radii, True)


class Linkage(str, Enum):
    SINGLE = "single"
    COMPLETE = "complete"
    AVERAGE = "average"


def linkage_eval(kind: Linkage | str, m: DistanceMatrix, a: int, b: int) -> float:
    """Cross-set distance between two disjoint nonempty subsets (masks)."""
    kind = Linkage(kind)
    if a == 0 or b == 0:
        raise ValueError("linkage needs nonempty sets")
    if a & b:
        raise ValueError("linkage needs disjoint sets")
    pairs = [(i, j) for i in bitset.bits(a) for j in bitset.bits(b)]
    if kind is Linkage.SINGLE:
        return min(m.rows[i][j] for i, j in pairs)
    if kind is Linkage.COMPLETE:
        return max(m.rows[i][j] for i, j in pairs)
    total = 0.0
    for i, j in pairs:
        total += m.rows[i][j]
    return total / len(pairs)


def single_linkage(m: DistanceMatrix, tie_eps: float = 0.0) -> Dendrogram:
    """Agglomerative single-linkage dendrogram with simultaneous chain merges.

    Each round merges every pair of blocks whose cross distance is at
    most the round minimum (plus ``tie_eps``, default exact ties only),
    closing chains through the transitive closure, so equal distances
    merge together in one step.
    """
    if tie_eps < 0:
        raise ValueError("tie_eps must be >= 0")
    n = m.n
    parts = [Partition.singletons(n)]
    radii = [0.0]
    blocks = list(parts[0].blocks)
    while len(blocks) > 1:
        best = math.inf
        gaps = {}
        for x in range(len(blocks)):
            for y in range(x + 1, len(blocks)):
                g = linkage_eval(Linkage.SINGLE, m, blocks[x], blocks[y])
                gaps[(x, y)] = g
                if g < best:
                    best = g
        parent = list(range(len(blocks)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for (x, y), g in gaps.items():
            if g <= best + tie_eps:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[max(rx, ry)] = min(rx, ry)
        merged: dict[int, int] = {}
        for i, b in enumerate(blocks):
            r = find(i)
            merged[r] = merged.get(r, 0) | b
        blocks = sorted(merged.values(), key=lambda mask: mask & -mask)
        radii.append(best)
        parts.append(Partition(n, tuple(blocks)))
    return Dendrogram(m.labels, tuple(radii), tuple(parts))


def dendrogram_to_ultrametric(d: Dendrogram) -> Ultrametric:
    """u(x, y) = first radius at which x and y share a block."""
    report = validate_dendrogram(d)
    if not report.ok:
        raise InputFormatError("invalid dendrogram: " + report.describe())
    n = d.n
    rows = [[0.0] * n for _ in range(n)]
    assigned = [[False] * n for _ in range(n)]
    for r, part in zip(d.radii, d.partitions):
        for block in part.blocks:
            members = list(bitset.bits(block))
            for ai, i in enumerate(members):
                for j in members[ai + 1:]:
                    if not assigned[i][j]:
                        assigned[i][j] = assigned[j][i] = True
                        rows[i][j] = rows[j][i] = r
    return Ultrametric(d.labels, tuple(tuple(row) for row in rows))


def ultrametric_to_dendrogram(u: DistanceMatrix) -> Dendrogram:
    """Partitions of the relation {u <= r}, one step per distinct value of u."""
    witness = ultrametric_check(u)
    if witness is not None:
        i, m_, k = witness
        raise InputFormatError(
            f"not an ultrametric at ({u.labels[i]},{u.labels[m_]},{u.labels[k]})")
    n = u.n
    values = sorted({u.rows[i][j] for i in range(n) for j in range(i + 1, n)})
    radii = [0.0]
    parts = [Partition.singletons(n)]
    for r in values:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if u.rows[i][j] <= r]
        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in edges:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        groups: dict[int, int] = {}
        for x in range(n):
            groups.setdefault(find(x), 0)
            groups[find(x)] |= 1 << x
        radii.append(r)
        parts.append(Partition(n, tuple(groups.values())))
    return Dendrogram(u.labels, tuple(radii), tuple(parts))


def minimax_ultrametric(m: DistanceMatrix) -> Ultrametric:
    """Bottleneck distances: minimum over paths of the largest step.

    Dynamic program over intermediate points; every output entry is one
    of the input entries, so the result is exact and coincides with the
    single-linkage merge radii.
    """
    n = m.n
    rows = [list(r) for r in m.rows]
    for k in range(n):
        rk = rows[k]
        for i in range(n):
            rik = rows[i][k]
            ri = rows[i]
            for j in range(i + 1, n):
                cand = rik if rik >= rk[j] else rk[j]
                if cand < ri[j]:
                    ri[j] = cand
                    rows[j][i] = cand
    return Ultrametric(m.labels, tuple(tuple(r) for r in rows))


def connectivity_from_dendrogram(d: Dendrogram) -> SingleLinkageConnectivity:
    """The connectivity function whose tangles mirror a given dendrogram.

    Evaluates exp(-(min cross distance)) over the dendrogram's own
    ultrametric; lazy and exact on the distance axis for any size
    (materialize with :func:`tanglekit.connectivity.tabulate` if an
    explicit table is needed).
    """
    return SingleLinkageConnectivity(dendrogram_to_ultrametric(d))


def dendrogram_from_connectivity(f: ConnectivityFunction,
                                 cap: int = DENDROGRAM_FROM_CONNECTIVITY_CAP) -> Dendrogram:
    """Dendrogram equivalent to a maximum-submodular connectivity function.

    Requires range [0, 1) with strictly positive values on nontrivial
    subsets (otherwise no dendrogram can reproduce f, and the call
    refuses).  The pairwise separation costs of such a function form an
    ultrametric; evaluating the nearest-cross-pair similarity over that
    ultrametric must give f back on every subset, and the call verifies
    it does -- the reproduction is what fails when f is not
    maximum-submodular, since the separation costs are an ultrametric
    for any symmetric positive function.
    """
    if f.n > cap:
        raise CapExceededError("dendrogram_from_connectivity", f.n, cap)
    table = f.value_table()
    full = bitset.full_mask(f.n)
    for mask, v in enumerate(table):
        if not 0.0 <= v < 1.0:
            raise InputFormatError(
                f"value {v!r} at mask {mask:#x} outside the required range [0, 1)")
        if v == 0.0 and mask not in (0, full):
            raise InputFormatError(
                f"value 0 on nontrivial subset {mask:#x}; "
                "a dendrogram joins all points at finite radius")
    sep = separation_cost_matrix(f)
    try:
        u = Ultrametric(f.labels, tuple(tuple(row) for row in sep))
    except InputFormatError as exc:
        raise NotMaxSubmodularError(
            f"separation costs are not an ultrametric ({exc}); "
            "the function is not maximum-submodular") from exc
    recovered = SingleLinkageConnectivity(u).value_table()
    for mask, (a, b) in enumerate(zip(table, recovered)):
        # exact for distance-backed functions; value-axis kinds round
        # through exp(ln(v)), hence the ulp-scale relative tolerance
        if a != b and abs(a - b) > 1e-12 * abs(a):
            raise NotMaxSubmodularError(
                f"recovered function differs at mask {mask:#x} "
                f"({b!r} vs {a!r}); the function is not maximum-submodular")
    return ultrametric_to_dendrogram(u)


@dataclass(frozen=True)
class BlockTangleReport:
    """Both directions of the cluster/tangle correspondence on one metric."""

    labels: tuple[str, ...]
    block_entries: tuple[tuple[int, float, float], ...]    # (mask, r_lo, r_hi)
    catalog_entries: tuple[tuple[int, float, float], ...]
    entries_match: bool
    verify_failures: tuple[tuple[int, float, tuple[str, ...]], ...]

    @property
    def ok(self) -> bool:
        return self.entries_match and not self.verify_failures


def _block_lifetimes(d: Dendrogram) -> list[tuple[int, float, float]]:
    born: dict[int, float] = {}
    out: list[tuple[int, float, float]] = []
    previous: set[int] = set()
    for r, part in zip(d.radii, d.partitions):
        current = {b for b in part.blocks if bitset.size(b) >= 2}
        for b in previous - current:
            out.append((b, born.pop(b), r))
        for b in current - previous:
            born[b] = r
        previous = current
    for b, r in born.items():
        out.append((b, r, math.inf))
    out.sort(key=lambda e: (e[1], e[0]))
    return out


def block_tangle_correspondence(m: DistanceMatrix,
                                cap: int = CORRESPONDENCE_CAP) -> BlockTangleReport:
    """Verify that nonsingleton single-linkage blocks and tangles coincide.

    Direction one: every block of size > 1 at radius r, taken as a core,
    passes the exhaustive tangle-axiom check at order exp(-r) across its
    whole lifetime.  Direction two: the tangle catalog of the matrix's
    single-linkage connectivity function lists exactly those blocks with
    exactly the lifetime intervals.
    """
    if m.n > cap:
        raise CapExceededError("block_tangle_correspondence", m.n, cap)
    f = SingleLinkageConnectivity(m)
    d = single_linkage(m)
    blocks = _block_lifetimes(d)
    catalog: TangleCatalog = enumerate_tangles(f)
    cat = [(e.core, e.r_lo, e.r_hi) for e in catalog.entries]
    failures: list[tuple[int, float, tuple[str, ...]]] = []
    for mask, r_lo, r_hi in blocks:
        probes = [r_lo]
        if r_hi != math.inf:
            probes.append(math.nextafter(r_hi, -math.inf))
        else:
            probes.append(r_lo + 1.0)
        for r in probes:
            report = verify_tangle(f, TangleDescriptor(m.n, r, mask))
            if not report.ok:
                failures.append((mask, r, tuple(report.violated_axioms())))
    return BlockTangleReport(m.labels, tuple(blocks), tuple(cat),
                             blocks == cat, tuple(failures))

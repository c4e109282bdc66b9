"""Tangles of maximum-submodular connectivity functions.

A tangle of order k orients every subset of value below k toward one
highly connected region.  For maximum-submodular functions each tangle
is determined by a core (a component of the threshold graph) together
with its order, so tangles are stored as (radius, core) descriptors and
full families are only materialized inside the exhaustive verifier.

Orders are handled on the distance axis: a descriptor carries the
radius r and represents the family {X : cost(X) > r, core <= X} of
order k = exp(-r).  Catalog entries report half-open radius intervals
[r_lo, r_hi): closed at birth because membership uses the strict
inequality cost(X) > r, open at death where the core merges away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

from . import bitset
from .connectivity import (
    ConnectivityFunction,
    exp_neg,
    find_violation,
    separation_cost_matrix,
)
from .errors import CapExceededError, NotMaxSubmodularError

__all__ = [
    "TangleDescriptor",
    "TangleReport",
    "TangleCatalog",
    "CatalogEntry",
    "tangle_contains",
    "verify_tangle",
    "enumerate_tangles",
    "tangle_number",
    "tangle_number_radius",
]

VERIFY_TANGLE_CAP = 8
ENUMERATE_CAP = 24


@dataclass(frozen=True)
class TangleDescriptor:
    """A tangle stored by its order radius and its core subset."""

    n: int
    radius: float
    core: int

    def __post_init__(self):
        if bitset.size(self.core) < 2:
            raise ValueError("a tangle core has at least two points")
        if self.core > bitset.full_mask(self.n):
            raise ValueError("core outside the universe")

    @property
    def order(self) -> float:
        return exp_neg(self.radius)

    def member(self, f: ConnectivityFunction, mask: int) -> bool:
        return f.cost(mask) > self.radius and (mask & self.core) == self.core


def tangle_contains(t: TangleDescriptor, f: ConnectivityFunction, mask: int) -> bool:
    """Membership test: f(X) below the order and the core inside X."""
    return t.member(f, mask)


def _minimal_sets(masks) -> list[int]:
    out: list[int] = []
    for m in sorted(masks, key=lambda x: (x.bit_count(), x)):
        if not any((k & m) == k for k in out):
            out.append(m)
    return out


@dataclass(frozen=True)
class TangleReport:
    """Result of the exhaustive tangle-axiom check for one descriptor."""

    descriptor: TangleDescriptor
    radius: float
    family_size: int
    t1_witness: int | None          # low set with neither side in the family
    t2_witness: tuple[int, int, int] | None
    t3_witness: int | None

    @property
    def ok(self) -> bool:
        return self.t1_witness is None and self.t2_witness is None and self.t3_witness is None

    def violated_axioms(self) -> list[str]:
        out = []
        if self.t1_witness is not None:
            out.append("T.1")
        if self.t2_witness is not None:
            out.append("T.2")
        if self.t3_witness is not None:
            out.append("T.3")
        return out


def verify_tangle(f: ConnectivityFunction, t: TangleDescriptor,
                  radius: float | None = None,
                  cap: int = VERIFY_TANGLE_CAP) -> TangleReport:
    """Materialize the induced family and check the tangle axioms.

    T.0 holds by construction of the family.  T.1 sweeps all 2^n
    subsets.  T.2 checks triple intersections; since an intersection of
    members only shrinks when members are replaced by smaller members,
    it suffices to try all triples of inclusion-minimal members.  T.3
    sweeps the singletons.
    """
    if f.n > cap:
        raise CapExceededError("verify_tangle", f.n, cap)
    if radius is None:
        radius = t.radius
    costs = f.cost_table()
    core = t.core
    family = [m for m in bitset.subsets(f.n)
              if costs[m] > radius and (m & core) == core]

    t1 = None
    for m in bitset.subsets(f.n):
        if costs[m] > radius:
            cm = m ^ f.full
            if (m & core) != core and (cm & core) != core:
                t1 = m
                break

    t2 = None
    for a, b, c in combinations_with_replacement(_minimal_sets(family), 3):
        if (a & b & c) == 0:
            t2 = (a, b, c)
            break

    t3 = None
    for i in range(f.n):
        s = 1 << i
        if costs[s] > radius and (s & core) == core:
            t3 = s
            break

    return TangleReport(t, radius, len(family), t1, t2, t3)


@dataclass(frozen=True)
class CatalogEntry:
    """A core together with the radius interval [r_lo, r_hi) where it is live."""

    core: int
    r_lo: float
    r_hi: float

    @property
    def k_hi(self) -> float:
        return exp_neg(self.r_lo)

    @property
    def k_lo(self) -> float:
        return exp_neg(self.r_hi)

    def contains_radius(self, r: float) -> bool:
        return self.r_lo <= r < self.r_hi


@dataclass(frozen=True)
class TangleCatalog:
    """All tangles of one function, by core and live radius interval."""

    labels: tuple[str, ...]
    entries: tuple[CatalogEntry, ...]

    def cores_at_radius(self, r: float) -> list[int]:
        return [e.core for e in self.entries if e.contains_radius(r)]

    def to_json_dict(self) -> dict:
        items = []
        for e in self.entries:
            items.append({
                "core": bitset.labels_of(e.core, self.labels),
                "r_lo": e.r_lo,
                "r_hi": "inf" if e.r_hi == math.inf else e.r_hi,
                "k_hi": e.k_hi,
                "k_lo": e.k_lo,
            })
        return {"entries": items}


def enumerate_tangles(f: ConnectivityFunction, check: bool | None = None,
                      cap: int = ENUMERATE_CAP) -> TangleCatalog:
    """Catalog every tangle of positive order of a maximum-submodular function.

    Critical radii are the distinct pairwise separation costs; sweeping
    them upward, each threshold-graph component of size >= 2 becomes a
    catalog entry from the radius where it forms to the radius where it
    merges into a larger component (inf for the final one).

    ``check`` controls the 4^n maximum-submodularity pre-check: default
    is to run it for n <= 10 and to trust the caller above that.  A
    detected violation refuses with the violating pair.
    """
    if f.n > cap:
        raise CapExceededError("enumerate_tangles", f.n, cap)
    if check is None:
        check = f.n <= 10
    if check:
        witness = find_violation("max-submodular", f)
        if witness is not None:
            raise NotMaxSubmodularError(
                f"not maximum-submodular at pair {witness!r}", witness)
    if f.n < 2:
        return TangleCatalog(f.labels, ())

    sep = separation_cost_matrix(f)
    finite = sorted({sep[u][v] for u in range(f.n) for v in range(u + 1, f.n)
                     if sep[u][v] != math.inf})
    parent = list(range(f.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    alive: dict[int, float] = {}
    done: list[CatalogEntry] = []
    for r in finite:
        for u in range(f.n):
            for v in range(u + 1, f.n):
                if sep[u][v] <= r:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        parent[max(ru, rv)] = min(ru, rv)
        groups: dict[int, int] = {}
        for x in range(f.n):
            root = find(x)
            groups[root] = groups.get(root, 0) | (1 << x)
        current = {m for m in groups.values() if bitset.size(m) >= 2}
        for m in list(alive):
            if m not in current:
                done.append(CatalogEntry(m, alive.pop(m), r))
        for m in current:
            if m not in alive:
                alive[m] = r
    for m, born in alive.items():
        done.append(CatalogEntry(m, born, math.inf))
    done.sort(key=lambda e: (e.r_lo, e.core))
    return TangleCatalog(f.labels, tuple(done))


def tangle_number_radius(f: ConnectivityFunction) -> float:
    """Distance-axis tangle number: the smallest pairwise separation cost."""
    if f.n <= 1:
        return math.inf
    sep = separation_cost_matrix(f)
    return min(sep[u][v] for u in range(f.n) for v in range(u + 1, f.n))


def tangle_number(f: ConnectivityFunction) -> float:
    """Largest order admitting a tangle; 0 for universes with one point."""
    return exp_neg(tangle_number_radius(f))

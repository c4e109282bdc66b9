"""Subsets of a finite universe as integer bit masks.

Index ``i`` of the universe corresponds to bit ``1 << i``.  All set
functions in this package take masks; the helpers here keep the mask
arithmetic in one place.  Universes are capped at 64 points, matching
the fixed-width contract of the exhaustive operations.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

MAX_UNIVERSE = 64


def check_universe(n: int, operation: str = "bitset") -> None:
    if not 0 <= n <= MAX_UNIVERSE:
        raise ValueError(f"{operation}: universe size must be in 0..{MAX_UNIVERSE}, got {n}")


def full_mask(n: int) -> int:
    """Mask of the whole universe of size ``n``."""
    return (1 << n) - 1


def complement(mask: int, n: int) -> int:
    """Complement within the n-bit window."""
    return mask ^ full_mask(n)


def bits(mask: int) -> Iterator[int]:
    """Indices set in ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def size(mask: int) -> int:
    return mask.bit_count()


def subsets(n: int) -> range:
    """All masks over an n-point universe, ascending (lexicographic bit order)."""
    return range(1 << n)


def labels_of(mask: int, labels: Sequence[str]) -> list[str]:
    return [labels[i] for i in bits(mask)]


def mask_from_labels(names: Iterable[str], labels: Sequence[str]) -> int:
    index = {lab: i for i, lab in enumerate(labels)}
    m = 0
    for name in names:
        if name not in index:
            raise ValueError(f"unknown label {name!r}")
        m |= 1 << index[name]
    return m

"""Finite metric and ultrametric spaces over labeled points.

Distance matrices are the ground truth for every set function in this
package.  They are validated on construction: zero diagonal, symmetry,
strictly positive off-diagonal entries and the triangle inequality.
Comparisons use exact binary64 equality throughout; inputs are finite
decimals and silent tolerances would hide bugs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InputFormatError

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "Ultrametric",
    "MetricViolation",
    "MetricReport",
    "validate_metric",
    "parse_matrix_csv",
    "distance_matrix_from_points",
    "ultrametric_check",
]


@dataclass(frozen=True)
class MetricViolation:
    """One violated metric axiom with a witnessing index tuple."""

    axiom: str          # diagonal | symmetry | positivity | triangle
    witness: tuple[int, ...]
    values: tuple[float, ...]

    def describe(self, labels: Sequence[str]) -> str:
        names = ",".join(labels[i] for i in self.witness)
        vals = ", ".join(repr(v) for v in self.values)
        return f"{self.axiom} violated at ({names}): {vals}"


@dataclass(frozen=True)
class MetricReport:
    """Validation outcome; empty ``violations`` means a valid metric."""

    violations: tuple[MetricViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def describe(self, labels: Sequence[str]) -> str:
        if self.ok:
            return "valid metric"
        return "\n".join(v.describe(labels) for v in self.violations)


def _check_structure(labels: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    n = len(labels)
    if len(set(labels)) != n:
        raise InputFormatError("labels must be pairwise distinct")
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InputFormatError(f"matrix must be {n}x{n}")
    for r in rows:
        for x in r:
            if not isinstance(x, (int, float)) or not math.isfinite(x):
                raise InputFormatError(f"non-finite or non-numeric entry {x!r}")


# Rounding the individual distances of collinear Euclidean points can
# break the triangle inequality on the stored doubles by a few ulps
# (fl(5*sqrt(2)) + fl(3*sqrt(2)) < fl(8*sqrt(2))); the validator must
# not reject such inputs.  Only the triangle check involves arithmetic,
# so only it carries this slack; every other comparison in the package
# is exact.
_TRIANGLE_SLACK = 1.0 + 4.0 * 2.0 ** -52


def validate_metric(labels: Sequence[str], rows: Sequence[Sequence[float]]) -> MetricReport:
    """Check all metric axioms on a candidate matrix.

    Returns a report listing every violated axiom with the
    lexicographically first witnessing pair or triple per violation
    site.  Non-square or non-finite input raises instead; that is a
    structural error, not an axiom violation.
    """
    _check_structure(labels, rows)
    n = len(labels)
    out: list[MetricViolation] = []
    for i in range(n):
        if rows[i][i] != 0.0:
            out.append(MetricViolation("diagonal", (i,), (rows[i][i],)))
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                out.append(MetricViolation("symmetry", (i, j), (rows[i][j], rows[j][i])))
            if rows[i][j] <= 0.0:
                out.append(MetricViolation("positivity", (i, j), (rows[i][j],)))
    # d(x,z) <= d(x,m) + d(m,z); witness reported as (x, m, z)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for (x, m, z) in ((i, j, k), (j, i, k), (i, k, j)):
                    if rows[x][z] > (rows[x][m] + rows[m][z]) * _TRIANGLE_SLACK:
                        out.append(
                            MetricViolation("triangle", (x, m, z),
                                            (rows[x][m], rows[m][z], rows[x][z]))
                        )
    return MetricReport(tuple(out))


@dataclass(frozen=True)
class PointCloud:
    """Labeled points in R^d, all with the same dimension."""

    labels: tuple[str, ...]
    coords: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.labels) != len(self.coords):
            raise InputFormatError("one coordinate vector per label required")
        if len(set(self.labels)) != len(self.labels):
            raise InputFormatError("labels must be pairwise distinct")
        dims = {len(c) for c in self.coords}
        if len(dims) > 1:
            raise InputFormatError(f"mixed dimensions {sorted(dims)}")
        for lab, c in zip(self.labels, self.coords):
            if not all(math.isfinite(x) for x in c):
                raise InputFormatError(f"non-finite coordinate for point {lab!r}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, Sequence[float]]]) -> "PointCloud":
        labels, coords = [], []
        for lab, vec in rows:
            labels.append(str(lab))
            coords.append(tuple(float(x) for x in vec))
        return cls(tuple(labels), tuple(coords))

    @classmethod
    def from_csv(cls, text: str) -> "PointCloud":
        """Parse the points CSV format: header ``label,x1,...,xd``."""
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise InputFormatError("empty points CSV") from None
        if not header or header[0] != "label":
            raise InputFormatError("points CSV header must start with 'label'")
        rows = []
        for line in reader:
            if not line:
                continue
            if len(line) != len(header):
                raise InputFormatError(f"row {line!r} does not match header width")
            try:
                rows.append((line[0], [float(x) for x in line[1:]]))
            except ValueError:
                raise InputFormatError(f"non-numeric coordinate in row {line!r}") from None
        return cls.from_rows(rows)

    def to_csv(self) -> str:
        dim = len(self.coords[0]) if self.coords else 0
        out = ["label," + ",".join(f"x{i + 1}" for i in range(dim))]
        for lab, vec in zip(self.labels, self.coords):
            out.append(lab + "," + ",".join(repr(x) for x in vec))
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class DistanceMatrix:
    """Validated finite metric over labeled points; immutable."""

    labels: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        report = validate_metric(self.labels, self.rows)
        if not report.ok:
            raise InputFormatError("not a metric:\n" + report.describe(self.labels))
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    @property
    def n(self) -> int:
        return len(self.labels)

    def d(self, i: int, j: int) -> float:
        return self.rows[i][j]

    def index(self, label: str) -> int:
        return self._index[label]

    @classmethod
    def from_rows(cls, labels: Sequence[str], rows: Sequence[Sequence[float]]) -> "DistanceMatrix":
        return cls(tuple(labels), tuple(tuple(float(x) for x in r) for r in rows))

    @classmethod
    def from_csv(cls, text: str) -> "DistanceMatrix":
        """Parse the matrix CSV format: first row is the label list."""
        labels, rows = parse_matrix_csv(text)
        return cls.from_rows(labels, rows)

    def to_csv(self) -> str:
        out = ["label," + ",".join(self.labels)]
        for lab, row in zip(self.labels, self.rows):
            out.append(lab + "," + ",".join(repr(x) for x in row))
        return "\n".join(out) + "\n"


def parse_matrix_csv(text: str) -> tuple[list[str], list[list[float]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputFormatError("empty matrix CSV") from None
    if not header or header[0] != "label":
        raise InputFormatError("matrix CSV header must start with 'label'")
    labels = header[1:]
    rows: list[list[float]] = []
    row_labels: list[str] = []
    for line in reader:
        if not line:
            continue
        if len(line) != len(labels) + 1:
            raise InputFormatError(f"row {line!r} does not match header width")
        row_labels.append(line[0])
        try:
            rows.append([float(x) for x in line[1:]])
        except ValueError:
            raise InputFormatError(f"non-numeric distance in row {line!r}") from None
    if row_labels != labels:
        raise InputFormatError("matrix CSV row labels must repeat the header labels in order")
    return labels, rows


class Ultrametric(DistanceMatrix):
    """Distance matrix additionally satisfying the strong triangle inequality."""

    def __post_init__(self):
        super().__post_init__()
        witness = ultrametric_check_rows(self.rows)
        if witness is not None:
            i, m, k = witness
            raise InputFormatError(
                "not an ultrametric: max(u(%s,%s), u(%s,%s)) < u(%s,%s)"
                % (self.labels[i], self.labels[m], self.labels[m], self.labels[k],
                   self.labels[i], self.labels[k])
            )

    @classmethod
    def from_matrix(cls, m: DistanceMatrix) -> "Ultrametric":
        return cls(m.labels, m.rows)

    @classmethod
    def from_csv(cls, text: str) -> "Ultrametric":
        labels, rows = parse_matrix_csv(text)
        return cls(tuple(labels), tuple(tuple(x) for x in rows))


def ultrametric_check_rows(rows: Sequence[Sequence[float]]) -> tuple[int, int, int] | None:
    """Strong triangle check on raw rows.

    Returns None when every triple satisfies
    max(u(x,m), u(m,z)) >= u(x,z), otherwise the lexicographically least
    violating triple, reported as (x, m, z) with m the middle point.
    For each unordered triple i<j<k the three middle choices are tried
    in the order j, i, k.
    """
    n = len(rows)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for (x, m, z) in ((i, j, k), (j, i, k), (i, k, j)):
                    if max(rows[x][m], rows[m][z]) < rows[x][z]:
                        return (x, m, z)
    return None


def ultrametric_check(matrix: DistanceMatrix) -> tuple[int, int, int] | None:
    """``None`` when the matrix is an ultrametric, else the least violating triple."""
    return ultrametric_check_rows(matrix.rows)


def distance_matrix_from_points(cloud: PointCloud) -> DistanceMatrix:
    """Euclidean distance matrix of a point cloud.

    Duplicate points are rejected rather than merged: the set functions
    downstream require strictly positive distances on distinct labels,
    and silently collapsing the universe would change every result.
    """
    n = cloud.n
    rows = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dij = math.dist(cloud.coords[i], cloud.coords[j])
            if dij == 0.0:
                raise InputFormatError(
                    f"duplicate points {cloud.labels[i]!r} and {cloud.labels[j]!r}"
                )
            rows[i][j] = rows[j][i] = dij
    return DistanceMatrix.from_rows(cloud.labels, rows)

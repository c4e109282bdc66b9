import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tanglekit import DistanceMatrix, PointCloud, distance_matrix_from_points

FIG2_COORDS = {
    "a": (0.0, 7.0),
    "b": (2.0, 7.0),
    "c": (2.0, 2.0),
    "d": (2.0, 1.0),
    "e": (5.0, 1.0),
    "f": (5.0, 0.0),
    "g": (7.0, 0.0),
}

# the four-point line 1, 2, -1, -2 with |u - v|
L4_COORDS = {"1": (1.0,), "2": (2.0,), "-1": (-1.0,), "-2": (-2.0,)}


def cloud_from(coords: dict) -> PointCloud:
    return PointCloud(tuple(coords), tuple(coords.values()))


@pytest.fixture(scope="session")
def fig2() -> DistanceMatrix:
    return distance_matrix_from_points(cloud_from(FIG2_COORDS))


@pytest.fixture(scope="session")
def l4() -> DistanceMatrix:
    return distance_matrix_from_points(cloud_from(L4_COORDS))


@pytest.fixture(scope="session")
def two_points() -> DistanceMatrix:
    return DistanceMatrix.from_rows(("x", "y"), [[0.0, 3.0], [3.0, 0.0]])


def fig2_points_csv() -> str:
    lines = ["label,x1,x2"]
    for lab, (x, y) in FIG2_COORDS.items():
        lines.append(f"{lab},{x:g},{y:g}")
    return "\n".join(lines) + "\n"


def l4_points_csv() -> str:
    lines = ["label,x1"]
    for lab, (x,) in L4_COORDS.items():
        lines.append(f"{lab},{x:g}")
    return "\n".join(lines) + "\n"

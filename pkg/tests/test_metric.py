import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tanglekit import (
    DistanceMatrix,
    InputFormatError,
    PointCloud,
    Ultrametric,
    distance_matrix_from_points,
    minimax_ultrametric,
    ultrametric_check,
    validate_metric,
)

from conftest import cloud_from, FIG2_COORDS
from oracles import random_metric


class TestDistanceFromPoints:
    def test_fig2_distances(self, fig2):
        d = fig2
        assert d.d(d.index("c"), d.index("d")) == 1.0
        assert d.d(d.index("b"), d.index("c")) == 5.0
        assert d.d(d.index("f"), d.index("g")) == 2.0

    def test_single_point(self):
        m = distance_matrix_from_points(PointCloud(("only",), ((1.0, 2.0),)))
        assert m.n == 1
        assert m.rows == ((0.0,),)

    def test_line_points(self, l4):
        assert l4.d(l4.index("1"), l4.index("-1")) == 2.0
        assert l4.d(l4.index("1"), l4.index("2")) == 1.0

    def test_duplicate_points_rejected(self):
        cloud = PointCloud(("p", "q"), ((1.0, 1.0), (1.0, 1.0)))
        with pytest.raises(InputFormatError, match="duplicate points 'p' and 'q'"):
            distance_matrix_from_points(cloud)

    def test_output_is_valid_metric(self, fig2):
        assert validate_metric(fig2.labels, fig2.rows).ok

    def test_collinear_grid_points_accepted(self):
        # rounded square roots break the triangle inequality by one ulp;
        # the validator must tolerate exactly that
        cloud = PointCloud(("p", "q", "r"), ((0.0, 0.0), (5.0, 5.0), (8.0, 8.0)))
        m = distance_matrix_from_points(cloud)
        assert m.d(0, 1) + m.d(1, 2) < m.d(0, 2)  # the ulp gap is real


class TestValidateMetric:
    def test_zero_off_diagonal(self):
        report = validate_metric(["a", "b"], [[0.0, 0.0], [0.0, 0.0]])
        assert not report.ok
        assert report.violations[0].axiom == "positivity"
        assert report.violations[0].witness == (0, 1)

    def test_triangle_violation(self):
        rows = [[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]]
        report = validate_metric(["a", "b", "c"], rows)
        kinds = {(v.axiom, v.witness) for v in report.violations}
        assert ("triangle", (0, 1, 2)) in kinds

    def test_asymmetry(self):
        report = validate_metric(["a", "b"], [[0.0, 1.0], [2.0, 0.0]])
        assert any(v.axiom == "symmetry" for v in report.violations)

    def test_structural_errors(self):
        with pytest.raises(InputFormatError):
            validate_metric(["a", "b"], [[0.0, 1.0]])
        with pytest.raises(InputFormatError):
            validate_metric(["a", "b"], [[0.0, math.inf], [math.inf, 0.0]])
        with pytest.raises(InputFormatError):
            validate_metric(["a", "a"], [[0.0, 1.0], [1.0, 0.0]])

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(2, 6))
    def test_permutation_invariance(self, seed, n):
        import random

        rng = random.Random(seed)
        m = random_metric(rng, n)
        perm = list(range(n))
        rng.shuffle(perm)
        labels = [m.labels[p] for p in perm]
        rows = [[m.rows[p][q] for q in perm] for p in perm]
        assert validate_metric(labels, rows).ok


class TestUltrametricCheck:
    def test_minimax_of_fig2_passes(self, fig2):
        assert ultrametric_check(minimax_ultrametric(fig2)) is None

    def test_raw_fig2_least_violating_triple(self, fig2):
        # computed by brute force over all oriented triples: the first
        # failure is max(d(a,b), d(b,c)) = 5 < d(a,c) = sqrt(29)
        witness = ultrametric_check(fig2)
        assert witness == (0, 1, 2)
        a, b, c = witness
        assert max(fig2.rows[a][b], fig2.rows[b][c]) < fig2.rows[a][c]

    def test_two_points_pass(self, two_points):
        assert ultrametric_check(two_points) is None

    def test_strong_triangle_implies_triangle(self, fig2):
        u = minimax_ultrametric(fig2)
        assert validate_metric(u.labels, u.rows).ok

    def test_ultrametric_constructor_rejects_metric_only(self, fig2):
        with pytest.raises(InputFormatError, match="not an ultrametric"):
            Ultrametric(fig2.labels, fig2.rows)


class TestCsv:
    def test_points_round_trip(self):
        cloud = cloud_from(FIG2_COORDS)
        again = PointCloud.from_csv(cloud.to_csv())
        assert again == cloud

    def test_matrix_round_trip(self, fig2):
        again = DistanceMatrix.from_csv(fig2.to_csv())
        assert again.labels == fig2.labels
        assert again.rows == fig2.rows

    def test_matrix_header_required(self):
        with pytest.raises(InputFormatError):
            DistanceMatrix.from_csv("a,b\n0,1\n1,0\n")

    def test_points_bad_row_width(self):
        with pytest.raises(InputFormatError):
            PointCloud.from_csv("label,x1\na,1,2\n")

    def test_matrix_row_label_order_enforced(self, two_points):
        text = "label,x,y\ny,0.0,3.0\nx,3.0,0.0\n"
        with pytest.raises(InputFormatError):
            DistanceMatrix.from_csv(text)

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tanglekit import (
    AverageLinkageConnectivity,
    CapExceededError,
    CompleteLinkageConnectivity,
    DistanceMatrix,
    InputFormatError,
    SingleLinkageConnectivity,
    TabulatedConnectivity,
    VertexConnectivity,
    canonical_zero_partition,
    check_axioms,
    find_violation,
    min_separation,
    minimax_ultrametric,
    separation_cost,
    tabulate,
    threshold_graph,
)
from tanglekit.bitset import full_mask, mask_from_labels

from oracles import (
    brute_min_cross_value,
    brute_min_separation,
    brute_property_violation,
    random_metric,
)


def mask(m, *names):
    return mask_from_labels(names, m.labels)


class TestSingleLinkageConnectivity:
    def test_l4_pair(self, l4):
        f = SingleLinkageConnectivity(l4)
        assert f.value(mask(l4, "1", "2")) == math.exp(-2)

    def test_trivial_sets(self, l4):
        f = SingleLinkageConnectivity(l4)
        assert f.value(0) == 0.0
        assert f.value(full_mask(4)) == 0.0

    def test_fig2_ab(self, fig2):
        f = SingleLinkageConnectivity(fig2)
        assert f.value(mask(fig2, "a", "b")) == math.exp(-5)

    def test_matches_naive_value(self, fig2):
        f = SingleLinkageConnectivity(fig2)
        for m in range(1 << fig2.n):
            assert f.value(m) == brute_min_cross_value(fig2.rows, m)

    def test_table_matches_scalar(self, fig2):
        f = SingleLinkageConnectivity(fig2)
        table = f.value_table()
        assert table == [f.value(m) for m in range(1 << fig2.n)]

    def test_mask_out_of_range(self, l4):
        f = SingleLinkageConnectivity(l4)
        with pytest.raises(ValueError):
            f.value(1 << 6)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(2, 7))
    def test_symmetric_and_in_range(self, seed, n):
        f = SingleLinkageConnectivity(random_metric(random.Random(seed), n))
        full = full_mask(n)
        for m in range(1 << n):
            v = f.value(m)
            assert v == f.value(m ^ full)
            if m in (0, full):
                assert v == 0.0
            else:
                assert 0.0 < v < 1.0


class TestOtherKinds:
    def test_complete_linkage_l4(self, l4):
        f = CompleteLinkageConnectivity(l4)
        # farthest cross pair of {1,2} vs {-1,-2} is d(2,-2) = 4
        assert f.value(mask(l4, "1", "2")) == math.exp(-4)

    def test_average_boundary(self, l4):
        f = AverageLinkageConnectivity(l4)
        assert f.value(full_mask(4)) == 0.0
        assert f.value(0) == 0.0

    def test_average_single_pair(self, two_points):
        f = AverageLinkageConnectivity(two_points)
        assert f.value(1) == math.exp(-3)

    def test_average_table_matches_scalar(self, l4):
        f = AverageLinkageConnectivity(l4)
        assert f.value_table() == [f.value(m) for m in range(16)]

    def test_vertex_connectivity_path(self):
        # two-edge path: only the middle vertex separates the edges
        f = VertexConnectivity([("a", "b"), ("b", "c")])
        assert f.value(0b01) == 1.0
        assert f.value(0b10) == 1.0
        assert f.value(0b00) == 0.0
        assert f.value(0b11) == 0.0

    def test_vertex_connectivity_weights(self):
        f = VertexConnectivity([("a", "b"), ("b", "c")], {"b": 2.5})
        assert f.value(0b01) == 2.5

    def test_vertex_connectivity_rejects_loops(self):
        with pytest.raises(InputFormatError):
            VertexConnectivity([("a", "a")])

    def test_tabulated_json_round_trip(self):
        f = TabulatedConnectivity([0.0, 0.5, 0.5, 0.0])
        again = TabulatedConnectivity.from_json_dict(f.to_json_dict())
        assert again.values == f.values

    def test_tabulated_length_check(self):
        with pytest.raises(InputFormatError):
            TabulatedConnectivity([0.0, 1.0, 2.0])

    def test_tabulate_materializes(self, l4):
        f = SingleLinkageConnectivity(l4)
        t = tabulate(f)
        assert t.values == tuple(f.value_table())


class TestCheckAxioms:
    def test_single_linkage_passes(self, fig2):
        assert check_axioms(SingleLinkageConnectivity(fig2)).ok

    def test_average_passes(self, l4):
        assert check_axioms(AverageLinkageConnectivity(l4)).ok

    def test_unnormalized_table(self):
        f = TabulatedConnectivity([1.0, 0.5, 0.5, 0.0])
        report = check_axioms(f)
        assert any(v.axiom == "normalized" for v in report.violations)

    def test_asymmetric_table(self):
        f = TabulatedConnectivity([0.0, 0.25, 0.5, 0.0])
        report = check_axioms(f)
        assert any(v.axiom == "symmetric" for v in report.violations)

    def test_cap(self, l4):
        with pytest.raises(CapExceededError):
            check_axioms(SingleLinkageConnectivity(l4), cap=3)


class TestFindViolation:
    def test_mind_l4_submodularity_counterexample(self, l4):
        f = SingleLinkageConnectivity(l4)
        witness = find_violation("submodular", f)
        assert witness == (mask(l4, "1", "2"), mask(l4, "1", "-1"))
        x, y = witness
        assert f.value(x) == math.exp(-2)
        assert f.value(y) == math.exp(-1)
        assert f.value(x) + f.value(y) < f.value(x & y) + f.value(x | y)

    def test_mind_l4_is_max_submodular(self, l4):
        assert find_violation("max-submodular", SingleLinkageConnectivity(l4)) is None

    def test_mind_max_submodular_at_ten_points(self):
        # exhaustive 4^10 pair sweep on one larger instance
        f = SingleLinkageConnectivity(random_metric(random.Random(99), 10))
        assert find_violation("max-submodular", f) is None

    def test_vertex_connectivity_not_max_submodular(self):
        # three-edge path: the two end edges meet nothing, their union
        # touches both inner vertices
        f = VertexConnectivity([(0, 1), (1, 2), (2, 3)])
        witness = find_violation("max-submodular", f)
        assert witness == (0b001, 0b100)

    def test_vertex_connectivity_submodular_on_path(self):
        f = VertexConnectivity([(0, 1), (1, 2), (2, 3)])
        assert find_violation("submodular", f) is None

    def test_matches_naive_sweep(self, l4):
        for name, flag in (("submodular", True), ("max-submodular", False)):
            for f in (SingleLinkageConnectivity(l4), AverageLinkageConnectivity(l4)):
                assert (find_violation(name, f)
                        == brute_property_violation(f.value_table(), 4, flag))

    def test_unknown_property(self, l4):
        with pytest.raises(ValueError):
            find_violation("monotone", SingleLinkageConnectivity(l4))

    def test_cap(self, l4):
        with pytest.raises(CapExceededError):
            find_violation("submodular", SingleLinkageConnectivity(l4), cap=3)


class TestSeparations:
    def test_l4_examples(self, l4):
        f = SingleLinkageConnectivity(l4)
        i = {lab: k for k, lab in enumerate(l4.labels)}
        assert min_separation(f, i["1"], i["2"]) == math.exp(-1)
        # the cheapest cut between 2 and -2 crosses the big gap: {1,2}
        assert min_separation(f, i["2"], i["-2"]) == math.exp(-2)
        assert separation_cost(f, i["2"], i["-2"]) == 2.0

    def test_two_points(self, two_points):
        f = SingleLinkageConnectivity(two_points)
        assert min_separation(f, 0, 1) == f.value(0b01)

    def test_same_point_rejected(self, l4):
        with pytest.raises(ValueError):
            min_separation(SingleLinkageConnectivity(l4), 1, 1)

    def test_matches_naive(self, fig2):
        f = SingleLinkageConnectivity(fig2)
        for u in range(fig2.n):
            for v in range(u + 1, fig2.n):
                assert (min_separation(f, u, v)
                        == brute_min_separation(f.value, fig2.n, u, v))

    def test_equals_bottleneck_similarity(self, fig2):
        # cross-module identity: cheapest cut = exp(-(bottleneck distance))
        f = SingleLinkageConnectivity(fig2)
        u = minimax_ultrametric(fig2)
        for i in range(fig2.n):
            for j in range(i + 1, fig2.n):
                assert min_separation(f, i, j) == math.exp(-u.rows[i][j])
                assert separation_cost(f, i, j) == u.rows[i][j]


class TestThresholdGraph:
    def test_l4_at_first_merge(self, l4):
        f = SingleLinkageConnectivity(l4)
        g = threshold_graph(f, math.exp(-1))
        assert g.edges == ((0, 1), (2, 3))
        assert g.components == (0b0011, 0b1100)

    def test_zero_threshold_is_complete(self, l4):
        f = SingleLinkageConnectivity(l4)
        g = threshold_graph(f, 0.0)
        assert len(g.edges) == 6
        assert g.components == (0b1111,)

    def test_just_above_largest_separation(self, l4):
        f = SingleLinkageConnectivity(l4)
        g = threshold_graph(f, radius=math.nextafter(1.0, 0.0))
        assert g.edges == ()

    def test_radius_wins_as_exact_axis(self, l4):
        f = SingleLinkageConnectivity(l4)
        assert threshold_graph(f, radius=1.0).edges == ((0, 1), (2, 3))

    def test_components_match_direct_distance_graph(self, fig2):
        # the threshold graph may have extra edges, but its components
        # equal those of the plain distance graph at every threshold
        f = SingleLinkageConnectivity(fig2)
        radii = sorted({fig2.rows[i][j] for i in range(fig2.n)
                        for j in range(i + 1, fig2.n)})
        probes = radii + [r + 0.25 for r in radii] + [0.5]
        for r in probes:
            got = threshold_graph(f, radius=r).components
            edges = [(i, j) for i in range(fig2.n) for j in range(i + 1, fig2.n)
                     if fig2.rows[i][j] <= r]
            from tanglekit.connectivity import _components_from_edges

            assert got == _components_from_edges(fig2.n, edges)


class TestCanonicalZeroPartition:
    def test_strictly_positive_gives_whole(self, fig2):
        f = SingleLinkageConnectivity(fig2)
        assert canonical_zero_partition(f) == (full_mask(fig2.n),)

    def test_single_point(self):
        m = DistanceMatrix.from_rows(("x",), [[0.0]])
        assert canonical_zero_partition(SingleLinkageConnectivity(m)) == (1,)

    def test_max_of_independent_halves(self):
        # f = max of two nearest-pair functions living on disjoint halves
        left = SingleLinkageConnectivity(
            DistanceMatrix.from_rows(("p", "q"), [[0.0, 1.0], [1.0, 0.0]]))
        right = SingleLinkageConnectivity(
            DistanceMatrix.from_rows(("r", "s"), [[0.0, 2.0], [2.0, 0.0]]))
        values = []
        for m in range(16):
            values.append(max(left.value(m & 0b0011), right.value((m >> 2) & 0b0011)))
        f = TabulatedConnectivity(values, ("p", "q", "r", "s"))
        blocks = canonical_zero_partition(f)
        assert blocks == (0b0011, 0b1100)
        for m in range(16):
            assert f.value(m) == max(f.value(m & b) for b in blocks)

    def test_non_closed_zeros_rejected(self):
        # {0,1} and {0,2} are zero sets but their intersection {0} is not,
        # so no minimal zero block exists for point 0
        values = [0.0] * 8
        values[0b001] = 0.5
        values[0b110] = 0.5
        f = TabulatedConnectivity(values)
        with pytest.raises(ValueError, match="intersection-closed"):
            canonical_zero_partition(f)

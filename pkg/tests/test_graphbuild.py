import numpy as np
import pytest

from centriport.errors import InvalidParameterError
from centriport.graphbuild import (
    AdjacencyOption,
    build_adjacency,
    build_mst,
    build_raw,
    dump_adjacency_csv,
    dump_edge_list,
)

from oracles import max_spanning_tree_oracle

OPT = AdjacencyOption

# 0/1 matrices printed for the 5-node fixture at theta = 0.25.
FIX1 = np.array(
    [
        [1, 0, 0, 1, 0],
        [0, 1, 1, 0, 0],
        [0, 1, 1, 1, 1],
        [1, 0, 1, 1, 0],
        [0, 0, 1, 0, 1],
    ],
    dtype=float,
)
FIX2 = np.array(
    [
        [1, 0, 0, 1, 1],
        [0, 1, 1, 0, 0],
        [0, 1, 1, 1, 1],
        [1, 0, 1, 1, 0],
        [1, 0, 1, 0, 1],
    ],
    dtype=float,
)
FIX3 = np.array(
    [
        [0, 0, 0, 1, 0],
        [0, 0, 1, 0, 0],
        [0, 1, 0, 1, 1],
        [1, 0, 1, 0, 0],
        [0, 0, 1, 0, 0],
    ],
    dtype=float,
)
FIX4 = np.array(
    [
        [0, 0, 0, 1, 1],
        [0, 0, 1, 0, 0],
        [0, 1, 0, 1, 1],
        [1, 0, 1, 0, 0],
        [1, 0, 1, 0, 0],
    ],
    dtype=float,
)


def weighted_fixture(unweighted, toy_c, keep_diag):
    w = unweighted * np.abs(toy_c)
    if not keep_diag:
        np.fill_diagonal(w, 0.0)
    return w


class TestThresholded:
    @pytest.mark.parametrize(
        "option,expected",
        [(OPT.OPT1, FIX1), (OPT.OPT2, FIX2), (OPT.OPT3, FIX3), (OPT.OPT4, FIX4)],
    )
    def test_unweighted_fixtures(self, toy_c, option, expected):
        g = build_adjacency(toy_c, option, 0.25)
        np.testing.assert_array_equal(g.A, expected)
        assert not g.weighted

    @pytest.mark.parametrize(
        "option,pattern,keep_diag",
        [
            (OPT.OPT5, FIX1, True),
            (OPT.OPT6, FIX2, True),
            (OPT.OPT7, FIX3, False),
            (OPT.OPT8, FIX4, False),
        ],
    )
    def test_weighted_fixtures(self, toy_c, option, pattern, keep_diag):
        g = build_adjacency(toy_c, option, 0.25)
        np.testing.assert_allclose(g.A, weighted_fixture(pattern, toy_c, keep_diag), atol=1e-12)
        assert g.weighted

    def test_option5_row1(self, toy_c):
        g = build_adjacency(toy_c, OPT.OPT5, 0.25)
        np.testing.assert_allclose(g.A[0], [1.0, 0.0, 0.0, 0.4683, 0.0], atol=1e-12)

    def test_theta_range_enforced(self, toy_c):
        for theta in (-0.1, 1.0, 1.5):
            with pytest.raises(InvalidParameterError):
                build_adjacency(toy_c, OPT.OPT1, theta)

    def test_strict_inequality_drops_tie(self):
        C = np.array([[1.0, 0.5], [0.5, 1.0]])
        g = build_adjacency(C, OPT.OPT3, 0.5)
        assert g.A[0, 1] == 0.0

    def test_loops_flag_matches_diagonal(self, toy_c):
        assert build_adjacency(toy_c, OPT.OPT1, 0.25).has_loops
        assert not build_adjacency(toy_c, OPT.OPT3, 0.25).has_loops

    def test_unweighted_is_indicator_of_weighted(self, toy_c):
        pairs = [(OPT.OPT1, OPT.OPT5), (OPT.OPT2, OPT.OPT6), (OPT.OPT3, OPT.OPT7), (OPT.OPT4, OPT.OPT8)]
        rng = np.random.default_rng(0)
        for _ in range(5):
            C = rng.uniform(-1, 1, size=(6, 6))
            C = 0.5 * (C + C.T)
            np.fill_diagonal(C, 1.0)
            theta = rng.uniform(0, 0.9)
            for u_opt, w_opt in pairs:
                u = build_adjacency(C, u_opt, theta).A
                w = build_adjacency(C, w_opt, theta).A
                np.testing.assert_array_equal(u, (w > 0).astype(float))

    def test_monotone_in_theta(self, toy_c):
        for option in (OPT.OPT1, OPT.OPT2, OPT.OPT3, OPT.OPT4):
            prev = None
            for theta in np.arange(0.0, 1.0, 0.1):
                edges = build_adjacency(toy_c, option, float(theta)).A > 0
                if prev is not None:
                    assert np.all(prev | ~edges), "raising theta added an edge"
                prev = edges

    def test_option2_option6_same_sparsity(self, toy_c):
        for theta in (0.0, 0.25, 0.4):
            a2 = build_adjacency(toy_c, OPT.OPT2, theta).A
            a6 = build_adjacency(toy_c, OPT.OPT6, theta).A
            np.testing.assert_array_equal(a2 > 0, a6 > 0)

    def test_symmetric_nonnegative(self, toy_c):
        for option in OPT:
            if not option.thresholded:
                continue
            A = build_adjacency(toy_c, option, 0.3).A
            np.testing.assert_array_equal(A, A.T)
            assert np.all(A >= 0)


class TestRaw:
    def test_with_loops_row1(self, toy_c):
        g = build_raw(toy_c, loops=True)
        np.testing.assert_allclose(g.A[0], [1.0, 0.1378, 0.2025, 0.4683, 0.2583], atol=1e-12)
        assert g.weighted and g.has_loops

    def test_without_loops_zero_diag(self, toy_c):
        g = build_raw(toy_c, loops=False)
        np.testing.assert_allclose(np.diag(g.A), 0.0)
        np.testing.assert_allclose(g.A[0, 1:], [0.1378, 0.2025, 0.4683, 0.2583], atol=1e-12)

    def test_identity_input(self):
        eye = np.eye(4)
        np.testing.assert_array_equal(build_raw(eye, loops=True).A, eye)
        np.testing.assert_array_equal(build_raw(eye, loops=False).A, np.zeros((4, 4)))


class TestMST:
    def test_two_nodes(self):
        C = np.array([[1.0, 0.3], [0.3, 1.0]])
        g = build_mst(C)
        assert g.edge_list() == [(0, 1, 0.3)]

    def test_single_node_rejected(self):
        with pytest.raises(InvalidParameterError):
            build_mst(np.array([[1.0]]))

    def test_toy_matches_exhaustive_oracle(self, toy_c):
        g = build_mst(toy_c)
        got = frozenset((i, j) for i, j, _ in g.edge_list())
        expected, best_weight = max_spanning_tree_oracle(toy_c)
        assert got == expected
        assert sum(w for _, _, w in g.edge_list()) == pytest.approx(best_weight, abs=1e-12)

    @pytest.mark.parametrize("n", [5, 6, 7])
    def test_random_instances_match_oracle(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(8):
            C = rng.uniform(-1, 1, size=(n, n))
            C = 0.5 * (C + C.T)
            np.fill_diagonal(C, 1.0)
            g = build_mst(C)
            got = frozenset((i, j) for i, j, _ in g.edge_list())
            expected, _ = max_spanning_tree_oracle(C)
            assert got == expected

    def test_tree_shape(self):
        rng = np.random.default_rng(7)
        C = rng.uniform(0, 1, size=(9, 9))
        C = 0.5 * (C + C.T)
        np.fill_diagonal(C, 1.0)
        g = build_mst(C)
        edges = g.edge_list()
        assert len(edges) == 8
        parent = list(range(9))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        for i, j, _ in edges:
            ri, rj = find(i), find(j)
            assert ri != rj, "cycle found"
            parent[ri] = rj

    def test_edge_weights_are_original_correlations(self, toy_c):
        g = build_mst(toy_c)
        for i, j, w in g.edge_list():
            assert w == toy_c[i, j]


class TestDumps:
    def test_adjacency_roundtrip_text(self, toy_c, tmp_path):
        g = build_raw(toy_c, loops=False)
        path = tmp_path / "adj.csv"
        dump_adjacency_csv(g, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(g.tickers)
        parsed = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        np.testing.assert_array_equal(parsed, g.A)

    def test_edge_list_format(self, tmp_path):
        C = np.array([[1.0, 0.4], [0.4, 1.0]])
        g = build_mst(C)
        path = tmp_path / "edges.txt"
        dump_edge_list(g, path)
        assert path.read_text() == "0,1,0.4\n"

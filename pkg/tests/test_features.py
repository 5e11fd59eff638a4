import numpy as np
import pytest

from imlinucb.errors import InvalidArgument, LoadError
from imlinucb.features import (
    FeatureMatrix,
    edge_features_from_nodes,
    load_node_features,
    misspecification,
    synth_features,
    tabular_features,
)
from imlinucb.graph import Graph, build_topology


def test_tabular_identity():
    g = Graph(3, [(1, 2), (2, 3), (3, 1)])
    F = tabular_features(g)
    np.testing.assert_array_equal(F.X, np.eye(3))
    np.testing.assert_array_equal(np.linalg.norm(F.X, axis=1), 1.0)
    assert F.theta_star is None


def test_tabular_with_weights():
    g = build_topology("star", 4)
    w = np.linspace(0.1, 0.6, g.n_edges)
    F = tabular_features(g, w)
    np.testing.assert_array_equal(F.theta_star, w)
    assert F.rho == 0.0
    assert F.D == pytest.approx(np.linalg.norm(w))


class TestSynthetic:
    @pytest.mark.parametrize("d", [2, 4, 10])
    def test_exactly_linear(self, d):
        w = np.random.default_rng(0).random(50)
        F = synth_features(w, d, 3)
        np.testing.assert_allclose(F.X @ F.theta_star, w, atol=1e-12)
        assert np.linalg.norm(F.theta_star) == pytest.approx(1.0, abs=1e-15)
        assert np.linalg.norm(F.X, axis=1).max() <= 1 + 1e-12
        assert F.rho <= 1e-12 and F.D == 1.0

    def test_zero_weights_are_orthogonal(self):
        F = synth_features(np.zeros(20), 5, 1)
        np.testing.assert_allclose(F.X @ F.theta_star, 0.0, atol=1e-12)

    def test_unit_weights(self):
        F = synth_features(np.ones(5), 3, 1)
        np.testing.assert_allclose(F.X, np.tile(F.theta_star, (5, 1)), atol=1e-12)

    def test_reproducible(self):
        w = np.random.default_rng(0).random(10)
        a, b = synth_features(w, 4, 9), synth_features(w, 4, 9)
        assert np.array_equal(a.X, b.X) and np.array_equal(a.theta_star, b.theta_star)

    def test_invalid(self):
        with pytest.raises(InvalidArgument):
            synth_features(np.ones(3), 1, 0)
        with pytest.raises(InvalidArgument):
            synth_features(np.array([0.5, 1.5]), 3, 0)


class TestNodeProducts:
    def test_all_ones(self):
        g = build_topology("grid", 6)
        F = edge_features_from_nodes(g, np.ones((6, 3)))
        np.testing.assert_allclose(F.X, np.full((g.n_edges, 3), 1 / np.sqrt(3)))
        np.testing.assert_allclose(np.linalg.norm(F.X, axis=1), 1.0)
        assert F.rho is None

    def test_zero_node(self):
        g = build_topology("star", 4)
        U = np.random.default_rng(0).random((4, 3))
        U[2] = 0.0
        F = edge_features_from_nodes(g, U)
        for e, (u, v) in enumerate(g.edges):
            if 3 in (u, v):
                assert np.all(F.X[e] == 0.0)

    def test_orthogonal_supports(self):
        g = Graph(2, [(1, 2)])
        F = edge_features_from_nodes(g, np.array([[1.0, 0.0], [0.0, 1.0]]))
        np.testing.assert_array_equal(F.X, [[0.0, 0.0]])

    def test_global_rescale_keeps_ratios(self):
        g = Graph(3, [(1, 2), (2, 3)])
        U = np.array([[2.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        F = edge_features_from_nodes(g, U)
        np.testing.assert_allclose(F.X[:, 0], [1.0, 0.5])

    def test_missing_rows(self):
        with pytest.raises(InvalidArgument):
            edge_features_from_nodes(build_topology("star", 4), np.ones((3, 2)))

    def test_load(self, tmp_path):
        p = tmp_path / "nodes.txt"
        p.write_text("# id features\n2 0.5 0.5\n1 1 0\n")
        np.testing.assert_array_equal(load_node_features(p), [[1, 0], [0.5, 0.5]])
        with pytest.raises(InvalidArgument):
            load_node_features(p, n_nodes=3)

    @pytest.mark.parametrize("text", ["1 a\n", "1\n", "1 1 2\n2 1\n", "1 1\n1 2\n", ""])
    def test_load_errors(self, tmp_path, text):
        p = tmp_path / "nodes.txt"
        p.write_text(text)
        with pytest.raises(LoadError):
            load_node_features(p)


def test_row_norm_enforced():
    with pytest.raises(InvalidArgument):
        FeatureMatrix(np.array([[1.0, 1.0]]))
    with pytest.raises(InvalidArgument):
        FeatureMatrix(np.ones(3))


def test_misspecification():
    X = np.eye(2)
    assert misspecification(X, [0.5, 0.2], np.array([0.5, 0.5])) == pytest.approx(0.3)

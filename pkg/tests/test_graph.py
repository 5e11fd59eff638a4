import itertools

import numpy as np
import pytest

from conftest import brute_relevance, line, reach_set, simple_paths, small_graphs
from imlinucb.errors import InvalidArgument, LoadError
from imlinucb.graph import (
    TOPOLOGIES,
    Graph,
    build_topology,
    check_seed_set,
    load_graph,
    load_weighted_graph,
    ray_arm_sizes,
    reachable,
    relevance_map,
    relevant_edges,
    save_graph,
)


class TestGraph:
    def test_canonical_order(self):
        g = Graph(3, [(3, 1), (1, 3), (1, 2)])
        assert g.edges == ((1, 2), (1, 3), (3, 1))
        assert g.edge_id(3, 1) == 2
        assert list(g.starts) == [1, 1, 3]

    @pytest.mark.parametrize(
        "edges",
        [[(1, 1)], [(1, 2), (1, 2)], [(1, 4)], [(0, 1)]],
    )
    def test_rejects_bad_edges(self, edges):
        with pytest.raises(InvalidArgument):
            Graph(3, edges)

    def test_out_edges_match_starts(self):
        g = build_topology("grid", 9)
        for u in g.nodes:
            for e in g.out_edges(u):
                assert g.edges[e][0] == u

    def test_seed_set_validation(self):
        g = line(3)
        assert check_seed_set(g, [3, 1]) == (1, 3)
        with pytest.raises(InvalidArgument):
            check_seed_set(g, [1, 1])
        with pytest.raises(InvalidArgument):
            check_seed_set(g, [4])
        with pytest.raises(InvalidArgument):
            check_seed_set(g, [1], k=2)


class TestTopology:
    def test_star4(self):
        g = build_topology("star", 4)
        assert set(g.edges) == {(1, 2), (2, 1), (1, 3), (3, 1), (1, 4), (4, 1)}
        assert g.n_edges == 6

    def test_bar2(self):
        g = build_topology("bar", 2)
        assert set(g.edges) == {(1, 2), (2, 1)}

    def test_ray10(self):
        g = build_topology("ray", 10)
        assert ray_arm_sizes(10) == [3, 3, 3]
        assert g.n_edges == 18
        # node 1 is the centre: one neighbour per arm
        assert len(g.neighbors[1]) == 3

    def test_ray_remainder_goes_to_first_arms(self):
        # L = 11: four arms for ten non-centre nodes
        assert ray_arm_sizes(11) == [3, 3, 2, 2]
        assert ray_arm_sizes(12) == [3, 3, 3, 2]

    def test_grid_layout(self):
        g = build_topology("grid", 9)
        assert g.n_edges == 2 * 12
        g7 = build_topology("grid", 7)
        # 3 columns, rows 1-3, 4-6, 7
        assert g7.has_edge(4, 7) and not g7.has_edge(6, 7)

    def test_complete(self):
        g = build_topology("complete", 5)
        assert g.n_edges == 20

    def test_random_tree_is_tree(self):
        for seed in range(5):
            g = build_topology("random_tree", 30, seed)
            assert g.n_edges == 2 * 29
            assert g.is_forest
            assert len(g.weak_components()) == 1

    @pytest.mark.parametrize("kind", [k for k in TOPOLOGIES if k != "complete"])
    @pytest.mark.parametrize("L", [2, 3, 7, 10])
    def test_symmetric_and_even(self, kind, L):
        g = build_topology(kind, L, 0)
        assert g.n_edges % 2 == 0
        assert all(g.has_edge(v, u) for u, v in g.edges)

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgument):
            build_topology("wheel", 5)
        with pytest.raises(InvalidArgument):
            build_topology("star", 1)


class TestReachable:
    def test_full_chain(self):
        assert reachable(line(3), [1, 1], [1]) == {1, 2, 3}

    def test_broken_chain(self):
        g = line(3)
        real = np.zeros(2, dtype=np.int8)
        real[g.edge_id(2, 3)] = 1
        assert reachable(g, real, [1]) == {1}

    def test_star(self):
        g = build_topology("star", 4)
        real = np.zeros(g.n_edges, dtype=np.int8)
        real[g.edge_id(1, 2)] = 1
        real[g.edge_id(1, 4)] = 1
        assert reachable(g, real, [1]) == {1, 2, 4}

    def test_unsampled_traversal_rejected(self):
        g = line(2)
        with pytest.raises(InvalidArgument):
            reachable(g, [-1], [1])

    @pytest.mark.parametrize("name,g", small_graphs(max_edges=8))
    def test_matches_fixpoint_and_is_monotone(self, name, g):
        rng = np.random.default_rng(1)
        for _ in range(10):
            real = rng.integers(0, 2, g.n_edges)
            seeds = sorted(rng.choice(g.nodes, size=1 + int(rng.integers(0, 2)), replace=False).tolist())
            got = reachable(g, real, seeds)
            assert got == reach_set(g.n_nodes, g.edges, real, seeds)
            for e in range(g.n_edges):
                more = real.copy()
                more[e] = 1
                assert got <= reachable(g, more, seeds)


class TestRelevance:
    def test_bar(self):
        g = build_topology("bar", 4)
        assert relevant_edges(g, [1], 2) == {g.edge_id(1, 2)}

    def test_star(self):
        g = build_topology("star", 4)
        assert relevant_edges(g, [1], 3) == {g.edge_id(1, 3)}

    def test_line(self):
        g = line(3)
        assert relevant_edges(g, [1], 3) == {0, 1}

    def test_source_rejected(self):
        with pytest.raises(InvalidArgument):
            relevant_edges(line(3), [1], 1)

    @pytest.mark.parametrize("name,g", small_graphs(max_edges=12, max_nodes=6))
    def test_matches_path_enumeration(self, name, g):
        for k in (1, 2):
            for seeds in itertools.combinations(g.nodes, k):
                assert relevance_map(g, seeds) == brute_relevance(g, seeds)

    @pytest.mark.parametrize("name,g", small_graphs(max_edges=8, max_nodes=6))
    def test_influence_depends_only_on_relevant_edges(self, name, g):
        # flipping an irrelevant edge never changes whether v is influenced
        for seeds in [(1,), (g.n_nodes,)]:
            rel = relevance_map(g, seeds)
            for real in itertools.product((0, 1), repeat=g.n_edges):
                base = reachable(g, real, seeds)
                for v, edges in rel.items():
                    for e in set(range(g.n_edges)) - edges:
                        flipped = list(real)
                        flipped[e] ^= 1
                        assert (v in base) == (v in reachable(g, flipped, seeds))

    def test_returned_edges_lie_on_paths(self):
        g = build_topology("grid", 6)
        seeds = (1, 6)
        paths = simple_paths(g, seeds)
        for v, edges in relevance_map(g, seeds).items():
            on_paths = {g.edge_id(a, b) for p in paths if p[-1] == v for a, b in zip(p, p[1:])}
            assert edges == on_paths


class TestLoad:
    def test_simple(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("1 2\n2 1\n")
        g = load_graph(p)
        assert (g.n_nodes, g.n_edges) == (2, 2)

    def test_duplicate_line_number(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("1 2\n1 2\n")
        with pytest.raises(LoadError) as err:
            load_graph(p)
        assert err.value.line == 2
        assert ":2:" in str(err.value)

    def test_comments_and_probabilities(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("# header\n2 1 0.25\n\n1 2 0.5\n")
        g, w = load_weighted_graph(p)
        assert w[g.edge_id(1, 2)] == 0.5 and w[g.edge_id(2, 1)] == 0.25

    @pytest.mark.parametrize(
        "text",
        ["1\n", "1 x\n", "1 2 1.5\n", "1 1\n", "1 2 0.5\n2 1\n", "# nothing\n"],
    )
    def test_malformed(self, tmp_path, text):
        p = tmp_path / "g.txt"
        p.write_text(text)
        with pytest.raises(LoadError):
            load_graph(p)

    def test_large_file(self, tmp_path):
        # ring through all 327 nodes plus random chords, both directions
        rng = np.random.default_rng(0)
        pairs = {(min(i, i % 327 + 1), max(i, i % 327 + 1)) for i in range(1, 328)}
        while len(pairs) < 5038 // 2:
            u, v = sorted(rng.integers(1, 328, 2).tolist())
            if u != v:
                pairs.add((u, v))
        p = tmp_path / "big.txt"
        p.write_text("".join(f"{u} {v}\n{v} {u}\n" for u, v in sorted(pairs)))
        g = load_graph(p)
        assert (g.n_nodes, g.n_edges) == (327, 5038)

    def test_round_trip(self, tmp_path):
        g = build_topology("ray", 9)
        w = np.linspace(0, 1, g.n_edges)
        p = tmp_path / "ray.txt"
        save_graph(g, p, w)
        g2, w2 = load_weighted_graph(p)
        assert g2 == g
        np.testing.assert_allclose(w2, w, atol=1e-6)

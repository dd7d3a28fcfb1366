import numpy as np
import pytest

from avgmix.graphs import (
    Graph,
    GraphError,
    GraphSpec,
    load_edge_list,
    make_graph,
    node_levels,
    parse_graph_spec,
    random_regular_edges,
    sample_edge,
)
from avgmix.rng import RngStream


def test_complete_4():
    g = make_graph("complete:4")
    assert (g.n, g.m) == (4, 6)
    assert list(g.degrees) == [3, 3, 3, 3]


def test_dumbbell_3():
    g = make_graph("dumbbell:3")
    assert (g.n, g.m) == (6, 7)
    assert g.has_edge(2, 5)
    assert sum(g.has_edge(i, j) for i in range(3) for j in range(3, 6)) == 1


def test_star_5():
    g = make_graph("star:5")
    assert list(g.degrees) == [4, 1, 1, 1, 1]
    assert g.m == 4


def test_btree_labeling():
    g = make_graph("btree:7")
    assert g.edges.tolist() == [[0, 1], [0, 4], [1, 2], [1, 3], [4, 5], [4, 6]]
    assert node_levels(g).tolist() == [0, 1, 2, 2, 1, 2, 2]


def test_bipartite_and_regular():
    g = make_graph("bipartite:2,3")
    assert g.m == 6 and list(g.degrees) == [3, 3, 2, 2, 2]
    r = make_graph("regular:20,3,5")
    assert np.all(r.degrees == 3)
    assert r == make_graph("regular:20,3,5")


def test_degree_sum(small_graph):
    assert small_graph.degrees.sum() == 2 * small_graph.m


def test_canonical_order(small_graph):
    e = small_graph.edges
    assert np.all(e[:, 0] < e[:, 1])
    keys = [tuple(x) for x in e.tolist()]
    assert keys == sorted(keys)


@pytest.mark.parametrize(
    "spec",
    ["complete:1", "btree:10", "btree:1", "cycle:2", "regular:5,3", "regular:4,4", "bipartite:0,3", "nope:3", "path", "path:x", "bipartite:3"],
)
def test_invalid_specs(spec):
    with pytest.raises(GraphError):
        make_graph(spec)


def test_spec_round_trip():
    assert str(parse_graph_spec("bipartite:3,4")) == "bipartite:3,4"
    assert parse_graph_spec("regular:8,3,1") == GraphSpec("regular", (8, 3, 1))


def test_load_edge_list_examples():
    g = load_edge_list("0 1\n1 2")
    assert g == make_graph("path:3")
    with pytest.raises(GraphError, match="duplicate"):
        load_edge_list("0 1\n0 1")
    with pytest.raises(GraphError, match="disconnected"):
        load_edge_list("0 1\n2 3")
    with pytest.raises(GraphError, match="self-loop"):
        load_edge_list("0 0\n0 1")
    with pytest.raises(GraphError, match="non-integer"):
        load_edge_list("0 a")


def test_load_edge_list_comments_and_reverse_duplicates():
    g = load_edge_list("# header\n\n0 1  # first\n2 1\n")
    assert g.n == 3 and g.m == 2
    with pytest.raises(GraphError):
        load_edge_list("0 1\n1 0")


def test_render_round_trip(small_graph):
    assert load_edge_list(small_graph.render()) == small_graph


def test_file_spec(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text(make_graph("cycle:5").render())
    assert make_graph(f"file:{p}") == make_graph("cycle:5")
    with pytest.raises(GraphError):
        make_graph(f"file:{tmp_path / 'missing.txt'}")


def test_graph_is_read_only():
    g = make_graph("path:4")
    with pytest.raises(ValueError):
        g.edges[0, 0] = 3


def test_regular_failure_budget():
    # 3-regular on 4 nodes is K_4: only one simple pairing class, found quickly
    assert len(random_regular_edges(4, 3, 0)) == 6
    with pytest.raises(GraphError):
        random_regular_edges(5, 3, 0)


def test_sample_edge_uniform():
    g = make_graph("complete:4")
    r = RngStream(2024, 0)
    N = 600_000
    idx = r.integers(g.m, N)
    counts = np.bincount(idx, minlength=g.m)
    sigma = np.sqrt(N * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - N / 6) <= 3 * sigma)


def test_sample_edge_single_edge_and_determinism():
    k2 = make_graph("complete:2")
    r = RngStream(0)
    assert all(sample_edge(k2, r) == (0, 1) for _ in range(20))
    p3 = make_graph("path:3")
    a = [sample_edge(p3, RngStream(4, 1)) for _ in range(1)]
    r1, r2 = RngStream(4, 1), RngStream(4, 1)
    assert [sample_edge(p3, r1) for _ in range(30)] == [sample_edge(p3, r2) for _ in range(30)]
    assert a[0] in ((0, 1), (1, 2))


def test_graph_validation_direct():
    with pytest.raises(GraphError):
        Graph(3, [[0, 3]])
    with pytest.raises(GraphError):
        Graph(1, [[0, 0]])

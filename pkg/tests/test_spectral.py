import math

import numpy as np
import pytest

from avgmix import make_graph
from avgmix.graphs import Graph, load_edge_list
from avgmix.process import init_state, signed_split
from avgmix.spectral import (
    EigenError,
    averaging_matrix,
    beta_rhs,
    btree_left_depths,
    btree_level_expectations,
    closed_form_lambda2,
    delocalization,
    eigen_symmetric,
    expected_state,
    jacobi_eigh,
    laplacian,
    solve_beta,
    spectral_summary,
)

LOG2 = math.log(2.0)


def test_laplacian_examples():
    assert laplacian(make_graph("path:3")).tolist() == [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]
    assert laplacian(make_graph("complete:2")).tolist() == [[1, -1], [-1, 1]]
    L = laplacian(make_graph("star:3"))
    assert L.tolist() == [[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]


def test_laplacian_properties(small_graph):
    L = laplacian(small_graph)
    assert np.array_equal(L, L.T)
    assert np.all(L.sum(axis=1) == 0)


def test_eigen_examples():
    w, _ = eigen_symmetric(laplacian(make_graph("complete:4")))
    assert np.allclose(w, [0, 4, 4, 4], atol=1e-12)
    w, _ = eigen_symmetric(laplacian(make_graph("cycle:4")))
    assert np.allclose(w, [0, 2, 2, 4], atol=1e-12)
    w, V = eigen_symmetric(np.eye(3))
    assert np.allclose(w, 1) and np.allclose(V.T @ V, np.eye(3))


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_eigen_contract(small_graph, method):
    L = laplacian(small_graph)
    w, V = eigen_symmetric(L, method)
    assert np.all(np.diff(w) >= 0)
    resid = np.abs(L @ V - V * w).max(axis=0)
    assert np.all(resid <= 1e-8 * (1 + np.abs(w)))
    assert np.abs(V.T @ V - np.eye(len(w))).max() <= 1e-8


def test_jacobi_matches_lapack_random():
    gen = np.random.default_rng(3)
    for n in (2, 3, 7, 20, 41):
        a = gen.standard_normal((n, n))
        a = a + a.T
        w1, _ = eigen_symmetric(a, "jacobi")
        w2, _ = eigen_symmetric(a, "lapack")
        assert np.allclose(w1, w2, atol=1e-10 * max(1, np.abs(w2).max()))


def test_eigen_errors():
    with pytest.raises(ValueError):
        eigen_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        eigen_symmetric(np.eye(2), "qr")
    a = np.random.default_rng(0).standard_normal((12, 12))
    with pytest.raises(EigenError):
        jacobi_eigh(a + a.T, max_sweeps=1)


def test_summary_examples():
    s = spectral_summary(make_graph("complete:4"))
    assert s.lambda2 == pytest.approx(4.0, abs=1e-12)
    assert s.gamma == pytest.approx(1.5, abs=1e-12)
    s = spectral_summary(make_graph("star:4"))
    assert s.lambda2 == pytest.approx(1.0, abs=1e-12)
    assert s.gamma == pytest.approx(3.0, abs=1e-12)
    s = spectral_summary(make_graph("cycle:8"))
    # reference values from a 30-digit evaluation of 2 - 2 cos(pi/4) and 8 / that
    assert s.lambda2 == pytest.approx(0.585786437626904951, abs=1e-12)
    assert s.gamma == pytest.approx(13.6568542494923802, abs=1e-10)


def test_summary_invariants(small_graph):
    s = spectral_summary(small_graph)
    assert s.lambda2 > 0
    assert abs(s.fiedler.sum()) <= 1e-9
    assert abs(np.linalg.norm(s.fiedler) - 1) <= 1e-12
    assert 0 < s.delta <= 1
    assert s.beta.min() == 0.0 and np.all(s.beta >= 0)
    assert s.beta_residual <= 1e-8
    assert s.C == LOG2
    big = np.abs(s.fiedler) > 1e-10 * np.abs(s.fiedler).max()
    assert s.fiedler[np.argmax(big)] > 0
    assert set(s.to_dict()) == {"n", "edges", "lambda2", "gamma", "delta", "beta_max", "beta_residual"}


@pytest.mark.parametrize("family", ["complete", "cycle", "star", "path"])
def test_closed_forms(family):
    for n in (4, 9, 32, 128):
        g = make_graph(f"{family}:{n}")
        assert abs(spectral_summary(g).lambda2 - closed_form_lambda2(g)) <= 1e-8


def test_bipartite_closed_form():
    g = make_graph("bipartite:3,5")
    assert spectral_summary(g).lambda2 == pytest.approx(3.0, abs=1e-10)


def test_btree_lambda2_window():
    for n in (7, 15, 31, 63, 127):
        lam = spectral_summary(make_graph(f"btree:{n}")).lambda2
        assert 1 / n < lam < 2 / n


def test_beta_regular_is_zero():
    for spec in ("cycle:9", "complete:5", "regular:16,3,1"):
        assert np.all(solve_beta(make_graph(spec)) == 0)


def test_beta_star4_hand_solution():
    g = make_graph("star:4")
    for method in ("cg", "pinv"):
        b = solve_beta(g, method)
        assert np.allclose(b, [LOG2, 0, 0, 0], atol=1e-12)


def test_beta_path3_oracle():
    # exact symbolic solve: beta = (0, 2 ln2 / 3, 0)
    b = solve_beta(make_graph("path:3"))
    assert np.allclose(b, [0, 0.46209812037329687294, 0], atol=1e-12)


def test_beta_methods_agree(small_graph):
    a = solve_beta(small_graph, "cg")
    b = solve_beta(small_graph, "pinv")
    assert np.abs(a - b).max() <= 1e-7
    L = laplacian(small_graph)
    assert np.abs(L @ a - beta_rhs(small_graph)).max() <= 1e-8


def test_beta_unknown_method():
    with pytest.raises(ValueError):
        solve_beta(make_graph("star:5"), "lu")


def test_averaging_matrix_examples():
    M = averaging_matrix(make_graph("path:3"))
    assert np.allclose(M, [[0.75, 0.25, 0], [0.25, 0.5, 0.25], [0, 0.25, 0.75]], atol=0)
    assert np.allclose(averaging_matrix(make_graph("complete:2")), 0.5)


def test_averaging_matrix_doubly_stochastic(small_graph):
    M = averaging_matrix(small_graph)
    assert np.abs(M.sum(axis=0) - 1).max() <= 1e-12
    assert np.abs(M.sum(axis=1) - 1).max() <= 1e-12
    assert np.all(M >= 0)


def test_expected_state():
    g = make_graph("path:3")
    v0 = np.array([1.0, 0, 0])
    assert np.array_equal(expected_state(g, v0, 0), v0)
    assert np.allclose(expected_state(g, v0, 1), [0.75, 0.25, 0])
    with pytest.raises(ValueError):
        expected_state(g, v0, -1)


def test_expected_state_conserves(small_graph, rng):
    v0 = rng.standard_normal(small_graph.n)
    for t in (1, 10, 200):
        v = expected_state(small_graph, v0, t)
        assert abs(v.sum() - v0.sum()) <= 1e-12 * max(1, np.abs(v0).sum())


def test_delocalization_examples():
    assert delocalization(np.ones(9)) == pytest.approx(1.0)
    assert delocalization(np.eye(4)[0]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        delocalization(np.zeros(3))
    assert spectral_summary(make_graph("cycle:32")).delta >= 0.5


def test_fiedler_init_is_unit_and_orthogonal():
    s = init_state(make_graph("cycle:4"), "fiedler")
    assert abs(s.values.sum()) < 1e-12
    assert np.linalg.norm(s.values) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [7, 15, 31])
def test_btree_level_recursion_matches_expected_state(n):
    g = make_graph(f"btree:{n}")
    v0 = signed_split(g)
    depth = btree_left_depths(g)
    levels = btree_level_expectations(n, 200)
    M = averaging_matrix(g)
    v = v0.copy()
    for t in range(201):
        left = v[1 : (n - 1) // 2 + 1]
        for s in range(1, depth.max() + 1):
            assert np.abs(left[depth == s] - levels[t, s - 1]).max() <= 1e-10
        assert abs(v[0]) <= 1e-12
        v = M @ v


def test_btree_recursion_bad_size():
    with pytest.raises(ValueError):
        btree_level_expectations(10, 3)


def test_disconnected_summary_rejected():
    with pytest.raises(Exception):
        Graph(4, [[0, 1], [2, 3]])
    with pytest.raises(Exception):
        load_edge_list("0 1\n2 3")


def test_large_graph_uses_lapack_quickly():
    s = spectral_summary(make_graph("cycle:300"))
    assert abs(s.lambda2 - (2 - 2 * math.cos(2 * math.pi / 300))) < 1e-10

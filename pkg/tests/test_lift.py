import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import P1, p1, random_strongly_connected, random_tree_graph, trust
from polaris.lift import (
    SignedLaplacian,
    TrustMatrix,
    lift_laplacian,
    lift_stochastic,
    signed_laplacian,
    split_signs,
    tree_canonical_form,
    weights_to_trust_matrix,
)
from polaris.scenario import load_scenario
from polaris.signed_graph import NoSpanningTree, SignedDigraph, check_balance, enlarge, is_strongly_connected


def test_isolated_vertex_row():
    assert weights_to_trust_matrix(SignedDigraph(1), [1.0]).entries.tolist() == [[1.0]]


def test_agent_two_update_row():
    # agent 1 trusts 0 and 2, mistrusts 8; self weight 1
    g = SignedDigraph(10, {(1, 0): 1, (1, 2): 1, (1, 8): -1})
    row = weights_to_trust_matrix(g).entries[1]
    expected = np.zeros(10)
    expected[[0, 1, 2]] = 0.25
    expected[8] = -0.25
    assert np.array_equal(row, expected)


def test_weight_scaling_invariance():
    g = SignedDigraph(3, {(0, 1): 0.7, (0, 2): -1.3, (2, 1): 2.0})
    w = np.array([1.0, 0.4, 2.5])
    scaled = SignedDigraph(3, {k: 3.7 * v for k, v in g.edges.items()})
    assert np.allclose(weights_to_trust_matrix(g, w).entries, weights_to_trust_matrix(scaled, 3.7 * w).entries, atol=1e-15, rtol=0)


def test_nonpositive_self_weight():
    with pytest.raises(ValueError, match="self weight must be positive"):
        weights_to_trust_matrix(SignedDigraph(2), [1.0, 0.0])


def test_trust_matrix_invariants_enforced():
    with pytest.raises(ValueError):
        TrustMatrix([[0.5, 0.4], [0.0, 1.0]])
    with pytest.raises(ValueError):
        TrustMatrix([[0.0, 1.0], [0.0, 1.0]])


def test_bundled_p1_reproduces_printed_matrix():
    sc = load_scenario("p1_fixed")
    assert np.allclose(sc.schedule.graphs[0].entries, P1, atol=1e-15, rtol=0)


@settings(max_examples=40)
@given(st.integers(1, 7), st.integers(0, 10_000))
def test_trust_matrix_rows(n, seed):
    rng = np.random.default_rng(seed)
    g = random_strongly_connected(rng, n, balanced=bool(seed % 2)) if n > 1 else SignedDigraph(1)
    p = trust(g, rng).entries
    assert np.all(np.diag(p) > 0)
    assert np.abs(np.abs(p).sum(axis=1) - 1).max() <= 1e-12


# -- sign splitting and lifting -------------------------------------------


def test_split_zero():
    pos, neg = split_signs(np.zeros((2, 2)))
    assert not pos.any() and not neg.any()


def test_split_small():
    pos, neg = split_signs([[0.5, -0.5], [0.25, 0.75]])
    assert pos.tolist() == [[0.5, 0], [0.25, 0.75]]
    assert neg.tolist() == [[0, 0.5], [0, 0]]


def test_split_p1_counts():
    pos, neg = split_signs(P1)
    # printed matrix: 6 diagonal + 5 off-diagonal positive entries, 5 negative ones
    assert np.count_nonzero(pos) == 11
    assert np.count_nonzero(neg) == 5
    assert np.array_equal(pos - neg, P1)
    assert not np.minimum(pos, neg).any()


def test_lift_all_positive_is_block_diagonal():
    p = TrustMatrix([[0.5, 0.5], [0.25, 0.75]])
    q = lift_stochastic(p).entries
    assert np.array_equal(q, np.block([[p.entries, np.zeros((2, 2))], [np.zeros((2, 2)), p.entries]]))


def test_lift_one_by_one():
    assert np.array_equal(lift_stochastic(TrustMatrix([[1.0]])).entries, np.eye(2))


def test_lifted_graph_is_enlarged_graph():
    q = lift_stochastic(p1()).entries
    assert set(SignedDigraph.from_matrix(q).edges) == set(enlarge(p1().graph).edges)


@settings(max_examples=40)
@given(st.integers(2, 7), st.booleans(), st.integers(0, 10_000))
def test_lifted_stochastic_structure(n, balanced, seed):
    rng = np.random.default_rng(seed)
    p = trust(random_strongly_connected(rng, n, balanced), rng)
    q = lift_stochastic(p).entries
    assert np.all(q >= 0)
    assert np.allclose(q.sum(axis=1), 1, atol=1e-12, rtol=0)
    assert np.array_equal(q[:n, :n], q[n:, n:]) and np.array_equal(q[:n, n:], q[n:, :n])
    assert set(SignedDigraph.from_matrix(q).edges) == set(enlarge(p.graph).edges)
    x = rng.normal(size=n)
    y = q @ np.concatenate([x, -x])
    assert np.allclose(y[:n], p.entries @ x, atol=1e-14) and np.allclose(y[n:], -(p.entries @ x), atol=1e-14)


# -- Laplacians --------------------------------------------------------------


def test_laplacian_no_edges():
    assert not signed_laplacian(SignedDigraph(3)).entries.any()


def test_laplacian_positive_edge():
    lap = signed_laplacian(SignedDigraph(2, {(1, 0): 2.5})).entries
    assert lap[1, 1] == 2.5 and lap[1, 0] == -2.5


def test_laplacian_negative_edge():
    lap = signed_laplacian(SignedDigraph(2, {(1, 0): -2.5})).entries
    assert lap[1, 1] == 2.5 and lap[1, 0] == 2.5 and lap[1].sum() == 5.0


def test_lifted_laplacian_all_positive():
    g = SignedDigraph(3, {(1, 0): 1, (2, 1): 2, (0, 2): 0.5})
    lap = signed_laplacian(g).entries
    w = lift_laplacian(g).entries
    assert np.array_equal(w, np.block([[lap, np.zeros((3, 3))], [np.zeros((3, 3)), lap]]))


def test_lifted_laplacian_no_edges():
    assert not lift_laplacian(SignedDigraph(2)).entries.any()


@settings(max_examples=40)
@given(st.integers(2, 7), st.booleans(), st.integers(0, 10_000))
def test_laplacian_invariants(n, balanced, seed):
    rng = np.random.default_rng(seed)
    g = random_strongly_connected(rng, n, balanced)
    lap = signed_laplacian(g).entries
    a = g.adjacency()
    assert np.allclose(np.diag(lap), np.abs(a).sum(axis=1))
    sums = lap.sum(axis=1)
    assert np.all(sums >= -1e-12)
    all_pos = np.array([all(a[i, j] >= 0 for j in range(n)) for i in range(n)])
    assert np.all((np.abs(sums) < 1e-12) == all_pos)
    w = lift_laplacian(g).entries
    assert np.abs(w.sum(axis=1)).max() <= 1e-12
    off = w - np.diag(np.diag(w))
    assert np.all(off <= 0)
    x = rng.normal(size=n)
    y = w @ np.concatenate([x, -x])
    assert np.allclose(y[:n], lap @ x) and np.allclose(y[n:], -(lap @ x))


@settings(max_examples=40)
@given(st.integers(2, 7), st.integers(0, 10_000))
def test_gauge_makes_balanced_systems_nonnegative(n, seed):
    rng = np.random.default_rng(seed)
    g = random_strongly_connected(rng, n, balanced=True)
    d = np.diag(check_balance(g).gauge(n))
    dpd = d @ trust(g, rng).entries @ d
    assert np.all(dpd >= 0)
    assert np.allclose(dpd.sum(axis=1), 1, atol=1e-12)
    dld = d @ signed_laplacian(g).entries @ d
    assert np.all(dld - np.diag(np.diag(dld)) <= 0)
    assert np.abs(dld.sum(axis=1)).max() < 1e-12


# -- canonical form --------------------------------------------------------


def test_canonical_form_irreducible():
    p = trust(SignedDigraph(3, {(1, 0): 1, (2, 1): -1, (0, 2): 1}))
    form = tree_canonical_form(p)
    assert form.r == 3 and form.permutation == (0, 1, 2)
    assert np.array_equal(form.root_block, p.entries) and form.tail.size == 0


def test_canonical_form_p1_already_in_form():
    form = tree_canonical_form(p1())
    assert form.r == 3 and form.roots == (0, 1, 2)
    assert np.array_equal(form.root_block, P1[:3, :3])
    # agent 3 listens to agent 4, so topological order puts 4 first in the tail
    assert form.permutation == (0, 1, 2, 4, 3, 5)
    assert np.array_equal(form.restore(), P1)


def test_canonical_form_no_spanning_tree():
    with pytest.raises(NoSpanningTree):
        tree_canonical_form(TrustMatrix(np.eye(2)))


def test_canonical_form_laplacian():
    g = SignedDigraph(3, {(0, 1): -1, (1, 0): -1, (2, 1): 1})
    form = tree_canonical_form(SignedLaplacian(signed_laplacian(g).entries))
    assert form.r == 2 and form.permutation == (0, 1, 2)


@settings(max_examples=40)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 10_000))
def test_canonical_form_properties(r, tail, seed):
    rng = np.random.default_rng(seed)
    g, roots = random_tree_graph(rng, r, tail)
    for m in (trust(g, rng), signed_laplacian(g)):
        form = tree_canonical_form(m)
        assert sorted(form.roots) == roots
        assert np.array_equal(form.restore(), m.entries)
        assert not form.matrix[: form.r, form.r :].any()
        assert is_strongly_connected(SignedDigraph.from_matrix(form.root_block))

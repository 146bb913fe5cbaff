import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from capconsensus.errors import InvalidInput
from capconsensus.graph import (
    CapacitatedGraph,
    SpanningTree,
    average_distance,
    connected_components,
    hstar,
    is_connected,
    laplacian,
    make_cut,
    min_cut,
    min_cut_capacity,
    spectrum,
    total_capacity,
    tree_hstar,
)

P3 = CapacitatedGraph.from_edges(3, [(0, 1), (1, 2)])
K3 = CapacitatedGraph.complete(3)
K4 = CapacitatedGraph.complete(4)
STAR4 = CapacitatedGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
C4 = CapacitatedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
TWO_EDGES = CapacitatedGraph.from_edges(4, [(0, 1), (2, 3)])


def random_graph(rng, n, p):
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def random_tree(rng, n):
    order = list(range(n))
    rng.shuffle(order)
    return [(order[i], order[rng.randrange(i)]) for i in range(1, n)]


@st.composite
def graphs(draw, min_n=2, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    caps = draw(st.lists(st.integers(0, 4), min_size=len(chosen), max_size=len(chosen)))
    return CapacitatedGraph.from_edges(n, chosen, caps)


# --- construction and JSON -------------------------------------------------


def test_canonical_form_and_json_roundtrip():
    g = CapacitatedGraph.from_edges(4, [(3, 0), (2, 1), (1, 0)], [5, 6, 7])
    assert g.edges == ((0, 1), (0, 3), (1, 2))
    assert g.capacity == (7, 5, 6)
    assert CapacitatedGraph.from_json(g.to_json()) == g


@pytest.mark.parametrize(
    "edges",
    [[(0, 0)], [(0, 1), (1, 0)], [(0, 5)]],
    ids=["self-loop", "duplicate", "out-of-range"],
)
def test_rejects_bad_edges(edges):
    with pytest.raises(InvalidInput):
        CapacitatedGraph.from_edges(3, edges)


def test_rejects_negative_capacity():
    with pytest.raises(InvalidInput):
        CapacitatedGraph.from_edges(2, [(0, 1)], [-1])


def test_malformed_json():
    with pytest.raises(InvalidInput):
        CapacitatedGraph.from_json({"n": 2, "edges": [{"u": 0}]})


# --- laplacian / spectrum ----------------------------------------------------


def test_laplacian_examples():
    assert laplacian(P3).tolist() == [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]
    L = laplacian(K3)
    assert np.all(np.diag(L) == 2) and np.all(L[~np.eye(3, dtype=bool)] == -1)
    assert laplacian(CapacitatedGraph.from_edges(2, [])).tolist() == [[0, 0], [0, 0]]


def test_spectrum_examples():
    np.testing.assert_allclose(spectrum(K4).eigenvalues, [0, 4, 4, 4], atol=1e-12)
    np.testing.assert_allclose(spectrum(STAR4).eigenvalues, [0, 1, 1, 4], atol=1e-12)
    s = spectrum(CapacitatedGraph.from_edges(2, []))
    np.testing.assert_allclose(s.eigenvalues, [0, 0])
    assert s.zero_count == 2


@given(graphs())
def test_laplacian_rows_sum_to_zero_and_trace(g):
    L = laplacian(g)
    assert np.all(L.sum(axis=1) == 0)
    eig = spectrum(g).eigenvalues
    assert abs(eig.sum() - 2 * g.m) <= 1e-9
    assert eig[0] == pytest.approx(0, abs=1e-9)
    assert np.all(eig >= -1e-9)
    assert spectrum(g).zero_count == len(connected_components(g))


# --- hstar -------------------------------------------------------------------


def test_hstar_examples():
    assert hstar(P3) == pytest.approx(2 / 9, abs=1e-12)
    assert hstar(K3) == pytest.approx(1 / 9, abs=1e-12)
    assert hstar(TWO_EDGES) == math.inf


def test_hstar_needs_two_nodes():
    with pytest.raises(InvalidInput):
        hstar(CapacitatedGraph.from_edges(1, []))


@given(graphs())
def test_hstar_finite_iff_connected(g):
    h = hstar(g)
    if is_connected(g):
        assert 0 < h < math.inf
        assert h == pytest.approx(oracles.hstar_pinv(g.n, g.edges), rel=1e-9)
    else:
        assert h == math.inf


def test_hstar_strictly_decreases_when_adding_edges():
    rng = random.Random(1)
    checked = 0
    while checked < 100:
        n = rng.randint(3, 8)
        edges = random_tree(rng, n) + random_graph(rng, n, 0.3)
        g = CapacitatedGraph.from_edges(n, {tuple(sorted(e)) for e in edges})
        missing = [(i, j) for i in range(n) for j in range(i + 1, n) if not g.has_edge(i, j)]
        if not missing:
            continue
        extra = rng.choice(missing)
        assert hstar(CapacitatedGraph.from_edges(n, list(g.edges) + [extra])) < hstar(g)
        checked += 1


# --- connectivity --------------------------------------------------------------


def test_is_connected_examples():
    assert is_connected(C4)
    assert not is_connected(TWO_EDGES)
    assert is_connected(CapacitatedGraph.from_edges(1, []))


# --- trees ---------------------------------------------------------------------


def test_average_distance_examples():
    assert average_distance(SpanningTree(3, ((0, 1), (1, 2)))) == pytest.approx(4 / 3)
    assert average_distance(SpanningTree(4, ((0, 1), (0, 2), (0, 3)))) == pytest.approx(3 / 2)
    assert average_distance(SpanningTree(2, ((0, 1),))) == 1


def test_tree_hstar_examples():
    assert tree_hstar(SpanningTree(3, ((0, 1), (1, 2)))) == pytest.approx(2 / 9, abs=1e-12)
    assert tree_hstar(SpanningTree(4, ((0, 1), (0, 2), (0, 3)))) == pytest.approx(9 / 32, abs=1e-12)
    assert tree_hstar(SpanningTree(2, ((0, 1),))) == pytest.approx(0.125, abs=1e-12)


@pytest.mark.parametrize(
    "n, edges",
    [
        (4, ((0, 1), (1, 2), (0, 2))),  # cycle plus isolated node
        (4, ((0, 1),)),  # too few edges
        (4, ((0, 1), (1, 0), (2, 3))),  # duplicate
        (5, ((0, 1), (1, 2), (2, 0), (3, 4))),  # right count, disconnected
    ],
)
def test_malformed_tree(n, edges):
    with pytest.raises(InvalidInput):
        SpanningTree(n, edges)
    with pytest.raises(InvalidInput):
        average_distance(CapacitatedGraph.from_edges(3, [(0, 1), (1, 2)]))


def test_tree_parent():
    t = SpanningTree(4, ((0, 1), (1, 2), (1, 3)), root=1)
    assert t.parent == (1, -1, 1, 1)


@given(st.integers(2, 12), st.randoms(use_true_random=False))
def test_tree_wiener_matches_networkx(n, rnd):
    t = SpanningTree(n, tuple(random_tree(rnd, n)))
    assert t.wiener == oracles.wiener(n, t.edges)
    assert average_distance(t) == pytest.approx(t.wiener / (n * (n - 1) / 2))


# --- cuts ------------------------------------------------------------------------


def test_min_cut_examples():
    assert min_cut_capacity(C4) == 2
    assert min_cut_capacity(SpanningTree(5, ((0, 1), (1, 2), (2, 3), (3, 4))).as_graph()) == 1
    assert min_cut_capacity(K3.with_capacity(2)) == 4


def test_min_cut_needs_two_nodes():
    with pytest.raises(InvalidInput):
        min_cut_capacity(CapacitatedGraph.from_edges(1, []))


def test_make_cut():
    cut = make_cut(C4, {0, 1})
    assert cut.cutset == ((0, 3), (1, 2))
    assert cut.capacity == 2 and cut.W == frozenset({2, 3})
    with pytest.raises(InvalidInput):
        make_cut(C4, set())


@given(graphs(max_n=9))
def test_min_cut_matches_bruteforce(g):
    cut = min_cut(g)
    assert cut.capacity == oracles.min_cut_bruteforce(g.n, g.edges, g.capacity)
    assert cut.capacity == make_cut(g, cut.U).capacity


def test_min_cut_bruteforce_n10():
    rng = random.Random(7)
    for _ in range(10):
        n = 10
        edges = random_graph(rng, n, 0.4)
        caps = [rng.randint(0, 3) for _ in edges]
        g = CapacitatedGraph.from_edges(n, edges, caps)
        assert min_cut_capacity(g) == oracles.min_cut_bruteforce(n, g.edges, g.capacity)


def test_total_capacity_examples():
    assert total_capacity(K3.with_capacity(2)) == 6
    assert total_capacity(CapacitatedGraph.from_edges(3, [])) == 0
    assert total_capacity(C4) == 4


# --- tree formula identity --------------------------------------------------------


def test_tree_formula_matches_spectrum_200_trees():
    rng = random.Random(2024)
    for _ in range(200):
        n = rng.randint(2, 12)
        t = SpanningTree(n, tuple(random_tree(rng, n)))
        assert abs(tree_hstar(t) - hstar(t)) <= 1e-9

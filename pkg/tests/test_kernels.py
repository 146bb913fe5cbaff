import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from capconsensus import kernels


def random_tree_arrays(rng, n):
    order = rng.permutation(n)
    tu = np.array([order[i] for i in range(1, n)], dtype=np.int64)
    tv = np.array([order[rng.integers(i)] for i in range(1, n)], dtype=np.int64)
    return tu, tv


def random_connected(rng, n, p):
    tu, tv = random_tree_arrays(rng, n)
    edges = {(min(a, b), max(a, b)) for a, b in zip(tu.tolist(), tv.tolist())}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((i, j))
    edges = sorted(edges)
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    return eu, ev


@given(st.integers(2, 14), st.integers(0, 2**31))
def test_tree_distance_paths_agree(n, seed):
    rng = np.random.default_rng(seed)
    tu, tv = random_tree_arrays(rng, n)
    a = kernels._tree_distance_matrix_loops(n, tu, tv)
    b = kernels._tree_distance_matrix_numpy(n, tu, tv)
    np.testing.assert_array_equal(a, b)
    w = kernels._tree_wiener_loops(n, tu, tv)
    assert w == kernels._tree_wiener_numpy(n, tu, tv)
    assert w == oracles.wiener(n, list(zip(tu.tolist(), tv.tolist())))


def test_wiener_reports_disconnected():
    tu = np.array([0, 2], dtype=np.int64)
    tv = np.array([1, 3], dtype=np.int64)
    assert kernels._tree_wiener_loops(4, tu, tv) == -1
    assert kernels._tree_wiener_numpy(4, tu, tv) == -1


@given(st.integers(3, 10), st.integers(0, 2**31))
def test_exchange_costs_match_recomputation(n, seed):
    rng = np.random.default_rng(seed)
    eu, ev = random_connected(rng, n, 0.4)
    tree = np.zeros(len(eu), dtype=bool)
    # any spanning tree: Kruskal on random order
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i in rng.permutation(len(eu)):
        a, b = find(eu[i]), find(ev[i])
        if a != b:
            parent[a] = b
            tree[i] = True
    r1, a1, c1 = kernels._all_exchanges_loops(n, eu, ev, tree)
    r2, a2, c2 = kernels._all_exchanges_numpy(n, eu, ev, tree)
    np.testing.assert_array_equal(r1, r2)
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(c1, c2)
    for e, f, c in list(zip(r1, a1, c1))[:20]:
        t2 = tree.copy()
        t2[e] = False
        t2[f] = True
        idx = np.flatnonzero(t2)
        assert c == oracles.wiener(n, list(zip(eu[idx].tolist(), ev[idx].tolist())))


def test_tree_search_interpreted_matches_compiled():
    n = 8
    edges = sorted({(min(u, (u + s) % n), max(u, (u + s) % n)) for u in range(n) for s in (1, 3)})
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    cl = np.array([0 if (e[1] - e[0]) % n in (1, n - 1) else 1 for e in edges], dtype=np.int64)
    h = np.array([4, 3], dtype=np.int64)
    fast = kernels.tree_search(n, eu, ev, cl, h, 10**6, True, 0)
    slow = kernels._tree_search.py_func(n, eu, ev, cl, h, np.int64(10**6), True, np.int64(0))
    assert fast[0] == slow[0]
    np.testing.assert_array_equal(fast[2], slow[2])
    assert fast[3] == slow[3]
    assert fast[0] == oracles.cmad_bruteforce(n, (1, 3), (4, 3))


def test_tree_search_node_budget():
    n = 9
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    cl = np.zeros(len(edges), dtype=np.int64)
    best, found, status, nodes, complete = kernels.tree_search(n, eu, ev, cl, np.array([n - 1]), 10**6, False, 5)
    assert not complete


@pytest.mark.parametrize("trials", [1, 3])
def test_em_paths_agree(trials):
    rng = np.random.default_rng(3)
    n = 5
    lap = np.full((n, n), -1.0) + n * np.eye(n)
    noise = rng.standard_normal((200, trials, n))
    x1 = rng.standard_normal((trials, n))
    x2 = x1.copy()
    acc1 = np.zeros(trials)
    acc2 = np.zeros(trials)
    kernels._em_accumulate_loops(lap, x1, noise, 0.01, 50, acc1)
    kernels._em_accumulate_numpy(lap, x2, noise, 0.01, 50, acc2)
    np.testing.assert_allclose(x1, x2, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(acc1, acc2, rtol=1e-12)


def test_public_names_follow_flag():
    if kernels.HAS_NUMBA:
        assert kernels.all_exchanges is kernels._all_exchanges_loops
    else:
        assert kernels.all_exchanges is kernels._all_exchanges_numpy


@pytest.mark.skipif(not kernels.HAS_NUMBA, reason="benchmark compares against numba")
def test_benchmark_paths_agree():
    import importlib.util
    import pathlib

    path = pathlib.Path(__file__).parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.main(["--repeat", "1"]) == 0

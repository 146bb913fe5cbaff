import math
import random

import pytest

import oracles
from capconsensus.allocation import (
    EdgeDimPair,
    exhaustive_allocate,
    greedy_allocate,
    make_state,
    marginal_gain,
    objective,
)
from capconsensus.errors import Blocked, InvalidInput, InvalidState, TooLarge
from capconsensus.graph import CapacitatedGraph, hstar

K3 = CapacitatedGraph.complete(3)
P3_EDGES = [(0, 1), (1, 2)]


def random_instance(rng, max_candidates=12):
    """Random capacitated graph, random spanning trees per dimension, small spare capacity."""
    while True:
        n = rng.randint(3, 5)
        k = rng.randint(1, 3)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        initial = []
        usage = {p: 0 for p in pairs}
        for _ in range(k):
            order = list(range(n))
            rng.shuffle(order)
            tree = [tuple(sorted((order[i], order[rng.randrange(i)]))) for i in range(1, n)]
            initial.append(tree)
            for e in tree:
                usage[e] += 1
        caps = {p: usage[p] + rng.choice([0, 0, 1, 2]) for p in pairs}
        g = CapacitatedGraph.from_edges(n, pairs, caps)
        state = make_state(g, k, initial)
        if 0 < len(state.candidates()) <= max_candidates:
            return g, k, initial


# --- objective -----------------------------------------------------------------


def test_objective_examples():
    assert objective(make_state(K3, 1, [P3_EDGES])) == pytest.approx(-4 / 3)
    assert objective(make_state(K3, 1, [K3.edges])) == pytest.approx(-2 / 3)
    assert objective(make_state(K3.with_capacity(2), 2, [K3.edges, K3.edges])) == pytest.approx(-4 / 3)


def test_objective_matches_hstar_sum():
    rng = random.Random(0)
    for _ in range(30):
        g, k, initial = random_instance(rng)
        st = make_state(g, k, initial)
        total = sum(hstar(CapacitatedGraph.from_edges(g.n, s)) for s in initial)
        assert objective(st) == pytest.approx(-2 * g.n * total, rel=1e-10)


def test_objective_on_disconnected_dimension():
    g = CapacitatedGraph.complete(4)
    from capconsensus.allocation import AllocationState

    st = AllocationState(g, 1, (((0, 1), (2, 3)),))
    with pytest.raises(InvalidState):
        objective(st)


# --- marginal gains ----------------------------------------------------------------


def test_gain_example():
    st = make_state(K3, 1, [P3_EDGES])
    assert marginal_gain(st, ((0, 2), 0)) == pytest.approx(2 / 3)
    assert marginal_gain(st, ((2, 0), 0), method="pinv") == pytest.approx(2 / 3)


def test_gain_errors():
    st = make_state(K3.with_capacity(2), 1, [P3_EDGES])
    st2 = st.with_pair(((0, 2), 0), marginal_gain(st, ((0, 2), 0)))
    with pytest.raises(InvalidInput):
        marginal_gain(st2, ((0, 2), 0))
    with pytest.raises(InvalidInput):
        marginal_gain(st, ((0, 1), 0))  # part of the initial graph
    blocked = make_state(K3.with_capacity(1).with_capacity([1, 0, 1]), 1, [P3_EDGES])
    with pytest.raises(Blocked):
        marginal_gain(blocked, ((0, 2), 0))
    with pytest.raises(InvalidInput):
        marginal_gain(st, ((0, 2), 0), method="magic")


def test_gain_paths_agree_and_positive():
    rng = random.Random(1)
    for _ in range(40):
        g, k, initial = random_instance(rng)
        st = make_state(g, k, initial)
        for p in st.candidates():
            a = marginal_gain(st, p, "eig")
            b = marginal_gain(st, p, "pinv")
            assert a > 0
            assert abs(a - b) <= 1e-8
            edges = list(st.dim_edges[p.dim]) + [p.edge]
            expect = oracles.trace_pinv(g.n, list(st.dim_edges[p.dim])) - oracles.trace_pinv(g.n, edges)
            assert a == pytest.approx(expect, abs=1e-9)


def test_submodularity_500_triples():
    rng = random.Random(2)
    done = 0
    while done < 500:
        g, k, initial = random_instance(rng)
        st = make_state(g, k, initial)
        cands = st.candidates()
        if len(cands) < 2:
            continue
        p, q = rng.sample(cands, 2)
        gq = marginal_gain(st, q)
        st_q = st.with_pair(q, gq)
        if st_q.remaining[g.index[p.edge]] < 1:
            continue  # q used the last unit on p's edge
        assert marginal_gain(st, p) >= marginal_gain(st_q, p) - 1e-9
        done += 1


# --- greedy ------------------------------------------------------------------------------


def test_greedy_k3():
    st = greedy_allocate(K3, 1, [P3_EDGES])
    assert st.chosen == (EdgeDimPair((0, 2), 0),)
    assert st.dimension_costs()[0] == pytest.approx(1 / 9)


def test_greedy_no_capacity():
    g = CapacitatedGraph.from_edges(3, P3_EDGES, 1)
    st = greedy_allocate(g, 1, [P3_EDGES])
    assert st.chosen == ()
    assert (st.remaining == 0).all()


def test_greedy_k4_star():
    g = CapacitatedGraph.complete(4)
    st = greedy_allocate(g, 1, [[(0, 1), (0, 2), (0, 3)]])
    assert [p.edge for p in st.chosen] == [(1, 2), (1, 3), (2, 3)]
    assert st.dimension_costs()[0] == pytest.approx(3 / 32)
    assert all(s.gain > 0 for s in st.steps)


def test_greedy_invalid_initial():
    with pytest.raises(InvalidInput):
        greedy_allocate(K3, 1, [[(0, 1)]])
    with pytest.raises(InvalidInput):
        greedy_allocate(K3, 2, [P3_EDGES])
    with pytest.raises(InvalidInput):
        greedy_allocate(K3, 2, [P3_EDGES, P3_EDGES])  # exceeds unit capacity


def test_greedy_invariants_each_step():
    rng = random.Random(3)
    for _ in range(20):
        g, k, initial = random_instance(rng)
        final = greedy_allocate(g, k, initial, method="pinv")
        init = make_state(g, k, initial)
        prev = objective(init)
        st = init
        for step in final.steps:
            assert step.gain > 0
            st = st.with_pair(step.pair, step.gain)
            assert (st.remaining >= 0).all()
            val = objective(st)
            assert val - prev == pytest.approx(step.gain, abs=1e-8)
            total = sum(hstar(CapacitatedGraph.from_edges(g.n, list(s))) for s in st.dim_edges)
            assert val == pytest.approx(-2 * g.n * total, rel=1e-10)
            prev = val
        assert final.candidates() == []


def test_greedy_tie_break_smallest_pair():
    # two disjoint identical dimensions: first choice goes to the smaller (edge, dim)
    g = CapacitatedGraph.complete(3, 2)
    st = greedy_allocate(g, 2, [P3_EDGES, P3_EDGES])
    assert st.chosen[0] == EdgeDimPair((0, 2), 0)


# --- exhaustive oracle and the 1/2 guarantee ---------------------------------------------------


def test_exhaustive_k3_matches_greedy():
    assert exhaustive_allocate(K3, 1, [P3_EDGES]).chosen == greedy_allocate(K3, 1, [P3_EDGES]).chosen


def test_exhaustive_empty_and_limit():
    g = CapacitatedGraph.from_edges(3, P3_EDGES, 1)
    assert exhaustive_allocate(g, 1, [P3_EDGES]).chosen == ()
    big = CapacitatedGraph.complete(6, 3)
    with pytest.raises(TooLarge):
        exhaustive_allocate(big, 3, [[(0, i) for i in range(1, 6)]] * 3)  # 30 candidates


def test_greedy_half_guarantee_100_instances():
    rng = random.Random(4)
    for _ in range(100):
        g, k, initial = random_instance(rng)
        base = objective(make_state(g, k, initial))
        greedy_gain = objective(greedy_allocate(g, k, initial)) - base
        best_gain = objective(exhaustive_allocate(g, k, initial)) - base
        assert best_gain >= greedy_gain - 1e-9
        assert greedy_gain >= 0.5 * best_gain - 1e-9


def test_report_shape():
    rep = greedy_allocate(K3, 1, [P3_EDGES]).to_report()
    assert rep["steps"] == [{"edge": [0, 2], "dim": 0, "gain": pytest.approx(2 / 3)}]
    assert rep["initial_cost"] == pytest.approx(2 / 9) and rep["final_cost"] == pytest.approx(1 / 9)
    assert all(r["remaining"] == 0 for r in rep["remaining"])
    assert math.isclose(rep["final_objective"] - rep["initial_objective"], 2 / 3)

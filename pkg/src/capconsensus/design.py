"""Feasibility checks, closed-form and brute-force designs, validation and gap reports."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import Infeasible, InvalidInput, TooLarge
from .graph import (
    CapacitatedGraph,
    Edge,
    SpanningTree,
    _connected,
    hstar,
    is_connected,
    min_cut,
    total_capacity,
    tree_hstar,
)
from .solution import DEFAULT_MAX_K, DesignSolution, subgraph_cost

NECESSARY_HOLD = "necessary-conditions-hold"
PROVABLY_INFEASIBLE = "provably-infeasible"


@dataclass(frozen=True)
class FeasibilityReport:
    """Necessary conditions only; a passing report is not a feasibility proof."""

    k: int
    min_cut_capacity: int
    min_cut_ok: bool
    total_capacity: int
    total_ok: bool

    @property
    def verdict(self) -> str:
        return NECESSARY_HOLD if self.min_cut_ok and self.total_ok else PROVABLY_INFEASIBLE

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "min_cut_capacity": self.min_cut_capacity,
            "min_cut_ok": self.min_cut_ok,
            "total_capacity": self.total_capacity,
            "total_ok": self.total_ok,
            "verdict": self.verdict,
        }


def check_feasibility(g: CapacitatedGraph, k: int) -> FeasibilityReport:
    if k < 1:
        raise InvalidInput("k must be at least 1")
    if g.n < 2:
        raise InvalidInput("feasibility needs at least two nodes")
    if not is_connected(g):
        raise InvalidInput("base graph is disconnected")
    cut = min_cut(g).capacity
    total = total_capacity(g)
    return FeasibilityReport(k, cut, cut >= k, total, total >= k * (g.n - 1))


def solve_complete(n: int, alpha: int = 1, max_k: int = DEFAULT_MAX_K) -> DesignSolution:
    """Stars on ``K_n`` (capacity ``2 alpha`` everywhere), each node the hub ``alpha`` times."""
    if n < 3:
        raise InvalidInput("the complete-graph construction needs n >= 3")
    if alpha < 1:
        raise InvalidInput("alpha must be at least 1")
    if alpha * n > max_k:
        raise InvalidInput(f"k = {alpha * n} exceeds the configured limit {max_k}")
    g = CapacitatedGraph.complete(n, 2 * alpha)
    subs = []
    hubs = []
    for hub in range(n):
        star = [(min(hub, v), max(hub, v)) for v in range(n) if v != hub]
        subs.extend([star] * alpha)
        hubs.extend([hub] * alpha)
    return DesignSolution.build(g, subs, {"method": "complete", "optimal": True, "unique": True, "hubs": hubs})


def star_hub(n: int, edges) -> int | None:
    """Hub of a star subgraph, or None if the edge set is not a spanning star."""
    if len(edges) != n - 1:
        return None
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    hub = int(np.argmax(deg))
    return hub if deg[hub] == n - 1 else None


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [{"code": v.code, "detail": v.detail} for v in self.violations]}


def validate_solution(sol: DesignSolution, tol: float = 1e-9) -> ValidationResult:
    g = sol.graph
    out: list[Violation] = []
    usage = np.zeros(g.m, dtype=np.int64)
    costs = []
    for ell, sub in enumerate(sol.subgraphs):
        for e in sub:
            i = g.index.get(e)
            if i is None:
                out.append(Violation("edge-not-in-graph", f"subgraph {ell} uses {e}"))
            else:
                usage[i] += 1
        # spectral recomputation, independent of the tree shortcut used by DesignSolution
        c = hstar(CapacitatedGraph(g.n, sub, (1,) * len(sub))) if g.n >= 2 else math.inf
        costs.append(c)
        if not math.isfinite(c):
            out.append(Violation("infinite-cost-subgraph", f"subgraph {ell} is disconnected"))
    for i in np.flatnonzero(usage > np.asarray(g.capacity, dtype=np.int64)):
        out.append(Violation("capacity-exceeded", f"edge {g.edges[i]} used {usage[i]} > capacity {g.capacity[i]}"))
    recomputed = math.fsum(costs)
    stored = sol.cost
    if math.isfinite(recomputed) != math.isfinite(stored) or (
        math.isfinite(recomputed) and abs(recomputed - stored) > tol * max(1.0, abs(recomputed))
    ):
        out.append(Violation("cost-mismatch", f"stored {stored!r}, recomputed {recomputed!r}"))
    return ValidationResult(tuple(out))


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------


def spanning_trees(n: int, edges: tuple[Edge, ...]) -> Iterator[tuple[int, ...]]:
    """Index tuples of every spanning tree, in lexicographic order."""
    m = len(edges)

    def find(par, x):
        while par[x] != x:
            x = par[x]
        return x

    def rec(start, chosen, par):
        if len(chosen) == n - 1:
            yield tuple(chosen)
            return
        need = n - 1 - len(chosen)
        for i in range(start, m - need + 1):
            u, v = edges[i]
            ru, rv = find(par, u), find(par, v)
            if ru == rv:
                continue
            par2 = list(par)
            par2[ru] = rv
            chosen.append(i)
            yield from rec(i + 1, chosen, par2)
            chosen.pop()

    if n == 1:
        yield ()
        return
    yield from rec(0, [], list(range(n)))


def _multiset_search(n, costs, members, caps, ends, k, max_nodes, exact: bool):
    """Cheapest non-decreasing index sequence of length ``k`` respecting ``caps``.

    Candidates are pre-sorted by cost, so the remaining slots cost at least
    ``costs[i]`` each. Every spanning subgraph touches every vertex, so a
    vertex whose incident spare capacity is below the number of open slots
    kills the branch. ``exact`` switches to integer comparison.
    """
    count = len(costs)
    use = np.zeros(len(caps), dtype=np.int64)
    vspare = np.bincount(ends.ravel(), weights=np.repeat(caps, 2), minlength=n).astype(np.int64)
    vmem = [np.bincount(ends[mem].ravel(), minlength=n) for mem in members]
    best_val = None
    best_seq: list[int] | None = None
    nodes = 0
    seq: list[int] = []

    def better(v):
        if best_val is None:
            return True
        return v < best_val if exact else v < best_val - 1e-12 * max(1.0, abs(best_val))

    def rec(start, acc):
        nonlocal best_val, best_seq, nodes
        nodes += 1
        if nodes > max_nodes:
            raise TooLarge(f"brute force exceeded {max_nodes} search nodes")
        slots = k - len(seq)
        if slots == 0:
            if better(acc):
                best_val, best_seq = acc, list(seq)
            return
        if vspare.min() < slots:
            return
        for i in range(start, count):
            if best_val is not None and not better(acc + costs[i] * slots):
                return
            mem = members[i]
            if np.any(use[mem] >= caps[mem]):
                continue
            use[mem] += 1
            np.subtract(vspare, vmem[i], out=vspare)
            seq.append(i)
            rec(i, acc + costs[i])
            seq.pop()
            np.add(vspare, vmem[i], out=vspare)
            use[mem] -= 1

    rec(0, 0 if exact else 0.0)
    return best_val, best_seq


def brute_force(
    g: CapacitatedGraph,
    k: int,
    *,
    max_bits: int = 18,
    max_trees: int = 50_000,
    max_nodes: int = 5_000_000,
) -> DesignSolution:
    """Globally optimal assignment by exhaustive search.

    When total capacity is exactly ``k (n - 1)`` every feasible solution is a
    set of spanning trees, so only trees are enumerated (integer Wiener
    costs). Otherwise all connected spanning subgraphs are enumerated, which
    requires ``|E| * k <= max_bits``. Subgraphs are ordered by (cost, edge
    indices) and the search returns the first optimum in that order.
    """
    if k < 1:
        raise InvalidInput("k must be at least 1")
    if g.n < 2:
        raise InvalidInput("brute force needs at least two nodes")
    caps = np.asarray(g.capacity, dtype=np.int64)
    usable = tuple(i for i in range(g.m) if caps[i] > 0)
    ends = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    if not _connected(g.n, [g.edges[i] for i in usable]):
        raise Infeasible("positive-capacity edges do not connect the graph")
    tight = total_capacity(g) == k * (g.n - 1)
    if tight:
        cands = []
        sub_edges = tuple(g.edges[i] for i in usable)
        for idx in spanning_trees(g.n, sub_edges):
            if len(cands) >= max_trees:
                raise TooLarge(f"more than {max_trees} spanning trees")
            edges = tuple(sub_edges[j] for j in idx)
            cands.append((SpanningTree(g.n, edges).wiener, tuple(usable[j] for j in idx)))
        cands.sort()
        costs = [c for c, _ in cands]
        members = [np.asarray(mem, dtype=np.int64) for _, mem in cands]
        best, seq = _multiset_search(g.n, costs, members, caps, ends, k, max_nodes, exact=True)
        mode = "trees"
    else:
        if len(usable) * k > max_bits:
            raise TooLarge(f"|E| * k = {len(usable) * k} exceeds the {max_bits}-bit limit")
        cands = []
        for r in range(g.n - 1, len(usable) + 1):
            for idx in itertools.combinations(usable, r):
                edges = tuple(g.edges[i] for i in idx)
                if _connected(g.n, edges):
                    cands.append((subgraph_cost(g.n, edges), idx))
        cands.sort()
        costs = [c for c, _ in cands]
        members = [np.asarray(mem, dtype=np.int64) for _, mem in cands]
        best, seq = _multiset_search(g.n, costs, members, caps, ends, k, max_nodes, exact=False)
        mode = "subsets"
    if seq is None:
        raise Infeasible("no capacity-respecting assignment with connected subgraphs exists")
    subs = [tuple(g.edges[i] for i in cands[j][1]) for j in seq]
    return DesignSolution.build(g, subs, {"method": "brute-force", "mode": mode, "optimal": True})


# ---------------------------------------------------------------------------
# optimality gap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    lower: float
    achieved: float
    delta: float
    heuristic: bool

    def to_json(self) -> dict:
        return {"lower": self.lower, "achieved": self.achieved, "delta": self.delta, "heuristic": self.heuristic}


def gap_report(target, solution: DesignSolution, *, exact_threshold: int | None = None, restarts: int | None = None, seed: int = 0) -> GapReport:
    """Lower bound ``k * H*(MAD)`` against the achieved cost.

    ``target`` is a :class:`CirculantSpec` or a :class:`CapacitatedGraph`;
    for a general graph the MAD tree is searched over its positive-capacity
    edges. ``heuristic`` is set when the MAD tree is not certified optimal,
    in which case ``lower`` may overestimate the true bound.
    """
    from . import circulant as circ
    from .treesearch import exact_search, heuristic_search

    et = circ.DEFAULT_EXACT_THRESHOLD if exact_threshold is None else exact_threshold
    rs = circ.DEFAULT_RESTARTS if restarts is None else restarts
    if isinstance(target, circ.CirculantSpec):
        mad = circ.find_mad(target.n, target.generators, exact_threshold=et, restarts=rs, seed=seed)
        per_tree, heuristic = mad.hstar, mad.heuristic
    elif isinstance(target, CapacitatedGraph):
        usable = [e for e, c in zip(target.edges, target.capacity) if c > 0]
        if not _connected(target.n, usable):
            raise InvalidInput("base graph has no spanning tree")
        eu = np.array([e[0] for e in usable], dtype=np.int64)
        ev = np.array([e[1] for e in usable], dtype=np.int64)
        cl = np.zeros(len(usable), dtype=np.int64)
        h = np.array([target.n - 1], dtype=np.int64)
        search = exact_search if target.n <= et else heuristic_search
        kwargs = {"seed": seed} if target.n <= et else {"seed": seed, "restarts": rs}
        out = search(target.n, eu, ev, cl, h, **kwargs)
        tree = SpanningTree(target.n, tuple(usable[i] for i in np.flatnonzero(out.mask)))
        per_tree, heuristic = tree_hstar(tree), out.heuristic
    else:
        raise InvalidInput("gap_report target must be a CirculantSpec or CapacitatedGraph")
    lower = solution.k * per_tree
    achieved = solution.cost
    delta = (achieved - lower) / achieved if math.isfinite(achieved) else 1.0
    return GapReport(lower, achieved, delta, heuristic)

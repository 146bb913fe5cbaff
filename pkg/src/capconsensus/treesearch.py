"""Minimum-average-distance spanning trees, optionally with per-class edge counts.

Edges carry a class label ``cl[i]`` and a target profile ``h`` (``h[c]`` edges
of class ``c``). The unconstrained problem is the special case of a single
class with ``h = (n - 1,)``.

Two regimes:

* exact: branch and bound (:func:`capconsensus.kernels.tree_search`) seeded
  with a heuristic incumbent;
* heuristic: multi-start edge-exchange local search with compound
  class-swapping moves and random kicks.

Trees are handled as boolean masks over the edge list.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProfile
from .kernels import all_exchanges, tree_search, tree_wiener


@dataclass(frozen=True)
class SearchOutcome:
    mask: np.ndarray
    wiener: int
    heuristic: bool
    nodes: int = 0


def _wiener(n: int, eu: np.ndarray, ev: np.ndarray, mask: np.ndarray) -> int:
    idx = np.flatnonzero(mask)
    return int(tree_wiener(n, eu[idx], ev[idx]))


def _key(w: int, mask: np.ndarray) -> tuple:
    return (w, tuple(np.flatnonzero(mask).tolist()))


# ---------------------------------------------------------------------------
# feasibility: graphic matroid  x  partition matroid (class caps h)
# ---------------------------------------------------------------------------


def _forest_paths(n: int, eu, ev, members: list[int]):
    """Component labels and a parent map for the forest on ``members``."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for i in members:
        adj[eu[i]].append((ev[i], i))
        adj[ev[i]].append((eu[i], i))
    comp = [-1] * n
    par = [-1] * n
    par_edge = [-1] * n
    depth = [0] * n
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = s
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y, i in adj[x]:
                if comp[y] < 0:
                    comp[y] = s
                    par[y] = x
                    par_edge[y] = i
                    depth[y] = depth[x] + 1
                    queue.append(y)
    return comp, par, par_edge, depth


def _path_edges(a: int, b: int, par, par_edge, depth) -> list[int]:
    out = []
    while depth[a] > depth[b]:
        out.append(par_edge[a])
        a = par[a]
    while depth[b] > depth[a]:
        out.append(par_edge[b])
        b = par[b]
    while a != b:
        out.append(par_edge[a])
        out.append(par_edge[b])
        a, b = par[a], par[b]
    return out


def feasible_tree(n, eu, ev, cl, h, order=None) -> np.ndarray | None:
    """A spanning tree with exactly ``h[c]`` edges of each class, or None.

    Maximum common independent set of the graphic matroid and the partition
    matroid ``{I : |I & class c| <= h[c]}`` by shortest augmenting paths. When
    ``sum(h) == n - 1`` a common independent set of size ``n - 1`` is exactly
    a spanning tree with the requested profile. ``order`` permutes the
    scanning order, which randomises the tree returned.
    """
    m = len(eu)
    cl = np.asarray(cl)
    h = np.asarray(h)
    if int(h.sum()) != n - 1:
        return None
    order = list(range(m)) if order is None else [int(i) for i in order]
    rank = {e: r for r, e in enumerate(order)}
    current: set[int] = set()
    count = np.zeros(len(h), dtype=np.int64)
    while len(current) < n - 1:
        members = sorted(current, key=rank.__getitem__)
        comp, par, par_edge, depth = _forest_paths(n, eu, ev, members)
        outside = [x for x in order if x not in current]
        sources = set()
        sinks = set()
        arcs: dict[int, list[int]] = {i: [] for i in range(m)}
        for x in outside:
            c = cl[x]
            if count[c] < h[c]:
                sinks.add(x)
            if comp[eu[x]] != comp[ev[x]]:
                sources.add(x)
            else:
                for y in _path_edges(eu[x], ev[x], par, par_edge, depth):
                    arcs[y].append(x)
            for y in members:
                if cl[y] == c or count[c] < h[c]:
                    arcs[x].append(y)
        prev: dict[int, int] = {}
        queue = deque()
        for x in outside:
            if x in sources:
                prev[x] = -1
                queue.append(x)
        end = -1
        while queue:
            x = queue.popleft()
            if x in sinks and x not in current:
                end = x
                break
            for y in arcs[x]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        if end < 0:
            return None
        x = end
        while x >= 0:
            if x in current:
                current.remove(x)
                count[cl[x]] -= 1
            else:
                current.add(x)
                count[cl[x]] += 1
            x = prev[x]
    mask = np.zeros(m, dtype=bool)
    mask[list(current)] = True
    return mask


def random_bfs_tree(n, eu, ev, rng: np.random.Generator) -> np.ndarray:
    """Breadth-first spanning tree from a random root with shuffled neighbour order."""
    m = len(eu)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for i in range(m):
        adj[eu[i]].append((int(ev[i]), i))
        adj[ev[i]].append((int(eu[i]), i))
    root = int(rng.integers(n))
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    mask = np.zeros(m, dtype=bool)
    frontier = [root]
    while frontier:
        nxt = []
        for x in frontier:
            nbrs = adj[x]
            for j in rng.permutation(len(nbrs)):
                y, i = nbrs[j]
                if not seen[y]:
                    seen[y] = True
                    mask[i] = True
                    nxt.append(y)
        frontier = nxt
    return mask


# ---------------------------------------------------------------------------
# local search
# ---------------------------------------------------------------------------


def improve(n, eu, ev, cl, mask, constrained: bool, topk: int = 32) -> tuple[np.ndarray, int]:
    """Best-improvement exchange descent.

    Constrained descent keeps the class profile: single exchanges within a
    class, then compound moves (swap class a for b, then b back for a) built
    from the ``topk`` cheapest class-changing first exchanges.
    """
    mask = mask.copy()
    w = _wiener(n, eu, ev, mask)
    while True:
        rem, add, cost = all_exchanges(n, eu, ev, mask)
        if constrained:
            ok = cl[rem] == cl[add]
        else:
            ok = np.ones(len(rem), dtype=bool)
        if ok.any():
            j = np.flatnonzero(ok)[np.argmin(cost[ok])]
            if cost[j] < w:
                mask[rem[j]] = False
                mask[add[j]] = True
                w = int(cost[j])
                continue
        if not constrained:
            return mask, w
        cross = np.flatnonzero(~ok)
        if len(cross) == 0:
            return mask, w
        firsts = cross[np.argsort(cost[cross], kind="stable")[:topk]]
        best = (w, -1, -1, -1, -1)
        for j in firsts:
            e1, f1 = rem[j], add[j]
            mask[e1] = False
            mask[f1] = True
            rem2, add2, cost2 = all_exchanges(n, eu, ev, mask)
            back = (cl[rem2] == cl[f1]) & (cl[add2] == cl[e1])
            if back.any():
                jj = np.flatnonzero(back)[np.argmin(cost2[back])]
                if cost2[jj] < best[0]:
                    best = (int(cost2[jj]), e1, f1, rem2[jj], add2[jj])
            mask[e1] = True
            mask[f1] = False
        if best[1] < 0:
            return mask, w
        w, e1, f1, e2, f2 = best
        mask[e1] = False
        mask[f1] = True
        mask[e2] = False
        mask[f2] = True


def repair(n, eu, ev, cl, h, mask) -> np.ndarray | None:
    """Greedy cheapest exchanges moving the class profile onto ``h``."""
    mask = mask.copy()
    nclass = len(h)
    while True:
        count = np.bincount(cl[mask], minlength=nclass)
        if np.array_equal(count, h):
            return mask
        rem, add, cost = all_exchanges(n, eu, ev, mask)
        over = count > h
        under = count < h
        ok = over[cl[rem]] & under[cl[add]]
        if not ok.any():
            return None
        j = np.flatnonzero(ok)[np.argmin(cost[ok])]
        mask[rem[j]] = False
        mask[add[j]] = True


def kick(n, eu, ev, cl, mask, rng: np.random.Generator, moves: int = 3) -> np.ndarray:
    """Apply ``moves`` random class-preserving exchanges."""
    mask = mask.copy()
    for _ in range(moves):
        rem, add, _ = all_exchanges(n, eu, ev, mask)
        ok = np.flatnonzero(cl[rem] == cl[add])
        if len(ok) == 0:
            break
        j = ok[rng.integers(len(ok))]
        mask[rem[j]] = False
        mask[add[j]] = True
    return mask


def heuristic_search(
    n, eu, ev, cl, h, *, restarts: int = 32, seed: int = 0, kicks: int = 8, topk: int = 32
) -> SearchOutcome:
    """Multi-start local search; best by (Wiener index, sorted edge indices).

    Even restarts descend freely from a random BFS tree, repair the profile
    and descend under the constraint; odd restarts begin from a random
    profile-feasible tree. Each restart then runs ``kicks`` perturbation
    rounds, accepting non-worsening results.
    """
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    cl = np.asarray(cl, dtype=np.int64)
    h = np.asarray(h, dtype=np.int64)
    constrained = len(h) > 1
    rng = np.random.default_rng(seed)
    m = len(eu)
    best: tuple | None = None
    best_mask = None
    for r in range(max(1, restarts)):
        start = None
        if r % 2 == 0 or not constrained:
            start, _ = improve(n, eu, ev, cl, random_bfs_tree(n, eu, ev, rng), constrained=False)
            if constrained:
                start = repair(n, eu, ev, cl, h, start)
        if start is None:
            start = feasible_tree(n, eu, ev, cl, h, order=rng.permutation(m))
            if start is None:
                raise InfeasibleProfile("no spanning tree has the requested class profile")
        mask, w = improve(n, eu, ev, cl, start, constrained, topk)
        for _ in range(kicks):
            cand, cw = improve(n, eu, ev, cl, kick(n, eu, ev, cl, mask, rng), constrained, topk)
            if cw <= w:
                mask, w = cand, cw
        key = _key(w, mask)
        if best is None or key < best:
            best = key
            best_mask = mask
    return SearchOutcome(best_mask, best[0], heuristic=True)


def exact_search(
    n, eu, ev, cl, h, *, use_centroid: bool = False, seed: int = 0, incumbent_restarts: int = 4,
    max_nodes: int = 0,
) -> SearchOutcome:
    """Provably optimal tree, unless ``max_nodes`` runs out (then flagged heuristic)."""
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    cl = np.asarray(cl, dtype=np.int64)
    h = np.asarray(h, dtype=np.int64)
    if len(h) > 1 and feasible_tree(n, eu, ev, cl, h) is None:
        raise InfeasibleProfile("no spanning tree has the requested class profile")
    inc = heuristic_search(n, eu, ev, cl, h, restarts=incumbent_restarts, seed=seed, kicks=2)
    best, found, status, nodes, complete = tree_search(
        n, eu, ev, cl, h, inc.wiener + 1, use_centroid=use_centroid, max_nodes=max_nodes
    )
    if not found:
        return SearchOutcome(inc.mask, inc.wiener, heuristic=True, nodes=int(nodes))
    return SearchOutcome(status == 1, int(best), heuristic=not complete, nodes=int(nodes))

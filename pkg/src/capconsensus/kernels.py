"""Hot numeric kernels.

Each kernel is written once in numba-compatible Python and compiled with
:func:`capconsensus._accel.jit`. Kernels whose interpreted form would be
hopeless (the exchange scan, the Euler-Maruyama integrator, tree distances)
also have a vectorised numpy twin; the public name is bound to whichever path
``CAPCONSENSUS_DISABLE_NUMBA`` selects. The branch-and-bound search has no
vectorised form, so the fallback simply runs it interpreted.

All integer arrays are ``int64``; edges are given as two parallel arrays
``eu``/``ev``.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ._accel import HAS_NUMBA, jit

__all__ = [
    "HAS_NUMBA",
    "tree_distance_matrix",
    "tree_wiener",
    "all_exchanges",
    "tree_search",
    "em_accumulate",
]


# ---------------------------------------------------------------------------
# tree distances
# ---------------------------------------------------------------------------


@jit
def _tree_distance_matrix_loops(n, tu, tv):
    deg = np.zeros(n, np.int64)
    for i in range(tu.shape[0]):
        deg[tu[i]] += 1
        deg[tv[i]] += 1
    width = 1
    for i in range(n):
        if deg[i] > width:
            width = deg[i]
    nb = np.full((n, width), -1, np.int64)
    fill = np.zeros(n, np.int64)
    for i in range(tu.shape[0]):
        a = tu[i]
        b = tv[i]
        nb[a, fill[a]] = b
        fill[a] += 1
        nb[b, fill[b]] = a
        fill[b] += 1
    d = np.full((n, n), -1, np.int64)
    q = np.empty(n, np.int64)
    for s in range(n):
        d[s, s] = 0
        q[0] = s
        head = 0
        tail = 1
        while head < tail:
            x = q[head]
            head += 1
            for j in range(fill[x]):
                y = nb[x, j]
                if d[s, y] < 0:
                    d[s, y] = d[s, x] + 1
                    q[tail] = y
                    tail += 1
    return d


def _tree_distance_matrix_numpy(n, tu, tv):
    adj = csr_matrix((np.ones(len(tu)), (tu, tv)), shape=(n, n))
    d = shortest_path(adj, directed=False, unweighted=True)
    d[np.isinf(d)] = -1
    return d.astype(np.int64)


@jit
def _tree_wiener_loops(n, tu, tv):
    d = _tree_distance_matrix_loops(n, tu, tv)
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] < 0:
                return -1
            total += d[i, j]
    return total


def _tree_wiener_numpy(n, tu, tv):
    d = _tree_distance_matrix_numpy(n, tu, tv)
    if (d < 0).any():
        return -1
    return int(np.triu(d, 1).sum())


# ---------------------------------------------------------------------------
# edge-exchange neighbourhood
# ---------------------------------------------------------------------------


@jit
def _all_exchanges_loops(n, eu, ev, intree):
    """Wiener index after every valid single exchange.

    Removing tree edge ``e`` splits the tree into sides A and B; adding a
    non-tree edge ``f = (x in A, y in B)`` yields
    ``W(A) + W(B) + |B| D_A(x) + |A| D_B(y) + |A||B|``.
    Rows are emitted in (removed, added) index order.
    """
    m = eu.shape[0]
    k = 0
    for i in range(m):
        if intree[i]:
            k += 1
    tu = np.empty(k, np.int64)
    tv = np.empty(k, np.int64)
    tidx = np.empty(k, np.int64)
    k = 0
    for i in range(m):
        if intree[i]:
            tu[k] = eu[i]
            tv[k] = ev[i]
            tidx[k] = i
            k += 1
    d = _tree_distance_matrix_loops(n, tu, tv)
    cap = k * (m - k) + 1
    rem = np.empty(cap, np.int64)
    add = np.empty(cap, np.int64)
    cost = np.empty(cap, np.int64)
    side = np.zeros(n, np.bool_)
    dsum = np.zeros(n, np.int64)
    out = 0
    for ii in range(k):
        e = tidx[ii]
        a = eu[e]
        b = ev[e]
        na = 0
        for x in range(n):
            side[x] = d[a, x] < d[b, x]
            if side[x]:
                na += 1
        nb = n - na
        wa = 0
        wb = 0
        for x in range(n):
            s = 0
            for y in range(n):
                if side[x] == side[y]:
                    s += d[x, y]
            dsum[x] = s
            if side[x]:
                wa += s
            else:
                wb += s
        base = wa // 2 + wb // 2 + na * nb
        for f in range(m):
            if intree[f]:
                continue
            u = eu[f]
            v = ev[f]
            if side[u] == side[v]:
                continue
            if side[u]:
                c = base + nb * dsum[u] + na * dsum[v]
            else:
                c = base + nb * dsum[v] + na * dsum[u]
            rem[out] = e
            add[out] = f
            cost[out] = c
            out += 1
    return rem[:out], add[:out], cost[:out]


def _all_exchanges_numpy(n, eu, ev, intree):
    intree = np.asarray(intree, dtype=bool)
    tidx = np.flatnonzero(intree)
    d = _tree_distance_matrix_numpy(n, eu[tidx], ev[tidx])
    off = np.flatnonzero(~intree)
    fu, fv = eu[off], ev[off]
    rems, adds, costs = [], [], []
    for e in tidx:
        side = d[eu[e]] < d[ev[e]]
        na = int(side.sum())
        nb = n - na
        same = side[:, None] == side[None, :]
        dsum = (d * same).sum(axis=1)
        base = int(dsum[side].sum()) // 2 + int(dsum[~side].sum()) // 2 + na * nb
        cross = side[fu] != side[fv]
        if not cross.any():
            continue
        u, v = fu[cross], fv[cross]
        x = np.where(side[u], u, v)
        y = np.where(side[u], v, u)
        rems.append(np.full(len(u), e, np.int64))
        adds.append(off[cross])
        costs.append(base + nb * dsum[x] + na * dsum[y])
    if not rems:
        z = np.zeros(0, np.int64)
        return z, z.copy(), z.copy()
    return (
        np.concatenate(rems).astype(np.int64),
        np.concatenate(adds).astype(np.int64),
        np.concatenate(costs).astype(np.int64),
    )


# ---------------------------------------------------------------------------
# exact minimum-average-distance search
# ---------------------------------------------------------------------------


@jit
def _tree_search(n, eu, ev, cl, h, ub, use_centroid, max_nodes):
    """Branch and bound for the minimum-Wiener spanning tree with class counts.

    The tree is grown from node 0: each branching step decides one undecided
    edge joining the current subtree ``C`` to an outside vertex (include
    first, then exclude). Pruning uses

    * class budgets: a class may not exceed ``h`` and must still be able to
      reach it from its remaining usable edges;
    * the lower bound ``W(C) + sum_u min_a [|C| rho(u, a) + D_C(a)] +
      sum_{u<v outside} min(d_R(u, v), rho_u + rho_v) + excess``, where an
      outside vertex ``u`` must enter ``C`` through one attachment vertex ``a``
      reached by a path through outside vertices only (length ``rho``), and at
      most ``r - 1`` outside pairs can end up adjacent;
    * optionally, centroid symmetry: on a vertex-transitive graph whose
      rotations preserve classes, some optimal tree has its centroid at node
      0, so any root branch larger than ``n // 2`` is cut.

    Returns ``(best, found, status, nodes, complete)``. ``status[i] == 1``
    marks tree edges of the best tree found with Wiener index ``< ub``.
    """
    m = eu.shape[0]
    nclass = h.shape[0]
    half = n // 2
    big = 1 << 40

    deg = np.zeros(n, np.int64)
    for i in range(m):
        deg[eu[i]] += 1
        deg[ev[i]] += 1
    width = 1
    for i in range(n):
        if deg[i] > width:
            width = deg[i]
    inc = np.full((n, width), -1, np.int64)
    fill = np.zeros(n, np.int64)
    for i in range(m):
        a = eu[i]
        b = ev[i]
        inc[a, fill[a]] = i
        fill[a] += 1
        inc[b, fill[b]] = i
        fill[b] += 1

    status = np.zeros(m, np.int64)
    in_c = np.zeros(n, np.bool_)
    in_c[0] = True
    csize = 1
    dist_c = np.zeros((n, n), np.int64)
    dsum_c = np.zeros(n, np.int64)
    wiener_c = 0
    order = np.zeros(n, np.int64)
    branch = np.zeros(n, np.int64)
    bsize = np.zeros(n, np.int64)
    count = np.zeros(nclass, np.int64)

    stack_edge = np.zeros(m + 1, np.int64)
    stack_phase = np.zeros(m + 1, np.int64)
    stack_vertex = np.zeros(m + 1, np.int64)
    sp = 0

    best = ub
    best_status = np.zeros(m, np.int64)
    found = False
    nodes = 0
    complete = True

    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    rnb = np.empty((n, width), np.int64)
    rdeg = np.zeros(n, np.int64)
    attach = np.empty(n, np.int64)
    val = np.empty(n, np.int64)
    rho = np.empty(n, np.int64)
    dist_r = np.empty((n, n), np.int64)
    avail = np.zeros(nclass, np.int64)

    evaluate = True
    while True:
        if evaluate:
            nodes += 1
            if max_nodes > 0 and nodes > max_nodes:
                complete = False
                break
            prune = False
            if use_centroid:
                for v in range(n):
                    if bsize[v] > half:
                        prune = True
                        break
            if not prune and csize == n:
                if wiener_c < best:
                    best = wiener_c
                    best_status[:] = status
                    found = True
                prune = True
            if not prune:
                for c in range(nclass):
                    avail[c] = 0
                for v in range(n):
                    rdeg[v] = 0
                    attach[v] = big
                pairs_rr = 0
                for i in range(m):
                    if status[i] != 0:
                        continue
                    a = eu[i]
                    b = ev[i]
                    if in_c[a] and in_c[b]:
                        continue
                    c = cl[i]
                    if count[c] >= h[c]:
                        continue
                    avail[c] += 1
                    if in_c[a]:
                        t = csize + dsum_c[a]
                        if t < attach[b]:
                            attach[b] = t
                    elif in_c[b]:
                        t = csize + dsum_c[b]
                        if t < attach[a]:
                            attach[a] = t
                    else:
                        rnb[a, rdeg[a]] = b
                        rdeg[a] += 1
                        rnb[b, rdeg[b]] = a
                        rdeg[b] += 1
                        pairs_rr += 1
                for c in range(nclass):
                    if count[c] + avail[c] < h[c]:
                        prune = True
                if not prune:
                    r = n - csize
                    lb = wiener_c
                    for s in range(n):
                        if in_c[s]:
                            continue
                        for t in range(n):
                            dist[t] = -1
                        dist[s] = 0
                        queue[0] = s
                        head = 0
                        tail = 1
                        while head < tail:
                            x = queue[head]
                            head += 1
                            for j in range(rdeg[x]):
                                y = rnb[x, j]
                                if dist[y] < 0:
                                    dist[y] = dist[x] + 1
                                    queue[tail] = y
                                    tail += 1
                        best_val = big
                        best_rho = big
                        for j in range(tail):
                            w = queue[j]
                            if attach[w] < big:
                                t = csize * dist[w] + attach[w]
                                if t < best_val:
                                    best_val = t
                                if dist[w] + 1 < best_rho:
                                    best_rho = dist[w] + 1
                        if best_val >= big:
                            prune = True
                            break
                        val[s] = best_val
                        rho[s] = best_rho
                        for t in range(n):
                            dist_r[s, t] = dist[t]
                    if not prune:
                        for s in range(n):
                            if in_c[s]:
                                continue
                            lb += val[s]
                            for t in range(s + 1, n):
                                if in_c[t]:
                                    continue
                                dd = rho[s] + rho[t]
                                if 0 <= dist_r[s, t] < dd:
                                    dd = dist_r[s, t]
                                lb += dd
                        if r >= 1 and pairs_rr > r - 1:
                            lb += pairs_rr - (r - 1)
                        if lb >= best:
                            prune = True
            if not prune:
                chosen = -1
                for ii in range(csize):
                    x = order[ii]
                    for j in range(fill[x]):
                        i = inc[x, j]
                        if status[i] != 0:
                            continue
                        if in_c[eu[i]] and in_c[ev[i]]:
                            continue
                        if count[cl[i]] >= h[cl[i]]:
                            continue
                        chosen = i
                        break
                    if chosen >= 0:
                        break
                if chosen >= 0:
                    a = eu[chosen]
                    b = ev[chosen]
                    x = a if in_c[a] else b
                    w = b if in_c[a] else a
                    dsum_c[w] = dsum_c[x] + csize
                    for ii in range(csize):
                        y = order[ii]
                        dist_c[w, y] = dist_c[x, y] + 1
                        dist_c[y, w] = dist_c[w, y]
                        dsum_c[y] += dist_c[w, y]
                    wiener_c += dsum_c[w]
                    in_c[w] = True
                    order[csize] = w
                    csize += 1
                    br = w if x == 0 else branch[x]
                    branch[w] = br
                    bsize[br] += 1
                    status[chosen] = 1
                    count[cl[chosen]] += 1
                    stack_edge[sp] = chosen
                    stack_phase[sp] = 0
                    stack_vertex[sp] = w
                    sp += 1
                    continue
            evaluate = False
        if sp == 0:
            break
        top = sp - 1
        e = stack_edge[top]
        if stack_phase[top] == 0:
            w = stack_vertex[top]
            csize -= 1
            in_c[w] = False
            wiener_c -= dsum_c[w]
            for ii in range(csize):
                y = order[ii]
                dsum_c[y] -= dist_c[w, y]
            bsize[branch[w]] -= 1
            status[e] = -1
            count[cl[e]] -= 1
            stack_phase[top] = 1
            evaluate = True
        else:
            status[e] = 0
            sp -= 1
    return best, found, best_status, nodes, complete


def tree_search(n, eu, ev, cl, h, ub, use_centroid=False, max_nodes=0):
    return _tree_search(
        np.int64(n),
        np.ascontiguousarray(eu, dtype=np.int64),
        np.ascontiguousarray(ev, dtype=np.int64),
        np.ascontiguousarray(cl, dtype=np.int64),
        np.ascontiguousarray(h, dtype=np.int64),
        np.int64(ub),
        bool(use_centroid),
        np.int64(max_nodes),
    )


# ---------------------------------------------------------------------------
# Euler-Maruyama for dx = -L x dt + dW
# ---------------------------------------------------------------------------


@jit
def _em_accumulate_loops(lap, x, noise, dt, record_from, acc):
    """Advance every trial through one noise block.

    ``x`` has shape (trials, n) and is updated in place; ``noise`` has shape
    (steps, trials, n) and holds standard normals. For each step index
    ``>= record_from`` the population variance of each trial is added to
    ``acc[trial]``.
    """
    steps = noise.shape[0]
    trials = x.shape[0]
    n = x.shape[1]
    sq = np.sqrt(dt)
    y = np.empty(n)
    for s in range(steps):
        for t in range(trials):
            for i in range(n):
                v = 0.0
                for j in range(n):
                    v += lap[i, j] * x[t, j]
                y[i] = v
            mean = 0.0
            for i in range(n):
                x[t, i] = x[t, i] - dt * y[i] + sq * noise[s, t, i]
                mean += x[t, i]
            if s >= record_from:
                mean /= n
                var = 0.0
                for i in range(n):
                    dv = x[t, i] - mean
                    var += dv * dv
                acc[t] += var / n


def _em_accumulate_numpy(lap, x, noise, dt, record_from, acc):
    sq = np.sqrt(dt)
    lt = lap.T
    for s in range(noise.shape[0]):
        x[:] = x - dt * (x @ lt) + sq * noise[s]
        if s >= record_from:
            acc += x.var(axis=1)


if HAS_NUMBA:
    tree_distance_matrix = _tree_distance_matrix_loops
    tree_wiener = _tree_wiener_loops
    all_exchanges = _all_exchanges_loops
    em_accumulate = _em_accumulate_loops
else:
    tree_distance_matrix = _tree_distance_matrix_numpy
    tree_wiener = _tree_wiener_numpy
    all_exchanges = _all_exchanges_numpy
    em_accumulate = _em_accumulate_numpy

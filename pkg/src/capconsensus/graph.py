"""Capacitated undirected graphs, Laplacian spectra, H*, cuts and tree metrics."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInput
from .kernels import tree_wiener

Edge = tuple[int, int]

# Eigenvalues below ZERO_RTOL * max(1, lambda_max) count as zero.
ZERO_RTOL = 1e-8


def canonical_edge(u: int, v: int) -> Edge:
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


def _canonical_edges(n: int, edges: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    seen: set[Edge] = set()
    for e in edges:
        if len(e) != 2:
            raise InvalidInput(f"edge {e!r} is not a pair")
        u, v = int(e[0]), int(e[1])
        if u == v:
            raise InvalidInput(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidInput(f"edge ({u}, {v}) out of range for n={n}")
        ce = canonical_edge(u, v)
        if ce in seen:
            raise InvalidInput(f"duplicate edge {ce}")
        seen.add(ce)
    return tuple(sorted(seen))


@dataclass(frozen=True)
class CapacitatedGraph:
    """Simple undirected graph on nodes ``0..n-1`` with integer edge capacities.

    Edges are stored canonically (``u < v``, lexicographic order) and
    ``capacity[i]`` belongs to ``edges[i]``. Use :meth:`from_edges` to build one
    from arbitrary input.
    """

    n: int
    edges: tuple[Edge, ...]
    capacity: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidInput("n must be non-negative")
        canon = _canonical_edges(self.n, self.edges)
        if canon != tuple(self.edges):
            raise InvalidInput("edges must be canonical; use CapacitatedGraph.from_edges")
        if len(self.capacity) != len(self.edges):
            raise InvalidInput("capacity must have one entry per edge")
        for c in self.capacity:
            if int(c) != c or c < 0:
                raise InvalidInput(f"capacity {c!r} is not a non-negative integer")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence[int]],
        capacity: int | Sequence[int] | Mapping[Edge, int] = 1,
    ) -> CapacitatedGraph:
        """Build a canonical graph.

        ``capacity`` may be a single integer for every edge, a sequence aligned
        with the *given* edge order, or a mapping keyed by edge (either
        orientation).
        """
        raw = [tuple(int(x) for x in e) for e in edges]
        canon = _canonical_edges(n, raw)
        if isinstance(capacity, Mapping):
            cmap = {canonical_edge(*k): int(v) for k, v in capacity.items()}
            missing = [e for e in canon if e not in cmap]
            if missing:
                raise InvalidInput(f"no capacity for edges {missing}")
            caps = tuple(cmap[e] for e in canon)
        elif isinstance(capacity, (int, np.integer)):
            caps = (int(capacity),) * len(canon)
        else:
            seq = [int(c) for c in capacity]
            if len(seq) != len(raw):
                raise InvalidInput("capacity sequence length differs from edge count")
            cmap = {canonical_edge(*e): c for e, c in zip(raw, seq)}
            caps = tuple(cmap[e] for e in canon)
        return cls(int(n), canon, caps)

    @classmethod
    def complete(cls, n: int, capacity: int = 1) -> CapacitatedGraph:
        return cls.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], capacity)

    @cached_property
    def index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(u, v) in self.index

    def capacity_of(self, u: int, v: int) -> int:
        try:
            return self.capacity[self.index[canonical_edge(u, v)]]
        except KeyError:
            raise InvalidInput(f"({u}, {v}) is not an edge") from None

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.edges:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr[:, 0].copy(), arr[:, 1].copy()

    def with_capacity(self, capacity: int | Sequence[int]) -> CapacitatedGraph:
        if isinstance(capacity, (int, np.integer)):
            return CapacitatedGraph(self.n, self.edges, (int(capacity),) * self.m)
        return CapacitatedGraph(self.n, self.edges, tuple(int(c) for c in capacity))

    def subgraph(self, edges: Iterable[Sequence[int]]) -> CapacitatedGraph:
        """Edge-induced spanning subgraph (all ``n`` nodes kept, capacities copied)."""
        canon = _canonical_edges(self.n, edges)
        for e in canon:
            if e not in self.index:
                raise InvalidInput(f"{e} is not an edge of the base graph")
        return CapacitatedGraph(self.n, canon, tuple(self.capacity[self.index[e]] for e in canon))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "edges": [{"u": u, "v": v, "capacity": c} for (u, v), c in zip(self.edges, self.capacity)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> CapacitatedGraph:
        try:
            n = int(data["n"])
            items = list(data["edges"])
            edges = [(int(d["u"]), int(d["v"])) for d in items]
            caps = [int(d.get("capacity", 1)) for d in items]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed graph JSON: {exc}") from None
        return cls.from_edges(n, edges, caps)


@dataclass(frozen=True)
class Cut:
    """Bipartition ``(U, W)`` of the node set and its cut-set."""

    U: frozenset[int]
    W: frozenset[int]
    cutset: tuple[Edge, ...]
    capacity: int


def make_cut(g: CapacitatedGraph, U: Iterable[int]) -> Cut:
    U = frozenset(int(u) for u in U)
    if not U or len(U) >= g.n or not U <= set(range(g.n)):
        raise InvalidInput("U must be a nonempty proper subset of the nodes")
    W = frozenset(range(g.n)) - U
    cutset = tuple(e for e in g.edges if (e[0] in U) != (e[1] in U))
    cap = sum(g.capacity[g.index[e]] for e in cutset)
    return Cut(U, W, cutset, cap)


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree on nodes ``0..n-1``; ``root`` is bookkeeping only."""

    n: int
    edges: tuple[Edge, ...]
    root: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInput("a spanning tree needs at least one node")
        canon = _canonical_edges(self.n, self.edges)
        object.__setattr__(self, "edges", canon)
        if len(canon) != self.n - 1:
            raise InvalidInput(f"a spanning tree on {self.n} nodes has {self.n - 1} edges, got {len(canon)}")
        if not 0 <= self.root < self.n:
            raise InvalidInput("root out of range")
        if not _connected(self.n, canon):
            raise InvalidInput("edges do not form a spanning tree")

    @cached_property
    def parent(self) -> tuple[int, ...]:
        """Parent of each node when hanging the tree from ``root`` (root maps to -1)."""
        adj = _adjacency(self.n, self.edges)
        par = [-1] * self.n
        seen = [False] * self.n
        seen[self.root] = True
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    par[y] = x
                    queue.append(y)
        return tuple(par)

    @cached_property
    def wiener(self) -> int:
        """Sum of path lengths over unordered node pairs."""
        if self.n < 2:
            return 0
        arr = np.asarray(self.edges, dtype=np.int64)
        return int(tree_wiener(self.n, arr[:, 0].copy(), arr[:, 1].copy()))

    def as_graph(self, capacity: int = 1) -> CapacitatedGraph:
        return CapacitatedGraph(self.n, self.edges, (capacity,) * len(self.edges))


@dataclass(frozen=True)
class Spectrum:
    """Laplacian eigenvalues in ascending order."""

    eigenvalues: np.ndarray = field(repr=False)

    @property
    def zero_threshold(self) -> float:
        top = float(self.eigenvalues[-1]) if len(self.eigenvalues) else 0.0
        return ZERO_RTOL * max(1.0, top)

    @property
    def zero_count(self) -> int:
        return int(np.sum(self.eigenvalues < self.zero_threshold))

    def __iter__(self):
        return iter(self.eigenvalues.tolist())

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _adjacency(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _connected(n: int, edges: Iterable[Edge]) -> bool:
    if n <= 1:
        return True
    adj = _adjacency(n, edges)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(y)
    return count == n


def laplacian(g: CapacitatedGraph | SpanningTree) -> np.ndarray:
    """Unweighted Laplacian ``D - A`` (capacities play no role)."""
    L = np.zeros((g.n, g.n))
    for u, v in g.edges:
        L[u, v] = L[v, u] = -1.0
        L[u, u] += 1.0
        L[v, v] += 1.0
    return L


def spectrum(g: CapacitatedGraph | SpanningTree) -> Spectrum:
    if g.n == 0:
        return Spectrum(np.zeros(0))
    return Spectrum(np.linalg.eigvalsh(laplacian(g)))


def hstar_from_eigenvalues(eigs: np.ndarray, n: int) -> float:
    """(1/2n) * sum of reciprocal nonzero eigenvalues; inf if disconnected."""
    spec = Spectrum(np.sort(np.asarray(eigs, dtype=float)))
    if spec.zero_count > 1:
        return math.inf
    return float(np.sum(1.0 / spec.eigenvalues[1:]) / (2 * n))


def hstar(g: CapacitatedGraph | SpanningTree) -> float:
    """Structural robustness H* of a graph; ``math.inf`` when it is disconnected."""
    if g.n < 2:
        raise InvalidInput("H* needs at least two nodes")
    return hstar_from_eigenvalues(spectrum(g).eigenvalues, g.n)


def is_connected(g: CapacitatedGraph | SpanningTree) -> bool:
    return _connected(g.n, g.edges)


def connected_components(g: CapacitatedGraph) -> list[list[int]]:
    adj = _adjacency(g.n, g.edges)
    comp = [-1] * g.n
    out: list[list[int]] = []
    for s in range(g.n):
        if comp[s] >= 0:
            continue
        comp[s] = len(out)
        members = [s]
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if comp[y] < 0:
                    comp[y] = comp[s]
                    members.append(y)
                    stack.append(y)
        out.append(sorted(members))
    return out


def average_distance(t: SpanningTree) -> float:
    """Mean path length over unordered node pairs."""
    if not isinstance(t, SpanningTree):
        raise InvalidInput("average_distance expects a SpanningTree")
    if t.n < 2:
        raise InvalidInput("average distance needs at least two nodes")
    return float(Fraction(t.wiener, t.n * (t.n - 1) // 2))


def tree_hstar(t: SpanningTree) -> float:
    """H* of a tree via its average distance: delta * (n-1) / (4n) = W / (2n^2)."""
    if t.n < 2:
        raise InvalidInput("H* needs at least two nodes")
    return t.wiener / (2.0 * t.n * t.n)


def total_capacity(g: CapacitatedGraph) -> int:
    return int(sum(g.capacity))


def min_cut(g: CapacitatedGraph) -> Cut:
    """Global minimum capacity cut (Stoer-Wagner on the capacity matrix)."""
    n = g.n
    if n < 2:
        raise InvalidInput("a cut needs at least two nodes")
    w = np.zeros((n, n), dtype=np.int64)
    for (u, v), c in zip(g.edges, g.capacity):
        w[u, v] += c
        w[v, u] += c
    groups: list[list[int]] = [[i] for i in range(n)]
    active = list(range(n))
    best_val: int | None = None
    best_side: list[int] = []
    while len(active) > 1:
        # maximum-adjacency ordering
        used = {active[0]}
        order = [active[0]]
        conn = {v: int(w[active[0], v]) for v in active[1:]}
        while conn:
            nxt = max(conn, key=lambda v: (conn[v], -v))
            order.append(nxt)
            used.add(nxt)
            del conn[nxt]
            for v in conn:
                conn[v] += int(w[nxt, v])
        s, t = order[-2], order[-1]
        cut_val = int(sum(w[t, v] for v in active if v != t))
        if best_val is None or cut_val < best_val:
            best_val = cut_val
            best_side = list(groups[t])
        # merge t into s
        groups[s].extend(groups[t])
        for v in active:
            w[s, v] += w[t, v]
            w[v, s] = w[s, v]
        w[s, s] = 0
        active.remove(t)
    return make_cut(g, best_side)


def min_cut_capacity(g: CapacitatedGraph) -> int:
    return min_cut(g).capacity

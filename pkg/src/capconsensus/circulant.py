"""Circulant graphs, edge classes, (class-constrained) MAD trees and Algorithm 1.

Class indices are 0-based throughout: class ``i`` is the generator
``spec.generators[i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInput, InvalidProfile, NotConnected, SelfInverseCapacityViolation
from .graph import CapacitatedGraph, Edge, SpanningTree, average_distance, canonical_edge, tree_hstar
from .solution import DEFAULT_MAX_K, DesignSolution
from .treesearch import exact_search, heuristic_search

DEFAULT_EXACT_THRESHOLD = 16
DEFAULT_RESTARTS = 32


@dataclass(frozen=True)
class CirculantSpec:
    """Circulant graph ``(Z_n, {+-s})`` with an optional class profile ``h`` and replication ``alpha``."""

    n: int
    generators: tuple[int, ...]
    h: tuple[int, ...] | None = None
    alpha: int = 1

    def __post_init__(self) -> None:
        n = int(self.n)
        if n < 3:
            raise InvalidInput("a circulant graph needs n >= 3")
        gens = tuple(int(s) for s in self.generators)
        if not gens:
            raise InvalidInput("at least one generator is required")
        if list(gens) != sorted(set(gens)):
            raise InvalidInput("generators must be strictly increasing")
        if gens[0] < 1 or gens[-1] > n // 2:
            raise InvalidInput(f"generators must lie in [1, {n // 2}]")
        h = None
        if self.h is not None:
            h = tuple(int(x) for x in self.h)
            if len(h) != len(gens):
                raise InvalidProfile("h needs one entry per generator")
            if any(x < 0 for x in h):
                raise InvalidProfile("h entries must be non-negative")
        if int(self.alpha) < 1:
            raise InvalidInput("alpha must be at least 1")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "alpha", int(self.alpha))

    @property
    def m(self) -> int:
        return len(self.generators)

    @property
    def k(self) -> int:
        return self.alpha * self.n

    @property
    def self_inverse(self) -> tuple[bool, ...]:
        return tuple(2 * s == self.n for s in self.generators)

    def class_sizes(self) -> tuple[int, ...]:
        return tuple(self.n // 2 if si else self.n for si in self.self_inverse)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "generators": list(self.generators),
            "h": None if self.h is None else list(self.h),
            "alpha": self.alpha,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> CirculantSpec:
        try:
            h = data.get("h")
            return cls(int(data["n"]), tuple(data["generators"]), None if h is None else tuple(h), int(data.get("alpha", 1)))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed circulant spec JSON: {exc}") from None


@dataclass(frozen=True)
class ClassTag:
    index: int
    generator: int


def check_connected(spec: CirculantSpec) -> None:
    if reduce(math.gcd, spec.generators, spec.n) != 1:
        raise NotConnected(f"generators {list(spec.generators)} do not generate Z_{spec.n}")


def check_profile(spec: CirculantSpec) -> None:
    """Raise InvalidProfile unless ``h`` can be the class profile of a cMAD tree."""
    h = spec.h
    if h is None:
        raise InvalidProfile("no class profile h given")
    if sum(h) != spec.n - 1:
        raise InvalidProfile(f"class profile sums to {sum(h)}, expected n - 1 = {spec.n - 1}")
    if not any(x >= 1 and math.gcd(s, spec.n) == 1 for s, x in zip(spec.generators, h)):
        raise InvalidProfile("some class with h >= 1 must have a generator coprime to n")
    for s, x, size in zip(spec.generators, h, spec.class_sizes()):
        if x > size:
            raise InvalidProfile(f"class of generator {s} has only {size} edges, h asks for {x}")


def circulant_edges(n: int, generators: Sequence[int]) -> tuple[tuple[Edge, ...], tuple[int, ...]]:
    """Canonical edges of ``(Z_n, {+-s})`` and their class indices."""
    cls_of: dict[Edge, int] = {}
    for c, s in enumerate(generators):
        for u in range(n):
            cls_of.setdefault(canonical_edge(u, (u + s) % n), c)
    edges = tuple(sorted(cls_of))
    return edges, tuple(cls_of[e] for e in edges)


@dataclass(frozen=True)
class CirculantGraph:
    spec: CirculantSpec
    graph: CapacitatedGraph
    classes: tuple[int, ...]

    def edges_of_class(self, c: int) -> tuple[Edge, ...]:
        return tuple(e for e, x in zip(self.graph.edges, self.classes) if x == c)

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        eu, ev = self.graph.edge_arrays()
        return eu, ev, np.asarray(self.classes, dtype=np.int64)


def build_circulant(spec: CirculantSpec, capacity_override: Sequence[int] | None = None) -> CirculantGraph:
    """Circulant graph with class-``l`` capacities ``h_l * alpha``.

    ``capacity_override`` replaces the per-class capacities. Without a
    profile ``h`` (and no override) every edge gets capacity ``alpha``.
    """
    check_connected(spec)
    if spec.h is not None:
        check_profile(spec)
    edges, classes = circulant_edges(spec.n, spec.generators)
    if capacity_override is not None:
        per_class = [int(c) for c in capacity_override]
        if len(per_class) != spec.m or any(c < 0 for c in per_class):
            raise InvalidInput("capacity override needs one non-negative value per class")
    elif spec.h is not None:
        per_class = [x * spec.alpha for x in spec.h]
    else:
        per_class = [spec.alpha] * spec.m
    caps = tuple(per_class[c] for c in classes)
    return CirculantGraph(spec, CapacitatedGraph(spec.n, edges, caps), classes)


def edge_class(spec: CirculantSpec, u: int, v: int) -> ClassTag:
    n = spec.n
    if not (0 <= u < n and 0 <= v < n) or u == v:
        raise InvalidInput(f"({u}, {v}) is not an edge of the circulant graph")
    d = (v - u) % n
    for c, s in enumerate(spec.generators):
        if d == s or d == n - s:
            return ClassTag(c, s)
    raise InvalidInput(f"({u}, {v}) is not an edge of the circulant graph")


def rotate_tree(t: SpanningTree, delta: int, n: int | None = None) -> SpanningTree:
    """Image of ``t`` under ``v -> v + delta (mod n)``."""
    n = t.n if n is None else int(n)
    if n != t.n:
        raise InvalidInput("tree size differs from n")
    return SpanningTree(n, tuple(canonical_edge((u + delta) % n, (v + delta) % n) for u, v in t.edges), (t.root + delta) % n)


def class_counts(t: SpanningTree, spec: CirculantSpec) -> tuple[int, ...]:
    out = [0] * spec.m
    for u, v in t.edges:
        out[edge_class(spec, u, v).index] += 1
    return tuple(out)


@dataclass(frozen=True)
class TreeResult:
    """Outcome of a MAD/cMAD search. ``heuristic`` is False only for certified optima."""

    tree: SpanningTree
    wiener: int
    heuristic: bool
    class_counts: tuple[int, ...]
    nodes: int = 0

    @property
    def average_distance(self) -> float:
        return average_distance(self.tree)

    @property
    def hstar(self) -> float:
        return tree_hstar(self.tree)


def _search(cg: CirculantGraph, h, exact_threshold, restarts, seed, max_nodes) -> TreeResult:
    spec = cg.spec
    eu, ev, cl = cg.arrays
    if h is None:
        cl = np.zeros_like(cl)
        h = (spec.n - 1,)
    h = np.asarray(h, dtype=np.int64)
    if spec.n <= exact_threshold:
        out = exact_search(spec.n, eu, ev, cl, h, use_centroid=True, seed=seed, max_nodes=max_nodes)
    else:
        out = heuristic_search(spec.n, eu, ev, cl, h, restarts=restarts, seed=seed)
    idx = np.flatnonzero(out.mask)
    tree = SpanningTree(spec.n, tuple(cg.graph.edges[i] for i in idx))
    counts = tuple(int(x) for x in np.bincount(np.asarray(cg.classes)[idx], minlength=spec.m))
    return TreeResult(tree, out.wiener, out.heuristic, counts, out.nodes)


def find_cmad(
    spec: CirculantSpec,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_nodes: int = 0,
) -> TreeResult:
    """Minimum average-distance spanning tree with exactly ``h[c]`` edges of class ``c``.

    For ``n <= exact_threshold`` the result is certified optimal by branch and
    bound (``max_nodes > 0`` caps the search; an uncertified result is flagged
    heuristic). Larger instances use seeded multi-start local search.
    """
    check_profile(spec)
    cg = build_circulant(spec)
    return _search(cg, spec.h, exact_threshold, restarts, seed, max_nodes)


def find_mad(
    n: int,
    generators: Sequence[int],
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_nodes: int = 0,
) -> TreeResult:
    """Unconstrained minimum average-distance spanning tree of ``(Z_n, S)``."""
    cg = build_circulant(CirculantSpec(n, tuple(generators)))
    return _search(cg, None, exact_threshold, restarts, seed, max_nodes)


def algorithm1(
    spec: CirculantSpec,
    capacity_override: Sequence[int] | None = None,
    *,
    cmad: TreeResult | None = None,
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_k: int = DEFAULT_MAX_K,
) -> DesignSolution:
    """Every rotation of a cMAD tree, each repeated ``alpha`` times (``k = alpha * n``).

    Subgraphs ``j*alpha .. (j+1)*alpha - 1`` are the tree rotated by ``j``.
    A self-inverse class (``2s = n``) is used twice as often as its default
    capacity allows; that raises SelfInverseCapacityViolation unless
    ``capacity_override`` provides enough room.
    """
    if spec.k > max_k:
        raise InvalidInput(f"k = {spec.k} exceeds the configured limit {max_k}")
    cg = build_circulant(spec, capacity_override)
    if cmad is None:
        cmad = find_cmad(spec, exact_threshold=exact_threshold, restarts=restarts, seed=seed)
    subgraphs = []
    for j in range(spec.n):
        rotated = rotate_tree(cmad.tree, j, spec.n).edges
        subgraphs.extend([rotated] * spec.alpha)
    sol = DesignSolution.build(
        cg.graph,
        subgraphs,
        {
            "method": "algorithm1",
            "heuristic": cmad.heuristic,
            "cmad_wiener": cmad.wiener,
            "cmad_hstar": cmad.hstar,
            "class_counts": list(cmad.class_counts),
        },
    )
    usage = sol.usage()
    over = sorted({cg.classes[i] for i in np.flatnonzero(usage > np.asarray(cg.graph.capacity))})
    if over:
        detail = ", ".join(
            f"generator {spec.generators[c]}: used {int(usage[cg.classes.index(c)])} > capacity "
            f"{cg.graph.capacity[cg.classes.index(c)]}"
            for c in over
        )
        if any(spec.self_inverse[c] for c in over):
            raise SelfInverseCapacityViolation(f"rotated trees exceed edge capacity ({detail})")
        raise InvalidInput(f"capacity override too small ({detail})")
    return sol

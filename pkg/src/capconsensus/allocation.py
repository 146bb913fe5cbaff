"""Greedy allocation of spare edge capacity to dimensions.

Ground set: edge-dimension pairs ``(e, l)`` not already used by the initial
solution. A set of pairs is independent when it takes at most ``c~_e`` pairs
from edge ``e`` (partition matroid). The objective
``-sum_l tr(L_l^+) = -2n sum_l H*(G_l)`` is monotone and submodular in the
pair set, so greedy achieves half the optimal gain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import Blocked, InvalidInput, InvalidState, TooLarge
from .graph import CapacitatedGraph, Edge, Spectrum, _canonical_edges, _connected, canonical_edge, hstar_from_eigenvalues

GAIN_TIE_TOL = 1e-12


class EdgeDimPair(NamedTuple):
    edge: Edge
    dim: int


@dataclass(frozen=True)
class AllocationStep:
    pair: EdgeDimPair
    gain: float


def _pair(p) -> EdgeDimPair:
    edge, dim = p
    return EdgeDimPair(canonical_edge(*edge), int(dim))


@dataclass(frozen=True)
class AllocationState:
    """Initial subgraphs plus the pairs added so far (in order) with their gains."""

    graph: CapacitatedGraph
    k: int
    initial: tuple[tuple[Edge, ...], ...]
    steps: tuple[AllocationStep, ...] = field(default=())

    @cached_property
    def chosen(self) -> tuple[EdgeDimPair, ...]:
        return tuple(s.pair for s in self.steps)

    @cached_property
    def dim_edges(self) -> tuple[frozenset[Edge], ...]:
        sets = [set(sub) for sub in self.initial]
        for e, d in self.chosen:
            sets[d].add(e)
        return tuple(frozenset(s) for s in sets)

    @cached_property
    def initial_remaining(self) -> np.ndarray:
        rem = np.asarray(self.graph.capacity, dtype=np.int64).copy()
        for sub in self.initial:
            for e in sub:
                rem[self.graph.index[e]] -= 1
        return rem

    @cached_property
    def remaining(self) -> np.ndarray:
        rem = self.initial_remaining.copy()
        for e, _ in self.chosen:
            rem[self.graph.index[e]] -= 1
        return rem

    def laplacian(self, dim: int) -> np.ndarray:
        n = self.graph.n
        L = np.zeros((n, n))
        for u, v in self.dim_edges[dim]:
            L[u, v] = L[v, u] = -1.0
            L[u, u] += 1.0
            L[v, v] += 1.0
        return L

    @cached_property
    def spectra(self) -> tuple[Spectrum, ...]:
        return tuple(Spectrum(np.linalg.eigvalsh(self.laplacian(d))) for d in range(self.k))

    @cached_property
    def pinvs(self) -> tuple[np.ndarray, ...]:
        """Laplacian pseudoinverses via ``(L + J/n)^-1 - J/n`` (valid for connected graphs)."""
        n = self.graph.n
        j = np.full((n, n), 1.0 / n)
        return tuple(np.linalg.inv(self.laplacian(d) + j) - j for d in range(self.k))

    def contains(self, pair) -> bool:
        e, d = _pair(pair)
        return 0 <= d < self.k and e in self.dim_edges[d]

    def with_pair(self, pair, gain: float) -> AllocationState:
        return AllocationState(self.graph, self.k, self.initial, self.steps + (AllocationStep(_pair(pair), float(gain)),))

    def candidates(self) -> list[EdgeDimPair]:
        """Legal pairs in canonical (edge, dim) order."""
        out = []
        for i, e in enumerate(self.graph.edges):
            if self.remaining[i] <= 0:
                continue
            for d in range(self.k):
                if e not in self.dim_edges[d]:
                    out.append(EdgeDimPair(e, d))
        return out

    def dimension_costs(self) -> tuple[float, ...]:
        return tuple(hstar_from_eigenvalues(s.eigenvalues, self.graph.n) for s in self.spectra)

    def to_report(self) -> dict:
        init = AllocationState(self.graph, self.k, self.initial)
        return {
            "k": self.k,
            "initial_cost": math.fsum(init.dimension_costs()),
            "final_cost": math.fsum(self.dimension_costs()),
            "initial_objective": objective(init),
            "final_objective": objective(self),
            "steps": [{"edge": list(s.pair.edge), "dim": s.pair.dim, "gain": s.gain} for s in self.steps],
            "remaining": [{"edge": list(e), "remaining": int(r)} for e, r in zip(self.graph.edges, self.remaining)],
        }


def make_state(g: CapacitatedGraph, k: int, initial: Sequence[Iterable[Sequence[int]]]) -> AllocationState:
    """Validate an initial solution and wrap it as an empty allocation."""
    if k < 1:
        raise InvalidInput("k must be at least 1")
    if g.n < 2:
        raise InvalidInput("allocation needs at least two nodes")
    subs = [_canonical_edges(g.n, s) for s in initial]
    if len(subs) != k:
        raise InvalidInput(f"initial solution has {len(subs)} subgraphs, expected k = {k}")
    for ell, sub in enumerate(subs):
        for e in sub:
            if e not in g.index:
                raise InvalidInput(f"subgraph {ell} uses {e}, which is not a base-graph edge")
        if not _connected(g.n, sub):
            raise InvalidInput(f"initial subgraph {ell} is disconnected")
    state = AllocationState(g, k, tuple(subs))
    if (state.initial_remaining < 0).any():
        raise InvalidInput("initial solution exceeds edge capacity")
    return state


def objective(state: AllocationState) -> float:
    """``-sum_l sum_{i>=2} 1/lambda_i(L_l)``."""
    total = 0.0
    for s in state.spectra:
        if s.zero_count > 1:
            raise InvalidState("a dimension graph is disconnected")
        total += float(np.sum(1.0 / s.eigenvalues[1:]))
    return -total


def _check_pair(state: AllocationState, pair) -> EdgeDimPair:
    p = _pair(pair)
    if p.edge not in state.graph.index:
        raise InvalidInput(f"{p.edge} is not a base-graph edge")
    if not 0 <= p.dim < state.k:
        raise InvalidInput(f"dimension {p.dim} out of range")
    if p.edge in state.dim_edges[p.dim]:
        raise InvalidInput(f"pair {p} is already present")
    if state.remaining[state.graph.index[p.edge]] < 1:
        raise Blocked(f"edge {p.edge} has no remaining capacity")
    return p


def marginal_gain(state: AllocationState, pair, method: str = "eig") -> float:
    """Objective increase from adding ``pair``.

    ``method="eig"`` re-diagonalises the affected Laplacian. ``"pinv"`` uses
    the rank-one identity ``tr(L+^) - tr((L + bb^T)^+) = |L^+ b|^2 / (1 + b^T L^+ b)``.
    """
    p = _check_pair(state, pair)
    u, v = p.edge
    if method == "eig":
        before = state.spectra[p.dim]
        if before.zero_count > 1:
            raise InvalidState("a dimension graph is disconnected")
        L = state.laplacian(p.dim)
        L[u, v] = L[v, u] = -1.0
        L[u, u] += 1.0
        L[v, v] += 1.0
        after = np.linalg.eigvalsh(L)
        return float(np.sum(1.0 / before.eigenvalues[1:]) - np.sum(1.0 / after[1:]))
    if method == "pinv":
        pinv = state.pinvs[p.dim]
        x = pinv[:, u] - pinv[:, v]
        r = x[u] - x[v]
        return float(x @ x / (1.0 + r))
    raise InvalidInput(f"unknown gain method {method!r}")


def greedy_allocate(
    g: CapacitatedGraph, k: int, initial: Sequence[Iterable[Sequence[int]]], method: str = "eig"
) -> AllocationState:
    """Add the best legal pair until none is left; ties go to the smallest (edge, dim)."""
    state = make_state(g, k, initial)
    objective(state)
    while True:
        best_pair = None
        best_gain = -math.inf
        for p in state.candidates():
            gain = marginal_gain(state, p, method)
            if gain > best_gain + GAIN_TIE_TOL:
                best_pair, best_gain = p, gain
        if best_pair is None:
            return state
        state = state.with_pair(best_pair, best_gain)


def exhaustive_allocate(
    g: CapacitatedGraph, k: int, initial: Sequence[Iterable[Sequence[int]]], max_candidates: int = 20
) -> AllocationState:
    """Optimal allocation by enumeration.

    The objective strictly increases with every added pair, so an optimum is a
    basis of the partition matroid: per edge, exactly ``min(c~_e, free dims)``
    pairs. Only bases are enumerated; steps carry no gains (0.0).
    """
    state = make_state(g, k, initial)
    cands = state.candidates()
    if len(cands) > max_candidates:
        raise TooLarge(f"{len(cands)} candidate pairs exceed the limit of {max_candidates}")
    blocks = []
    for i, e in enumerate(g.edges):
        dims = [p.dim for p in cands if p.edge == e]
        if not dims:
            continue
        take = min(int(state.initial_remaining[i]), len(dims))
        blocks.append([tuple(EdgeDimPair(e, d) for d in combo) for combo in itertools.combinations(dims, take)])
    best_val = -math.inf
    best_state = state
    for choice in itertools.product(*blocks):
        pairs = [p for block in choice for p in block]
        cand = AllocationState(g, k, state.initial, tuple(AllocationStep(p, 0.0) for p in pairs))
        val = objective(cand)
        if val > best_val + GAIN_TIE_TOL:
            best_val, best_state = val, cand
    return best_state

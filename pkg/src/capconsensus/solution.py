"""Edge-to-dimension assignments and their cost."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInput
from .graph import CapacitatedGraph, Edge, SpanningTree, _canonical_edges, _connected, hstar, tree_hstar

# Keeps summed costs comfortably exact in double precision.
DEFAULT_MAX_K = 64


def subgraph_cost(n: int, edges: Sequence[Edge]) -> float:
    """H* of the spanning subgraph on ``n`` nodes with ``edges``; trees use the Wiener shortcut."""
    if n < 2:
        raise InvalidInput("H* needs at least two nodes")
    if len(edges) == n - 1 and _connected(n, edges):
        return tree_hstar(SpanningTree(n, tuple(edges)))
    return hstar(CapacitatedGraph(n, tuple(edges), (1,) * len(edges)))


@dataclass(frozen=True)
class DesignSolution:
    """Subgraphs ``E_1..E_k`` of ``graph``; ``cost`` is the sum of their H*."""

    graph: CapacitatedGraph
    subgraphs: tuple[tuple[Edge, ...], ...]
    cost: float
    flags: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def build(
        cls,
        graph: CapacitatedGraph,
        subgraphs: Iterable[Iterable[Sequence[int]]],
        flags: Mapping[str, Any] | None = None,
    ) -> DesignSolution:
        subs = tuple(_canonical_edges(graph.n, s) for s in subgraphs)
        cost = math.fsum(subgraph_cost(graph.n, s) for s in subs)
        return cls(graph, subs, cost, dict(flags or {}))

    @property
    def k(self) -> int:
        return len(self.subgraphs)

    @property
    def n(self) -> int:
        return self.graph.n

    def usage(self) -> np.ndarray:
        """Number of subgraphs using each base-graph edge (edges outside the graph are skipped)."""
        out = np.zeros(self.graph.m, dtype=np.int64)
        for sub in self.subgraphs:
            for e in sub:
                i = self.graph.index.get(e)
                if i is not None:
                    out[i] += 1
        return out

    def to_json(self, include_graph: bool = True) -> dict:
        data: dict[str, Any] = {
            "k": self.k,
            "n": self.n,
            "subgraphs": [[list(e) for e in sub] for sub in self.subgraphs],
            "cost": self.cost if math.isfinite(self.cost) else "inf",
            "flags": dict(self.flags),
        }
        if include_graph:
            data["graph"] = self.graph.to_json()
        return data

    @classmethod
    def from_json(cls, data: Mapping, graph: CapacitatedGraph | None = None) -> DesignSolution:
        """Rebuild a solution; the cost is recomputed, not trusted.

        Without ``graph`` (and no embedded ``"graph"`` key) the base graph is
        the union of the subgraphs with capacities equal to their usage.
        """
        try:
            subs = [[(int(e[0]), int(e[1])) for e in sub] for sub in data["subgraphs"]]
            flags = dict(data.get("flags", {}))
            if graph is None and "graph" in data:
                graph = CapacitatedGraph.from_json(data["graph"])
            if graph is None:
                n = int(data["n"]) if "n" in data else 1 + max((max(e) for s in subs for e in s), default=0)
                usage: dict[Edge, int] = {}
                for s in subs:
                    for e in _canonical_edges(n, s):
                        usage[e] = usage.get(e, 0) + 1
                graph = CapacitatedGraph.from_edges(n, list(usage), usage)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed solution JSON: {exc}") from None
        return cls.build(graph, subs, flags)

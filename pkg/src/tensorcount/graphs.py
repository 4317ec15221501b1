"""Multigraphs with explicit edge identities.

Vertices and edge ids are arbitrary hashables. Parallel edges are allowed;
self-loops are not (every edge is incident to exactly two distinct vertices).
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Graph:
    vertices: set = field(default_factory=set)
    # edge id -> frozenset of its two endpoints
    edges: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = set(self.vertices)
        self.edges = dict(self.edges)
        self._incidence = {v: set() for v in self.vertices}
        for e, ends in list(self.edges.items()):
            self.edges[e] = frozenset(ends)
            self._check_edge(e, self.edges[e])
            for v in self.edges[e]:
                self._incidence[v].add(e)

    def _check_edge(self, e, ends):
        if len(ends) != 2:
            raise ValueError(f"edge {e!r} must join two distinct vertices, got {set(ends)}")
        for v in ends:
            if v not in self.vertices:
                raise ValueError(f"edge {e!r} touches unknown vertex {v!r}")

    def add_vertex(self, v):
        if v not in self.vertices:
            self.vertices.add(v)
            self._incidence[v] = set()

    def add_edge(self, e, u, v):
        ends = frozenset((u, v))
        self._check_edge(e, ends)
        if e in self.edges:
            raise ValueError(f"duplicate edge id {e!r}")
        self.edges[e] = ends
        self._incidence[u].add(e)
        self._incidence[v].add(e)

    def endpoints(self, e):
        return self.edges[e]

    def incident_edges(self, v):
        return self._incidence[v]

    def degree(self, v) -> int:
        return len(self._incidence[v])

    def other_endpoint(self, e, v):
        (a, b) = tuple(self.edges[e]) if len(self.edges[e]) == 2 else (v, v)
        return b if a == v else a

    def neighbors(self, v):
        return {self.other_endpoint(e, v) for e in self._incidence[v]}

    def simple_adjacency(self) -> dict:
        """Vertex -> neighbor set with parallel edges collapsed."""
        return {v: self.neighbors(v) for v in self.vertices}

    def subgraph_edge_endpoints(self, edge_subset):
        out = set()
        for e in edge_subset:
            out |= self.edges[e]
        return out

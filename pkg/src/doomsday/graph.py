"""Undirected multigraph with the exact operations the engine relies on.

Vertices are non-negative integers. Edges are unordered pairs stored with a
multiplicity, so parallel edges are first-class. Self-loops are never stored.
Every mutating operation returns a new :class:`MultiGraph`; the only in-place
mutation happens in :class:`GraphBuilder`, which is meant for construction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from doomsday.exceptions import GraphError

Edge = tuple[int, int]


def _pair(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class UnionFind:
    """Disjoint sets over arbitrary hashable keys, with path halving."""

    def __init__(self, items: Iterable[int] = ()):
        self.parent: dict[int, int] = {}
        for x in items:
            self.parent[x] = x

    def add(self, x: int) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # keep the smaller id as root so roots are deterministic
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


class MultiGraph:
    """Immutable undirected multigraph.

    Parameters
    ----------
    vertices : iterable of int
    edges : iterable of (u, v) pairs, repeated pairs become parallel edges
    labels : optional mapping vertex -> text
    """

    __slots__ = ("_vertices", "_edges", "_labels", "_adj", "_hash")

    def __init__(
        self,
        vertices: Iterable[int] = (),
        edges: Iterable[Edge] | Mapping[Edge, int] = (),
        labels: Mapping[int, str] | None = None,
    ):
        verts = frozenset(int(v) for v in vertices)
        for v in verts:
            if v < 0:
                raise GraphError(f"vertex id must be non-negative, got {v}")
        counts: Counter[Edge] = Counter()
        items = edges.items() if isinstance(edges, Mapping) else ((e, 1) for e in edges)
        for (u, v), mult in items:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u} is not allowed")
            if u not in verts or v not in verts:
                missing = u if u not in verts else v
                raise GraphError(f"edge ({u}, {v}) references unknown vertex {missing}")
            if mult < 1:
                raise GraphError(f"edge ({u}, {v}) has multiplicity {mult} < 1")
            counts[_pair(u, v)] += mult
        self._vertices = verts
        self._edges = dict(sorted(counts.items()))
        self._labels = {int(k): str(t) for k, t in (labels or {}).items() if int(k) in verts}
        self._adj: dict[int, dict[int, int]] | None = None
        self._hash: int | None = None

    # -- basic accessors -------------------------------------------------

    @property
    def vertices(self) -> list[int]:
        return sorted(self._vertices)

    @property
    def labels(self) -> dict[int, str]:
        return dict(self._labels)

    def label(self, v: int) -> str | None:
        return self._labels.get(v)

    def multiplicities(self) -> dict[Edge, int]:
        """Mapping ``(u, v) -> multiplicity`` with ``u < v``, sorted."""
        return dict(self._edges)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Yield every parallel copy as ``(u, v, k)`` with ``u < v``."""
        for (u, v), m in self._edges.items():
            for k in range(m):
                yield (u, v, k)

    def multiplicity(self, u: int, v: int) -> int:
        return self._edges.get(_pair(u, v), 0)

    @property
    def n_vertices(self) -> int:
        return len(self._vertices)

    @property
    def n_edges(self) -> int:
        return sum(self._edges.values())

    def __contains__(self, v: object) -> bool:
        return v in self._vertices

    def __len__(self) -> int:
        return len(self._vertices)

    def adjacency(self) -> dict[int, dict[int, int]]:
        if self._adj is None:
            adj: dict[int, dict[int, int]] = {v: {} for v in self._vertices}
            for (u, v), m in self._edges.items():
                adj[u][v] = m
                adj[v][u] = m
            self._adj = adj
        return self._adj

    def neighbors(self, v: int) -> list[int]:
        self._require(v)
        return sorted(self.adjacency()[v])

    def degree(self, v: int) -> int:
        self._require(v)
        return sum(self.adjacency()[v].values())

    def incident_edges(self, v: int) -> list[tuple[int, int, int]]:
        """Edges at ``v`` as ``(v, neighbor, k)`` ordered by (neighbor, k)."""
        self._require(v)
        out = []
        for w, m in sorted(self.adjacency()[v].items()):
            out.extend((v, w, k) for k in range(m))
        return out

    def _require(self, v: int) -> None:
        if v not in self._vertices:
            raise GraphError(f"unknown vertex {v}")

    # -- equality --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return (
            self._vertices == other._vertices
            and self._edges == other._edges
            and self._labels == other._labels
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (self._vertices, tuple(self._edges.items()), tuple(sorted(self._labels.items())))
            )
        return self._hash

    def __repr__(self) -> str:
        return f"MultiGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"

    # -- derived graphs --------------------------------------------------

    def delete_vertex(self, v: int) -> MultiGraph:
        return delete_vertex(self, v)

    def delete_incident_edges(self, v: int) -> MultiGraph:
        return delete_incident_edges(self, v)

    def contract_edge(self, e: Edge | tuple[int, int, int]) -> MultiGraph:
        return contract_edge(self, e)

    def subgraph(self, keep: Iterable[int]) -> MultiGraph:
        keep = frozenset(keep) & self._vertices
        edges = {e: m for e, m in self._edges.items() if e[0] in keep and e[1] in keep}
        return MultiGraph(keep, edges, self._labels)

    def with_vertex(self, v: int, edges: Iterable[Edge] = (), label: str | None = None) -> MultiGraph:
        """Return a copy with vertex ``v`` (and optional edges at it) added."""
        if v in self._vertices:
            raise GraphError(f"vertex {v} already present")
        labels = dict(self._labels)
        if label is not None:
            labels[v] = label
        counts = Counter(self._edges)
        for e in edges:
            counts[_pair(*e)] += 1
        return MultiGraph(self._vertices | {v}, counts, labels)


class GraphBuilder:
    """In-place construction helper; call :meth:`build` to freeze."""

    def __init__(self) -> None:
        self._vertices: set[int] = set()
        self._edges: Counter[Edge] = Counter()
        self._labels: dict[int, str] = {}

    def add_vertex(self, v: int, label: str | None = None) -> GraphBuilder:
        self._vertices.add(int(v))
        if label is not None:
            self._labels[int(v)] = label
        return self

    def add_edge(self, u: int, v: int, multiplicity: int = 1) -> GraphBuilder:
        self._vertices.update((int(u), int(v)))
        if u == v:
            raise GraphError(f"self-loop at vertex {u} is not allowed")
        self._edges[_pair(int(u), int(v))] += multiplicity
        return self

    def build(self) -> MultiGraph:
        return MultiGraph(self._vertices, self._edges, self._labels)


@dataclass(frozen=True)
class ComponentPartition:
    """Connected components; indices ordered by smallest contained vertex."""

    count: int
    assignment: dict[int, int]

    def components(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.count)]
        for v in sorted(self.assignment):
            groups[self.assignment[v]].append(v)
        return groups


@dataclass(frozen=True)
class DegreeDistribution:
    """Sparse degree distribution: ``mass[i]`` is the fraction of vertices
    with degree ``support[i]``. Zero-mass degrees are omitted."""

    support: tuple[int, ...]
    mass: tuple[float, ...]

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support, self.mass))

    @classmethod
    def from_dict(cls, d: Mapping[int, float]) -> DegreeDistribution:
        items = sorted((int(k), float(p)) for k, p in d.items() if p > 0)
        return cls(tuple(k for k, _ in items), tuple(p for _, p in items))


def connected_components(g: MultiGraph) -> ComponentPartition:
    uf = UnionFind(g.vertices)
    for u, v in g.multiplicities():
        uf.union(u, v)
    index: dict[int, int] = {}
    assignment: dict[int, int] = {}
    # vertices visited ascending, so component order follows the smallest member
    for v in g.vertices:
        root = uf.find(v)
        if root not in index:
            index[root] = len(index)
        assignment[v] = index[root]
    return ComponentPartition(len(index), assignment)


def largest_component(g: MultiGraph) -> frozenset[int]:
    """Vertices of the component with the most vertices.

    Ties go to the component holding the smallest vertex id. Empty for the
    empty graph.
    """
    groups = connected_components(g).components()
    if not groups:
        return frozenset()
    # groups are already ordered by smallest member, max() keeps the first maximum
    return frozenset(max(groups, key=len))


def delete_vertex(g: MultiGraph, v: int) -> MultiGraph:
    """Remove ``v`` together with every edge (and parallel copy) at it."""
    if v not in g:
        raise GraphError(f"cannot delete unknown vertex {v}")
    edges = {e: m for e, m in g.multiplicities().items() if v not in e}
    return MultiGraph(set(g.vertices) - {v}, edges, g.labels)


def delete_incident_edges(g: MultiGraph, v: int) -> MultiGraph:
    """Remove every edge at ``v`` but keep ``v`` as an isolated vertex."""
    if v not in g:
        raise GraphError(f"unknown vertex {v}")
    edges = {e: m for e, m in g.multiplicities().items() if v not in e}
    return MultiGraph(g.vertices, edges, g.labels)


def contract_edge(g: MultiGraph, e: Edge | tuple[int, int, int]) -> MultiGraph:
    """Merge the endpoints of ``e`` into the smaller vertex id.

    ``e`` is ``(u, v)`` or ``(u, v, k)`` naming the k-th parallel copy. The
    remaining copies between u and v would become self-loops and are dropped;
    edges to common neighbours become parallel edges.
    """
    u, v = int(e[0]), int(e[1])
    k = int(e[2]) if len(e) > 2 else 0
    if u == v or not 0 <= k < g.multiplicity(u, v):
        raise GraphError(f"cannot contract unknown edge {tuple(e)}")
    keep, gone = min(u, v), max(u, v)
    counts: Counter[Edge] = Counter()
    for (a, b), m in g.multiplicities().items():
        a2 = keep if a == gone else a
        b2 = keep if b == gone else b
        if a2 != b2:
            counts[_pair(a2, b2)] += m
    labels = g.labels
    labels.pop(gone, None)
    return MultiGraph(set(g.vertices) - {gone}, counts, labels)


def degree_distribution(g: MultiGraph) -> DegreeDistribution:
    """Fraction of vertices per degree, counting parallel edges."""
    n = g.n_vertices
    if n == 0:
        raise GraphError("degree distribution of an empty graph is undefined")
    adj = g.adjacency()
    counts = Counter(sum(nbrs.values()) for nbrs in adj.values())
    support = tuple(sorted(counts))
    return DegreeDistribution(support, tuple(counts[k] / n for k in support))


def laplacian(g: MultiGraph) -> tuple[list[int], list[list[int]]]:
    """Integer Laplacian (degree minus adjacency) and its vertex order."""
    order = g.vertices
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    lap = [[0] * n for _ in range(n)]
    for (u, v), m in g.multiplicities().items():
        i, j = pos[u], pos[v]
        lap[i][j] -= m
        lap[j][i] -= m
        lap[i][i] += m
        lap[j][j] += m
    return order, lap


def bareiss_determinant(matrix: list[list[int]]) -> int:
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    a = [list(row) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            row_i = a[i]
            aik = row_i[k]
            for j in range(k + 1, n):
                # exact: Bareiss guarantees divisibility by the previous pivot
                row_i[j] = (row_i[j] * pivot - aik * a[k][j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def spanning_tree_count(g: MultiGraph) -> int:
    """Number of spanning trees, counting parallel edges as distinct.

    Zero for graphs with two or more components and for the empty graph; one
    for a single vertex.
    """
    n = g.n_vertices
    if n == 0:
        return 0
    if n == 1:
        return 1
    if connected_components(g).count != 1:
        return 0
    _, lap = laplacian(g)
    minor = [row[1:] for row in lap[1:]]
    return bareiss_determinant(minor)

"""Directed signed graphs and their structural analysis.

Edge orientation: an edge is keyed ``(i, j)`` meaning *j influences i*
(drawn ``j -> i``).  This mirrors the row convention of the update matrices,
where row ``i`` collects the opinions that agent ``i`` listens to.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

POSITIVE = 1
NEGATIVE = -1


class NoSpanningTree(ValueError):
    """The graph has more than one source component, so no vertex reaches all others."""


@dataclass(frozen=True)
class SignedDigraph:
    n: int
    edges: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"vertex count must be positive, got {self.n}")
        clean = {}
        for (i, j), w in self.edges.items():
            i, j = int(i), int(j)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside vertex range [0, {self.n})")
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            w = float(w)
            if w == 0.0 or not np.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) has invalid weight {w}")
            clean[(i, j)] = w
        object.__setattr__(self, "edges", clean)

    @classmethod
    def from_records(cls, n: int, records: Iterable[Mapping]) -> "SignedDigraph":
        """Build from exchange records ``{from, to, weight}`` (``from`` is the influencer)."""
        edges = {}
        for rec in records:
            key = (int(rec["to"]), int(rec["from"]))
            if key in edges:
                raise ValueError(f"duplicate edge from {rec['from']} to {rec['to']}")
            edges[key] = float(rec["weight"])
        return cls(n, edges)

    @classmethod
    def from_matrix(cls, m) -> "SignedDigraph":
        """Graph of a square matrix: every nonzero off-diagonal entry ``m[i, j]`` is an edge."""
        m = np.asarray(m, dtype=float)
        n = m.shape[0]
        edges = {(i, j): m[i, j] for i in range(n) for j in range(n) if i != j and m[i, j] != 0}
        return cls(n, edges)

    def to_records(self) -> list[dict]:
        return [{"from": j, "to": i, "weight": w} for (i, j), w in sorted(self.edges.items())]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for (i, j), w in self.edges.items():
            a[i, j] = w
        return a

    def has_negative_edge(self) -> bool:
        return any(w < 0 for w in self.edges.values())

    def subgraph(self, vertices: Iterable[int]) -> tuple["SignedDigraph", list[int]]:
        """Induced subgraph, relabelled ``0..k-1`` in ascending order of original index.

        Returns the subgraph and the list mapping new labels back to old ones.
        """
        keep = sorted(set(vertices))
        index = {v: k for k, v in enumerate(keep)}
        edges = {
            (index[i], index[j]): w
            for (i, j), w in self.edges.items()
            if i in index and j in index
        }
        return SignedDigraph(len(keep), edges), keep

    def to_networkx(self) -> nx.DiGraph:
        """Underlying digraph with arcs in influence direction (influencer -> influenced)."""
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from((j, i) for (i, j) in self.edges)
        return g


@dataclass(frozen=True)
class BalancePartition:
    set_one: frozenset[int]
    set_two: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "set_one", frozenset(self.set_one))
        object.__setattr__(self, "set_two", frozenset(self.set_two))
        if self.set_one & self.set_two:
            raise ValueError("partition sets overlap")

    @property
    def vertices(self) -> frozenset[int]:
        return self.set_one | self.set_two

    def side(self, v: int) -> int:
        """+1 for vertices in ``set_one``, -1 for ``set_two``."""
        if v in self.set_one:
            return 1
        if v in self.set_two:
            return -1
        raise KeyError(v)

    def gauge(self, n: int) -> np.ndarray:
        """The +/-1 diagonal of the sign-flip matrix (vertices outside the partition get +1)."""
        d = np.ones(n)
        for v in self.set_two:
            d[v] = -1.0
        return d

    def is_valid_for(self, g: SignedDigraph) -> bool:
        for (i, j), w in g.edges.items():
            if i not in self.vertices or j not in self.vertices:
                continue
            same = (i in self.set_one) == (j in self.set_one)
            if same != (w > 0):
                return False
        return True


@dataclass(frozen=True)
class SccDecomposition:
    components: tuple[frozenset[int], ...]
    condensation_edges: frozenset[tuple[int, int]]

    def sources(self) -> list[int]:
        has_in = {b for (_, b) in self.condensation_edges}
        return [k for k in range(len(self.components)) if k not in has_in]


@dataclass(frozen=True)
class UnionSignGraph:
    n: int
    edge_signs: Mapping[tuple[int, int], frozenset[int]]

    def __post_init__(self):
        for key, signs in self.edge_signs.items():
            if not signs:
                raise ValueError(f"empty sign set on {key}")


def scc_decompose(g: SignedDigraph) -> SccDecomposition:
    """Strongly connected components in topological order of the condensation, sources first.

    Ties in the topological order are broken by each component's smallest vertex.
    """
    dg = g.to_networkx()
    cond = nx.condensation(dg)
    order = list(
        nx.lexicographical_topological_sort(cond, key=lambda c: min(cond.nodes[c]["members"]))
    )
    relabel = {c: k for k, c in enumerate(order)}
    components = tuple(frozenset(cond.nodes[c]["members"]) for c in order)
    edges = frozenset((relabel[a], relabel[b]) for a, b in cond.edges)
    return SccDecomposition(components, edges)


def root_vertex_set(g: SignedDigraph) -> frozenset[int]:
    """Vertices with a directed path to every other vertex.

    Raises NoSpanningTree when the condensation has several source components.
    """
    dec = scc_decompose(g)
    src = dec.sources()
    if len(src) != 1:
        raise NoSpanningTree(f"{len(src)} source components; graph has no spanning tree")
    return dec.components[src[0]]


def is_strongly_connected(g: SignedDigraph) -> bool:
    return len(scc_decompose(g).components) == 1


def _two_color(vertices: Iterable[int], neighbors) -> BalancePartition | None:
    # neighbors(v) yields (u, sign) pairs, undirected; sign None marks a conflicting pair
    color: dict[int, int] = {}
    for start in sorted(vertices):
        if start in color:
            continue
        color[start] = 1
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u, sign in neighbors(v):
                if sign is None:
                    return None
                want = color[v] * sign
                if u not in color:
                    color[u] = want
                    queue.append(u)
                elif color[u] != want:
                    return None
    return BalancePartition(
        frozenset(v for v, c in color.items() if c == 1),
        frozenset(v for v, c in color.items() if c == -1),
    )


def check_balance(g: SignedDigraph) -> BalancePartition | None:
    """Return a structural-balance bipartition of ``g`` or None when unbalanced.

    Each weakly connected component is 2-colored independently (same side across
    a positive edge, opposite across a negative one); its lowest vertex goes to
    ``set_one``.  An all-positive graph yields an empty ``set_two``.
    """
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(g.n)}
    for (i, j), w in g.edges.items():
        s = POSITIVE if w > 0 else NEGATIVE
        adj[i].append((j, s))
        adj[j].append((i, s))
    return _two_color(range(g.n), adj.__getitem__)


def enlarge(g: SignedDigraph) -> SignedDigraph:
    """The all-positive graph on ``2n`` vertices encoding sign structure.

    Vertex ``i`` is the "+" copy and ``n + i`` the "-" copy of vertex ``i``.
    A positive edge j->i gives j+ -> i+ and j- -> i-; a negative one gives
    j+ -> i- and j- -> i+.
    """
    n = g.n
    edges = {}
    for (i, j), w in g.edges.items():
        if w > 0:
            edges[(i, j)] = 1.0
            edges[(n + i, n + j)] = 1.0
        else:
            edges[(n + i, j)] = 1.0
            edges[(i, n + j)] = 1.0
    return SignedDigraph(2 * n, edges)


def union_graphs(gs: Sequence[SignedDigraph]) -> UnionSignGraph:
    if not gs:
        raise ValueError("union of an empty sequence of graphs")
    n = gs[0].n
    signs: dict[tuple[int, int], set[int]] = {}
    for g in gs:
        if g.n != n:
            raise ValueError(f"dimension mismatch: {g.n} vertices vs {n}")
        for key, w in g.edges.items():
            signs.setdefault(key, set()).add(POSITIVE if w > 0 else NEGATIVE)
    return UnionSignGraph(n, {k: frozenset(v) for k, v in signs.items()})


def union_digraph(u: UnionSignGraph) -> SignedDigraph:
    """Unsigned skeleton of a union graph (all weights +1), for connectivity queries."""
    return SignedDigraph(u.n, {k: 1.0 for k in u.edge_signs})


def common_bipartition(u: UnionSignGraph, subset: Iterable[int]) -> BalancePartition | None:
    """A bipartition of ``subset`` valid for every graph folded into ``u``, or None.

    A pair carrying both signs can never be satisfied, so it is an immediate conflict.
    """
    subset = frozenset(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    adj: dict[int, list[tuple[int, int | None]]] = {v: [] for v in subset}
    for (i, j), signs in u.edge_signs.items():
        if i not in subset or j not in subset:
            continue
        s = None if len(signs) > 1 else next(iter(signs))
        adj[i].append((j, s))
        adj[j].append((i, s))
    return _two_color(subset, adj.__getitem__)

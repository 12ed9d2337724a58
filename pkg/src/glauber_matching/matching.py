"""
Matching state, enumeration of all matchings, and exact maximum matching.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CapacityError, InvariantError
from .graph import Graph

UNMATCHED = -1
DEFAULT_STATE_CAP = 200_000


class Matching:
    """A set of pairwise disjoint edges of ``graph``.

    ``in_set[e]`` flags membership and ``occupancy[v]`` holds the id of the
    member edge covering ``v`` (or ``UNMATCHED``).  Both are kept in sync so
    every update is O(1).  Instances are mutable and single-owner; call
    :meth:`copy` before handing one to code that mutates it.
    """

    __slots__ = ("graph", "in_set", "occupancy", "size")

    def __init__(self, graph: Graph, edges=()):
        self.graph = graph
        self.in_set = [False] * graph.m
        self.occupancy = [UNMATCHED] * graph.n
        self.size = 0
        for e in edges:
            if not self.can_insert(e):
                raise InvariantError(f"edge {e} conflicts with {self.edges()}")
            self.insert(e)

    def can_insert(self, e: int) -> bool:
        # an edge already present counts as insertable
        if self.in_set[e]:
            return True
        u, v = self.graph.edges[e]
        return self.occupancy[u] == UNMATCHED and self.occupancy[v] == UNMATCHED

    def insert(self, e: int) -> "Matching":
        if self.in_set[e]:
            return self
        u, v = self.graph.edges[e]
        if self.occupancy[u] != UNMATCHED or self.occupancy[v] != UNMATCHED:
            raise InvariantError(f"inserting edge {e} would share a vertex")
        self.in_set[e] = True
        self.occupancy[u] = e
        self.occupancy[v] = e
        self.size += 1
        return self

    def remove(self, e: int) -> "Matching":
        if not self.in_set[e]:
            return self
        u, v = self.graph.edges[e]
        self.in_set[e] = False
        self.occupancy[u] = UNMATCHED
        self.occupancy[v] = UNMATCHED
        self.size -= 1
        return self

    def copy(self) -> "Matching":
        other = Matching.__new__(Matching)
        other.graph = self.graph
        other.in_set = self.in_set.copy()
        other.occupancy = self.occupancy.copy()
        other.size = self.size
        return other

    def edges(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.in_set) if f)

    def key(self) -> tuple[int, ...]:
        return self.edges()

    def __contains__(self, e: int) -> bool:
        return self.in_set[e]

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return self.graph is other.graph and self.in_set == other.in_set

    def __hash__(self) -> int:
        return hash(self.edges())

    def __repr__(self) -> str:
        return f"Matching({list(self.edges())})"

    def to_json(self) -> dict:
        return {"edges": list(self.edges()), "size": self.size}

    @classmethod
    def from_json(cls, graph: Graph, obj: dict) -> "Matching":
        m = cls(graph, obj["edges"])
        if m.size != obj.get("size", m.size):
            raise InvariantError("size field disagrees with edge list")
        return m


def check_matching(mt: Matching) -> None:
    """Raise InvariantError unless ``in_set``, ``occupancy`` and ``size`` agree."""
    g = mt.graph
    occ = [UNMATCHED] * g.n
    count = 0
    for e, flag in enumerate(mt.in_set):
        if not flag:
            continue
        count += 1
        for x in g.edges[e]:
            if occ[x] != UNMATCHED:
                raise InvariantError(f"vertex {x} covered twice")
            occ[x] = e
    if occ != mt.occupancy:
        raise InvariantError("occupancy is not the inverse of in_set")
    if count != mt.size:
        raise InvariantError(f"cached size {mt.size} != {count}")


def phi(a: Matching, b: Matching) -> int:
    """Number of edges in exactly one of the two matchings."""
    if a.graph is not b.graph and a.graph != b.graph:
        raise InvariantError("matchings live on different graphs")
    return sum(x != y for x, y in zip(a.in_set, b.in_set))


def _enumerate_keys(g: Graph, cap: int) -> list[tuple[int, ...]]:
    # DFS over increasing edge ids yields tuples in lexicographic order
    if cap <= 0:
        raise ValueError("cap must be positive")
    out: list[tuple[int, ...]] = []
    busy = [False] * g.n
    edges = g.edges
    m = g.m
    prefix: list[int] = []

    def rec(start: int) -> None:
        if len(out) >= cap:
            raise CapacityError(f"more than {cap} matchings", partial=len(out))
        out.append(tuple(prefix))
        for e in range(start, m):
            u, v = edges[e]
            if busy[u] or busy[v]:
                continue
            busy[u] = busy[v] = True
            prefix.append(e)
            rec(e + 1)
            prefix.pop()
            busy[u] = busy[v] = False

    rec(0)
    return out


def enumerate_matchings(g: Graph, cap: int = DEFAULT_STATE_CAP) -> list[Matching]:
    """All matchings of ``g`` (the empty one first), lexicographic on sorted
    edge-id tuples.  Raises CapacityError with the partial count past ``cap``."""
    return [Matching(g, k) for k in _enumerate_keys(g, cap)]


@dataclass(frozen=True)
class SizeCounts:
    counts: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.counts) - 1

    @property
    def largest(self) -> int:
        """max_i S_i, the value the success-probability argument plugs in for lambda."""
        return max(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)


def size_counts(g: Graph, cap: int = DEFAULT_STATE_CAP) -> SizeCounts:
    return counts_from_keys(_enumerate_keys(g, cap))


def counts_from_keys(keys) -> SizeCounts:
    sizes = [len(k) for k in keys]
    counts = [0] * (max(sizes) + 1)
    for s in sizes:
        counts[s] += 1
    return SizeCounts(tuple(counts))


# -- exact maximum matching ----------------------------------------------------

def greedy_maximal(g: Graph) -> Matching:
    mt = Matching(g)
    for e in range(g.m):
        if mt.can_insert(e):
            mt.insert(e)
    return mt


def _bipartite_max(g: Graph) -> list[int]:
    # Kuhn's augmenting paths from one colour class
    color = [-1] * g.n
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            x = stack.pop()
            for e in g.incidence[x]:
                u, v = g.edges[e]
                y = v if u == x else u
                if color[y] < 0:
                    color[y] = 1 - color[x]
                    stack.append(y)
    mate_edge = [UNMATCHED] * g.n

    def other(e, x):
        u, v = g.edges[e]
        return v if u == x else u

    def augment(x, seen):
        for e in g.incidence[x]:
            y = other(e, x)
            if y in seen:
                continue
            seen.add(y)
            f = mate_edge[y]
            if f == UNMATCHED or augment(other(f, y), seen):
                mate_edge[x] = e
                mate_edge[y] = e
                return True
        return False

    for x in range(g.n):
        if color[x] == 0 and mate_edge[x] == UNMATCHED:
            augment(x, set())
    return sorted({e for e in mate_edge if e != UNMATCHED})


def _branch_and_bound(g: Graph) -> list[int]:
    adj: list[set[int]] = [set() for _ in range(g.n)]
    for u, v in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    edge_id = {e: i for i, e in enumerate(g.edges)}
    best = list(greedy_maximal(g).edges())
    alive = {v for v in range(g.n) if adj[v]}
    chosen: list[int] = []

    def drop(v):
        for w in adj[v]:
            adj[w].discard(v)
        alive.discard(v)

    def restore(v, nbrs):
        for w in nbrs:
            adj[w].add(v)
        adj[v] = set(nbrs)
        alive.add(v)

    def rec():
        nonlocal best
        live = [v for v in alive if adj[v]]
        if len(chosen) + len(live) // 2 <= len(best):
            return
        if not live:
            best = list(chosen)
            return
        v = min(live, key=lambda x: (len(adj[x]), x))
        nv = sorted(adj[v])
        drop(v)
        for w in nv:
            nw = sorted(adj[w])
            drop(w)
            chosen.append(edge_id[(min(v, w), max(v, w))])
            rec()
            chosen.pop()
            restore(w, nw)
        # a degree-one vertex is always matched in some maximum matching
        if len(nv) > 1:
            rec()
        restore(v, nv)
        if len(chosen) > len(best):
            best = list(chosen)

    rec()
    return sorted(best)


def exact_max_matching(g: Graph, method: str = "auto") -> tuple[int, Matching]:
    """Maximum cardinality matching.

    ``method`` is ``"bnb"`` (branch and bound, any graph; exponential worst
    case, fine for n up to ~60), ``"bipartite"`` (augmenting paths) or
    ``"auto"``, which takes the augmenting-path route when ``g`` is bipartite.
    """
    if method == "auto":
        method = "bipartite" if g.is_bipartite() else "bnb"
    if method == "bipartite":
        if not g.is_bipartite():
            raise ValueError("graph is not bipartite")
        edges = _bipartite_max(g)
    elif method == "bnb":
        edges = _branch_and_bound(g)
    else:
        raise ValueError(f"unknown method {method!r}")
    mt = Matching(g, edges)
    return mt.size, mt

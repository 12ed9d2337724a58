"""
Simple undirected graphs, seeded generators for the test families, and
the plain-text edge-list format.

Vertices and edges are dense 0-based integers.  Edges are stored as
``(u, v)`` with ``u < v`` and sorted lexicographically, so two graphs with
the same edge set are identical objects field by field.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphParseError, ParameterError

FAMILIES = ("path", "cycle", "star", "complete", "gnp", "bipartite_regular")


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    incidence: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a canonical graph; raises ParameterError on loops, duplicates
        or out-of-range endpoints."""
        if n < 1:
            raise ParameterError(f"vertex count must be >= 1, got {n}")
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u}, {v}) out of range for n={n}")
            e = (u, v) if u < v else (v, u)
            if e in canon:
                raise ParameterError(f"duplicate edge {e}")
            canon.add(e)
        ordered = tuple(sorted(canon))
        inc: list[list[int]] = [[] for _ in range(n)]
        for i, (u, v) in enumerate(ordered):
            inc[u].append(i)
            inc[v].append(i)
        return cls(n, ordered, tuple(tuple(x) for x in inc))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def edge_array(self) -> np.ndarray:
        """(m, 2) int64 array of endpoints."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    def is_bipartite(self) -> bool:
        color = [-1] * self.n
        for s in range(self.n):
            if color[s] >= 0:
                continue
            color[s] = 0
            stack = [s]
            while stack:
                x = stack.pop()
                for e in self.incidence[x]:
                    u, v = self.edges[e]
                    y = v if u == x else u
                    if color[y] < 0:
                        color[y] = 1 - color[x]
                        stack.append(y)
                    elif color[y] == color[x]:
                        return False
        return True

    def content_hash(self) -> str:
        return hashlib.sha256(write_graph(self).encode()).hexdigest()

    def fingerprint(self) -> dict:
        return {"n": self.n, "m": self.m, "sha256": self.content_hash()}


def validate(g: Graph) -> None:
    """Raise AssertionError unless every structural invariant holds."""
    assert g.n >= 1
    assert len(set(g.edges)) == g.m
    assert list(g.edges) == sorted(g.edges)
    for u, v in g.edges:
        assert 0 <= u < v < g.n
    assert len(g.incidence) == g.n
    expect: list[list[int]] = [[] for _ in range(g.n)]
    for i, (u, v) in enumerate(g.edges):
        expect[u].append(i)
        expect[v].append(i)
    assert [list(x) for x in g.incidence] == expect


# -- generators --------------------------------------------------------------

def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ParameterError("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(n: int) -> Graph:
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def complete(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def _pair_from_index(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # k enumerates pairs (u, v), u < v, ordered by v then u: k = v(v-1)/2 + u
    v = ((1 + np.sqrt(1 + 8 * k.astype(np.float64))) // 2).astype(np.int64)
    base = v * (v - 1) // 2
    too_big = base > k
    v[too_big] -= 1
    base = v * (v - 1) // 2
    too_small = k - base >= v
    v[too_small] += 1
    base = v * (v - 1) // 2
    return k - base, v


def gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p): a Binomial(N, p) edge count, then that many
    distinct pairs uniformly, so sparse graphs with n ~ 1e5 cost O(n + m)."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"gnp needs p in [0, 1], got {p}")
    if n < 1:
        raise ParameterError(f"vertex count must be >= 1, got {n}")
    total = n * (n - 1) // 2
    if total == 0:
        return Graph.from_edges(n, [])
    rng = np.random.default_rng(seed)
    count = int(rng.binomial(total, p))
    k = np.sort(rng.choice(total, size=count, replace=False, shuffle=False)).astype(np.int64)
    u, v = _pair_from_index(k)
    return _trusted(n, u, v)


def bipartite_regular(n: int, d: int, seed: int, retries: int = 100) -> Graph:
    """d-regular bipartite graph on ``2n`` vertices (sides ``[0, n)`` and
    ``[n, 2n)``) built as a union of d random perfect matchings."""
    if n < 1 or d < 0:
        raise ParameterError("bipartite_regular needs n >= 1 and d >= 0")
    if d > n:
        raise ParameterError(f"no simple {d}-regular bipartite graph with {n} vertices per side")
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        used: set[tuple[int, int]] = set()
        ok = True
        for _ in range(d):
            for _ in range(retries):
                perm = rng.permutation(n)
                cand = [(i, n + int(perm[i])) for i in range(n)]
                if not any(e in used for e in cand):
                    used.update(cand)
                    break
            else:
                ok = False
                break
        if ok:
            return Graph.from_edges(2 * n, used)
    raise ParameterError(f"bipartite_regular(n={n}, d={d}) failed after {retries} retries")


def _trusted(n: int, u: np.ndarray, v: np.ndarray) -> Graph:
    # caller guarantees u < v, no duplicates, in range
    order = np.lexsort((v, u))
    u, v = u[order], v[order]
    edges = tuple(zip(u.tolist(), v.tolist()))
    inc: list[list[int]] = [[] for _ in range(n)]
    for i, (a, b) in enumerate(edges):
        inc[a].append(i)
        inc[b].append(i)
    return Graph(n, edges, tuple(tuple(x) for x in inc))


def generate(family: str, n: int, *, p: float | None = None, d: int | None = None,
             seed: int | None = None) -> Graph:
    if n < 1:
        raise ParameterError(f"vertex count must be >= 1, got {n}")
    if family == "path":
        return path(n)
    if family == "cycle":
        return cycle(n)
    if family == "star":
        return star(n)
    if family == "complete":
        return complete(n)
    if family == "gnp":
        if p is None or seed is None:
            raise ParameterError("gnp needs p and seed")
        return gnp(n, p, seed)
    if family == "bipartite_regular":
        if d is None or seed is None:
            raise ParameterError("bipartite_regular needs d and seed")
        return bipartite_regular(n, d, seed)
    raise ParameterError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


# -- text format -------------------------------------------------------------

def read_graph(text: str) -> Graph:
    header = None
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected two integers, got {raw!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"expected two integers, got {raw!r}", lineno) from None
        if header is None:
            if a < 1 or b < 0:
                raise GraphParseError(f"bad header n={a} m={b}", lineno)
            header = (a, b)
            continue
        n = header[0]
        if len(pairs) == header[1]:
            raise GraphParseError(f"more than the declared {header[1]} edges", lineno)
        if a == b:
            raise GraphParseError(f"self-loop at vertex {a}", lineno)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphParseError(f"endpoint out of range [0, {n})", lineno)
        e = (min(a, b), max(a, b))
        if e in seen:
            raise GraphParseError(f"duplicate edge {e}", lineno)
        seen.add(e)
        pairs.append(e)
    if header is None:
        raise GraphParseError("missing 'n m' header")
    if len(pairs) != header[1]:
        raise GraphParseError(f"declared {header[1]} edges, found {len(pairs)}")
    return Graph.from_edges(header[0], pairs)


def write_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def load(path_: str) -> Graph:
    with open(path_) as fh:
        return read_graph(fh.read())


def save(g: Graph, path_: str) -> None:
    with open(path_, "w") as fh:
        fh.write(write_graph(g))

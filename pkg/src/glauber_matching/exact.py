"""
Exact analysis of the chain on graphs small enough to enumerate every
matching: partition function, Gibbs vector, transition kernel, balance and
ergodicity checks, total variation, exact mixing time and conductance.

The partition function is kept as log2 Z because lambda = 2^m overflows
linear-domain arithmetic long before the state space gets large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .chain import claimed_bounds, fugacity_split
from .errors import CapacityError
from .graph import Graph
from .matching import DEFAULT_STATE_CAP, Matching, SizeCounts, _enumerate_keys, counts_from_keys

DEFAULT_EPS = 1 / (2 * math.e)
DEFAULT_T_MAX = 1_000_000
DEFAULT_CUT_CAP = 22
DENSE_STATE_CAP = 4096


@dataclass
class StateSpace:
    graph: Graph
    keys: list[tuple[int, ...]]
    index: dict[tuple[int, ...], int]
    sizes: np.ndarray
    size_counts: SizeCounts

    @classmethod
    def build(cls, g: Graph, cap: int = DEFAULT_STATE_CAP) -> "StateSpace":
        keys = _enumerate_keys(g, cap)
        index = {k: i for i, k in enumerate(keys)}
        sizes = np.fromiter((len(k) for k in keys), dtype=np.int64, count=len(keys))
        return cls(g, keys, index, sizes, counts_from_keys(keys))

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def k(self) -> int:
        return self.size_counts.k

    def matching(self, i: int) -> Matching:
        return Matching(self.graph, self.keys[i])

    def index_of(self, mt: Matching) -> int:
        return self.index[mt.key()]

    def max_states(self) -> list[int]:
        return [i for i, s in enumerate(self.sizes) if s == self.k]


@dataclass
class Kernel:
    matrix: sp.csr_matrix
    log2_lambda: float
    m: int

    def row(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.matrix.indptr[i], self.matrix.indptr[i + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __len__(self) -> int:
        return self.matrix.shape[0]


def partition_function(space: StateSpace, log2_lambda: float) -> float:
    """log2 Z, summed stably over matching sizes."""
    counts = np.asarray(space.size_counts.counts, dtype=np.float64)
    terms = np.log2(counts) + np.arange(len(counts)) * float(log2_lambda)
    return float(np.logaddexp2.reduce(terms))


def gibbs(space: StateSpace, log2_lambda: float) -> np.ndarray:
    log2z = partition_function(space, log2_lambda)
    return np.exp2(space.sizes * float(log2_lambda) - log2z)


def gibbs_max_mass(space: StateSpace, log2_lambda: float) -> float:
    """Gibbs probability of landing on some maximum matching."""
    k = space.k
    s_k = space.size_counts.counts[k]
    return float(2.0 ** (math.log2(s_k) + k * float(log2_lambda) - partition_function(space, log2_lambda)))


def build_kernel(space: StateSpace, log2_lambda: float) -> Kernel:
    g = space.graph
    m = g.m
    if m == 0:
        raise ValueError("graph has no edges; the chain is undefined")
    p_add, p_remove = fugacity_split(log2_lambda)
    w_add, w_rem = p_add / m, p_remove / m
    vbits = [(1 << u) | (1 << v) for u, v in g.edges]
    ebit_index = {}
    for i, key in enumerate(space.keys):
        mask = 0
        for e in key:
            mask |= 1 << e
        ebit_index[mask] = i
    rows, cols, vals = [], [], []
    for i, key in enumerate(space.keys):
        emask = 0
        vmask = 0
        for e in key:
            emask |= 1 << e
            vmask |= vbits[e]
        for e in range(m):
            bit = 1 << e
            if emask & bit:
                rows += (i, i)
                cols += (i, ebit_index[emask ^ bit])
                vals += (w_add, w_rem)
            elif vmask & vbits[e]:
                rows.append(i)
                cols.append(i)
                vals.append(w_add + w_rem)
            else:
                rows += (i, i)
                cols += (ebit_index[emask | bit], i)
                vals += (w_add, w_rem)
    n = len(space)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sum_duplicates()
    mat.sort_indices()
    return Kernel(mat, float(log2_lambda), m)


def check_detailed_balance(kernel: Kernel, dist: np.ndarray) -> float:
    flows = sp.diags(dist) @ kernel.matrix
    diff = flows - flows.T
    return float(abs(diff).max()) if diff.nnz else 0.0


def check_stationary(kernel: Kernel, dist: np.ndarray) -> float:
    return float(np.max(np.abs(kernel.matrix.T @ dist - dist)))


def check_ergodic(kernel: Kernel) -> dict:
    mat = kernel.matrix
    n = mat.shape[0]
    ncomp, _ = connected_components(mat, directed=True, connection="strong")
    irreducible = ncomp == 1
    if not irreducible:
        return {"irreducible": False, "aperiodic": False}
    if np.any(mat.diagonal() > 0):
        return {"irreducible": True, "aperiodic": True}
    # period = gcd of level(i) + 1 - level(j) over edges i -> j of a BFS tree
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for j in mat.indices[mat.indptr[i]:mat.indptr[i + 1]]:
                if level[j] < 0:
                    level[j] = level[i] + 1
                    nxt.append(j)
        frontier = nxt
    period = 0
    coo = mat.tocoo()
    for i, j in zip(coo.row, coo.col):
        period = math.gcd(period, int(level[i] + 1 - level[j]))
    return {"irreducible": True, "aperiodic": period == 1}


def tv_distance(a, b) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(a) - np.asarray(b))))


def evolve(kernel: Kernel, start: np.ndarray, t: int) -> np.ndarray:
    """Distribution after ``t`` steps from ``start``."""
    pt = kernel.matrix.T.tocsr()
    v = np.asarray(start, dtype=np.float64)
    for _ in range(t):
        v = pt @ v
    return v


def point_mass(n: int, i: int) -> np.ndarray:
    v = np.zeros(n)
    v[i] = 1.0
    return v


@dataclass
class MixingReport:
    t_mix: int
    eps: float
    worst_start: int
    tv_curve: list[float]
    conductance: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def t_relax(self) -> float | None:
        if self.conductance is None or self.conductance == 0:
            return None
        return 1.0 / self.conductance

    def to_json(self) -> dict:
        return {
            "t_mix": self.t_mix,
            "eps": self.eps,
            "worst_start": self.worst_start,
            "tv_curve": self.tv_curve,
            "conductance": self.conductance,
            "t_relax": self.t_relax,
            **self.extra,
        }


def exact_mixing_time(kernel: Kernel, stationary: np.ndarray, eps: float = DEFAULT_EPS,
                      t_max: int = DEFAULT_T_MAX, start: int | None = None) -> MixingReport:
    """First t with max-over-starts TV(P^t(x, .), pi) <= eps.

    With ``start`` set, only that start state is tracked (solver runs begin
    at the empty matching, index 0).  On timeout the CapacityError carries
    the partial TV curve.
    """
    n = len(kernel)
    if start is None:
        if n > DENSE_STATE_CAP:
            raise CapacityError(f"worst-case mixing needs a dense {n}x{n} matrix; "
                                f"cap is {DENSE_STATE_CAP} states (use a single start)")
        dist = np.eye(n)
    else:
        dist = point_mass(n, start)[None, :]
    pt = kernel.matrix.T.tocsr()
    pi = np.asarray(stationary)

    def worst(d):
        tv = 0.5 * np.abs(d - pi).sum(axis=1)
        j = int(np.argmax(tv))
        return float(tv[j]), j

    tv, arg = worst(dist)
    curve = [tv]
    last_arg = arg
    t = 0
    while tv > eps:
        if t >= t_max:
            raise CapacityError(f"TV still {tv:.3g} > {eps:.3g} after t_max={t_max} steps",
                                partial=curve)
        dist = (pt @ dist.T).T
        t += 1
        last_arg = arg
        tv, arg = worst(dist)
        curve.append(tv)
    # worst start one step before the threshold was met
    worst_start = start if start is not None else last_arg
    return MixingReport(t, eps, worst_start, curve)


def conductance_of_cut(kernel: Kernel, stationary: np.ndarray, cut) -> float:
    n = len(kernel)
    inside = np.zeros(n, dtype=bool)
    inside[list(cut)] = True
    if inside.all() or not inside.any():
        raise ValueError("cut must be a nonempty proper subset")
    pi = np.asarray(stationary)
    sub = kernel.matrix[inside][:, ~inside]
    flow = float(pi[inside] @ np.asarray(sub.sum(axis=1)).ravel())
    return flow / (pi[inside].sum() * pi[~inside].sum())


def conductance_exact(kernel: Kernel, stationary: np.ndarray,
                      cut_cap: int = DEFAULT_CUT_CAP) -> tuple[float, tuple[int, ...]]:
    """Minimum of the cut ratio over every nonempty proper subset of states.

    Ties resolve to the subset with the smallest bitmask.
    """
    n = len(kernel)
    if n > cut_cap:
        raise CapacityError(f"{n} states exceeds the exhaustive cut cap {cut_cap}; "
                            "use conductance_of_cut on a chosen cut", partial=n)
    if n < 2:
        raise ValueError("need at least two states")
    pi = np.asarray(stationary, dtype=np.float64)
    q = pi[:, None] * kernel.dense()
    np.fill_diagonal(q, 0.0)
    bits = 1 << np.arange(n, dtype=np.int64)
    best, best_mask = math.inf, 0
    total = (1 << n) - 1
    step = 1 << 15
    for lo in range(1, total, step):
        masks = np.arange(lo, min(lo + step, total), dtype=np.int64)
        x = ((masks[:, None] & bits) != 0).astype(np.float64)
        flow = np.einsum("ij,ij->i", x @ q, 1.0 - x)
        ratio = flow / ((x @ pi) * ((1.0 - x) @ pi))
        j = int(np.argmin(ratio))
        if ratio[j] < best:
            best, best_mask = float(ratio[j]), int(masks[j])
    return best, tuple(i for i in range(n) if best_mask >> i & 1)


def max_matching_cut(space: StateSpace, log2_lambda: float,
                     kernel: Kernel | None = None) -> dict:
    """Ratio for the cut S = {lowest-index maximum matching}, computed from
    the kernel and from the closed form k / ((1 + lambda) m) / (1 - lambda^k / Z)."""
    if kernel is None:
        kernel = build_kernel(space, log2_lambda)
    k, m = space.k, space.graph.m
    s = space.max_states()[0]
    pi = gibbs(space, log2_lambda)
    direct = conductance_of_cut(kernel, pi, [s])
    _, p_remove = fugacity_split(log2_lambda)
    log2_mass = k * float(log2_lambda) - partition_function(space, log2_lambda)
    closed = k * p_remove / m / -math.expm1(log2_mass * math.log(2))
    return {"state": s, "phi_direct": direct, "phi_closed_form": closed}


def analyze(g: Graph, log2_lambda: float | None = None, *, state_cap: int = DEFAULT_STATE_CAP,
            eps: float = DEFAULT_EPS, t_max: int = DEFAULT_T_MAX,
            cut_cap: int = DEFAULT_CUT_CAP, mixing: bool = True) -> dict:
    """Everything the exact route can say about ``g`` at one fugacity."""
    if log2_lambda is None:
        log2_lambda = float(g.m)
    space = StateSpace.build(g, state_cap)
    kernel = build_kernel(space, log2_lambda)
    pi = gibbs(space, log2_lambda)
    k = space.k
    claims = claimed_bounds(g.n, g.m, k)
    out = {
        "n": g.n,
        "m": g.m,
        "k": k,
        "S": list(space.size_counts.counts),
        "log2Z": partition_function(space, log2_lambda),
        "pr_k_gibbs": gibbs_max_mass(space, log2_lambda),
        "t_mix": None,
        "eps": eps,
        "phi_min": None,
        "phi_cut": max_matching_cut(space, log2_lambda, kernel)["phi_direct"],
        "claimed_upper": claims["t_mix_upper"],
        "claimed_lower": claims["t_mix_lower"],
    }
    if mixing:
        out["t_mix"] = exact_mixing_time(kernel, pi, eps, t_max).t_mix
    if len(space) <= cut_cap:
        out["phi_min"] = conductance_exact(kernel, pi, cut_cap)[0]
    return out

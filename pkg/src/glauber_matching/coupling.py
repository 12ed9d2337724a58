"""
Two couplings of the matching chain and exact one-step analysis of them.

``paper_faithful`` draws one edge; if it is insertable in both copies (an edge
already present counts as insertable) both copies follow one shared coin,
otherwise the edge is removed wherever it is present and nothing else
happens.  ``synchronous`` shares the edge and the coin and lets each copy
perform its own single-chain update.  The first contracts the
symmetric-difference distance by exactly (1 - 1/m) per step but its
coordinates are not copies of the chain; the second has the right
marginals and does not contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainParams, fugacity_split
from .errors import CapacityError
from .exact import Kernel, StateSpace, build_kernel
from .matching import Matching, phi

VARIANTS = ("paper_faithful", "synchronous")
ALIASES = {"a": "paper_faithful", "b": "synchronous"}
DEFAULT_PAIR_CAP = 1_000_000
TOL = 1e-12


def resolve_variant(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in VARIANTS:
        raise ValueError(f"unknown coupling variant {name!r}")
    return name


@dataclass
class CoupledPair:
    first: Matching
    second: Matching

    @property
    def phi(self) -> int:
        return phi(self.first, self.second)

    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.first.key(), self.second.key()

    def copy(self) -> "CoupledPair":
        return CoupledPair(self.first.copy(), self.second.copy())


def _chain_update(mt: Matching, e: int, add: bool) -> None:
    if add:
        if mt.can_insert(e):
            mt.insert(e)
    else:
        mt.remove(e)


def apply_coupled(pair: CoupledPair, e: int, add: bool, variant: str) -> CoupledPair:
    """Successor of ``pair`` given the drawn edge and coin (new object)."""
    out = pair.copy()
    if variant == "synchronous":
        _chain_update(out.first, e, add)
        _chain_update(out.second, e, add)
        return out
    ins_a = out.first.can_insert(e)
    ins_b = out.second.can_insert(e)
    if ins_a and ins_b:
        _chain_update(out.first, e, add)
        _chain_update(out.second, e, add)
    elif ins_a or ins_b:
        # at most one side holds e; drop it there, the other side idles
        out.first.remove(e)
        out.second.remove(e)
    return out


def coupled_step(pair: CoupledPair, variant: str, params: ChainParams,
                 rng: np.random.Generator) -> CoupledPair:
    variant = resolve_variant(variant)
    e = int(rng.integers(pair.first.graph.m))
    add = bool(rng.random() < params.p_add)
    return apply_coupled(pair, e, add, variant)


def exact_joint(pair: CoupledPair, variant: str, log2_lambda: float) -> dict:
    """Distribution over successor pairs, keyed by (first key, second key)."""
    variant = resolve_variant(variant)
    m = pair.first.graph.m
    p_add, p_remove = fugacity_split(log2_lambda)
    atoms: dict = {}
    for e in range(m):
        for add, w in ((True, p_add), (False, p_remove)):
            nxt = apply_coupled(pair, e, add, variant).key()
            atoms[nxt] = atoms.get(nxt, 0.0) + w / m
    return atoms


def expected_phi(pair: CoupledPair, variant: str, log2_lambda: float) -> float:
    total = 0.0
    for (a, b), w in exact_joint(pair, variant, log2_lambda).items():
        total += w * len(set(a) ^ set(b))
    return total


# -- bitmask engine for exhaustive sweeps --------------------------------------

class _Masks:
    """State i of ``space`` as (edge bitmask, vertex bitmask)."""

    def __init__(self, space: StateSpace):
        g = space.graph
        self.vb = [(1 << u) | (1 << v) for u, v in g.edges]
        self.em = []
        self.vm = []
        for key in space.keys:
            em = vm = 0
            for e in key:
                em |= 1 << e
                vm |= self.vb[e]
            self.em.append(em)
            self.vm.append(vm)
        self.index = {em: i for i, em in enumerate(self.em)}

    def update(self, i: int, e: int, add: bool) -> int:
        em, vm = self.em[i], self.vm[i]
        bit = 1 << e
        if add:
            if em & bit or vm & self.vb[e]:
                return i
            return self.index[em | bit]
        if em & bit:
            return self.index[em ^ bit]
        return i

    def insertable(self, i: int, e: int) -> bool:
        return bool(self.em[i] >> e & 1) or not (self.vm[i] & self.vb[e])

    def successors(self, i: int, j: int, variant: str, p_add: float, p_remove: float,
                   m: int) -> dict:
        atoms: dict = {}
        for e in range(m):
            for add, w in ((True, p_add), (False, p_remove)):
                if variant == "synchronous":
                    nxt = (self.update(i, e, add), self.update(j, e, add))
                else:
                    ia, ib = self.insertable(i, e), self.insertable(j, e)
                    if ia and ib:
                        nxt = (self.update(i, e, add), self.update(j, e, add))
                    elif ia or ib:
                        nxt = (self.update(i, e, False), self.update(j, e, False))
                    else:
                        nxt = (i, j)
                atoms[nxt] = atoms.get(nxt, 0.0) + w / m
        return atoms

    def distance(self, i: int, j: int) -> int:
        return (self.em[i] ^ self.em[j]).bit_count()


@dataclass
class ContractionReport:
    variant: str
    beta: float
    pairs: np.ndarray            # (N, 2) state indices
    phi_before: np.ndarray
    expected_phi_after: np.ndarray
    bound: np.ndarray
    violation: np.ndarray

    @property
    def violations(self) -> int:
        return int(self.violation.sum())

    def worst(self) -> tuple[int, int, float]:
        """Pair with the largest excess over the bound, and that excess."""
        excess = self.expected_phi_after - self.bound
        r = int(np.argmax(excess))
        return int(self.pairs[r, 0]), int(self.pairs[r, 1]), float(excess[r])

    def expected_for(self, i: int, j: int) -> float:
        hit = np.flatnonzero((self.pairs[:, 0] == i) & (self.pairs[:, 1] == j))
        return float(self.expected_phi_after[hit[0]])


def _check_pairs(space: StateSpace, pair_cap: int) -> None:
    if len(space) ** 2 > pair_cap:
        raise CapacityError(f"{len(space)}^2 pairs exceeds the pair cap {pair_cap}",
                            partial=len(space))


def contraction_sweep(space: StateSpace, variant: str, log2_lambda: float,
                      pair_cap: int = DEFAULT_PAIR_CAP) -> ContractionReport:
    """Exact E[phi after one step] for every ordered pair of states."""
    variant = resolve_variant(variant)
    _check_pairs(space, pair_cap)
    m = space.graph.m
    p_add, p_remove = fugacity_split(log2_lambda)
    masks = _Masks(space)
    beta = 1 - 1 / m
    n = len(space)
    pairs = np.empty((n * n, 2), dtype=np.int64)
    before = np.empty(n * n)
    after = np.empty(n * n)
    r = 0
    for i in range(n):
        for j in range(n):
            pairs[r] = i, j
            before[r] = masks.distance(i, j)
            after[r] = sum(w * masks.distance(a, b) for (a, b), w in
                           masks.successors(i, j, variant, p_add, p_remove, m).items())
            r += 1
    bound = beta * before
    return ContractionReport(variant, beta, pairs, before, after, bound, after > bound + TOL)


@dataclass
class MarginalReport:
    variant: str
    deviations: np.ndarray      # (N, N, 2): TV of first / second marginal
    witness: tuple[int, int, str]

    @property
    def global_max(self) -> float:
        return float(self.deviations.max()) if self.deviations.size else 0.0


def marginal_deviation(space: StateSpace, variant: str, log2_lambda: float,
                       kernel: Kernel | None = None,
                       pair_cap: int = DEFAULT_PAIR_CAP) -> MarginalReport:
    """TV between each coordinate's one-step law and the chain's kernel row.

    Ties for the witness go to the lexicographically smallest (i, j, side).
    """
    variant = resolve_variant(variant)
    _check_pairs(space, pair_cap)
    if kernel is None:
        kernel = build_kernel(space, log2_lambda)
    dense = kernel.dense()
    m = space.graph.m
    p_add, p_remove = fugacity_split(log2_lambda)
    masks = _Masks(space)
    n = len(space)
    dev = np.zeros((n, n, 2))
    for i in range(n):
        for j in range(n):
            first = np.zeros(n)
            second = np.zeros(n)
            for (a, b), w in masks.successors(i, j, variant, p_add, p_remove, m).items():
                first[a] += w
                second[b] += w
            dev[i, j, 0] = 0.5 * np.abs(first - dense[i]).sum()
            dev[i, j, 1] = 0.5 * np.abs(second - dense[j]).sum()
    flat = int(np.argmax(dev))
    i, j, s = np.unravel_index(flat, dev.shape)
    return MarginalReport(variant, dev, (int(i), int(j), ("first", "second")[s]))


def phi_path(sigma: Matching, eta: Matching) -> list[Matching]:
    """Unit-distance path from sigma to eta: drop sigma-only edges, then add
    eta-only edges, each in ascending edge id."""
    path = [sigma.copy()]
    cur = sigma.copy()
    for e in sigma.edges():
        if e not in eta:
            cur.remove(e)
            path.append(cur.copy())
    for e in eta.edges():
        if e not in sigma:
            cur.insert(e)
            path.append(cur.copy())
    return path


def coupled_simulation(pair: CoupledPair, variant: str, params: ChainParams,
                       rng: np.random.Generator, cap: int = 1_000_000) -> tuple[int, bool]:
    """Steps until the copies coincide; ``(cap, True)`` if censored."""
    variant = resolve_variant(variant)
    cur = pair.copy()
    for t in range(cap):
        if cur.first == cur.second:
            return t, False
        cur = coupled_step(cur, variant, params, rng)
    return cap, cur.first != cur.second


def expected_coalescence(space: StateSpace, variant: str, log2_lambda: float,
                         start: tuple[int, int]) -> float:
    """Mean coalescence time from ``start`` by solving the absorbing-chain
    equations on the pairs reachable from it."""
    variant = resolve_variant(variant)
    m = space.graph.m
    p_add, p_remove = fugacity_split(log2_lambda)
    masks = _Masks(space)
    order = [start]
    seen = {start: 0}
    rows = []
    for pr in order:
        atoms = masks.successors(pr[0], pr[1], variant, p_add, p_remove, m)
        rows.append(atoms)
        for nxt in atoms:
            if nxt not in seen:
                seen[nxt] = len(order)
                order.append(nxt)
    transient = [k for k, pr in enumerate(order) if pr[0] != pr[1]]
    if start[0] == start[1]:
        return 0.0
    pos = {k: r for r, k in enumerate(transient)}
    a = np.eye(len(transient))
    for k in transient:
        for nxt, w in rows[k].items():
            c = seen[nxt]
            if c in pos:
                a[pos[k], pos[c]] -= w
    times = np.linalg.solve(a, np.ones(len(transient)))
    return float(times[pos[0]])


def coupling_report(space: StateSpace, variant: str, log2_lambda: float,
                    pair_cap: int = DEFAULT_PAIR_CAP) -> dict:
    variant = resolve_variant(variant)
    contraction = contraction_sweep(space, variant, log2_lambda, pair_cap)
    marginal = marginal_deviation(space, variant, log2_lambda, pair_cap=pair_cap)
    i, j, side = marginal.witness
    return {
        "variant": variant,
        "pairs": int(len(contraction.pairs)),
        "max_marginal_tv": marginal.global_max,
        "witness": [i, j, side],
        "contraction_violations": contraction.violations,
        "beta": contraction.beta,
    }

"""
The single-edge Glauber chain on matchings, the RandMatching driver, its
best-of-R wrapper, and calculators for the claimed mixing/success bounds.

Fugacity is carried as ``log2_lambda`` so that lambda = 2**m never has to be
formed; the chain only needs the add/remove split, computed directly.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _loop
from .graph import Graph
from .matching import Matching

CHUNK = 1 << 16
MASK64 = (1 << 64) - 1


def fugacity_split(log2_lambda: float) -> tuple[float, float]:
    """Return ``(p_add, p_remove)`` = (lambda/(1+lambda), 1/(1+lambda)).

    Never overflows: for x >= 0 uses r = 2**-x, otherwise r = 2**x.
    """
    x = float(log2_lambda)
    if x >= 0:
        r = 2.0 ** -x
        return 1.0 / (1.0 + r), r / (1.0 + r)
    r = 2.0 ** x
    return r / (1.0 + r), 1.0 / (1.0 + r)


@dataclass(frozen=True)
class ChainParams:
    log2_lambda: float
    steps: int
    seed: int = 0
    restarts: int = 1

    @classmethod
    def paper_defaults(cls, g: Graph, seed: int = 0) -> "ChainParams":
        """lambda = 2^m, T = ceil(10 m ln n), R = ceil(10 ln n) (at least 1)."""
        ln_n = math.log(g.n)
        return cls(
            log2_lambda=float(g.m),
            steps=math.ceil(10 * g.m * ln_n),
            seed=seed,
            restarts=max(1, math.ceil(10 * ln_n)),
        )

    @property
    def p_add(self) -> float:
        return fugacity_split(self.log2_lambda)[0]

    @property
    def p_remove(self) -> float:
        return fugacity_split(self.log2_lambda)[1]


@dataclass
class RunReport:
    final: Matching
    steps_taken: int
    accepted_adds: int
    accepted_removes: int
    rejects: int
    seed: int
    wall_nanos: int = 0

    @property
    def found_size(self) -> int:
        return self.final.size

    def to_json(self) -> dict:
        return {
            "size": self.found_size,
            "steps": self.steps_taken,
            "adds": self.accepted_adds,
            "removes": self.accepted_removes,
            "rejects": self.rejects,
            "seed": self.seed,
            "matching": list(self.final.edges()),
        }


def step(state: Matching, params: ChainParams, rng: np.random.Generator) -> Matching:
    """One transition, applied to ``state`` in place (which is returned).

    Draws the edge first, then the add/remove coin.
    """
    g = state.graph
    e = int(rng.integers(g.m))
    if rng.random() < params.p_add:
        if state.can_insert(e):
            state.insert(e)
    else:
        state.remove(e)
    return state


def rand_matching(g: Graph, params: ChainParams, rng: np.random.Generator | None = None,
                  *, jit: bool = True) -> RunReport:
    """Run the chain for ``params.steps`` steps from the empty matching.

    Random draws come in blocks of ``CHUNK`` edge ids followed by the same
    number of coins, so the result depends only on the seed (or ``rng``
    state) and is identical with and without ``jit``.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    run = _loop.run_chunk if jit else _loop.run_chunk_py
    ea = g.edge_array()
    eu = np.ascontiguousarray(ea[:, 0])
    ev = np.ascontiguousarray(ea[:, 1])
    occ = np.full(g.n, -1, dtype=np.int64)
    in_set = np.zeros(g.m, dtype=np.uint8)
    counters = np.zeros(3, dtype=np.int64)
    p_add = params.p_add
    t0 = time.perf_counter_ns()
    left = params.steps
    if g.m == 0:
        counters[2] = left
        left = 0
    while left > 0:
        c = min(CHUNK, left)
        draws = rng.integers(0, g.m, size=c, dtype=np.int64)
        coins = rng.random(c)
        run(eu, ev, occ, in_set, draws, coins, p_add, counters)
        left -= c
    wall = time.perf_counter_ns() - t0
    final = Matching(g, np.flatnonzero(in_set).tolist())
    return RunReport(final, params.steps, int(counters[0]), int(counters[1]),
                     int(counters[2]), params.seed, wall)


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, i: int) -> int:
    """Seed of restart ``i``: master XOR splitmix64(i)."""
    return (master_seed & MASK64) ^ splitmix64(i)


def amplified_solve(g: Graph, params: ChainParams, master_seed: int, threads: int = 1,
                    *, jit: bool = True) -> tuple[Matching, list[RunReport]]:
    """Best of ``params.restarts`` independent runs; ties go to the lowest index."""
    if params.restarts < 1:
        raise ValueError("restarts must be >= 1")
    jobs = [replace(params, seed=derive_seed(master_seed, i)) for i in range(params.restarts)]

    def one(p):
        return rand_matching(g, p, jit=jit)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(one, jobs))
    else:
        reports = [one(p) for p in jobs]
    best = max(range(len(reports)), key=lambda i: (reports[i].found_size, -i))
    return reports[best].final, reports


def claimed_bounds(n: int, m: int, k: int) -> dict:
    """The mixing and success bounds as claimed, natural log throughout.

    ``diameter_D`` is 2n as used in the upper-bound argument even though the
    symmetric-difference distance never exceeds n.
    """
    if m < 1 or k < 1:
        raise ValueError("need m >= 1 and k >= 1")
    return {
        "t_mix_upper": m * math.log(4 * math.e * n),
        "t_mix_lower": m / k,
        "success_lb": 20 / 189,
        "beta": 1 - 1 / m,
        "diameter_D": 2 * n,
    }

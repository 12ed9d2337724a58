"""Throughput measurements for the compiled chain loop."""

from __future__ import annotations

import statistics
from dataclasses import replace

from . import _loop
from .chain import ChainParams, rand_matching
from .graph import Graph, gnp

SCALING_SIZES = (1_000, 10_000, 100_000)


def bench(g: Graph, params: ChainParams, reps: int = 3) -> dict:
    """Run ``reps`` identical runs and report steps/second per run and the median."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    _loop.warmup()
    rows = []
    for r in range(reps):
        rep = rand_matching(g, params)
        secs = rep.wall_nanos / 1e9
        rows.append({
            "rep": r,
            "n": g.n,
            "m": g.m,
            "steps": rep.steps_taken,
            "size": rep.found_size,
            "adds": rep.accepted_adds,
            "removes": rep.accepted_removes,
            "rejects": rep.rejects,
            "wall_seconds": secs,
            "steps_per_second": rep.steps_taken / secs if secs > 0 else float("inf"),
            "ns_per_step": rep.wall_nanos / rep.steps_taken if rep.steps_taken else 0.0,
        })
    return {
        "rows": rows,
        "median_steps_per_second": statistics.median(r["steps_per_second"] for r in rows),
        "median_ns_per_step": statistics.median(r["ns_per_step"] for r in rows),
    }


def linearity(g: Graph, params: ChainParams, reps: int = 5) -> dict:
    """Median wall time at T and 2T; the ratio should sit near 2."""
    base = bench(g, params, reps)
    double = bench(g, replace(params, steps=2 * params.steps), reps)
    t1 = statistics.median(r["wall_seconds"] for r in base["rows"])
    t2 = statistics.median(r["wall_seconds"] for r in double["rows"])
    return {"steps": params.steps, "wall_T": t1, "wall_2T": t2, "ratio": t2 / t1}


def step_scaling(sizes=SCALING_SIZES, avg_degree: float = 10.0, steps: int = 10_000_000,
                 seed: int = 0, reps: int = 3) -> dict:
    """Per-step cost on sparse G(n, d/n) graphs of increasing size.

    lambda = 2^m keeps the chain near a maximal matching, which is the
    regime the solver runs in.
    """
    per = []
    for n in sizes:
        g = gnp(n, min(1.0, avg_degree / n), seed)
        params = ChainParams(log2_lambda=float(g.m), steps=steps, seed=seed)
        res = bench(g, params, reps)
        per.append({"n": n, "m": g.m, "ns_per_step": res["median_ns_per_step"],
                    "steps_per_second": res["median_steps_per_second"]})
    costs = [p["ns_per_step"] for p in per]
    return {"sizes": per, "max_over_min": max(costs) / min(costs)}

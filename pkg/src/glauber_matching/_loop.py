"""Inner loop of the single-edge chain, compiled with numba when available."""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def run_chunk(eu, ev, occ, in_set, edge_draws, coins, p_add, counters):
    """Apply ``len(edge_draws)`` chain steps in place.

    counters: int64[3] = accepted adds, accepted removes, rejects.
    """
    adds = 0
    removes = 0
    rejects = 0
    for t in range(edge_draws.shape[0]):
        e = edge_draws[t]
        if coins[t] < p_add:
            if in_set[e]:
                rejects += 1
            else:
                u = eu[e]
                v = ev[e]
                if occ[u] < 0 and occ[v] < 0:
                    in_set[e] = 1
                    occ[u] = e
                    occ[v] = e
                    adds += 1
                else:
                    rejects += 1
        else:
            if in_set[e]:
                in_set[e] = 0
                occ[eu[e]] = -1
                occ[ev[e]] = -1
                removes += 1
            else:
                rejects += 1
    counters[0] += adds
    counters[1] += removes
    counters[2] += rejects


run_chunk_py = run_chunk
if njit is not None:
    run_chunk = njit(cache=True, nogil=True)(run_chunk)


def warmup() -> None:
    eu = np.zeros(1, np.int64)
    ev = np.ones(1, np.int64)
    occ = np.full(2, -1, np.int64)
    in_set = np.zeros(1, np.uint8)
    run_chunk(eu, ev, occ, in_set, np.zeros(1, np.int64), np.zeros(1), 0.5,
              np.zeros(3, np.int64))

"""Measured behaviour that disagrees with the textbook claims.

These pin down what the exact machinery reports, so a regression in
either the chain or the analysis shows up here.
"""

import pytest

from glauber_matching import exact
from glauber_matching.chain import ChainParams, claimed_bounds
from glauber_matching.exact import StateSpace, build_kernel, gibbs
from glauber_matching.graph import Graph, path

# A G(8, 1/2) draw from an earlier sampler; kept because its
# finite-T success probability falls below 20/189.
COUNTEREXAMPLE = Graph.from_edges(8, [
    (0, 2), (0, 5), (0, 7), (1, 7), (2, 3), (2, 4), (2, 6), (2, 7),
    (3, 4), (3, 5), (3, 7), (4, 5), (4, 7), (5, 6), (6, 7),
])


def max_mass_after(space, x, steps):
    pt = exact.evolve(build_kernel(space, x), exact.point_mass(len(space), 0), steps)
    return float(sum(pt[i] for i in space.max_states()))


def test_counterexample_shape():
    space = StateSpace.build(COUNTEREXAMPLE)
    assert len(space) == 122
    assert tuple(space.size_counts.counts) == (1, 15, 56, 48, 2)


def test_counterexample_success_below_claim():
    g = COUNTEREXAMPLE
    space = StateSpace.build(g)
    params = ChainParams.paper_defaults(g)
    assert params.steps == 312
    pr = max_mass_after(space, params.log2_lambda, params.steps)
    assert pr == pytest.approx(0.10009, abs=5e-5)
    assert pr < 20 / 189
    # the stationary mass alone is fine; the chain just has not mixed
    assert exact.gibbs_max_mass(space, params.log2_lambda) >= 10 / 21


def test_p4_mixing_exceeds_claimed_upper():
    g = path(4)
    space = StateSpace.build(g)
    rep = exact.exact_mixing_time(build_kernel(space, 3.0), gibbs(space, 3.0))
    assert rep.t_mix == 61
    assert rep.t_mix > claimed_bounds(g.n, g.m, 2)["t_mix_upper"]

import itertools
import math

import numpy as np
import pytest

from glauber_matching import graph
from glauber_matching.chain import ChainParams, fugacity_split
from glauber_matching.coupling import (CoupledPair, _Masks, apply_coupled, contraction_sweep,
                                       coupled_simulation, coupled_step, coupling_report,
                                       exact_joint, expected_coalescence, expected_phi,
                                       marginal_deviation, phi_path, resolve_variant)
from glauber_matching.errors import CapacityError
from glauber_matching.exact import StateSpace, build_kernel
from glauber_matching.matching import Matching, check_matching, enumerate_matchings, phi

from conftest import SUITE

VARIANTS = ("paper_faithful", "synchronous")


def pair(g, a, b):
    return CoupledPair(Matching(g, a), Matching(g, b))


def test_variant_aliases():
    assert resolve_variant("a") == "paper_faithful"
    assert resolve_variant("b") == "synchronous"
    with pytest.raises(ValueError):
        resolve_variant("c")


def test_case_two_by_hand():
    g = graph.path(3)
    pr = pair(g, [0], [1])
    for add in (True, False):
        assert apply_coupled(pr, 0, add, "paper_faithful").key() == ((), (1,))
        assert apply_coupled(pr, 1, add, "paper_faithful").key() == ((0,), ())
    assert all(apply_coupled(pr, e, c, "paper_faithful").phi == 1
               for e in (0, 1) for c in (True, False))


def test_case_one_by_hand():
    pr = pair(graph.path(3), [0], [])
    assert apply_coupled(pr, 0, True, "paper_faithful").key() == ((0,), (0,))
    assert apply_coupled(pr, 0, False, "paper_faithful").key() == ((), ())


@pytest.mark.parametrize("variant", VARIANTS)
def test_diagonal_stays_diagonal(variant, suite_graph):
    _, g = suite_graph
    for mt in enumerate_matchings(g):
        pr = CoupledPair(mt, mt.copy())
        for e in range(g.m):
            for add in (True, False):
                nxt = apply_coupled(pr, e, add, variant)
                assert nxt.first == nxt.second
                check_matching(nxt.first)


def test_coupled_step_random():
    g = graph.path(5)
    rng = np.random.default_rng(0)
    pr = pair(g, [0, 2], [1, 3])
    params = ChainParams(1.0, 1)
    for _ in range(200):
        pr = coupled_step(pr, "a", params, rng)
        check_matching(pr.first)
        check_matching(pr.second)


def test_exact_joint_examples():
    g = graph.path(3)
    joint = exact_joint(pair(g, [0], [1]), "paper_faithful", 0.0)
    assert joint == pytest.approx({((), (1,)): 0.5, ((0,), ()): 0.5}, abs=1e-15)
    k2 = graph.complete(2)
    for variant in VARIANTS:
        for x in (-1.0, 0.0, 5.0):
            p_add, p_rem = fugacity_split(x)
            joint = exact_joint(pair(k2, [], []), variant, x)
            assert joint == pytest.approx({((), ()): p_rem, ((0,), (0,)): p_add}, abs=1e-15)


@pytest.mark.parametrize("variant", VARIANTS)
def test_exact_joint_mass_and_support(variant, suite_graph):
    _, g = suite_graph
    ms = enumerate_matchings(g)[:12]
    for a, b in itertools.product(ms, repeat=2):
        joint = exact_joint(CoupledPair(a, b), variant, 1.0)
        assert len(joint) <= 2 * g.m
        assert abs(sum(joint.values()) - 1) <= 1e-12


@pytest.mark.parametrize("variant", VARIANTS)
def test_mask_engine_matches_object_engine(variant):
    # the bitmask sweep engine and the Matching-based step agree atom by atom
    for name in ("P4", "C4", "K4", "star5"):
        g = SUITE[name]
        sp_ = StateSpace.build(g)
        masks = _Masks(sp_)
        p_add, p_rem = fugacity_split(1.0)
        for i, j in itertools.product(range(len(sp_)), repeat=2):
            fast = masks.successors(i, j, variant, p_add, p_rem, g.m)
            slow = exact_joint(CoupledPair(sp_.matching(i), sp_.matching(j)), variant, 1.0)
            assert {(sp_.keys[a], sp_.keys[b]): w for (a, b), w in fast.items()} == \
                pytest.approx(slow, abs=1e-15)


def test_expected_phi_examples():
    p3, p4 = graph.path(3), graph.path(4)
    assert expected_phi(pair(p3, [0], [1]), "paper_faithful", 0.0) == pytest.approx(1.0, abs=1e-15)
    assert expected_phi(pair(p3, [0], []), "paper_faithful", 0.0) == pytest.approx(0.5, abs=1e-15)
    assert expected_phi(pair(p4, [1], [0]), "synchronous", 0.0) == pytest.approx(11 / 6, abs=1e-15)


def test_contraction_paper_faithful_exact(suite_graph):
    _, g = suite_graph
    sp_ = StateSpace.build(g)
    for x in (-1.0, 0.0, float(g.m)):
        rep = contraction_sweep(sp_, "paper_faithful", x)
        assert rep.violations == 0
        assert np.max(np.abs(rep.expected_phi_after - (1 - 1 / g.m) * rep.phi_before)) <= 1e-12
        diag = rep.pairs[:, 0] == rep.pairs[:, 1]
        assert np.all(rep.expected_phi_after[diag] == 0)


def test_contraction_synchronous_fails_on_p4():
    sp_ = StateSpace.build(graph.path(4))
    rep = contraction_sweep(sp_, "synchronous", 0.0)
    assert rep.violations >= 1
    assert rep.expected_for(sp_.index[(1,)], sp_.index[(0,)]) == pytest.approx(11 / 6, abs=1e-12)


def test_sweep_pair_cap():
    with pytest.raises(CapacityError):
        contraction_sweep(StateSpace.build(SUITE["gnp8"]), "a", 0.0, pair_cap=1000)


def test_marginal_paper_faithful_p3():
    sp_ = StateSpace.build(graph.path(3))
    rep = marginal_deviation(sp_, "paper_faithful", 0.0)
    i, j = sp_.index[(0,)], sp_.index[(1,)]
    assert rep.deviations[i, j, 0] == pytest.approx(0.25, abs=1e-12)
    assert rep.global_max == pytest.approx(0.25, abs=1e-12)
    # smallest (i, j, side) attaining the max
    assert rep.witness == (0, 1, "first")


def test_marginal_diagonal_is_exact(suite_graph):
    _, g = suite_graph
    sp_ = StateSpace.build(g)
    rep = marginal_deviation(sp_, "paper_faithful", 1.0)
    assert np.all(rep.deviations[np.arange(len(sp_)), np.arange(len(sp_))] <= 1e-15)


def test_marginal_synchronous_exact(suite_graph):
    _, g = suite_graph
    sp_ = StateSpace.build(g)
    for x in (-1.0, 0.0, float(g.m)):
        assert marginal_deviation(sp_, "synchronous", x).global_max <= 1e-12


def test_marginal_defect_on_adjacent_edges():
    for name in ("P3", "P4", "C3", "K4", "star5"):
        sp_ = StateSpace.build(SUITE[name])
        assert marginal_deviation(sp_, "paper_faithful", 0.0).global_max > 0.2


def test_no_variant_has_both_properties_on_p4():
    sp_ = StateSpace.build(graph.path(4))
    results = {}
    for v in VARIANTS:
        results[v] = (marginal_deviation(sp_, v, 0.0).global_max <= 1e-12,
                      contraction_sweep(sp_, v, 0.0).violations == 0)
    assert results == {"paper_faithful": (False, True), "synchronous": (True, False)}


def test_phi_path_examples():
    p3, p4 = graph.path(3), graph.path(4)
    path = phi_path(Matching(p3, [0]), Matching(p3, [1]))
    assert [m.edges() for m in path] == [(0,), (), (1,)]
    mt = Matching(p4, [1])
    assert [m.edges() for m in phi_path(mt, mt)] == [(1,)]
    path = phi_path(Matching(p4, [0, 2]), Matching(p4, [1]))
    assert len(path) - 1 == 3
    assert sum(phi(a, b) for a, b in zip(path, path[1:])) == 3


@pytest.mark.parametrize("name", ["P5", "C4", "K4"])
def test_phi_path_all_pairs(name):
    ms = enumerate_matchings(SUITE[name])
    for a, b in itertools.product(ms, repeat=2):
        path = phi_path(a, b)
        assert path[0] == a and path[-1] == b
        assert len(path) - 1 == phi(a, b)
        for x, y in zip(path, path[1:]):
            assert phi(x, y) == 1
            check_matching(y)


def test_coalescence_diagonal_and_censor():
    g = graph.path(3)
    params = ChainParams(0.0, 1)
    rng = np.random.default_rng(1)
    assert coupled_simulation(pair(g, [0], [0]), "a", params, rng) == (0, False)
    assert coupled_simulation(pair(g, [0], [1]), "a", params, rng, cap=0) == (0, True)


def test_coalescence_time_matches_absorption():
    g = graph.path(3)
    sp_ = StateSpace.build(g)
    start = (sp_.index[(0,)], sp_.index[(1,)])
    want = expected_coalescence(sp_, "paper_faithful", 0.0, start)
    # two edges; each step removes one differing edge: 1 + (from phi = 1) 2 = 3
    assert want == pytest.approx(3.0, abs=1e-12)
    params = ChainParams(0.0, 1)
    rng = np.random.default_rng(2024)
    runs = 100_000
    times = np.array([coupled_simulation(pair(g, [0], [1]), "a", params, rng)[0]
                      for _ in range(runs)])
    sd = times.std() / math.sqrt(runs)
    assert abs(times.mean() - want) < 3 * sd


def test_coupling_report_shape():
    sp_ = StateSpace.build(graph.path(3))
    rep = coupling_report(sp_, "a", 0.0)
    assert rep == {"variant": "paper_faithful", "pairs": 9, "max_marginal_tv": pytest.approx(0.25),
                   "witness": [0, 1, "first"], "contraction_violations": 0, "beta": 0.5}

import itertools
import random

import pytest

from tickforge import checkers, generators, oracle
from tickforge.syntax import parse_spec

from conftest import SESSIONS, conf, tf


def test_tprime_horizon_counts(corpus):
    tp = corpus["Tprime"].spec
    assert [len(oracle.oracle_graph(tp, None, h)) for h in range(4)] == [1, 5, 6, 7]


def test_horizon_zero_instantaneous_only(corpus):
    g = oracle.oracle_graph(corpus["Tdoubleprime"].spec, None, 0)
    assert {s[0] for s in g.states} == {0}
    assert len(g) == 3  # {A@0}, {B@1}, {C@1}


def test_compress_shifts_and_caps():
    from tickforge.core import Fact
    a = (10, ((Fact("A", ()), 0), (Fact("B", ()), 9)))
    assert oracle.compress(a, 1) == (3, ((Fact("A", ()), 0), (Fact("B", ()), 2)))
    with pytest.raises(ValueError):
        oracle.compress((0, ((Fact("A", ()), 5),)), 1)


def test_naive_criticality(corpus):
    from tickforge.core import Fact
    spec = corpus["L_not_S_pts"].spec
    assert oracle.is_critical_naive(spec, (0, ((Fact("B", ()), 0), (Fact("D", ()), 1))))
    assert not oracle.is_critical_naive(spec, (0, ((Fact("A", ()), 0), (Fact("B", ()), 0))))


@pytest.mark.parametrize("name", ["Tprime", "L_not_S_pts", "Tdoubleprime", "drone", "sat_np", "sat_conp"])
def test_agrees_with_checkers(corpus, name):
    e = corpus[name]
    for p in "ZSVL":
        assert oracle.oracle_check(e.spec, None, p) == checkers.check(e.spec, p).holds == e.expected[p]


@pytest.mark.parametrize("name", ["Tprime", "Tdoubleprime", "drone", "sat_np"])
def test_bounded_agreement(corpus, name):
    spec = corpus[name].spec
    for n, p in itertools.product((1, 2, 3), "ZSL"):
        assert oracle.oracle_check(spec, None, p, n) == checkers.check(spec, p, ticks=n).holds


def test_literal_l_not_s_all_false():
    spec = parse_spec(generators.L_NOT_S_LITERAL)
    for p in "ZSVL":
        assert oracle.oracle_check(spec, None, p) is False
        assert checkers.check(spec, p).holds is False


def test_quotient_matches_checker_node_count(corpus):
    for name in ("Tprime", "Tdoubleprime", "drone"):
        spec = corpus[name].spec
        assert oracle.count_quotient_states(spec) == len(checkers.build_graph(spec))


def test_empty_critical_s_equals_z():
    rng = random.Random(11)
    for _ in range(20):
        spec = generators.random_spec(rng)
        if len(spec.critical):
            continue
        assert oracle.oracle_check(spec, None, "S") == oracle.oracle_check(spec, None, "Z")


def test_refuses_nonces():
    with pytest.raises(ValueError):
        oracle.oracle_check(parse_spec(SESSIONS), None, "Z")


def test_brute_force_sat():
    assert oracle.brute_force_sat([(1, 1, 1)])
    assert not oracle.brute_force_sat([(1, 1, 1), (-1, -1, -1)])
    assert oracle.brute_force_sat([(1, 2, -1), (-2, -2, 1)])


def test_budget():
    with pytest.raises(oracle.OracleBudget):
        oracle.oracle_graph(generators.gen_drone(), None, 3, max_states=5)


def test_prop_names(corpus):
    spec = corpus["Tdoubleprime"].spec
    assert oracle.oracle_check(spec, None, "nZ", 2) == oracle.oracle_check(spec, None, "z", 2)

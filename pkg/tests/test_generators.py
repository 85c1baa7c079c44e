import random

import pytest

from tickforge import checkers, generators, oracle
from tickforge.syntax import analyze, parse_spec


def test_corpus_names(corpus):
    assert list(corpus) == ["Tprime", "L_not_S_pts", "Tdoubleprime", "drone", "sat_np", "sat_conp"]
    assert corpus["Tprime"].expected == {"Z": True, "S": True, "V": True, "L": False, "progressing": False}
    assert corpus["L_not_S_pts"].expected == {"Z": True, "S": False, "V": True, "L": True, "progressing": True}
    assert corpus["Tdoubleprime"].expected == {"Z": True, "S": False, "V": False, "L": False, "progressing": True}


def test_corpus_sources_parse_to_specs(corpus):
    for e in corpus.values():
        assert parse_spec(e.source).rules == e.spec.rules


def test_drone_rule_families():
    spec = generators.gen_drone()
    assert spec.expansion == {"move_north": 2, "move_south": 2, "move_west": 2, "move_east": 2,
                              "charge": 2, "click_p1": 2}
    assert len(spec.critical) == 2
    assert len(spec.initial) == 3


def test_drone_wind_and_strategy():
    windy = generators.gen_drone(wind=True)
    assert sum(r.name.startswith("wind_") for r in windy.rules) == 4
    lazy = generators.gen_drone(strategy=lambda action, ages: action != "charge")
    assert not any(r.name.startswith("charge") for r in lazy.rules)


@pytest.mark.parametrize("kw", [
    dict(point_coords=((5, 5),)),
    dict(e_max=0),
    dict(M=-1),
    dict(n_points=2, point_coords=((1, 1),)),
])
def test_drone_validation(kw):
    with pytest.raises(ValueError):
        generators.gen_drone(**kw)


def test_generated_specs_progressing():
    assert analyze(generators.gen_drone()).progressing
    spec, n = generators.gen_3sat([(1, -2, 3)])
    assert n == 2 and analyze(spec).progressing
    spec, n = generators.gen_3sat([(1, 1, 1), (2, 2, 2)], conp_variant=True)
    assert n == 4 and analyze(spec).progressing


def test_sat_initial_configuration():
    spec, _ = generators.gen_3sat([(1, -2, 2)])
    assert sorted(str(t) for t in spec.initial.items()) == ["I(1)@0", "Time@0", "V(x1)@0", "V(x2)@0"]
    conp, _ = generators.gen_3sat([(1, -2, 2)], conp_variant=True)
    assert "H(0)@0" in [str(t) for t in conp.initial.items()]


@pytest.mark.parametrize("bad", [[(1, 2)], [(1, 2, 0)], [(1, 2, 3, 4)]])
def test_malformed_clause(bad):
    with pytest.raises(ValueError):
        generators.gen_3sat(bad)


def test_sat_examples():
    spec, n = generators.gen_3sat([(1, 1, 1)])
    assert checkers.check_nZ(spec, n=n).holds
    spec, n = generators.gen_3sat([(1, 1, 1), (-1, -1, -1)])
    assert not checkers.check_nZ(spec, n=n).holds
    spec, n = generators.gen_3sat([(1, 1, 1)], conp_variant=True)
    assert not checkers.check_nS(spec, n=n).holds
    spec, n = generators.gen_3sat([(1, 1, 1), (-1, -1, -1)], conp_variant=True)
    assert checkers.check_nS(spec, n=n).holds


def test_sat_size_linear():
    sizes = []
    for c in range(1, 6):
        spec, _ = generators.gen_3sat([(1, 2, 3)] * c)
        sizes.append(len(spec.rules))
    diffs = {b - a for a, b in zip(sizes, sizes[1:])}
    assert diffs == {3}


def test_random_cnf_shape():
    rng = random.Random(0)
    for _ in range(50):
        cnf = generators.random_cnf(rng)
        assert 1 <= len(cnf) <= 4
        assert all(len(c) == 3 and all(1 <= abs(l) <= 4 for l in c) for c in cnf)


def test_random_specs_are_small_and_balanced():
    for seed in range(40):
        for prog in (False, True):
            spec = generators.random_spec(seed, progressing=prog)
            st = analyze(spec)
            assert st.balanced and st.m <= 4 and st.dmax <= 2
            assert len(spec.preds) <= 3
            if prog:
                assert st.progressing


def test_random_spec_deterministic():
    assert generators.random_source(random.Random(5)) == generators.random_source(random.Random(5))


def test_drone_frozen_against_oracle(corpus):
    spec = corpus["drone"].spec
    assert {p: oracle.oracle_check(spec, None, p) for p in "ZSVL"} == {
        "Z": True, "S": False, "V": True, "L": True}

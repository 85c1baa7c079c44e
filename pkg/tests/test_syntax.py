import pytest

from tickforge import generators
from tickforge.core import Constraint, Created, Fact, Plus, TPattern, Var
from tickforge.syntax import SpecError, analyze, parse_spec, print_spec

from conftest import PHOTO, SESSIONS


def test_photo_rule_elaborates():
    r = parse_spec(PHOTO).rule("click")
    n = lambda v: Var(v, "N")
    assert r.preserved == ()
    assert r.consumed == (
        TPattern(Fact("P", (Var("I", "Pt"), n("X"), n("Y"))), "T1"),
        TPattern(Fact("Dr", (Var("Id", "Id"), n("X"), n("Y"), Plus(n("E"), 1, 0, 20))), "T"),
    )
    assert r.created == (
        Created(Fact("P", (Var("I", "Pt"), n("X"), n("Y"))), 0),
        Created(Fact("Dr", (Var("Id", "Id"), n("X"), n("Y"), n("E"))), 1),
    )
    # T1 < T is stored as T > T1
    assert r.guard == (Constraint("T", ">", "T1", 0),)


def test_empty_rules_section():
    s = parse_spec("spec e; pred A; init { Time@0, A@0 }")
    assert s.rules == () or len(s.rules) == 0
    assert analyze(s).m == 2


def test_preserved_fact_detected():
    s = parse_spec("spec p; pred A; pred B; init { Time@0, A@0 } rule r: Time@T, A@T1 -> Time@T, A@T1, B@(T+1);")
    r = s.rule("r")
    assert [p.fact.pred for p in r.preserved] == ["A"]
    assert [c.fact.pred for c in r.created] == ["B"]


def _diag(text):
    with pytest.raises(SpecError) as e:
        parse_spec(text)
    return [str(d) for d in e.value.diagnostics]


def test_unbound_guard_variable():
    msgs = _diag("spec b; pred A; init { Time@0 }\nrule r: Time@T, A@T1 | { U > T } -> Time@T, A@T;\n")
    assert msgs == ["2:26: guard variable not in pre-condition: U"]


def test_fresh_on_lhs():
    msgs = _diag("spec b; sort N = nonce; pred S(N); init { Time@0 }\n"
                 "rule r: Time@T, S(X)@T1 -> exists X. Time@T, S(X)@T;\n")
    assert any("fresh variable X occurs on the left-hand side" in m for m in msgs)


@pytest.mark.parametrize("text, needle", [
    ("spec b; pred A; init { A@0 }", "Time"),
    ("spec b; pred A; init { Time@0, Time@1 }", "Time"),
    ("spec b; pred A(K); init { Time@0 }", "K"),
    ("spec b; pred A; init { Time@0, B@0 }", "B"),
    ("spec b; pred A; init { Time@0 } rule r: Time@T, A@T1 -> Time@T, A@T", "';'"),
])
def test_diagnostics(text, needle):
    msgs = _diag(text)
    assert msgs and any(needle in m for m in msgs)


def test_multiple_diagnostics_reported():
    msgs = _diag("spec b; pred A; init { Time@0, B@0 }\nrule r: Time@T, C@T1 -> Time@T, A@T;\n")
    assert len(msgs) >= 2


def test_macro_expansion_names_and_disabled_instances():
    s = parse_spec("spec m; sort N = 0..2; pred C(N); init { Time@0, C@0 }"
                   " rule up[D in 0..2]: Time@T, C(D)@T1 -> Time@T, C(D+1)@(T+1);".replace("C@0", "C(0)@0"))
    assert sorted(r.name for r in s.rules) == ["up__0", "up__1"]
    assert s.expansion == {"up": 2}


@pytest.mark.parametrize("name", ["Tprime", "L_not_S_pts", "Tdoubleprime", "drone", "sat_np", "sat_conp"])
def test_round_trip(corpus, name):
    spec = corpus[name].spec
    again = parse_spec(print_spec(spec))
    assert again.rules == spec.rules
    assert again.critical == spec.critical
    assert again.initial == spec.initial
    assert print_spec(again) == print_spec(spec)


def test_round_trip_nonces():
    s = parse_spec(SESSIONS)
    assert parse_spec(print_spec(s)).rules == s.rules


def test_analyze_drone_defaults():
    st = analyze(generators.gen_drone())
    assert (st.m, st.dmax, st.balanced, st.progressing) == (3, 1, True, True)
    # Dr(d1,2,2,3) is the largest fact: 1 + 1 + 3 + 3 + 4
    assert st.k == 12


def test_analyze_dmax_follows_critical_offset():
    assert analyze(generators.gen_drone(M=3)).dmax == 3


def test_analyze_dmax_counts_initial_timestamps():
    s = parse_spec("spec t; pred A; init { Time@0, A@5 }")
    assert analyze(s).dmax == 5


def test_progressing_flags(corpus):
    for name, e in corpus.items():
        assert analyze(e.spec).progressing == e.expected["progressing"], name


def test_unbalanced_detected():
    s = parse_spec("spec u; pred A; init { Time@0, A@0 } rule r: Time@T, A@T1 -> Time@T, A@(T+1), A@(T+1);")
    assert not analyze(s).balanced


def test_stats_json_shape():
    js = analyze(generators.gen_drone()).to_json()
    assert set(js) >= {"m", "k", "dmax", "J", "E", "balanced", "progressing", "lsigma_bound"}

import pytest

from tickforge import generators
from tickforge.core import TICK, Configuration, Subst
from tickforge.engine import (
    FreshSource, NotApplicable, apply_rule, check_trace, enabled_steps, must_tick, prefer, run_lts,
)
from tickforge.syntax import analyze, parse_spec

from conftest import PHOTO, SESSIONS, conf, tf


@pytest.fixture(scope="module")
def photo():
    return parse_spec(PHOTO)


def test_photo_click_result(photo):
    r = photo.rule("click")
    sub = Subst.of({"I": "p2", "Id": "d2", "X": 5, "Y": 6, "E": 6}, {"T": 5, "T1": 0})
    out = apply_rule(photo.initial, r, sub)
    assert out == conf(5, tf("Dr", "d1", 1, 2, 10, at=5), tf("Dr", "d2", 5, 6, 6, at=6),
                       tf("P", "p1", 1, 1, at=3), tf("P", "p2", 5, 6, at=5))


def test_photo_is_the_only_enabled_instance(photo):
    steps = enabled_steps(photo.initial, photo)
    assert len(steps) == 1
    assert steps[0].subst.term_map()["I"] == "p2"


def test_photo_not_applicable_when_guard_fails():
    # with guard T1 + 2 < T neither picture is old enough: 3+2 and 4+2 are not below 5
    src = PHOTO.replace("{ T1 < T }", "{ T1 + 2 < T }").replace("P(p2,5,6)@0", "P(p2,5,6)@4") \
        .replace("Dr(d1,1,2,10)@5", "Dr(d1,1,1,10)@5")
    s = parse_spec(src)
    assert enabled_steps(s.initial, s) == []
    sub = Subst.of({"I": "p2", "Id": "d2", "X": 5, "Y": 6, "E": 6}, {"T": 5, "T1": 4})
    with pytest.raises(NotApplicable):
        apply_rule(s.initial, s.rule("click"), sub)


def test_tick_advances_only_time():
    c = conf(3, tf("F", at=1), tf("G", at=7))
    assert apply_rule(c, TICK) == conf(4, tf("F", at=1), tf("G", at=7))


def test_wrong_time_variable_rejected(photo):
    sub = Subst.of({"I": "p2", "Id": "d2", "X": 5, "Y": 6, "E": 6}, {"T": 4, "T1": 0})
    with pytest.raises(NotApplicable):
        apply_rule(photo.initial, photo.rule("click"), sub)


def test_must_tick_tprime(corpus):
    tp = corpus["Tprime"].spec
    assert must_tick(conf(0, tf("C", at=1)), tp)
    assert not must_tick(conf(1, tf("C", at=1)), tp)
    assert enabled_steps(conf(0, tf("C", at=1)), tp) == []


def test_must_tick_without_rules():
    s = parse_spec("spec e; pred A; init { Time@0, A@0 }")
    assert must_tick(s.initial, s)


def test_scripted_trace_tprime(corpus):
    tp = corpus["Tprime"].spec
    tr = run_lts(tp, policy=prefer("r6a"), budget=6)
    assert [s.rule for s in tr.steps] == ["Tick", "r6a", "Tick", "Tick", "Tick", "Tick"]
    assert tr.last == conf(5, tf("D", at=1))
    assert tr.to_lines()[:3] == [
        "0 init {} -> {C@1, Time@0}",
        "1 Tick {T=0} -> {C@1, Time@1}",
        "2 r6a {T=1, T1=1} -> {D@1, Time@1}",
    ]
    check_trace(tp, tr)


def test_budget_zero(corpus):
    tr = run_lts(corpus["Tprime"].spec, budget=0)
    assert tr.steps == [] and tr.initial == corpus["Tprime"].spec.initial


def test_random_runs_are_seeded(corpus):
    spec = corpus["drone"].spec
    a = run_lts(spec, policy="random", seed=7, budget=30)
    b = run_lts(spec, policy="random", seed=7, budget=30)
    assert a.to_lines() == b.to_lines()


def test_progressing_drone_runs_between_ticks_are_short():
    spec = generators.gen_drone()
    m = analyze(spec).m
    for seed in range(10):
        tr = run_lts(spec, policy="random", seed=seed, budget=10 * m)
        run = 0
        for s in tr.steps:
            run = 0 if s.rule == "Tick" else run + 1
            assert run < m


def test_fresh_nonces_are_new():
    s = parse_spec(SESSIONS)
    tr = run_lts(s, budget=12)
    seen = [n for c in tr.configs for n in c.nonces()]
    opened = [st for st in tr.steps if st.rule == "open"]
    assert len(opened) >= 2
    assert len(set(seen)) == len(opened)
    with_nonce = next(c for c in reversed(tr.configs) if c.nonces())
    src = FreshSource.after(with_nonce)
    assert src.next().ident == max(n.ident for n in with_nonce.nonces()) + 1


def test_check_trace_rejects_forgery(corpus):
    tp = corpus["Tprime"].spec
    tr = run_lts(tp, policy=prefer("r6a"), budget=3)
    bad = tr.steps[1]._replace(config=Configuration(1, ()))
    tr.steps[1] = bad
    with pytest.raises(Exception):
        check_trace(tp, tr)

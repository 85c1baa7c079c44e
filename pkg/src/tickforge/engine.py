"""Concrete semantics: rule application, the lazy-time-sampling gate and simulation."""

from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .core import (
    TICK,
    Configuration,
    Nonce,
    Rule,
    Subst,
    TFact,
    Trace,
    TraceStep,
    instantiate_fact,
    match,
)


class NotApplicable(Exception):
    """A rule instance was applied outside its pre-condition (a caller bug)."""


class FreshSource:
    """Issues nonce identifiers that are unique across all threads."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def next(self) -> Nonce:
        with self._lock:
            return Nonce(next(self._counter))

    @classmethod
    def after(cls, config: Configuration) -> FreshSource:
        return cls(max((n.ident for n in config.nonces()), default=-1) + 1)


@dataclass(frozen=True)
class StepChoice:
    rule: Rule
    subst: Subst
    result: Configuration


def guard_holds(rule: Rule, times: dict) -> bool:
    return all(c.holds(times) for c in rule.guard)


def _instance(config: Configuration, rule: Rule, subst: Subst, fresh) -> tuple[Configuration, Subst] | None:
    terms = subst.term_map()
    times = subst.time_map()
    t = config.time
    if fresh is not None:
        for x in rule.fresh:
            terms[x] = fresh()
    else:
        missing = [x for x in rule.fresh if x not in terms]
        if missing:
            base = max((n.ident for n in config.nonces()), default=-1) + 1
            for i, x in enumerate(missing):
                terms[x] = Nonce(base + i)
    removed = []
    for p in rule.consumed:
        f = instantiate_fact(p.fact, terms)
        if f is None:
            return None
        removed.append(TFact(f, times[p.tvar]))
    added = []
    for c in rule.created:
        f = instantiate_fact(c.fact, terms)
        if f is None:
            return None  # numeral leaves its sort: the instance does not exist
        added.append(TFact(f, t + c.delay))
    return config.replace(removed, added), Subst.of(terms, times)


def apply_rule(config: Configuration, rule: Rule, subst: Subst | None = None,
               fresh_source: FreshSource | None = None) -> Configuration:
    """Apply ``rule`` under ``subst``; raises :class:`NotApplicable` if it does not fire."""
    if rule.is_tick:
        return config.tick()
    if subst is None:
        raise NotApplicable(f"{rule.name}: no substitution given")
    terms = subst.term_map()
    times = subst.time_map()
    if times.get(rule.time_var) != config.time:
        raise NotApplicable(f"{rule.name}: time variable does not match global time")
    # re-check the embedding with the substitution fixed
    lhs_terms = {k: v for k, v in terms.items() if k not in rule.fresh}
    if next(match(rule.lhs, config, lhs_terms, times), None) is None:
        raise NotApplicable(f"{rule.name}: pre-condition not contained in configuration")
    if not guard_holds(rule, times):
        raise NotApplicable(f"{rule.name}: guard fails under {subst}")
    sub = Subst.of(lhs_terms, times) if fresh_source is not None else subst
    out = _instance(config, rule, sub, fresh_source.next if fresh_source else None)
    if out is None:
        raise NotApplicable(f"{rule.name}: created numeral leaves its sort")
    return out[0]


def enabled_steps(config: Configuration, spec) -> list[StepChoice]:
    """All applicable instantaneous rule instances, in canonical order."""
    return list(iter_enabled(config, spec))


def iter_enabled(config: Configuration, spec) -> Iterator[StepChoice]:
    for rule in spec.rules:
        for s in match(rule.lhs, config, None, {rule.time_var: config.time}):
            if not guard_holds(rule, s.time_map()):
                continue
            out = _instance(config, rule, s, None)
            if out is None:
                continue
            yield StepChoice(rule, out[1], out[0])


def must_tick(config: Configuration, spec) -> bool:
    return next(iter_enabled(config, spec), None) is None


def successors(config: Configuration, spec) -> list[StepChoice]:
    """l.t.s. successors: the enabled instances, or the single Tick."""
    steps = enabled_steps(config, spec)
    if steps:
        return steps
    return [StepChoice(TICK, Subst.of({}, {"T": config.time}), config.tick())]


Policy = Callable[[Configuration, Sequence[StepChoice]], int]


def first_policy(config, choices) -> int:
    return 0


def random_policy(seed: int | None = None) -> Policy:
    rng = random.Random(seed)
    return lambda config, choices: rng.randrange(len(choices))


def prefer(*rule_names: str, fallback: Policy = first_policy) -> Policy:
    """Scripted policy: take the first listed rule that is enabled."""

    def pick(config, choices):
        for name in rule_names:
            for i, c in enumerate(choices):
                if c.rule.name == name or c.rule.name.startswith(name + "__"):
                    return i
        return fallback(config, choices)

    return pick


def run_lts(spec, start: Configuration | None = None, policy: Policy | str = "first",
            budget: int = 100, seed: int | None = None,
            fresh: FreshSource | None = None) -> Trace:
    """Simulate ``budget`` steps under lazy time sampling."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    config = spec.initial if start is None else start
    if policy == "first":
        policy = first_policy
    elif policy == "random":
        policy = random_policy(seed)
    elif isinstance(policy, str):
        raise ValueError(f"unknown policy {policy!r}")
    fresh = fresh or FreshSource.after(config)
    trace = Trace(config)
    for _ in range(budget):
        choices = enabled_steps(config, spec)
        if not choices:
            nxt = config.tick()
            trace.steps.append(TraceStep(TICK.name, Subst.of({}, {"T": config.time}), nxt))
        else:
            c = choices[policy(config, choices)]
            sub = c.subst
            if c.rule.fresh:
                terms = {k: v for k, v in sub.terms if k not in c.rule.fresh}
                nxt, sub = _instance(config, c.rule, Subst(tuple(sorted(terms.items())), sub.times), fresh.next)
            else:
                nxt = c.result
            trace.steps.append(TraceStep(c.rule.name, sub, nxt))
        config = nxt
    return trace


def check_trace(spec, trace: Trace) -> None:
    """Re-verify a trace step by step; raises ``AssertionError`` on the first bad step."""
    prev = trace.initial
    seen_nonces = set(prev.nonces())
    for i, st in enumerate(trace.steps, 1):
        if st.rule == TICK.name:
            assert must_tick(prev, spec), f"step {i}: Tick while an instantaneous rule applies"
            assert st.config == prev.tick(), f"step {i}: bad Tick result"
        else:
            rule = spec.rule(st.rule)
            fresh_vals = {v for k, v in st.subst.terms if k in rule.fresh}
            assert not (fresh_vals & seen_nonces), f"step {i}: reused nonce"
            got = apply_rule(prev, rule, st.subst)
            assert got == st.config, f"step {i}: result differs from apply_rule"
        seen_nonces |= st.config.nonces()
        prev = st.config


def trace_lines(trace: Trace) -> list[str]:
    return trace.to_lines()

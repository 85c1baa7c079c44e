"""Terms, facts, configurations and rules of timed multiset rewriting.

Ground terms use plain Python values so that configurations hash and sort
cheaply:

* constants are ``str`` (lower-case names such as ``d1``),
* numerals are ``int`` (rendered in decimal, sized in successor notation),
* nonces are :class:`Nonce`,
* compound terms are tuples ``(fname, arg1, ..., argn)``.

Pattern terms additionally contain :class:`Var` and :class:`Plus` (``X + c``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

TIME = "Time"


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: str | None = None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Plus:
    """Numeric pattern ``var + offset``; ``lo``/``hi`` bound the argument sort."""

    var: Var
    offset: int
    lo: int = 0
    hi: int | None = None

    def __str__(self) -> str:
        return f"{self.var.name}+{self.offset}"


@dataclass(frozen=True, slots=True, order=True)
class Nonce:
    ident: int

    def __str__(self) -> str:
        return f"#{self.ident}"


class Fact(NamedTuple):
    pred: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(render_term(a) for a in self.args)})"


class TFact(NamedTuple):
    """A timestamped fact ``fact@time``."""

    fact: Fact
    time: int

    def __str__(self) -> str:
        return f"{self.fact}@{self.time}"


TIME_FACT = Fact(TIME, ())


def render_term(t) -> str:
    if isinstance(t, tuple):
        return f"{t[0]}({','.join(render_term(a) for a in t[1:])})"
    return str(t)


def term_key(t):
    """Total order on ground terms: constants < numerals < compounds < nonces."""
    if isinstance(t, str):
        return (0, t)
    if isinstance(t, Nonce):
        return (3, t.ident)
    if isinstance(t, int):
        return (1, t)
    if isinstance(t, tuple):
        return (2, t[0], tuple(term_key(a) for a in t[1:]))
    raise TypeError(f"not a ground term: {t!r}")


@lru_cache(maxsize=1 << 16)
def fact_key(f: Fact):
    return (f.pred, tuple(term_key(a) for a in f.args))


def term_size(t) -> int:
    if isinstance(t, Plus):
        return t.offset + 1
    if isinstance(t, (str, Var, Nonce)):
        return 1
    if isinstance(t, int):
        return t + 1
    if isinstance(t, tuple):
        return 1 + sum(term_size(a) for a in t[1:])
    raise TypeError(f"not a term: {t!r}")


def fact_size(f: Fact | TFact) -> int:
    """Number of alphabet symbols in a fact; a numeral ``v`` counts ``v + 1``."""
    if isinstance(f, TFact):
        f = f.fact
    return 1 + sum(term_size(a) for a in f.args)


def is_ground(t) -> bool:
    if isinstance(t, (Var, Plus)):
        return False
    if isinstance(t, tuple):
        return all(is_ground(a) for a in t[1:])
    return True


def nonces_in(t) -> Iterator[Nonce]:
    if isinstance(t, Nonce):
        yield t
    elif isinstance(t, tuple):
        for a in t[1:]:
            yield from nonces_in(a)


def rename_term(t, mapping: dict):
    if isinstance(t, Nonce):
        return mapping.get(t, t)
    if isinstance(t, tuple):
        return (t[0],) + tuple(rename_term(a, mapping) for a in t[1:])
    return t


def rename_fact(f: Fact, mapping: dict) -> Fact:
    if not mapping:
        return f
    return Fact(f.pred, tuple(rename_term(a, mapping) for a in f.args))


@dataclass(frozen=True)
class Configuration:
    """Multiset of ground timestamped facts with a single ``Time`` fact.

    ``facts`` holds the non-``Time`` facts in canonical order (predicate,
    rendered arguments, timestamp); the ``Time`` fact is ``time``.
    """

    time: int
    facts: tuple[TFact, ...] = ()

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("global time must be non-negative")
        facts = tuple(sorted(self.facts, key=_tfact_key))
        for tf in facts:
            if tf.fact.pred == TIME:
                raise ValueError("configuration must contain exactly one Time fact")
            if tf.time < 0:
                raise ValueError(f"negative timestamp in {tf}")
        object.__setattr__(self, "facts", facts)

    @classmethod
    def of(cls, items: Iterable[TFact]) -> Configuration:
        items = list(items)
        times = [tf.time for tf in items if tf.fact.pred == TIME]
        if len(times) != 1:
            raise ValueError("configuration must contain exactly one Time fact")
        return cls(times[0], tuple(tf for tf in items if tf.fact.pred != TIME))

    @property
    def global_time(self) -> int:
        return self.time

    def items(self) -> list[TFact]:
        """All facts including ``Time``, in canonical order."""
        out = list(self.facts)
        out.append(TFact(TIME_FACT, self.time))
        out.sort(key=_tfact_key)
        return out

    def __len__(self) -> int:
        return len(self.facts) + 1

    def replace(self, removed: Sequence[TFact], added: Sequence[TFact]) -> Configuration:
        facts = list(self.facts)
        for tf in removed:
            facts.remove(tf)
        facts.extend(added)
        return Configuration(self.time, tuple(facts))

    def tick(self) -> Configuration:
        return Configuration(self.time + 1, self.facts)

    def nonces(self) -> set[Nonce]:
        return {n for tf in self.facts for a in tf.fact.args for n in nonces_in(a)}

    def __str__(self) -> str:
        return "{" + ", ".join(str(tf) for tf in self.items()) + "}"


def _tfact_key(tf: TFact):
    return (fact_key(tf.fact), tf.time)


@dataclass(frozen=True, slots=True)
class Constraint:
    """``lhs rel rhs + offset`` over time variables; ``rel`` is ``>``, ``=`` or ``>=``."""

    lhs: str
    rel: str
    rhs: str
    offset: int = 0

    def __post_init__(self):
        if self.rel not in (">", "=", ">="):
            raise ValueError(f"bad relation {self.rel!r}")

    def holds(self, times: dict) -> bool:
        a = times[self.lhs]
        b = times[self.rhs] + self.offset
        if self.rel == ">":
            return a > b
        if self.rel == "=":
            return a == b
        return a >= b

    def variables(self) -> tuple[str, str]:
        return (self.lhs, self.rhs)

    def __str__(self) -> str:
        if self.offset > 0:
            return f"{self.lhs} {self.rel} {self.rhs} + {self.offset}"
        if self.offset < 0:
            return f"{self.lhs} {self.rel} {self.rhs} - {-self.offset}"
        return f"{self.lhs} {self.rel} {self.rhs}"


class TPattern(NamedTuple):
    """Fact pattern timestamped by a time variable."""

    fact: Fact
    tvar: str

    def __str__(self) -> str:
        return f"{_render_pattern(self.fact)}@{self.tvar}"


class Created(NamedTuple):
    """Created fact pattern at ``GlobalTime + delay``."""

    fact: Fact
    delay: int


def _render_pattern(f: Fact) -> str:
    if not f.args:
        return f.pred
    return f"{f.pred}({','.join(_render_pattern_term(a) for a in f.args)})"


def _render_pattern_term(t) -> str:
    if isinstance(t, tuple):
        return f"{t[0]}({','.join(_render_pattern_term(a) for a in t[1:])})"
    return str(t)


render_pattern = _render_pattern


@dataclass(frozen=True)
class Rule:
    """A Tick rule or an instantaneous rule.

    Instantaneous rules read ``Time@time_var, preserved, consumed | guard``
    and rewrite to ``Time@time_var, preserved, created`` where created facts
    get timestamp ``time_var + delay``.
    """

    name: str
    time_var: str = "T"
    preserved: tuple[TPattern, ...] = ()
    consumed: tuple[TPattern, ...] = ()
    created: tuple[Created, ...] = ()
    guard: tuple[Constraint, ...] = ()
    fresh: tuple[str, ...] = ()
    kind: str = "inst"

    def __post_init__(self):
        if self.kind == "tick" and (
            self.preserved or self.consumed or self.created or self.guard or self.fresh
        ):
            raise ValueError("the Tick rule has no patterns")
        lhs_times = {p.tvar for p in self.preserved + self.consumed} | {self.time_var}
        for c in self.guard:
            for v in c.variables():
                if v not in lhs_times:
                    raise ValueError(f"guard variable {v} not in pre-condition of {self.name}")
        lhs_vars = set()
        for p in self.preserved + self.consumed:
            lhs_vars |= pattern_vars(p.fact)
        for x in self.fresh:
            if x in lhs_vars:
                raise ValueError(f"fresh variable {x} occurs on the left of {self.name}")

    @property
    def is_tick(self) -> bool:
        return self.kind == "tick"

    @property
    def lhs(self) -> tuple[TPattern, ...]:
        """Pre-condition patterns: preserved, consumed, then ``Time``."""
        return self.preserved + self.consumed + (TPattern(TIME_FACT, self.time_var),)

    def __str__(self) -> str:
        if self.is_tick:
            return "Tick: Time@T -> Time@(T+1)"
        lhs = ", ".join(str(p) for p in (TPattern(TIME_FACT, self.time_var),) + self.preserved + self.consumed)
        guard = f" | {{ {', '.join(str(c) for c in self.guard)} }}" if self.guard else ""
        ex = f"exists {', '.join(self.fresh)}. " if self.fresh else ""
        rhs = [f"Time@{self.time_var}"] + [str(p) for p in self.preserved]
        for c in self.created:
            at = self.time_var if c.delay == 0 else f"({self.time_var}+{c.delay})"
            rhs.append(f"{_render_pattern(c.fact)}@{at}")
        return f"{self.name}: {lhs}{guard} -> {ex}{', '.join(rhs)}"


TICK = Rule("Tick", kind="tick")


def pattern_vars(f: Fact) -> set[str]:
    out: set[str] = set()

    def walk(t):
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, Plus):
            out.add(t.var.name)
        elif isinstance(t, tuple):
            for a in t[1:]:
                walk(a)

    for a in f.args:
        walk(a)
    return out


@dataclass(frozen=True)
class CriticalPair:
    patterns: tuple[TPattern, ...]
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self):
        own = {p.tvar for p in self.patterns}
        for c in self.constraints:
            for v in c.variables():
                if v not in own:
                    raise ValueError(f"critical constraint mentions foreign variable {v}")

    def __str__(self) -> str:
        facts = ", ".join(str(p) for p in self.patterns)
        if self.constraints:
            return f"<{{{facts}}}, {{{', '.join(str(c) for c in self.constraints)}}}>"
        return f"<{{{facts}}}, {{}}>"


@dataclass(frozen=True)
class CriticalSpec:
    pairs: tuple[CriticalPair, ...] = ()

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)


@dataclass(frozen=True)
class Subst:
    """Ground substitution: term variables and time variables."""

    terms: tuple = ()
    times: tuple = ()

    @classmethod
    def of(cls, terms: dict | None = None, times: dict | None = None) -> Subst:
        return cls(tuple(sorted((terms or {}).items())), tuple(sorted((times or {}).items())))

    def term_map(self) -> dict:
        return dict(self.terms)

    def time_map(self) -> dict:
        return dict(self.times)

    def __str__(self) -> str:
        parts = [f"{k}={render_term(v)}" for k, v in self.terms]
        parts += [f"{k}={v}" for k, v in self.times]
        return "{" + ", ".join(parts) + "}"


# -- matching -------------------------------------------------------------


def unify(pat, value, env: dict) -> dict | None:
    """Extend ``env`` so that ``pat`` instantiates to ``value``; ``None`` on failure.

    ``env`` is never mutated; a new dict is returned when bindings are added.
    """
    if isinstance(pat, Var):
        bound = env.get(pat.name, _MISSING)
        if bound is _MISSING:
            out = dict(env)
            out[pat.name] = value
            return out
        return env if bound == value and type(bound) is type(value) else None
    if isinstance(pat, Plus):
        if type(value) is not int or value - pat.offset < pat.lo:
            return None
        return unify(pat.var, value - pat.offset, env)
    if isinstance(pat, tuple):
        if not isinstance(value, tuple) or len(value) != len(pat) or value[0] != pat[0]:
            return None
        for p, v in zip(pat[1:], value[1:]):
            env = unify(p, v, env)
            if env is None:
                return None
        return env
    return env if pat == value and type(pat) is type(value) else None


_MISSING = object()


def unify_fact(pat: Fact, fact: Fact, env: dict) -> dict | None:
    if pat.pred != fact.pred or len(pat.args) != len(fact.args):
        return None
    for p, v in zip(pat.args, fact.args):
        env = unify(p, v, env)
        if env is None:
            return None
    return env


def instantiate(pat, env: dict):
    """Ground a pattern term; ``None`` when a numeral leaves its sort range."""
    if isinstance(pat, Var):
        return env[pat.name]
    if isinstance(pat, Plus):
        v = env[pat.var.name] + pat.offset
        if pat.hi is not None and v > pat.hi:
            return None
        return v
    if isinstance(pat, tuple):
        args = [instantiate(a, env) for a in pat[1:]]
        if any(a is None for a in args):
            return None
        return (pat[0],) + tuple(args)
    return pat


def instantiate_fact(pat: Fact, env: dict) -> Fact | None:
    args = []
    for a in pat.args:
        v = instantiate(a, env)
        if v is None:
            return None
        args.append(v)
    return Fact(pat.pred, tuple(args))


def match(patterns: Sequence[TPattern], config: Configuration,
          terms: dict | None = None, times: dict | None = None) -> Iterator[Subst]:
    """Yield every substitution embedding ``patterns`` in ``config`` (multiset inclusion).

    Each distinct substitution is produced once, in canonical order of the
    configuration's facts.
    """
    items = config.items()
    by_pred: dict[str, list[int]] = {}
    for i, tf in enumerate(items):
        by_pred.setdefault(tf.fact.pred, []).append(i)
    used = [False] * len(items)
    seen: set[Subst] = set()
    # bind the most selective patterns first, keep output order canonical via `seen`
    order = sorted(range(len(patterns)), key=lambda i: len(by_pred.get(patterns[i].fact.pred, ())))
    pats = [patterns[i] for i in order]

    def rec(i: int, env: dict, tenv: dict):
        if i == len(pats):
            s = Subst.of(env, tenv)
            if s not in seen:
                seen.add(s)
                yield s
            return
        pat = pats[i]
        bound_t = tenv.get(pat.tvar)
        for idx in by_pred.get(pat.fact.pred, ()):
            if used[idx]:
                continue
            tf = items[idx]
            if bound_t is not None and bound_t != tf.time:
                continue
            env2 = unify_fact(pat.fact, tf.fact, env)
            if env2 is None:
                continue
            used[idx] = True
            if bound_t is None:
                tenv2 = dict(tenv)
                tenv2[pat.tvar] = tf.time
            else:
                tenv2 = tenv
            yield from rec(i + 1, env2, tenv2)
            used[idx] = False

    yield from rec(0, dict(terms or {}), dict(times or {}))


def bind_exact(patterns: Sequence[TPattern], tfacts: Sequence[TFact]) -> Subst | None:
    """Bind ``patterns[i]`` to ``tfacts[i]`` position-wise."""
    env: dict = {}
    tenv: dict = {}
    for pat, tf in zip(patterns, tfacts, strict=True):
        if pat.tvar in tenv and tenv[pat.tvar] != tf.time:
            return None
        tenv[pat.tvar] = tf.time
        env = unify_fact(pat.fact, tf.fact, env)
        if env is None:
            return None
    return Subst.of(env, tenv)


def is_critical(config: Configuration, cs: CriticalSpec | Iterable[CriticalPair]) -> bool:
    for pair in cs:
        for s in match(pair.patterns, config):
            times = s.time_map()
            if all(c.holds(times) for c in pair.constraints):
                return True
    return False


# -- traces ---------------------------------------------------------------


class TraceStep(NamedTuple):
    rule: str
    subst: Subst
    config: Configuration


@dataclass
class Trace:
    initial: Configuration
    steps: list[TraceStep] = field(default_factory=list)

    @property
    def configs(self) -> list[Configuration]:
        return [self.initial] + [s.config for s in self.steps]

    @property
    def last(self) -> Configuration:
        return self.steps[-1].config if self.steps else self.initial

    @property
    def tick_count(self) -> int:
        return sum(1 for s in self.steps if s.rule == TICK.name)

    def __len__(self) -> int:
        return len(self.steps)

    def to_lines(self) -> list[str]:
        out = [f"0 init {{}} -> {self.initial}"]
        for i, s in enumerate(self.steps, 1):
            out.append(f"{i} {s.rule} {s.subst} -> {s.config}")
        return out

    def to_json(self) -> dict:
        def conf(c: Configuration):
            return [str(tf) for tf in c.items()]

        return {
            "initial": conf(self.initial),
            "steps": [
                {
                    "index": i,
                    "rule": s.rule,
                    "bindings": {k: render_term(v) for k, v in s.subst.terms}
                    | {k: v for k, v in s.subst.times},
                    "config": conf(s.config),
                }
                for i, s in enumerate(self.steps, 1)
            ],
        }

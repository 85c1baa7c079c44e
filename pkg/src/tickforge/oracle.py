"""Independent brute-force reference for the checkers.

Nothing here uses ``engine``, ``delta`` or ``checkers``.  Rule instances are
found by trying every ordered choice of facts, the time abstraction is a
separately written timestamp compression, and properties are evaluated
straight from their definitions with explicit reachability sets.  Specs that
create nonces are refused.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .core import Fact, Plus, Var

TIME = "Time"


class OracleBudget(Exception):
    pass


# states are (global_time, sorted tuple of (fact, timestamp)) with Time excluded


def _key(item):
    return (repr(item[0]), item[1])


def _state(time: int, items) -> tuple:
    return (time, tuple(sorted(items, key=_key)))


def _from_config(config) -> tuple:
    return _state(config.time, [(tf.fact, tf.time) for tf in config.facts])


def _bind(pat, val, env):
    if isinstance(pat, Var):
        if pat.name in env:
            return env if env[pat.name] == val and type(env[pat.name]) is type(val) else None
        return {**env, pat.name: val}
    if isinstance(pat, Plus):
        if type(val) is not int:
            return None
        base = val - pat.offset
        if base < pat.lo:
            return None
        return _bind(pat.var, base, env)
    if isinstance(pat, tuple):
        if not (isinstance(val, tuple) and len(val) == len(pat) and val[0] == pat[0]):
            return None
        for p, x in zip(pat[1:], val[1:]):
            env = _bind(p, x, env)
            if env is None:
                return None
        return env
    return env if pat == val and type(pat) is type(val) else None


def _bind_fact(pat, fact, env):
    if pat.pred != fact.pred or len(pat.args) != len(fact.args):
        return None
    for p, x in zip(pat.args, fact.args):
        env = _bind(p, x, env)
        if env is None:
            return None
    return env


def _ground(pat, env):
    if isinstance(pat, Var):
        return env[pat.name]
    if isinstance(pat, Plus):
        v = env[pat.var.name] + pat.offset
        return None if pat.hi is not None and v > pat.hi else v
    if isinstance(pat, tuple):
        args = [_ground(a, env) for a in pat[1:]]
        return None if None in args else (pat[0], *args)
    return pat


def _cmp(c, times) -> bool:
    a, b = times[c.lhs], times[c.rhs] + c.offset
    return a > b if c.rel == ">" else a == b if c.rel == "=" else a >= b


def _embeddings(patterns, items):
    """Yield (env, times, chosen indices) for every ordered choice of distinct facts."""
    for combo in itertools.permutations(range(len(items)), len(patterns)):
        env, times = {}, {}
        ok = True
        for (fpat, tvar), idx in zip(patterns, combo):
            fact, t = items[idx]
            if times.setdefault(tvar, t) != t:
                ok = False
                break
            env = _bind_fact(fpat, fact, env)
            if env is None:
                ok = False
                break
        if ok:
            yield env, times, combo


def _with_time(state):
    time, facts = state
    return list(facts) + [(_TIME_FACT, time)]


_TIME_FACT = Fact(TIME, ())


def is_critical_naive(spec, state) -> bool:
    items = _with_time(state)
    for pair in spec.critical:
        pats = [(p.fact, p.tvar) for p in pair.patterns]
        for _, times, _ in _embeddings(pats, items):
            if all(_cmp(c, times) for c in pair.constraints):
                return True
    return False


def instant_successors(spec, state) -> list:
    """(rule name, next state) for every instantaneous instance; duplicates removed."""
    if any(r.fresh for r in spec.rules):
        raise ValueError("the oracle does not handle nonce-creating rules")
    time, facts = state
    out = []
    seen = set()
    for rule in spec.rules:
        pats = [(p.fact, p.tvar) for p in rule.preserved + rule.consumed]
        n_pres = len(rule.preserved)
        for env, times, combo in _embeddings(pats, list(facts)):
            if times.get(rule.time_var, time) != time:
                continue
            times[rule.time_var] = time
            if not all(_cmp(c, times) for c in rule.guard):
                continue
            new = []
            for c in rule.created:
                args = [_ground(a, env) for a in c.fact.args]
                if None in args:
                    break
                new.append((type(c.fact)(c.fact.pred, tuple(args)), time + c.delay))
            else:
                gone = set(combo[n_pres:])
                rest = [f for i, f in enumerate(facts) if i not in gone]
                nxt = _state(time, rest + new)
                if (rule.name, nxt) not in seen:
                    seen.add((rule.name, nxt))
                    out.append((rule.name, nxt))
    return out


def lts_successors(spec, state) -> list:
    inst = instant_successors(spec, state)
    if inst:
        return inst
    time, facts = state
    return [("Tick", (time + 1, facts))]


# -- explicit graphs ---------------------------------------------------------


@dataclass
class ExplicitGraph:
    states: list = field(default_factory=list)
    edges: list = field(default_factory=list)  # per state: list of (label, index)
    critical: list = field(default_factory=list)
    t0: int = 0

    def __len__(self):
        return len(self.states)

    def succ(self, i):
        return [j for _, j in self.edges[i]]


def _explore(spec, start, step, max_states: int) -> ExplicitGraph:
    g = ExplicitGraph(t0=start[0])
    index = {start: 0}
    g.states.append(start)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = g.states[i]
        out = []
        for label, nxt in step(s):
            j = index.get(nxt)
            if j is None:
                if len(g.states) >= max_states:
                    raise OracleBudget(f"more than {max_states} states")
                j = index[nxt] = len(g.states)
                g.states.append(nxt)
                queue.append(j)
            out.append((label, j))
        g.edges.append(out)
    g.critical = [is_critical_naive(spec, s) for s in g.states]
    return g


def oracle_graph(spec, s0=None, tick_horizon: int = 2, max_states: int = 200_000) -> ExplicitGraph:
    """Concrete l.t.s. states reachable with at most ``tick_horizon`` Ticks."""
    start = _from_config(spec.initial if s0 is None else s0)
    limit = start[0] + tick_horizon

    def step(s):
        return [(lbl, n) for lbl, n in lts_successors(spec, s) if n[0] <= limit]

    return _explore(spec, start, step, max_states)


def _dmax(spec, s0) -> int:
    vals = [t for _, t in s0[1]] + [s0[0]]
    for r in spec.rules:
        vals += [c.delay for c in r.created] + [abs(c.offset) for c in r.guard]
    for pair in spec.critical:
        vals += [abs(c.offset) for c in pair.constraints]
    return max(vals)


def compress(state, dmax: int) -> tuple:
    """Shift the earliest timestamp to 0 and cap every gap at ``dmax + 1``."""
    time, facts = state
    items = sorted(list(facts) + [(_TIME_FACT, time)], key=lambda it: it[1])
    new_t = {}
    prev_old, cur = None, 0
    for _, t in items:
        if prev_old is not None:
            cur += min(t - prev_old, dmax + 1)
        new_t.setdefault(t, cur)
        prev_old = t
    for _, t in facts:
        if t - time > dmax:
            raise ValueError("future fact beyond dmax")
    return _state(new_t[time], [(f, new_t[t]) for f, t in facts])


def oracle_quotient(spec, s0=None, max_states: int = 200_000) -> ExplicitGraph:
    """Unbounded l.t.s. graph over compressed concrete states."""
    conf = spec.initial if s0 is None else s0
    raw = _from_config(conf)
    dmax = _dmax(spec, raw)
    start = compress(raw, dmax)

    def step(s):
        return [(lbl, compress(n, dmax)) for lbl, n in lts_successors(spec, s)]

    return _explore(spec, start, step, max_states)


# -- properties from definitions -------------------------------------------------


def _reach(g: ExplicitGraph, src: int, allowed) -> set:
    if src not in allowed:
        return set()
    seen = {src}
    stack = [src]
    while stack:
        i = stack.pop()
        for j in g.succ(i):
            if j in allowed and j not in seen:
                seen.add(j)
                stack.append(j)
    return seen


def _reach_plus(g, src, allowed) -> set:
    out = set()
    for j in g.succ(src):
        if j in allowed:
            out |= _reach(g, j, allowed)
    return out


def evaluate(g: ExplicitGraph, prop: str, n: int | None = None) -> bool:
    everything = set(range(len(g)))
    comp = {i for i in everything if not g.critical[i]}
    if g.critical[0]:
        return False
    creach = _reach(g, 0, comp)
    if n is not None:
        top = {i for i in everything if g.states[i][0] - g.t0 == n}
        nz = bool(creach & top)
        if prop == "Z":
            return nz
        if prop == "S":
            if not nz:
                return False
            for c in _reach(g, 0, everything):
                if g.critical[c] and _reach(g, c, everything) & top:
                    return False
            return True
        if prop == "L":
            return nz and all(_reach(g, x, comp) & top for x in creach)
        raise ValueError(prop)

    cache: dict = {}

    def tick_cycle(u, allowed_name, allowed):
        key = (u, allowed_name)
        if key not in cache:
            cache[key] = any(
                lbl == "Tick" and v in allowed and u in _reach(g, v, allowed) for lbl, v in g.edges[u]
            )
        return cache[key]

    def z_from(x, allowed, name):
        return any(tick_cycle(y, name, allowed) for y in _reach(g, x, allowed))

    z = z_from(0, comp, "c")
    if prop == "Z":
        return z
    if not z:
        return False
    if prop == "S":
        for c in _reach(g, 0, everything):
            if g.critical[c] and z_from(c, everything, "all"):
                return False
        return True
    if prop == "V":
        for x in creach:
            if not any(y in _reach_plus(g, y, comp) for y in _reach(g, x, comp)):
                return False
        return True
    if prop == "L":
        return all(z_from(x, comp, "c") for x in creach)
    raise ValueError(prop)


def oracle_check(spec, s0=None, prop: str = "Z", n: int | None = None, max_states: int = 200_000) -> bool:
    prop = prop.upper()
    if len(prop) == 2 and prop[0] == "N":
        prop = prop[1]
    if n is None:
        return evaluate(oracle_quotient(spec, s0, max_states), prop)
    return evaluate(oracle_graph(spec, s0, n, max_states), prop, n)


def count_quotient_states(spec, s0=None) -> int:
    return len(oracle_quotient(spec, s0))


# -- SAT ---------------------------------------------------------------------------


def brute_force_sat(cnf, n_vars: int | None = None) -> bool:
    """Truth-table satisfiability; literals are non-zero ints (DIMACS style)."""
    n_vars = n_vars or max((abs(l) for c in cnf for l in c), default=0)
    for bits in itertools.product((False, True), repeat=n_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in cnf):
            return True
    return False


__all__ = [
    "ExplicitGraph",
    "OracleBudget",
    "brute_force_sat",
    "compress",
    "count_quotient_states",
    "evaluate",
    "instant_successors",
    "is_critical_naive",
    "lts_successors",
    "oracle_check",
    "oracle_graph",
    "oracle_quotient",
]

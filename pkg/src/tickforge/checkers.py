"""Decision procedures for Z, S, V, L and their n-time-bounded forms.

Every check explores the finite graph of δ-representations reachable from
the initial configuration under lazy time sampling, then answers the property
with SCC and reachability analyses:

* Z  -- some compliant cycle containing a Tick is reachable compliantly.
* S  -- Z, and no reachable critical node lies on an infinite time trace.
* V  -- Z, and no compliantly reachable node is a point of no return
  (reaches no cycle at all inside the compliant subgraph).
* L  -- Z, and every compliantly reachable node can still reach a compliant
  Tick cycle.

Bounded variants run on a tick-layered graph with layers ``0..n``.
"""

from __future__ import annotations

import os
import time
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .core import TICK, Configuration, bind_exact, is_critical
from .delta import (
    DeltaRep,
    abstract,
    abstract_with_order,
    delta_critical,
    delta_enabled,
    delta_tick,
    materialize,
)
from .engine import FreshSource, apply_rule, must_tick
from .syntax import SpecModel, SpecStats, analyze

DEFAULT_NODE_BUDGET = 5_000_000
BUDGET_ENV = "TICKFORGE_NODE_BUDGET"


class ResourceExhausted(Exception):
    def __init__(self, nodes: int):
        super().__init__(f"node budget exhausted after {nodes} nodes")
        self.nodes = nodes


def node_budget(budget: int | None = None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get(BUDGET_ENV)
    return int(env) if env else DEFAULT_NODE_BUDGET


@dataclass
class DeltaGraph:
    """Reachable δ-states; node keys are ``(DeltaRep, layer)``, layer ``None`` when unbounded."""

    keys: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    succ: list = field(default_factory=list)  # per node: list of (dst, label, positions)
    critical: list = field(default_factory=list)
    expanded: list = field(default_factory=list)
    max_ticks: int | None = None
    dmax: int = 0

    root = 0

    def delta(self, i: int) -> DeltaRep:
        return self.keys[i][0]

    def layer(self, i: int):
        return self.keys[i][1]

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.succ)

    def _add(self, key) -> tuple[int, bool]:
        i = self.index.get(key)
        if i is not None:
            return i, False
        i = len(self.keys)
        self.index[key] = i
        self.keys.append(key)
        self.succ.append([])
        self.critical.append(False)
        self.expanded.append(False)
        return i, True

    def nx_graph(self, allowed=None) -> nx.DiGraph:
        g = nx.DiGraph()
        for i in range(len(self)):
            if allowed is None or i in allowed:
                g.add_node(i)
        for i, out in enumerate(self.succ):
            if allowed is not None and i not in allowed:
                continue
            for j, _, _ in out:
                if allowed is None or j in allowed:
                    g.add_edge(i, j)
        return g


def build_graph(spec: SpecModel, s0: Configuration | None = None, restrict_compliant: bool = False,
                budget: int | None = None, max_ticks: int | None = None,
                stats: SpecStats | None = None, threads: int = 1) -> DeltaGraph:
    """Breadth-first closure of δ(s0) under the l.t.s. successor relation.

    With ``restrict_compliant`` critical nodes are recorded but not expanded.
    With ``max_ticks`` the graph is layered by the number of Ticks taken and
    nodes in layer ``max_ticks`` get no Tick edge.  ``threads`` is accepted
    for interface compatibility; exploration is sequential.
    """
    stats = stats or analyze(spec)
    if not stats.balanced:
        raise ValueError("state space of an unbalanced specification is unbounded; refusing to explore")
    limit = node_budget(budget)
    s0 = spec.initial if s0 is None else s0
    g = DeltaGraph(max_ticks=max_ticks, dmax=stats.dmax)
    layered = max_ticks is not None
    g._add((abstract(s0, stats.dmax), 0 if layered else None))
    queue = deque([0])
    while queue:
        i = queue.popleft()
        d, layer = g.keys[i]
        crit = delta_critical(d, spec.critical)
        g.critical[i] = crit
        if restrict_compliant and crit:
            continue
        g.expanded[i] = True
        choices = delta_enabled(d, spec)
        seen = set()
        if choices:
            for c in choices:
                key = (c.result, layer)
                if (key, c.rule.name) in seen:
                    continue
                seen.add((key, c.rule.name))
                j, new = g._add(key)
                g.succ[i].append((j, c.rule.name, c.positions))
                if new:
                    queue.append(j)
        elif not layered or layer < max_ticks:
            key = (delta_tick(d), layer + 1 if layered else None)
            j, new = g._add(key)
            g.succ[i].append((j, TICK.name, ()))
            if new:
                queue.append(j)
        if len(g) > limit:
            raise ResourceExhausted(len(g))
    return g


# -- graph helpers ----------------------------------------------------------


def _bfs(g: DeltaGraph, sources, allowed=None):
    """Reachable set and BFS parent map ``node -> (pred, edge index)``."""
    parents = {}
    order = []
    queue = deque()
    for s in sources:
        if (allowed is None or s in allowed) and s not in parents:
            parents[s] = None
            order.append(s)
            queue.append(s)
    while queue:
        i = queue.popleft()
        for e, (j, _, _) in enumerate(g.succ[i]):
            if j in parents or (allowed is not None and j not in allowed):
                continue
            parents[j] = (i, e)
            order.append(j)
            queue.append(j)
    return order, parents


def _path(g: DeltaGraph, parents, target) -> list:
    steps = []
    i = target
    while parents[i] is not None:
        p, e = parents[i]
        _, label, pos = g.succ[p][e]
        steps.append((label, pos, i))
        i = p
    steps.reverse()
    return steps


def _reverse_reach(g: DeltaGraph, targets, allowed) -> set:
    pred: dict[int, list[int]] = {}
    for i in allowed:
        for j, _, _ in g.succ[i]:
            if j in allowed:
                pred.setdefault(j, []).append(i)
    seen = set(targets)
    stack = list(targets)
    while stack:
        j = stack.pop()
        for i in pred.get(j, ()):
            if i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def _sccs(g: DeltaGraph, allowed) -> list[set]:
    return [set(c) for c in nx.strongly_connected_components(g.nx_graph(allowed))]


def _tick_scc_nodes(g: DeltaGraph, allowed) -> tuple[set, dict]:
    """Nodes of SCCs holding an internal Tick edge; also node -> its SCC."""
    comp_of = {}
    good = set()
    for comp in _sccs(g, allowed):
        for i in comp:
            comp_of[i] = comp
        if any(lbl == TICK.name and j in comp for i in comp for j, lbl, _ in g.succ[i]):
            good |= comp
    return good, comp_of


def _cyclic_nodes(g: DeltaGraph, allowed) -> set:
    out = set()
    for comp in _sccs(g, allowed):
        if len(comp) > 1:
            out |= comp
        else:
            (i,) = comp
            if any(j == i for j, _, _ in g.succ[i]):
                out.add(i)
    return out


def _lasso(g: DeltaGraph, start: int, allowed, tick_nodes: set, comp_of: dict):
    """Stem from ``start`` to a Tick edge inside a qualifying SCC, plus the cycle."""
    order, parents = _bfs(g, [start], allowed)
    for u in order:
        if u not in tick_nodes:
            continue
        comp = comp_of[u]
        for e, (v, lbl, pos) in enumerate(g.succ[u]):
            if lbl != TICK.name or v not in comp:
                continue
            stem = _path(g, parents, u)
            if v == u:
                return stem, [(lbl, pos, v)]
            _, back = _bfs(g, [v], comp)
            cycle = [(lbl, pos, v)] + _path(g, back, u)
            return stem, cycle
    return None


# -- verdicts -----------------------------------------------------------------


@dataclass
class Verdict:
    property: str
    holds: bool
    nodes: int = 0
    edges: int = 0
    lsigma_bound: int = 0
    elapsed_ms: float = 0.0
    status: str = "ok"
    reason: str = ""
    n: int | None = None
    stem: list | None = None  # [(label, positions, node)] from the root
    cycle: list | None = None
    counterexample: list | None = None
    continuation: tuple | None = None  # (stem, cycle) after the counterexample end
    graph: DeltaGraph | None = field(default=None, repr=False)

    def _steps(self, steps) -> list:
        g = self.graph
        return [{"rule": lbl, "positions": list(pos), "state": g.delta(j).render()} for lbl, pos, j in steps]

    def to_json(self, timing: bool = True) -> dict:
        out = {"property": self.property, "holds": self.holds}
        if self.n is not None:
            out["ticks"] = self.n
        if self.status != "ok":
            out["status"] = self.status
        if self.graph is not None and len(self.graph):
            root = {"state": self.graph.delta(0).render()}
            if self.stem is not None:
                out["witness"] = {"stem": [root] + self._steps(self.stem), "cycle": self._steps(self.cycle or [])}
            if self.counterexample is not None:
                out["counterexample"] = [root] + self._steps(self.counterexample)
            if self.continuation is not None:
                stem, cycle = self.continuation
                out["continuation"] = {"stem": self._steps(stem), "cycle": self._steps(cycle or [])}
        if self.reason:
            out["reason"] = self.reason
        out["nodes"] = self.nodes
        out["edges"] = self.edges
        out["lsigma_bound"] = str(self.lsigma_bound)
        out["elapsed_ms"] = round(self.elapsed_ms, 3) if timing else 0
        return out


def _finish(v: Verdict, g: DeltaGraph | None, stats: SpecStats, t0: float) -> Verdict:
    from .delta import count_bound

    v.graph = g
    if g is not None:
        v.nodes, v.edges = len(g), g.n_edges
    v.lsigma_bound = count_bound(stats)
    v.elapsed_ms = (time.perf_counter() - t0) * 1000
    return v


def _resource(prop: str, e: ResourceExhausted, stats, t0, n=None) -> Verdict:
    v = Verdict(prop, False, status="resource", reason=str(e), n=n)
    v = _finish(v, None, stats, t0)
    v.nodes = e.nodes
    return v


@dataclass
class _Analysis:
    g: DeltaGraph
    compliant: set
    reach: list
    parents: dict
    tick_nodes: set
    comp_of: dict
    good: set


def _analyse(g: DeltaGraph) -> _Analysis:
    compliant = {i for i in range(len(g)) if not g.critical[i]}
    reach, parents = _bfs(g, [0], compliant)
    rset = set(reach)
    tick_nodes, comp_of = _tick_scc_nodes(g, rset)
    good = _reverse_reach(g, tick_nodes, rset)
    return _Analysis(g, compliant, reach, parents, tick_nodes, comp_of, good)


def _z(a: _Analysis, v: Verdict) -> bool:
    if a.g.critical[0]:
        v.holds = False
        v.counterexample = []
        v.reason = "initial configuration is critical"
        return False
    if 0 not in a.good:
        v.holds = False
        v.reason = "no compliant cycle containing a Tick is reachable"
        return False
    v.stem, v.cycle = _lasso(a.g, 0, set(a.reach), a.tick_nodes, a.comp_of)
    v.holds = True
    return True


def _stats_of(spec, stats):
    return stats or analyze(spec)


def check_Z(spec, s0=None, *, budget=None, stats=None, graph=None) -> Verdict:
    """Realizability: a compliant infinite time l.t.s. trace exists."""
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = graph or build_graph(spec, s0, True, budget, stats=stats)
    except ResourceExhausted as e:
        return _resource("Z", e, stats, t0)
    v = Verdict("Z", False)
    _z(_analyse(g), v)
    return _finish(v, g, stats, t0)


def check_S(spec, s0=None, *, budget=None, stats=None, graph=None) -> Verdict:
    """Survivability: Z, and every infinite time l.t.s. trace is compliant."""
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = graph or build_graph(spec, s0, False, budget, stats=stats)
    except ResourceExhausted as e:
        return _resource("S", e, stats, t0)
    v = Verdict("S", False)
    a = _analyse(g)
    if _z(a, v):
        everything, parents = _bfs(g, [0])
        allset = set(everything)
        tick_all, comp_all = _tick_scc_nodes(g, allset)
        timeful = _reverse_reach(g, tick_all, allset)
        bad = next((i for i in everything if g.critical[i] and i in timeful), None)
        if bad is not None:
            v.holds = False
            v.stem = v.cycle = None
            v.counterexample = _path(g, parents, bad)
            v.continuation = _lasso(g, bad, allset, tick_all, comp_all)
            v.reason = "a critical configuration lies on an infinite time trace"
    return _finish(v, g, stats, t0)


def _pon_nodes(a: _Analysis) -> set:
    rset = set(a.reach)
    cyc = _cyclic_nodes(a.g, rset)
    alive = _reverse_reach(a.g, cyc, rset)
    return rset - alive


def check_V(spec, s0=None, *, budget=None, stats=None, graph=None) -> Verdict:
    """Recoverability: Z, and no point of no return is compliantly reachable."""
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = graph or build_graph(spec, s0, True, budget, stats=stats)
    except ResourceExhausted as e:
        return _resource("V", e, stats, t0)
    v = Verdict("V", False)
    a = _analyse(g)
    if _z(a, v):
        pon = _pon_nodes(a)
        bad = next((i for i in a.reach if i in pon), None)
        if bad is not None:
            v.holds = False
            v.stem = v.cycle = None
            v.counterexample = _path(g, a.parents, bad)
            v.reason = "a point of no return is compliantly reachable"
    return _finish(v, g, stats, t0)


def check_L(spec, s0=None, *, budget=None, stats=None, graph=None) -> Verdict:
    """Reliability: Z, and every compliant prefix extends to a compliant infinite time trace."""
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = graph or build_graph(spec, s0, True, budget, stats=stats)
    except ResourceExhausted as e:
        return _resource("L", e, stats, t0)
    v = Verdict("L", False)
    a = _analyse(g)
    if _z(a, v):
        bad = next((i for i in a.reach if i not in a.good), None)
        if bad is not None:
            v.holds = False
            v.stem = v.cycle = None
            v.counterexample = _path(g, a.parents, bad)
            v.reason = "a compliant prefix cannot be extended to a compliant infinite time trace"
    if stats.progressing:
        # on progressing specs every cycle ticks, so L and V must coincide
        v_holds = 0 in a.good and not (_pon_nodes(a) & set(a.reach))
        assert v.holds == v_holds, "L and V disagree on a progressing spec"
    return _finish(v, g, stats, t0)


def is_PON(spec, d: DeltaRep | Configuration, *, budget=None, stats=None) -> bool:
    """Point of no return: non-critical, and no compliant cycle of any kind is reachable."""
    stats = _stats_of(spec, stats)
    s0 = materialize(d) if isinstance(d, DeltaRep) else d
    g = build_graph(spec, s0, True, budget, stats=stats)
    if g.critical[0]:
        return False
    a = _analyse(g)
    return 0 in _pon_nodes(a)


CHECKS = {"Z": check_Z, "S": check_S, "V": check_V, "L": check_L}


def check_all(spec, s0=None, *, budget=None, stats=None) -> dict[str, Verdict]:
    """All four unbounded properties over one shared full graph."""
    stats = _stats_of(spec, stats)
    g = build_graph(spec, s0, False, budget, stats=stats)
    return {p: f(spec, s0, stats=stats, graph=g) for p, f in CHECKS.items()}


# -- bounded properties -----------------------------------------------------


def _bounded_setup(spec, s0, n, budget, stats, restrict):
    if n < 0:
        raise ValueError("n must be non-negative")
    return build_graph(spec, s0, restrict, budget, max_ticks=n, stats=stats)


def _nz(g: DeltaGraph, n: int, v: Verdict):
    compliant = {i for i in range(len(g)) if not g.critical[i]}
    if g.critical[0]:
        v.holds = False
        v.counterexample = []
        v.reason = "initial configuration is critical"
        return None
    reach, parents = _bfs(g, [0], compliant)
    top = next((i for i in reach if g.layer(i) == n), None)
    if top is None:
        v.holds = False
        v.reason = f"no compliant trace with {n} ticks"
        return None
    v.holds = True
    v.stem = _path(g, parents, top)
    v.cycle = []
    return compliant, reach, parents


def _check_length(spec, stats, v: Verdict, n: int):
    if stats.progressing and v.stem is not None:
        assert len(v.stem) <= (n + 1) * stats.m + n, "bounded witness longer than (n+1)m+n"


def check_nZ(spec, s0=None, n: int = 1, *, budget=None, stats=None) -> Verdict:
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = _bounded_setup(spec, s0, n, budget, stats, True)
    except ResourceExhausted as e:
        return _resource("nZ", e, stats, t0, n)
    v = Verdict("nZ", False, n=n)
    _nz(g, n, v)
    _check_length(spec, stats, v, n)
    return _finish(v, g, stats, t0)


def check_nS(spec, s0=None, n: int = 1, *, budget=None, stats=None) -> Verdict:
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = _bounded_setup(spec, s0, n, budget, stats, False)
    except ResourceExhausted as e:
        return _resource("nS", e, stats, t0, n)
    v = Verdict("nS", False, n=n)
    if _nz(g, n, v) is not None:
        everything, parents = _bfs(g, [0])
        allset = set(everything)
        top = [i for i in everything if g.layer(i) == n]
        complete = _reverse_reach(g, top, allset)
        bad = next((i for i in everything if g.critical[i] and i in complete), None)
        if bad is not None:
            v.holds = False
            v.stem = v.cycle = None
            v.counterexample = _path(g, parents, bad)
            order, par2 = _bfs(g, [bad])
            end = next(i for i in order if g.layer(i) == n)
            v.continuation = (_path(g, par2, end), [])
            v.reason = f"a trace with {n} ticks visits a critical configuration"
    _check_length(spec, stats, v, n)
    return _finish(v, g, stats, t0)


def check_nL(spec, s0=None, n: int = 1, *, budget=None, stats=None) -> Verdict:
    t0 = time.perf_counter()
    stats = _stats_of(spec, stats)
    try:
        g = _bounded_setup(spec, s0, n, budget, stats, True)
    except ResourceExhausted as e:
        return _resource("nL", e, stats, t0, n)
    v = Verdict("nL", False, n=n)
    r = _nz(g, n, v)
    if r is not None:
        compliant, reach, parents = r
        rset = set(reach)
        top = [i for i in reach if g.layer(i) == n]
        complete = _reverse_reach(g, top, rset)
        bad = next((i for i in reach if i not in complete), None)
        if bad is not None:
            v.holds = False
            v.stem = v.cycle = None
            v.counterexample = _path(g, parents, bad)
            v.reason = f"a compliant prefix cannot be completed to {n} ticks"
    _check_length(spec, stats, v, n)
    return _finish(v, g, stats, t0)


BOUNDED_CHECKS = {"Z": check_nZ, "S": check_nS, "L": check_nL}


def check(spec, prop: str, s0=None, ticks: int | None = None, **kw) -> Verdict:
    prop = prop.upper()
    if ticks is None:
        return CHECKS[prop](spec, s0, **kw)
    if prop not in BOUNDED_CHECKS:
        raise ValueError(f"no bounded form of property {prop}")
    return BOUNDED_CHECKS[prop](spec, s0, ticks, **kw)


# -- replay -------------------------------------------------------------------


def replay(spec, start: Configuration, steps, g: DeltaGraph, fresh: FreshSource | None = None) -> list[Configuration]:
    """Run abstract path ``steps`` concretely from ``start``; checks each state's δ."""
    fresh = fresh or FreshSource.after(start)
    c = start
    out = [c]
    for label, pos, j in steps:
        if label == TICK.name:
            if not must_tick(c, spec):
                raise AssertionError("Tick taken while an instantaneous rule applies")
            c = c.tick()
        else:
            _, order = abstract_with_order(c, g.dmax)
            rule = spec.rule(label)
            subst = bind_exact(rule.lhs, [order[p] for p in pos])
            if subst is None:
                raise AssertionError(f"{label} does not match at {pos}")
            c = apply_rule(c, rule, subst, fresh)
        if abstract(c, g.dmax) != g.delta(j):
            raise AssertionError(f"replayed state differs from graph node {j}")
        out.append(c)
    return out


def verify_verdict(spec, v: Verdict, s0: Configuration | None = None) -> bool:
    """Replay the witness or counterexample of ``v`` through the concrete engine."""
    s0 = spec.initial if s0 is None else s0
    g = v.graph
    cs = spec.critical
    if v.status != "ok":
        return True
    if v.holds:
        configs = replay(spec, s0, v.stem, g)
        if v.cycle:
            fresh = FreshSource.after(configs[-1])
            first = replay(spec, configs[-1], v.cycle, g, fresh)
            second = replay(spec, first[-1], v.cycle, g, fresh)
            configs += first[1:] + second[1:]
            assert any(lbl == TICK.name for lbl, _, _ in v.cycle), "cycle without Tick"
            assert abstract(second[-1], g.dmax) == abstract(configs[len(v.stem)], g.dmax)
        elif not v.property.startswith("n"):
            raise AssertionError("unbounded verdict holds without a lasso")
        else:
            ticks = sum(1 for lbl, _, _ in v.stem if lbl == TICK.name)
            assert ticks == v.n, "bounded witness has the wrong number of ticks"
        assert not any(is_critical(c, cs) for c in configs), "witness visits a critical configuration"
        return True
    if v.counterexample is None:
        return True  # nothing finite to show: no lasso exists
    configs = replay(spec, s0, v.counterexample, g)
    last = configs[-1]
    if v.reason == "initial configuration is critical":
        assert is_critical(s0, cs)
    elif v.property == "S":
        assert is_critical(last, cs)
        stem, cycle = v.continuation
        cont = replay(spec, last, stem + cycle, g)
        assert any(lbl == TICK.name for lbl, _, _ in cycle)
    elif v.property == "nS":
        assert is_critical(last, cs)
        stem, _ = v.continuation
        cont = replay(spec, last, stem, g)
        ticks = sum(1 for lbl, _, _ in v.counterexample + stem if lbl == TICK.name)
        assert ticks == v.n and len(cont) == len(stem) + 1
    else:
        assert not any(is_critical(c, cs) for c in configs), "counterexample prefix is not compliant"
        if v.property == "V":
            assert is_PON(spec, last)
        elif v.property == "L":
            assert not check_Z(spec, last).holds
        elif v.property == "nL":
            used = sum(1 for lbl, _, _ in v.counterexample if lbl == TICK.name)
            assert not check_nZ(spec, last, v.n - used).holds
    return True


# -- export ---------------------------------------------------------------------


def to_dot(g: DeltaGraph) -> str:
    """Graphviz source; critical nodes are red with a double border."""
    lines = ["digraph deltagraph {", "  node [shape=box, fontname=monospace];"]
    for i in range(len(g)):
        label = g.delta(i).render().replace('"', '\\"')
        if g.layer(i) is not None:
            label += f"\\nticks={g.layer(i)}"
        style = ' color=red, peripheries=2' if g.critical[i] else ""
        lines.append(f'  n{i} [label="{label}"{style}];')
    for i, out in enumerate(g.succ):
        for j, lbl, _ in out:
            extra = ", style=bold" if lbl == TICK.name else ""
            lines.append(f'  n{i} -> n{j} [label="{lbl}"{extra}];')
    lines.append("}")
    return "\n".join(lines) + "\n"

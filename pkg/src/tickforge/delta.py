"""δ-representations: the finite abstraction of configurations.

A configuration is sorted by timestamp (ties broken by the canonical fact
order), timestamps are replaced by the gaps between neighbours, and every
gap larger than ``dmax`` collapses to ``INF``.  Nonces are renamed to
canonical indices so that configurations equal up to a nonce bijection get
the same representation.

Abstract steps go through a canonical representative: :func:`materialize`
puts the first fact at time 0 and turns each ``INF`` gap into ``dmax + 1``.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import (
    TIME,
    TIME_FACT,
    Configuration,
    Fact,
    Nonce,
    Rule,
    TFact,
    bind_exact,
    fact_key,
    is_critical,
    rename_fact,
)
from .engine import NotApplicable, apply_rule, iter_enabled, must_tick

INF = math.inf
# exact canonical renaming tries every permutation up to this many nonces
MAX_EXACT_NONCES = 6


@dataclass(frozen=True)
class DeltaRep:
    facts: tuple[Fact, ...]
    gaps: tuple  # len(facts) - 1 entries, each an int <= dmax or INF
    dmax: int

    def __post_init__(self):
        if len(self.gaps) != max(0, len(self.facts) - 1):
            raise ValueError("need one gap between consecutive facts")
        if sum(1 for f in self.facts if f.pred == TIME) != 1:
            raise ValueError("a δ-representation has exactly one Time entry")

    @property
    def entries(self) -> list:
        out: list = []
        for i, f in enumerate(self.facts):
            if i:
                out.append(self.gaps[i - 1])
            out.append(f)
        return out

    @property
    def time_index(self) -> int:
        return next(i for i, f in enumerate(self.facts) if f.pred == TIME)

    def render(self) -> str:
        parts = [str(self.facts[0])]
        for g, f in zip(self.gaps, self.facts[1:]):
            parts.append(f"|{'inf' if g == INF else g}|")
            parts.append(str(f))
        return "[" + " ".join(parts) + "]"

    __str__ = render

    def fingerprint(self) -> int:
        h = hashlib.blake2b(self.render().encode(), digest_size=8)
        return int.from_bytes(h.digest(), "big")


def _sequence(items: list[TFact]) -> list[TFact]:
    return sorted(items, key=lambda tf: (tf.time, fact_key(tf.fact)))


def _canonical_renaming(items: list[TFact], nonces: list[Nonce]) -> dict:
    if not nonces:
        return {}
    if len(nonces) <= MAX_EXACT_NONCES:
        best, best_key = None, None
        for perm in itertools.permutations(range(len(nonces))):
            mapping = {n: Nonce(i) for n, i in zip(nonces, perm)}
            key = [(tf.time, fact_key(rename_fact(tf.fact, mapping))) for tf in items]
            key.sort()
            if best_key is None or key < best_key:
                best, best_key = mapping, key
        return best
    # many nonces: number them by first occurrence in the nonce-blind order
    blind = {n: Nonce(-1) for n in nonces}
    order = sorted(items, key=lambda tf: (tf.time, fact_key(rename_fact(tf.fact, blind)), fact_key(tf.fact)))
    mapping: dict = {}
    for tf in order:
        for a in tf.fact.args:
            for n in _walk_nonces(a):
                if n not in mapping:
                    mapping[n] = Nonce(len(mapping))
    return mapping


def _walk_nonces(t):
    if isinstance(t, Nonce):
        yield t
    elif isinstance(t, tuple):
        for a in t[1:]:
            yield from _walk_nonces(a)


def abstract_with_order(config: Configuration, dmax: int) -> tuple[DeltaRep, list[TFact]]:
    """δ-representation plus the original facts in sequence order."""
    items = config.items()
    nonces = sorted(config.nonces())
    mapping = _canonical_renaming(items, nonces)
    keyed = sorted(
        ((tf.time, fact_key(rename_fact(tf.fact, mapping)), i) for i, tf in enumerate(items)),
    )
    order = [items[i] for _, _, i in keyed]
    facts = tuple(rename_fact(tf.fact, mapping) for tf in order)
    gaps = []
    for a, b in zip(order, order[1:]):
        d = b.time - a.time
        gaps.append(d if d <= dmax else INF)
    # future facts must stay within dmax of the global time
    t = config.time
    for tf in order:
        if tf.time - t > dmax:
            raise ValueError(f"fact {tf} is more than dmax={dmax} in the future")
    return DeltaRep(facts, tuple(gaps), dmax), order


def abstract(config: Configuration, dmax: int) -> DeltaRep:
    return abstract_with_order(config, dmax)[0]


def materialize(d: DeltaRep) -> Configuration:
    """Canonical representative: first entry at time 0, ``INF`` gaps become ``dmax + 1``."""
    t = 0
    items = [TFact(d.facts[0], 0)]
    for g, f in zip(d.gaps, d.facts[1:]):
        t += d.dmax + 1 if g == INF else g
        items.append(TFact(f, t))
    return Configuration.of(items)


def sequence_of(d: DeltaRep) -> list[TFact]:
    """Timestamped facts of :func:`materialize` in δ order (position-aligned)."""
    t = 0
    out = [TFact(d.facts[0], 0)]
    for g, f in zip(d.gaps, d.facts[1:]):
        t += d.dmax + 1 if g == INF else g
        out.append(TFact(f, t))
    return out


def equivalent(a: DeltaRep, b: DeltaRep) -> bool:
    if a.dmax != b.dmax:
        raise ValueError("δ-representations built with different dmax")
    return a == b


def delta_tick(d: DeltaRep) -> DeltaRep:
    return abstract(materialize(d).tick(), d.dmax)


class DeltaChoice(NamedTuple):
    rule: Rule
    positions: tuple  # index into d.facts for each pattern of rule.lhs
    result: DeltaRep


def delta_step(d: DeltaRep, rule: Rule, positions=None) -> DeltaRep:
    """Apply ``rule`` with its pre-condition bound to the facts at ``positions``."""
    if rule.is_tick:
        return delta_tick(d)
    seq = sequence_of(d)
    if positions is None or len(positions) != len(rule.lhs) or len(set(positions)) != len(positions):
        raise NotApplicable(f"{rule.name}: bad positions {positions}")
    subst = bind_exact(rule.lhs, [seq[p] for p in positions])
    if subst is None:
        raise NotApplicable(f"{rule.name}: pattern does not match at {positions}")
    config = Configuration.of(seq)
    return abstract(apply_rule(config, rule, subst), d.dmax)


def locate(order: list[TFact], lhs_facts: list[TFact]) -> tuple:
    """Positions in ``order`` of the given instance facts (multiset-aware)."""
    used: set[int] = set()
    out = []
    for tf in lhs_facts:
        for i, o in enumerate(order):
            if i not in used and o == tf:
                used.add(i)
                out.append(i)
                break
        else:
            raise ValueError(f"{tf} not present")
    return tuple(out)


def instance_facts(rule: Rule, subst, config: Configuration) -> list[TFact]:
    from .core import instantiate_fact

    terms, times = subst.term_map(), subst.time_map()
    out = []
    for p in rule.lhs:
        out.append(TFact(instantiate_fact(p.fact, terms), times[p.tvar]))
    return out


def delta_enabled(d: DeltaRep, spec) -> list[DeltaChoice]:
    seq = sequence_of(d)
    config = Configuration.of(seq)
    out = []
    for c in iter_enabled(config, spec):
        pos = locate(seq, instance_facts(c.rule, c.subst, config))
        out.append(DeltaChoice(c.rule, pos, abstract(c.result, d.dmax)))
    return out


def delta_must_tick(d: DeltaRep, spec) -> bool:
    return must_tick(materialize(d), spec)


def delta_critical(d: DeltaRep, cs) -> bool:
    return is_critical(materialize(d), cs)


def count_bound(stats) -> int:
    """L_Σ(m, k, Dmax) = (Dmax+2)^(m-1) · J^m · (E+2mk)^(mk), exactly."""
    m, k = stats.m, stats.k
    return (stats.dmax + 2) ** (m - 1) * stats.J ** m * (stats.E + 2 * m * k) ** (m * k)


def time_fact_position(d: DeltaRep) -> int:
    return d.facts.index(TIME_FACT)

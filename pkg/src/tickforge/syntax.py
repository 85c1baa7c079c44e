"""Parser, canonical printer and static analysis for ``.tmsr`` specifications.

The concrete syntax, informally::

    spec drones;                              // optional header
    sort Id = {d1, d2};
    sort Coord = 0..5;
    sort Key = nonce;
    pred Dr(Id, Coord, Coord, Coord);
    func pair(Id, Id) : Link;
    pragma progressing;
    init { Time@0, Dr(d1,0,0,3)@0 }
    rule click[D in 0..2]: Time@T, P(I,X,Y)@T1, Dr(Id,X,Y,E+1)@T
        | { T1 < T, T = T1 + D }
        -> Time@T, P(I,X,Y)@T, Dr(Id,X,Y,E)@(T+1);
    critical { Dr(Id,X,Y,0)@T }

Names starting with an upper-case letter inside terms are variables, lower-case
names are constants.  A right-hand fact that repeats a left-hand fact with the
same time variable is preserved; every other right-hand fact is created at
``T + d``.  Rule parameters in square brackets expand the rule into one ground
instance per combination of values.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .core import (
    TIME,
    TIME_FACT,
    Configuration,
    Constraint,
    Created,
    CriticalPair,
    CriticalSpec,
    Fact,
    Plus,
    Rule,
    TFact,
    TPattern,
    Var,
    fact_size,
    render_pattern,
    render_term,
    term_size,
)

KEYWORDS = {"sort", "pred", "func", "init", "rule", "critical", "pragma", "exists", "in", "nonce", "spec"}
PRAGMAS = {"progressing"}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class SpecError(Exception):
    """Raised by :func:`parse_spec`; carries every diagnostic found."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Sort:
    name: str
    kind: str  # "enum" | "range" | "nonce"
    values: tuple = ()
    lo: int = 0
    hi: int = 0

    def contains(self, v) -> bool:
        if self.kind == "enum":
            return isinstance(v, str) and v in self.values
        if self.kind == "range":
            return type(v) is int and self.lo <= v <= self.hi
        return False

    def domain(self) -> tuple:
        if self.kind == "enum":
            return self.values
        if self.kind == "range":
            return tuple(range(self.lo, self.hi + 1))
        raise ValueError(f"nonce sort {self.name} has no finite domain")


@dataclass(eq=True)
class SpecModel:
    name: str = "spec"
    sorts: dict = field(default_factory=dict)  # name -> Sort
    preds: dict = field(default_factory=dict)  # name -> tuple of sort names
    funcs: dict = field(default_factory=dict)  # name -> (arg sorts, result sort)
    rules: tuple = ()
    critical: CriticalSpec = field(default_factory=CriticalSpec)
    initial: Configuration = field(default_factory=lambda: Configuration(0))
    pragmas: frozenset = frozenset()
    expansion: dict = field(default_factory=dict, compare=False)

    @property
    def progressing_pragma(self) -> bool:
        return "progressing" in self.pragmas

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def has_fresh(self) -> bool:
        return any(r.fresh for r in self.rules)


# -- lexer ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<nat>[0-9]+)
  | (?P<op>->|\.\.|>=|<=|[{}()\[\],;:|@+\-.<>=])
    """,
    re.X,
)


@dataclass(frozen=True)
class Token:
    kind: str  # name | nat | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            diags.append(Diagnostic(line, col, f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("name", "nat", "op"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens, diags


# -- raw syntax tree ------------------------------------------------------


@dataclass
class _RFact:
    pred: str
    args: list
    time: tuple | None
    line: int
    col: int


@dataclass
class _RRule:
    name: str
    params: list
    lhs: list
    guard: list
    fresh: list
    rhs: list
    line: int
    col: int


@dataclass
class _RCritical:
    params: list
    facts: list
    guard: list
    line: int
    col: int


class _Fail(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(message)
        self.diag = Diagnostic(line, col, message)


class _Disabled(Exception):
    """A macro instance that creates or mentions a numeral outside its sort."""


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise _Fail(tok.line, tok.col, message)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected '{text}', found '{found}'")
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str = "name") -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.fail(f"expected {what}, found '{t.text or 'end of input'}'")
        self.i += 1
        return t

    def nat(self) -> int:
        t = self.tok
        if t.kind != "nat":
            self.fail(f"expected a natural number, found '{t.text or 'end of input'}'")
        self.i += 1
        return int(t.text)

    def sync(self):
        # skip to just past the next ';' or to a declaration keyword at depth 0
        depth = 0
        start = self.i
        while self.tok.kind != "eof":
            t = self.tok
            if t.text in ("{", "(", "["):
                depth += 1
            elif t.text in ("}", ")", "]"):
                depth = max(0, depth - 1)
            elif t.text == ";" and depth == 0:
                self.i += 1
                return
            elif (
                self.i > start
                and depth == 0
                and t.kind == "name"
                and t.text in ("sort", "pred", "func", "init", "rule", "critical", "pragma")
            ):
                return
            self.i += 1

    # terms ---------------------------------------------------------------

    def term(self):
        t = self.tok
        if t.kind == "nat":
            self.i += 1
            base = ("nat", int(t.text), t.line, t.col)
        elif t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            if self.accept("("):
                args = [] if self.at(")") else self.term_list()
                self.expect(")")
                base = ("app", t.text, args, t.line, t.col)
            else:
                base = ("id", t.text, t.line, t.col)
        else:
            self.fail(f"expected a term, found '{t.text or 'end of input'}'")
        if self.accept("+"):
            off = self.offset_atom()
            return ("plus", base, off, t.line, t.col)
        if self.at("-"):
            self.fail("only 'var + c' arithmetic is supported in terms")
        return base

    def term_list(self) -> list:
        out = [self.term()]
        while self.accept(","):
            out.append(self.term())
        return out

    def offset_atom(self):
        t = self.tok
        if t.kind == "nat":
            self.i += 1
            return ("nat", int(t.text))
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            return ("id", t.text, t.line, t.col)
        self.fail("expected a number or parameter after '+'")

    def fact(self, timed: bool = True) -> _RFact:
        t = self.name("a predicate")
        args = []
        if self.accept("("):
            if not self.at(")"):
                args = self.term_list()
            self.expect(")")
        time = None
        if timed:
            self.expect("@")
            time = self.time_expr()
        return _RFact(t.text, args, time, t.line, t.col)

    def time_expr(self):
        t = self.tok
        if t.kind == "nat":
            self.i += 1
            return ("nat", int(t.text))
        if self.accept("("):
            v = self.name("a time variable")
            if self.accept("+"):
                off = self.offset_atom()
                self.expect(")")
                return ("plus", v.text, off, v.line, v.col)
            self.expect(")")
            return ("id", v.text, v.line, v.col)
        v = self.name("a timestamp")
        return ("id", v.text, v.line, v.col)

    def fact_list(self) -> list:
        out = [self.fact()]
        while self.accept(","):
            out.append(self.fact())
        return out

    def constraint_side(self):
        v = self.name("a time variable")
        sign, off = 1, ("nat", 0)
        if self.at("+") or self.at("-"):
            sign = 1 if self.tok.text == "+" else -1
            self.i += 1
            off = self.offset_atom()
        return (v.text, sign, off, v.line, v.col)

    def constraints(self) -> list:
        self.expect("{")
        out = []
        if not self.at("}"):
            while True:
                start = self.tok
                a = self.constraint_side()
                op = self.tok
                if op.text not in (">", "<", "=", ">=", "<="):
                    self.fail(f"expected a comparison, found '{op.text or 'end of input'}'")
                self.i += 1
                b = self.constraint_side()
                out.append((a, op.text, b, start.line, start.col))
                if not self.accept(","):
                    break
        self.expect("}")
        return out

    def params(self) -> list:
        out = []
        if not self.accept("["):
            return out
        while True:
            p = self.name("a parameter")
            self.expect("in")
            if self.accept("{"):
                vals = []
                while True:
                    if self.tok.kind == "nat":
                        vals.append(self.nat())
                    else:
                        vals.append(self.name("a constant").text)
                    if not self.accept(","):
                        break
                self.expect("}")
                out.append((p.text, ("set", vals), p.line, p.col))
            elif self.tok.kind == "nat":
                lo = self.nat()
                self.expect("..")
                hi = self.nat()
                out.append((p.text, ("set", list(range(lo, hi + 1))), p.line, p.col))
            else:
                s = self.name("a sort")
                out.append((p.text, ("sort", s.text), p.line, p.col))
            if not self.accept(","):
                break
        self.expect("]")
        return out


# -- elaboration ----------------------------------------------------------


class _Builder:
    def __init__(self):
        self.diags: list[Diagnostic] = []
        self.spec = SpecModel()
        self.raw_rules: list[_RRule] = []
        self.raw_critical: list[_RCritical] = []
        self.raw_init: list | None = None
        self.init_pos = (1, 1)
        self.pragmas: set[str] = set()

    def err(self, line: int, col: int, message: str):
        self.diags.append(Diagnostic(line, col, message))

    # declarations ---------------------------------------------------------

    def parse(self, p: _Parser):
        first = True
        while p.tok.kind != "eof":
            try:
                t = p.tok
                if t.text == "spec" and first:
                    p.i += 1
                    self.spec.name = p.name("a spec name").text
                    p.expect(";")
                elif t.text == "sort":
                    self.sort_decl(p)
                elif t.text == "pred":
                    self.pred_decl(p)
                elif t.text == "func":
                    self.func_decl(p)
                elif t.text == "pragma":
                    p.i += 1
                    n = p.name("a pragma")
                    if n.text not in PRAGMAS:
                        p.fail(f"unknown pragma '{n.text}'", n)
                    self.pragmas.add(n.text)
                    p.expect(";")
                elif t.text == "init":
                    p.i += 1
                    if self.raw_init is not None:
                        p.fail("duplicate init block", t)
                    self.init_pos = (t.line, t.col)
                    p.expect("{")
                    facts = p.fact_list() if not p.at("}") else []
                    p.expect("}")
                    p.accept(";")
                    self.raw_init = facts
                elif t.text == "rule":
                    p.i += 1
                    n = p.name("a rule name")
                    params = p.params()
                    p.expect(":")
                    lhs = p.fact_list()
                    guard = p.constraints() if p.accept("|") else []
                    p.expect("->")
                    fresh = []
                    if p.accept("exists"):
                        fresh.append(p.name("a variable").text)
                        while p.accept(","):
                            fresh.append(p.name("a variable").text)
                        p.expect(".")
                    rhs = [] if p.at(";") else p.fact_list()
                    p.expect(";")
                    self.raw_rules.append(_RRule(n.text, params, lhs, guard, fresh, rhs, n.line, n.col))
                elif t.text == "critical":
                    p.i += 1
                    params = p.params()
                    p.expect("{")
                    facts = p.fact_list()
                    guard = p.constraints() if p.accept("|") else []
                    p.expect("}")
                    p.accept(";")
                    self.raw_critical.append(_RCritical(params, facts, guard, t.line, t.col))
                else:
                    p.fail(f"unexpected '{t.text}' at top level")
            except _Fail as e:
                self.diags.append(e.diag)
                p.sync()
            first = False

    def sort_decl(self, p: _Parser):
        p.expect("sort")
        n = p.name("a sort name")
        p.expect("=")
        if n.text in self.spec.sorts:
            p.fail(f"duplicate sort '{n.text}'", n)
        if p.accept("{"):
            vals = [p.name("a constant").text]
            while p.accept(","):
                vals.append(p.name("a constant").text)
            p.expect("}")
            for v in vals:
                if not v[0].islower():
                    p.fail(f"constant '{v}' must start with a lower-case letter", n)
            s = Sort(n.text, "enum", tuple(vals))
        elif p.accept("nonce"):
            s = Sort(n.text, "nonce")
        else:
            lo = p.nat()
            p.expect("..")
            hi = p.nat()
            if hi < lo:
                p.fail(f"empty range {lo}..{hi}", n)
            s = Sort(n.text, "range", lo=lo, hi=hi)
        p.expect(";")
        self.spec.sorts[n.text] = s

    def _sort_list(self, p: _Parser) -> list[str]:
        out = []
        if p.accept("("):
            if not p.at(")"):
                out.append(self._sort_ref(p))
                while p.accept(","):
                    out.append(self._sort_ref(p))
            p.expect(")")
        return out

    def _sort_ref(self, p: _Parser) -> str:
        s = p.name("a sort")
        if s.text not in self.spec.sorts:
            p.fail(f"unknown sort '{s.text}'", s)
        return s.text

    def pred_decl(self, p: _Parser):
        p.expect("pred")
        n = p.name("a predicate name")
        if n.text == TIME:
            p.fail("predicate Time is built in", n)
        if n.text in self.spec.preds:
            p.fail(f"duplicate predicate '{n.text}'", n)
        sorts = self._sort_list(p)
        p.expect(";")
        self.spec.preds[n.text] = tuple(sorts)

    def func_decl(self, p: _Parser):
        p.expect("func")
        n = p.name("a function name")
        if n.text in self.spec.funcs:
            p.fail(f"duplicate function '{n.text}'", n)
        args = self._sort_list(p)
        p.expect(":")
        res = self._sort_ref(p)
        p.expect(";")
        if self.spec.sorts[res].kind != "enum":
            p.fail("function results must have an enumerated sort", n)
        self.spec.funcs[n.text] = (tuple(args), res)

    # terms ------------------------------------------------------------------

    def literal_ok(self, v, sort: str) -> bool:
        return self.spec.sorts[sort].contains(v)

    def offset(self, raw, env) -> int:
        if raw[0] == "nat":
            return raw[1]
        name = raw[1]
        if name in env and type(env[name]) is int:
            return env[name]
        raise _Fail(raw[2], raw[3], f"offset '{name}' is not a numeric parameter")

    def term(self, raw, sort: str, env: dict, vsorts: dict, ctx: str):
        kind = raw[0]
        s = self.spec.sorts[sort]
        if kind == "nat":
            if s.kind != "range":
                raise _Fail(raw[2], raw[3], f"numeral {raw[1]} used at non-numeric sort {sort}")
            if not s.contains(raw[1]):
                raise _Disabled if env else _Fail(raw[2], raw[3], f"numeral {raw[1]} outside sort {sort}")
            return raw[1]
        if kind == "id":
            name = raw[1]
            if name in env:
                v = env[name]
                if not s.contains(v):
                    if type(v) is int and s.kind == "range":
                        raise _Disabled
                    raise _Fail(raw[2], raw[3], f"parameter value {v} does not belong to sort {sort}")
                return v
            if name[0].isupper() or name[0] == "_":
                prev = vsorts.setdefault(name, sort)
                if prev != sort:
                    raise _Fail(raw[2], raw[3], f"variable {name} used at sorts {prev} and {sort}")
                return Var(name, sort)
            if s.kind != "enum" or name not in s.values:
                raise _Fail(raw[2], raw[3], f"constant '{name}' is not in sort {sort}")
            return name
        if kind == "app":
            fname = raw[1]
            if fname not in self.spec.funcs:
                raise _Fail(raw[3], raw[4], f"unknown function '{fname}'")
            argsorts, res = self.spec.funcs[fname]
            if res != sort:
                raise _Fail(raw[3], raw[4], f"function {fname} returns {res}, expected {sort}")
            if len(argsorts) != len(raw[2]):
                raise _Fail(raw[3], raw[4], f"function {fname} expects {len(argsorts)} arguments")
            return (fname,) + tuple(self.term(a, st, env, vsorts, ctx) for a, st in zip(raw[2], argsorts))
        if kind == "plus":
            base, off = raw[1], self.offset(raw[2], env)
            if s.kind != "range":
                raise _Fail(raw[3], raw[4], f"arithmetic at non-numeric sort {sort}")
            if base[0] == "nat" or (base[0] == "id" and base[1] in env):
                v = (base[1] if base[0] == "nat" else env[base[1]]) + off
                if not s.contains(v):
                    raise _Disabled if env else _Fail(raw[3], raw[4], f"numeral {v} outside sort {sort}")
                return v
            if base[0] != "id" or not (base[1][0].isupper() or base[1][0] == "_"):
                raise _Fail(raw[3], raw[4], "only 'var + c' arithmetic is supported")
            v = self.term(base, sort, env, vsorts, ctx)
            if off == 0:
                return v
            return Plus(v, off, s.lo, s.hi)
        raise AssertionError(kind)

    def fact(self, rf: _RFact, env: dict, vsorts: dict, ctx: str) -> Fact:
        if rf.pred == TIME:
            if rf.args:
                raise _Fail(rf.line, rf.col, "Time takes no arguments")
            return TIME_FACT
        if rf.pred not in self.spec.preds:
            raise _Fail(rf.line, rf.col, f"unknown predicate '{rf.pred}'")
        sorts = self.spec.preds[rf.pred]
        if len(sorts) != len(rf.args):
            raise _Fail(rf.line, rf.col, f"predicate {rf.pred} expects {len(sorts)} arguments, got {len(rf.args)}")
        return Fact(rf.pred, tuple(self.term(a, s, env, vsorts, ctx) for a, s in zip(rf.args, sorts)))

    # rules --------------------------------------------------------------------

    def expand(self, params: list, line: int, col: int):
        if not params:
            yield {}
            return
        names, domains = [], []
        for name, dom, pl, pc in params:
            if dom[0] == "sort":
                s = self.spec.sorts.get(dom[1])
                if s is None:
                    raise _Fail(pl, pc, f"unknown sort '{dom[1]}'")
                if s.kind == "nonce":
                    raise _Fail(pl, pc, "parameters cannot range over a nonce sort")
                domains.append(s.domain())
            else:
                domains.append(tuple(dom[1]))
            if name in names:
                raise _Fail(pl, pc, f"duplicate parameter '{name}'")
            names.append(name)
        for combo in itertools.product(*domains):
            yield dict(zip(names, combo))

    def rule(self, rr: _RRule, env: dict) -> Rule:
        vsorts: dict = {}
        times = [f for f in rr.lhs if f.pred == TIME]
        if len(times) != 1:
            raise _Fail(rr.line, rr.col, f"rule {rr.name}: left-hand side must contain exactly one Time fact")
        tv = times[0].time
        if tv[0] != "id":
            raise _Fail(times[0].line, times[0].col, "Time on the left must carry a time variable")
        gtv = tv[1]
        lhs: list[TPattern] = []
        for rf in rr.lhs:
            if rf.pred == TIME:
                continue
            if rf.time[0] != "id":
                raise _Fail(rf.line, rf.col, "left-hand facts must be timestamped by a time variable")
            lhs.append(TPattern(self.fact(rf, env, vsorts, "lhs"), rf.time[1]))
        lhs_vars = set(vsorts)
        for x in rr.fresh:
            if x in lhs_vars:
                raise _Fail(rr.line, rr.col, f"fresh variable {x} occurs on the left-hand side")
        rtimes = [f for f in rr.rhs if f.pred == TIME]
        if len(rtimes) != 1 or rtimes[0].time[:2] != ("id", gtv):
            raise _Fail(rr.line, rr.col, f"rule {rr.name}: right-hand side must contain Time@{gtv}")
        preserved: list[TPattern] = []
        created: list[Created] = []
        unused = list(range(len(lhs)))
        for rf in rr.rhs:
            if rf.pred == TIME:
                continue
            f = self.fact(rf, env, vsorts, "rhs")
            t = rf.time
            if t[0] == "id":
                hit = next((i for i in unused if lhs[i] == TPattern(f, t[1])), None)
                if hit is not None:
                    unused.remove(hit)
                    preserved.append(lhs[hit])
                elif t[1] == gtv:
                    created.append(Created(f, 0))
                else:
                    raise _Fail(rf.line, rf.col, f"created fact {rf.pred} must be timestamped {gtv} or ({gtv}+d)")
            elif t[0] == "plus":
                if t[1] != gtv:
                    raise _Fail(rf.line, rf.col, f"created timestamps must be relative to {gtv}")
                created.append(Created(f, self.offset(t[2], env)))
            else:
                raise _Fail(rf.line, rf.col, "created facts cannot carry absolute timestamps")
        consumed = [lhs[i] for i in unused]
        for x in rr.fresh:
            s = vsorts.get(x)
            if s is None:
                raise _Fail(rr.line, rr.col, f"fresh variable {x} is not used")
            if self.spec.sorts[s].kind != "nonce":
                raise _Fail(rr.line, rr.col, f"fresh variable {x} has non-nonce sort {s}")
        for x, s in vsorts.items():
            if x not in lhs_vars and x not in rr.fresh:
                raise _Fail(rr.line, rr.col, f"variable {x} on the right-hand side is unbound")
        tvars = {gtv} | {p.tvar for p in lhs}
        clash = tvars & set(vsorts)
        if clash:
            raise _Fail(rr.line, rr.col, f"{sorted(clash)[0]} used both as a term and a time variable")
        guard = [self.constraint(c, tvars, env) for c in rr.guard]
        if "progressing" in self.pragmas:
            for p in consumed:
                if p.tvar != gtv:
                    implicit = Constraint(gtv, ">=", p.tvar, 0)
                    if implicit not in guard:
                        guard.append(implicit)
        return Rule(
            rr.name,
            gtv,
            tuple(preserved),
            tuple(consumed),
            tuple(created),
            tuple(guard),
            tuple(rr.fresh),
        )

    def constraint(self, raw, tvars: set, env: dict) -> Constraint:
        a, op, b, line, col = raw
        for side in (a, b):
            if side[0] not in tvars:
                raise _Fail(side[3], side[4], f"guard variable not in pre-condition: {side[0]}")
        oa = a[1] * self.offset(a[2], env)
        ob = b[1] * self.offset(b[2], env)
        if op in (">", ">=", "="):
            return Constraint(a[0], op, b[0], ob - oa)
        return Constraint(b[0], ">" if op == "<" else ">=", a[0], oa - ob)

    def critical(self, rc: _RCritical, env: dict) -> CriticalPair:
        vsorts: dict = {}
        pats = []
        for rf in rc.facts:
            if rf.time[0] != "id":
                raise _Fail(rf.line, rf.col, "critical facts must be timestamped by a time variable")
            pats.append(TPattern(self.fact(rf, env, vsorts, "critical"), rf.time[1]))
        tvars = {p.tvar for p in pats}
        clash = tvars & set(vsorts)
        if clash:
            raise _Fail(rc.line, rc.col, f"{sorted(clash)[0]} used both as a term and a time variable")
        cons = []
        for c in rc.guard:
            try:
                cons.append(self.constraint(c, tvars, env))
            except _Fail as e:
                raise _Fail(e.diag.line, e.diag.col, e.diag.message.replace("pre-condition", "critical pattern"))
        return CriticalPair(tuple(pats), tuple(cons))

    def finish(self) -> SpecModel:
        spec = self.spec
        spec.pragmas = frozenset(self.pragmas)
        rules: list[Rule] = []
        seen: dict[str, tuple] = {}
        for rr in self.raw_rules:
            try:
                count = 0
                for env in self.expand(rr.params, rr.line, rr.col):
                    try:
                        r = self.rule(rr, env)
                    except _Disabled:
                        continue
                    if env:
                        suffix = "_".join(str(v) for v in env.values())
                        r = Rule(f"{rr.name}__{suffix}", r.time_var, r.preserved, r.consumed,
                                 r.created, r.guard, r.fresh)
                    if r.name in seen:
                        raise _Fail(rr.line, rr.col, f"duplicate rule name '{r.name}'")
                    seen[r.name] = (rr.line, rr.col)
                    rules.append(r)
                    count += 1
                if rr.params:
                    spec.expansion[rr.name] = count
            except _Fail as e:
                self.diags.append(e.diag)
            except ValueError as e:
                self.err(rr.line, rr.col, str(e))
        spec.rules = tuple(rules)
        pairs = []
        for rc in self.raw_critical:
            try:
                for env in self.expand(rc.params, rc.line, rc.col):
                    try:
                        pairs.append(self.critical(rc, env))
                    except _Disabled:
                        continue
            except _Fail as e:
                self.diags.append(e.diag)
            except ValueError as e:
                self.err(rc.line, rc.col, str(e))
        spec.critical = CriticalSpec(tuple(pairs))
        if self.raw_init is None:
            self.err(*self.init_pos, "missing init block")
        else:
            items = []
            for rf in self.raw_init:
                try:
                    if rf.time[0] != "nat":
                        raise _Fail(rf.line, rf.col, "initial facts need a numeric timestamp")
                    vs: dict = {}
                    f = self.fact(rf, {}, vs, "init")
                    if vs:
                        raise _Fail(rf.line, rf.col, f"initial fact {rf.pred} is not ground")
                    items.append(TFact(f, rf.time[1]))
                except _Fail as e:
                    self.diags.append(e.diag)
            n_time = sum(1 for tf in items if tf.fact.pred == TIME)
            if n_time != 1:
                self.err(*self.init_pos, "initial configuration must contain exactly one Time fact")
            else:
                spec.initial = Configuration.of(items)
        return spec


def parse_spec(text: str) -> SpecModel:
    """Parse ``.tmsr`` source; raises :class:`SpecError` listing all diagnostics."""
    tokens, diags = tokenize(text)
    b = _Builder()
    b.diags.extend(diags)
    if not diags:
        b.parse(_Parser(tokens))
    if not b.diags:
        spec = b.finish()
    if b.diags:
        raise SpecError(sorted(b.diags, key=lambda d: (d.line, d.col)))
    return spec


def load_spec(path) -> SpecModel:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


# -- printer --------------------------------------------------------------


def _ptime(tv: str, d: int) -> str:
    return tv if d == 0 else f"({tv}+{d})"


def print_spec(spec: SpecModel) -> str:
    """Canonical source text; ``parse_spec(print_spec(s)) == s``."""
    out = [f"spec {spec.name};"]
    for s in spec.sorts.values():
        if s.kind == "enum":
            out.append(f"sort {s.name} = {{{', '.join(s.values)}}};")
        elif s.kind == "range":
            out.append(f"sort {s.name} = {s.lo}..{s.hi};")
        else:
            out.append(f"sort {s.name} = nonce;")
    for f, (args, res) in spec.funcs.items():
        out.append(f"func {f}({', '.join(args)}) : {res};")
    for p, args in spec.preds.items():
        out.append(f"pred {p}({', '.join(args)});" if args else f"pred {p};")
    for pr in sorted(spec.pragmas):
        out.append(f"pragma {pr};")
    out.append("init { " + ", ".join(str(tf) for tf in spec.initial.items()) + " }")
    for r in spec.rules:
        lhs = [f"Time@{r.time_var}"] + [str(p) for p in r.preserved + r.consumed]
        rhs = [f"Time@{r.time_var}"] + [str(p) for p in r.preserved]
        rhs += [f"{render_pattern(c.fact)}@{_ptime(r.time_var, c.delay)}" for c in r.created]
        guard = f" | {{ {', '.join(str(c) for c in r.guard)} }}" if r.guard else ""
        ex = f"exists {', '.join(r.fresh)}. " if r.fresh else ""
        out.append(f"rule {r.name}: {', '.join(lhs)}{guard} -> {ex}{', '.join(rhs)};")
    for pair in spec.critical:
        facts = ", ".join(str(p) for p in pair.patterns)
        guard = f" | {{ {', '.join(str(c) for c in pair.constraints)} }}" if pair.constraints else ""
        out.append(f"critical {{ {facts}{guard} }}")
    return "\n".join(out) + "\n"


# -- static analysis --------------------------------------------------------


@dataclass(frozen=True)
class SpecStats:
    m: int
    k: int
    dmax: int
    J: int
    E: int
    balanced: bool
    progressing: bool
    rules: int = 0

    @property
    def lsigma(self) -> int:
        from .delta import count_bound

        return count_bound(self)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "dmax": self.dmax,
            "J": self.J,
            "E": self.E,
            "balanced": self.balanced,
            "progressing": self.progressing,
            "rules": self.rules,
            "lsigma_bound": str(self.lsigma),
        }


def _sort_max_size(spec: SpecModel, sort: str, stack=()) -> int:
    s = spec.sorts[sort]
    if s.kind == "range":
        return s.hi + 1
    best = 1
    if sort in stack:
        return best
    for f, (args, res) in spec.funcs.items():
        if res == sort:
            best = max(best, 1 + sum(_sort_max_size(spec, a, stack + (sort,)) for a in args))
    return best


def _pattern_max_size(spec: SpecModel, t) -> int:
    if isinstance(t, Var):
        return _sort_max_size(spec, t.sort)
    if isinstance(t, Plus):
        return t.hi + 1 if t.hi is not None else _sort_max_size(spec, t.var.sort)
    if isinstance(t, tuple):
        return 1 + sum(_pattern_max_size(spec, a) for a in t[1:])
    return term_size(t)


def _fact_max_size(spec: SpecModel, f: Fact) -> int:
    return 1 + sum(_pattern_max_size(spec, a) for a in f.args)


def guard_entails(guard, lhs_var: str, rhs_var: str) -> bool:
    """Whether ``guard`` implies ``lhs_var >= rhs_var`` (difference-bound reasoning)."""
    if lhs_var == rhs_var:
        return True
    names = sorted({v for c in guard for v in c.variables()} | {lhs_var, rhs_var})
    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    NEG = float("-inf")
    # low[i][j] = best known lower bound on x_j - x_i
    low = [[NEG] * n for _ in range(n)]
    for i in range(n):
        low[i][i] = 0
    for c in guard:
        a, b = idx[c.lhs], idx[c.rhs]
        bound = c.offset + 1 if c.rel == ">" else c.offset
        low[b][a] = max(low[b][a], bound)
        if c.rel == "=":
            low[a][b] = max(low[a][b], -c.offset)
    for m in range(n):
        for i in range(n):
            if low[i][m] == NEG:
                continue
            for j in range(n):
                if low[m][j] != NEG and low[i][m] + low[m][j] > low[i][j]:
                    low[i][j] = low[i][m] + low[m][j]
    if any(low[i][i] > 0 for i in range(n)):
        return True  # unsatisfiable guard: the rule never fires
    return low[idx[rhs_var]][idx[lhs_var]] >= 0


def analyze(spec: SpecModel) -> SpecStats:
    m = len(spec.initial)
    k = max((fact_size(tf.fact) for tf in spec.initial.items()), default=1)
    dmax = max((tf.time for tf in spec.initial.items()), default=0)
    balanced = True
    progressing = True
    for r in spec.rules:
        pats = [p.fact for p in r.preserved + r.consumed] + [c.fact for c in r.created]
        for f in pats:
            k = max(k, _fact_max_size(spec, f))
        for c in r.created:
            dmax = max(dmax, c.delay)
        for c in r.guard:
            dmax = max(dmax, abs(c.offset))
        if len(r.consumed) != len(r.created):
            balanced = False
        if not any(c.delay >= 1 for c in r.created):
            progressing = False
        for p in r.consumed:
            if not guard_entails(r.guard, r.time_var, p.tvar):
                progressing = False
    for pair in spec.critical:
        for p in pair.patterns:
            k = max(k, _fact_max_size(spec, p.fact))
        for c in pair.constraints:
            dmax = max(dmax, abs(c.offset))
    J = len(spec.preds) + 1
    E = sum(len(s.values) for s in spec.sorts.values() if s.kind == "enum") + len(spec.funcs)
    if any(s.kind == "range" for s in spec.sorts.values()):
        E += 2  # z and s
    return SpecStats(m, k, dmax, J, E, balanced, balanced and progressing, len(spec.rules))


def render_rule(rule: Rule) -> str:
    return str(rule)


__all__ = [
    "Diagnostic",
    "SpecError",
    "Sort",
    "SpecModel",
    "SpecStats",
    "analyze",
    "guard_entails",
    "load_spec",
    "parse_spec",
    "print_spec",
    "render_rule",
    "render_term",
    "tokenize",
]

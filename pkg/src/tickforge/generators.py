"""Specification generators: drones, 3-SAT reductions, the counterexample corpus
and random small balanced systems.

Every generator builds ``.tmsr`` source text and parses it, so generated
specs go through the same front end as hand-written ones.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .syntax import SpecModel, parse_spec

DIRECTIONS = ("north", "south", "west", "east")


# -- drones -------------------------------------------------------------------


def drone_source(x_max: int = 2, y_max: int = 2, e_max: int = 3, n_points: int | None = None,
                 point_coords: Sequence[tuple[int, int]] = ((1, 1),), base_coord: tuple[int, int] = (0, 0),
                 M: int = 1, drones: int = 1, wind: bool = False,
                 strategy: Callable[[str, tuple], bool] | None = None) -> str:
    """Source text of the drone scenario on the grid ``0..x_max`` × ``0..y_max``.

    ``strategy(action, ages)`` may veto a rule instance, where ``ages`` holds
    the elapsed time since each point was last photographed.  Without it every
    instance is allowed and the checkers do the strategizing.
    """
    point_coords = [tuple(p) for p in point_coords]
    if n_points is None:
        n_points = len(point_coords)
    if n_points != len(point_coords):
        raise ValueError("n_points does not match point_coords")
    for name, v in (("x_max", x_max), ("y_max", y_max), ("M", M), ("drones", drones)):
        if v < 0:
            raise ValueError(f"{name} must be non-negative")
    if e_max < 1:
        raise ValueError("e_max must be positive")
    for x, y in point_coords + [tuple(base_coord)]:
        if not (0 <= x <= x_max and 0 <= y <= y_max):
            raise ValueError(f"coordinate {(x, y)} lies outside the grid")
    xb, yb = base_coord
    pts = [f"p{i + 1}" for i in range(n_points)]
    ids = [f"d{i + 1}" for i in range(max(drones, 1))]
    out = ["spec drone;"]
    out.append(f"sort Id = {{{', '.join(ids)}}};")
    if pts:
        out.append(f"sort Pt = {{{', '.join(pts)}}};")
    out.append(f"sort Xc = 0..{x_max};")
    out.append(f"sort Yc = 0..{y_max};")
    out.append(f"sort En = 0..{e_max};")
    out.append("pred Dr(Id, Xc, Yc, En);")
    if pts:
        out.append("pred P(Pt, Xc, Yc);")
    out.append("pragma progressing;")
    init = ["Time@0"] + [f"P({p},{x},{y})@0" for p, (x, y) in zip(pts, point_coords)]
    init += [f"Dr({d},{xb},{yb},{e_max})@1" for d in ids[:drones]]
    out.append("init { " + ", ".join(init) + " }")

    tv = [f"T{i + 1}" for i in range(n_points)]
    dv = [f"D{i + 1}" for i in range(n_points)]
    pfacts = [f"P({p},{x},{y})@{t}" for p, (x, y), t in zip(pts, point_coords, tv)]

    def strat_guard(ages=None):
        if ages is None:
            return [f"T = {t} + {d}" for t, d in zip(tv, dv)]
        return [f"T = {t} + {a}" if a else f"T = {t}" for t, a in zip(tv, ages)]

    def emit(name, lhs, guard, rhs, extra_guard=()):
        if strategy is None:
            params = f"[{', '.join(f'{d} in 0..{M}' for d in dv)}]" if dv else ""
            g = list(extra_guard) + strat_guard()
            gs = f" | {{ {', '.join(g)} }}" if g else ""
            out.append(f"rule {name}{params}: {', '.join(lhs)}{gs} -> {', '.join(rhs)};")
            return
        for ages in itertools.product(range(M + 1), repeat=n_points):
            if not strategy(name, ages):
                continue
            g = list(extra_guard) + strat_guard(ages)
            gs = f" | {{ {', '.join(g)} }}" if g else ""
            suffix = "_".join(map(str, ages)) if ages else "0"
            out.append(f"rule {name}__{suffix}: {', '.join(lhs)}{gs} -> {', '.join(rhs)};")

    moves = {
        "north": ("Dr(Id,X,Y,E+1)@T", "Dr(Id,X,Y+1,E)@(T+1)"),
        "south": ("Dr(Id,X,Y+1,E+1)@T", "Dr(Id,X,Y,E)@(T+1)"),
        "west": ("Dr(Id,X+1,Y,E+1)@T", "Dr(Id,X,Y,E)@(T+1)"),
        "east": ("Dr(Id,X,Y,E+1)@T", "Dr(Id,X+1,Y,E)@(T+1)"),
    }
    if drones:
        for d, (pre, post) in moves.items():
            emit(f"move_{d}", ["Time@T"] + pfacts + [pre], None, ["Time@T"] + pfacts + [post])
        emit("charge", ["Time@T"] + pfacts + [f"Dr(Id,{xb},{yb},E)@T"], None,
             ["Time@T"] + pfacts + [f"Dr(Id,{xb},{yb},E+1)@(T+1)"])
        for i, (p, (x, y)) in enumerate(zip(pts, point_coords)):
            rhs_p = list(pfacts)
            rhs_p[i] = f"P({p},{x},{y})@T"
            emit(f"click_{p}", ["Time@T"] + pfacts + [f"Dr(Id,{x},{y},E+1)@T"], None,
                 ["Time@T"] + rhs_p + [f"Dr(Id,{x},{y},E)@(T+1)"], extra_guard=[f"{tv[i]} < T"])
        if wind:
            gusts = {
                "north": ("Dr(Id,X,Y,E)@T", "Dr(Id,X,Y+1,E)@(T+1)"),
                "south": ("Dr(Id,X,Y+1,E)@T", "Dr(Id,X,Y,E)@(T+1)"),
                "west": ("Dr(Id,X+1,Y,E)@T", "Dr(Id,X,Y,E)@(T+1)"),
                "east": ("Dr(Id,X,Y,E)@T", "Dr(Id,X+1,Y,E)@(T+1)"),
            }
            for d, (pre, post) in gusts.items():
                out.append(f"rule wind_{d}: Time@T, {pre} -> Time@T, {post};")
    for p, (x, y) in zip(pts, point_coords):
        out.append(f"critical {{ P({p},{x},{y})@T1, Time@T | {{ T > T1 + {M} }} }}")
    out.append("critical { Dr(Id,X,Y,0)@T }")
    return "\n".join(out) + "\n"


def gen_drone(x_max: int = 2, y_max: int = 2, e_max: int = 3, n_points: int | None = None,
              point_coords: Sequence[tuple[int, int]] = ((1, 1),), base_coord: tuple[int, int] = (0, 0),
              M: int = 1, drones: int = 1, wind: bool = False, strategy=None) -> SpecModel:
    return parse_spec(drone_source(x_max, y_max, e_max, n_points, point_coords, base_coord, M, drones, wind, strategy))


# -- 3-SAT --------------------------------------------------------------------


def _check_cnf(cnf) -> list[tuple[int, int, int]]:
    out = []
    for c in cnf:
        c = tuple(c)
        if len(c) != 3 or any(type(l) is not int or l == 0 for l in c):
            raise ValueError(f"malformed clause {c!r}: need exactly 3 non-zero integer literals")
        out.append(c)
    return out


def sat_source(cnf, conp_variant: bool = False, n_vars: int | None = None) -> str:
    """Source text of the 3-SAT reduction.

    ``V(x)`` facts non-deterministically become ``A(x,b)``; ``I(j)`` says
    ``j`` clauses remain and a rule erases the first remaining clause when one
    of its three literals has a matching ``A`` fact.  In the NP variant a
    clause left unerased for more than one time unit is critical; the coNP
    variant instead marks ``I(0)`` critical and adds an ``H`` counter chain.
    """
    cnf = _check_cnf(cnf)
    p = n_vars or max((abs(l) for c in cnf for l in c), default=0)
    n = len(cnf)
    xs = [f"x{i}" for i in range(1, max(p, 1) + 1)]
    out = ["spec sat;", f"sort Vid = {{{', '.join(xs)}}};", "sort Bit = 0..1;", f"sort Cl = 0..{n};"]
    out += ["pred V(Vid);", "pred A(Vid, Bit);", "pred I(Cl);"]
    if conp_variant:
        out += [f"sort Hs = 0..{2 * n + 1};", "pred H(Hs);"]
    out.append("pragma progressing;")
    init = ["Time@0"] + [f"V(x{i})@0" for i in range(1, p + 1)] + [f"I({n})@0"]
    if conp_variant:
        init.append("H(0)@0")
    out.append("init { " + ", ".join(init) + " }")
    out.append("rule assign[B in 0..1]: Time@T, V(X)@T1 | { T1 <= T } -> Time@T, A(X,B)@(T+1);")
    for j in range(n, 0, -1):
        clause = cnf[n - j]
        for li, lit in enumerate(clause):
            a = f"A(x{abs(lit)},{1 if lit > 0 else 0})@T1"
            out.append(
                f"rule erase_{j}_{li}: Time@T, {a}, I({j})@T2 | {{ T1 <= T, T2 <= T }} "
                f"-> Time@T, {a}, I({j - 1})@(T+1);"
            )
    if conp_variant:
        out.append("rule tick_h: Time@T, H(J)@T1 | { T1 <= T } -> Time@T, H(J+1)@(T+1);")
        out.append("critical { I(0)@T }")
    elif n:
        out.append(f"critical[J in 1..{n}] {{ I(J)@T1, Time@T | {{ T > T1 + 1 }} }}")
    return "\n".join(out) + "\n"


def gen_3sat(cnf, conp_variant: bool = False, n_vars: int | None = None) -> tuple[SpecModel, int]:
    """Spec of the reduction plus the tick bound ``2 · #clauses``."""
    return parse_spec(sat_source(cnf, conp_variant, n_vars)), 2 * len(_check_cnf(cnf))


def random_cnf(rng: random.Random, max_vars: int = 4, max_clauses: int = 4) -> list[tuple[int, int, int]]:
    p = rng.randint(1, max_vars)
    n = rng.randint(1, max_clauses)
    return [tuple(rng.choice((1, -1)) * rng.randint(1, p) for _ in range(3)) for _ in range(n)]


# -- counterexample corpus --------------------------------------------------------

TPRIME = """\
spec Tprime;
pred A; pred B; pred C; pred D;
init { Time@0, C@1 }
rule r6a: Time@T, C@T1 | { T1 <= T } -> Time@T, D@T;
rule r6b: Time@T, C@T1 | { T1 <= T } -> Time@T, A@T;
rule r6c: Time@T, A@T1 -> Time@T, B@T;
rule r6d: Time@T, B@T1 -> Time@T, A@T;
"""

# r8b also requires B to be present or past.  As printed without that guard,
# {Time@1, A@1, B@2} forces r8b under lazy time sampling, so no compliant
# infinite time trace exists (see L_NOT_S_LITERAL).
L_NOT_S = """\
spec L_not_S_pts;
pred A; pred B; pred C; pred D;
init { Time@0, A@0, B@0 }
rule r8a: Time@T, A@T1, B@T2 | { T1 <= T, T2 <= T } -> Time@T, B@T2, C@(T+1);
rule r8b: Time@T, A@T1, B@T2 | { T1 <= T, T2 <= T } -> Time@T, B@T2, D@(T+1);
rule r8c: Time@T, B@T1, C@T2 | { T1 <= T, T2 <= T } -> Time@T, A@T, B@(T+1);
critical { B@T1, D@T2 }
"""

L_NOT_S_LITERAL = L_NOT_S.replace(
    "rule r8b: Time@T, A@T1, B@T2 | { T1 <= T, T2 <= T }", "rule r8b: Time@T, A@T1, B@T2 | { T1 <= T }"
).replace("spec L_not_S_pts;", "spec L_not_S_literal;")

TDOUBLEPRIME = """\
spec Tdoubleprime;
pred A; pred B; pred C; pred D;
init { Time@0, A@0 }
rule r9a: Time@T, A@T1 | { T1 <= T } -> Time@T, B@(T+1);
rule r9b: Time@T, A@T1 | { T1 <= T } -> Time@T, C@(T+1);
rule r9c: Time@T, B@T1 | { T1 <= T } -> Time@T, A@(T+1);
rule r9d: Time@T, C@T1 | { T1 <= T } -> Time@T, D@(T+1);
critical { D@T1 }
"""

# smallest interesting drone: one cell that is both base and point of interest
SMALL_DRONE = dict(x_max=0, y_max=0, e_max=2, point_coords=((0, 0),), base_coord=(0, 0), M=2, drones=1)

SAT_NP_CNF = [(1, 2, -1), (-2, -2, 1)]
SAT_CONP_CNF = [(1, 1, 1), (-1, -1, -1)]


@dataclass
class CorpusEntry:
    name: str
    spec: SpecModel
    source: str
    expected: dict = field(default_factory=dict)  # property -> bool; "progressing" too
    bounded: dict = field(default_factory=dict)  # (property, n) -> bool
    note: str = ""


def corpus() -> dict[str, CorpusEntry]:
    """Named systems with their expected verdicts.

    The three separating systems carry verdicts argued by hand; the drone and
    SAT entries carry values computed with the brute-force oracle and frozen
    here.
    """
    drone_src = drone_source(**SMALL_DRONE)
    np_src = sat_source(SAT_NP_CNF)
    conp_src = sat_source(SAT_CONP_CNF, conp_variant=True)
    entries = [
        CorpusEntry("Tprime", parse_spec(TPRIME), TPRIME,
                    {"Z": True, "S": True, "V": True, "L": False, "progressing": False},
                    note="V holds but L fails: a Tick-free A/B loop is compliant yet never lets time pass"),
        CorpusEntry("L_not_S_pts", parse_spec(L_NOT_S), L_NOT_S,
                    {"Z": True, "S": False, "V": True, "L": True, "progressing": True},
                    note="progressing; rule r8b reaches a critical state on an infinite time trace"),
        CorpusEntry("Tdoubleprime", parse_spec(TDOUBLEPRIME), TDOUBLEPRIME,
                    {"Z": True, "S": False, "V": False, "L": False, "progressing": True},
                    note="progressing; {Time@0, C@1} is a point of no return"),
        CorpusEntry("drone", parse_spec(drone_src), drone_src,
                    {"Z": True, "S": False, "V": True, "L": True, "progressing": True},
                    note="1x1 grid; click/charge alternation keeps the picture fresh; energy can hit 0"),
        CorpusEntry("sat_np", parse_spec(np_src), np_src,
                    {"Z": True, "S": False, "V": False, "L": False, "progressing": True},
                    {("Z", 4): True, ("S", 4): False, ("L", 4): False},
                    note="satisfiable CNF, NP variant"),
        CorpusEntry("sat_conp", parse_spec(conp_src), conp_src,
                    {"Z": True, "S": True, "V": True, "L": True, "progressing": True},
                    {("Z", 4): True, ("S", 4): True, ("L", 4): True},
                    note="unsatisfiable CNF, coNP variant"),
    ]
    return {e.name: e for e in entries}


# -- random small balanced specs ----------------------------------------------------


def random_source(rng: random.Random, progressing: bool = False, max_preds: int = 3,
                  max_m: int = 4, max_dmax: int = 2, max_rules: int = 4) -> str:
    """A random balanced spec with nullary/unary predicates over a 2-constant sort."""
    n_preds = rng.randint(1, max_preds)
    preds = [chr(ord("A") + i) for i in range(n_preds)]
    arity = {p: rng.choice((0, 0, 1)) for p in preds}
    out = ["spec random;", "sort K = {a, b};"]
    for p in preds:
        out.append(f"pred {p}(K);" if arity[p] else f"pred {p};")

    def fact(p, var=None):
        if not arity[p]:
            return p
        return f"{p}({var or rng.choice(('a', 'b'))})"

    m = rng.randint(2, max_m)
    init = ["Time@0"] + [f"{fact(rng.choice(preds))}@{rng.randint(0, max_dmax)}" for _ in range(m - 1)]
    out.append("init { " + ", ".join(init) + " }")
    for r in range(rng.randint(1, max_rules)):
        n_cons = rng.randint(1, min(2, m - 1))
        n_pres = rng.randint(0, max(0, min(1, m - 1 - n_cons)))
        lhs, rhs, guard = ["Time@T"], ["Time@T"], []
        for i in range(n_pres):
            p = rng.choice(preds)
            f = f"{fact(p, 'X' if arity[p] else None)}@P{i}"
            lhs.append(f)
            rhs.append(f)
        delays = [rng.randint(0, max_dmax) for _ in range(n_cons)]
        if progressing and max(delays) == 0:
            delays[rng.randrange(n_cons)] = rng.randint(1, max(1, max_dmax))
        for i in range(n_cons):
            p = rng.choice(preds)
            lhs.append(f"{fact(p, 'X' if arity[p] else None)}@U{i}")
            if progressing or rng.random() < 0.6:
                guard.append(f"U{i} <= T")
            elif rng.random() < 0.5:
                guard.append(f"T > U{i} + {rng.randint(0, max_dmax)}")
        for d in delays:
            p = rng.choice(preds)
            use_x = arity[p] and any("X" in f for f in lhs) and rng.random() < 0.5
            f = fact(p, "X" if use_x else None)
            rhs.append(f"{f}@T" if d == 0 else f"{f}@(T+{d})")
        gs = f" | {{ {', '.join(guard)} }}" if guard else ""
        out.append(f"rule r{r}: {', '.join(lhs)}{gs} -> {', '.join(rhs)};")
    if rng.random() < 0.7:
        p = rng.choice(preds)
        pats = [f"{fact(p, 'Y' if arity[p] else None)}@S1"]
        cons = []
        if rng.random() < 0.5:
            pats.append("Time@S0")
            cons.append(f"S0 > S1 + {rng.randint(0, max_dmax)}")
        cs = f" | {{ {', '.join(cons)} }}" if cons else ""
        out.append(f"critical {{ {', '.join(pats)}{cs} }}")
    return "\n".join(out) + "\n"


def random_spec(rng: random.Random | int, progressing: bool = False, **kw) -> SpecModel:
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    return parse_spec(random_source(rng, progressing, **kw))

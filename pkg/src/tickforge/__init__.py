"""Model checking of timed multiset rewriting systems under lazy time sampling."""

from .checkers import (
    DeltaGraph,
    ResourceExhausted,
    Verdict,
    build_graph,
    check,
    check_all,
    check_L,
    check_nL,
    check_nS,
    check_nZ,
    check_S,
    check_V,
    check_Z,
    is_PON,
    to_dot,
    verify_verdict,
)
from .core import (
    TICK,
    Configuration,
    Constraint,
    CriticalPair,
    CriticalSpec,
    Fact,
    Nonce,
    Rule,
    Subst,
    TFact,
    Trace,
    fact_size,
    is_critical,
    match,
)
from .delta import INF, DeltaRep, abstract, count_bound, delta_step, equivalent, materialize
from .engine import FreshSource, NotApplicable, apply_rule, enabled_steps, must_tick, run_lts
from .syntax import SpecError, SpecModel, SpecStats, analyze, load_spec, parse_spec, print_spec

__version__ = "0.1.0"

# # Three small systems that separate the properties
#
# Each system below satisfies one property but not a stronger one.  They are
# tiny enough to read the whole abstract state graph.

from tickforge import build_graph, check_all, is_PON, run_lts, to_dot
from tickforge.core import Configuration, Fact, TFact
from tickforge.engine import prefer
from tickforge.generators import corpus

systems = corpus()

# ## Tprime: V without L
#
# From {Time@1, C@1} the system may move to A and then loop A -> B -> A
# forever without letting time pass.  That loop is compliant (there are no
# critical states at all) but it is not a run in which time advances.

tp = systems["Tprime"]
print(tp.source)
print({p: v.holds for p, v in check_all(tp.spec).items()})

# Preferring r6a gives the good behaviour: C becomes D and time ticks on.

for line in run_lts(tp.spec, policy=prefer("r6a"), budget=5).to_lines():
    print(line)

# Preferring r6b enters the A/B loop and the clock stops.

for line in run_lts(tp.spec, policy=prefer("r6b", "r6c", "r6d"), budget=5).to_lines():
    print(line)

# ## L_not_S_pts: L without S
#
# A progressing system.  Rule r8b produces the critical pair {B, D}, but r8a
# and r8c can always be used to avoid it.

ls = systems["L_not_S_pts"]
print(ls.source)
verdicts = check_all(ls.spec)
print({p: v.holds for p, v in verdicts.items()})
print(verdicts["S"].to_json(timing=False)["counterexample"])

# ## Tdoubleprime: Z without V
#
# A alternates with B forever, but choosing C leads to D, which is critical.
# {Time@0, C@1} is not critical itself, yet every way forward hits D: it is
# a point of no return.

td = systems["Tdoubleprime"]
pon = Configuration(0, (TFact(Fact("C", ()), 1),))
print("point of no return:", is_PON(td.spec, pon))
print({p: v.holds for p, v in check_all(td.spec).items()})

# The whole abstract graph, with the critical D states drawn as double red
# circles, fits on a page.

print(to_dot(build_graph(td.spec)))

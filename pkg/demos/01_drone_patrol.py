# # A drone patrolling one point of interest
#
# A drone must photograph a point often enough that no picture is older than
# M time units, and it must never run out of energy.  The scenario is written
# as a timed multiset rewriting spec; the generator builds it for us.

from tickforge import analyze, check_all, run_lts, verify_verdict
from tickforge.generators import drone_source, gen_drone

# A 1x1 grid keeps the state space tiny: the base and the point share the
# only cell, so the drone's choice is just "charge" or "click".

params = dict(x_max=0, y_max=0, e_max=2, point_coords=((0, 0),), base_coord=(0, 0), M=2, drones=1)
print(drone_source(**params))
spec = gen_drone(**params)

# ## Static facts
#
# analyze() reports the size parameters of the system.  m counts facts per
# configuration (it never changes, the system is balanced) and dmax is the
# largest constant that matters for time differences.

stats = analyze(spec)
print(stats.to_json())

# ## Simulating
#
# Under lazy time sampling the clock only ticks when no instantaneous rule
# applies.  A seeded random policy gives a reproducible run.

trace = run_lts(spec, policy="random", seed=3, budget=12)
for line in trace.to_lines():
    print(line)

# ## Deciding the four properties
#
# Z: some compliant infinite run exists.  S: every infinite run is compliant.
# V: no point of no return is compliantly reachable.  L: every compliant
# prefix extends to a compliant infinite run.

verdicts = check_all(spec)
for name, v in verdicts.items():
    print(name, v.holds, v.reason or "")

# Z holds, and its lasso is a finite certificate of an infinite run.  We
# replay it on concrete configurations (stem plus two turns of the cycle).

z = verdicts["Z"]
print("stem :", [lbl for lbl, _, _ in z.stem])
print("cycle:", [lbl for lbl, _, _ in z.cycle])
print("replays:", verify_verdict(spec, z))

# S fails: the drone may keep clicking until its energy reaches 0.

for step in verdicts["S"].to_json(timing=False)["counterexample"]:
    print(step)

# # Propositional satisfiability as bounded realizability
#
# A 3-CNF formula becomes a progressing system: each variable fact picks a
# truth value, and clauses are erased one per time unit when an assigned
# literal satisfies them.  The formula is satisfiable exactly when the
# system has a compliant run with 2 * #clauses ticks.

import random

from tickforge import check_nS, check_nZ
from tickforge.generators import gen_3sat, random_cnf, sat_source
from tickforge.oracle import brute_force_sat

cnf = [(1, 2, -1), (-2, -2, 1)]
print(sat_source(cnf))

spec, n = gen_3sat(cnf)
v = check_nZ(spec, n=n)
print("satisfiable:", brute_force_sat(cnf), " n-Z:", v.holds, " witness length:", len(v.stem))

# The witness is a run; its rule names spell out an assignment.

print([lbl for lbl, _, _ in v.stem])

# In the other variant, reaching "all clauses erased" is the critical event,
# so n-S holds exactly for unsatisfiable formulas.

unsat = [(1, 1, 1), (-1, -1, -1)]
spec, n = gen_3sat(unsat, conp_variant=True)
print("unsatisfiable formula, n-S:", check_nS(spec, n=n).holds)

# A quick sweep over random small formulas against the truth table.

rng = random.Random(1)
agree = 0
for _ in range(20):
    f = random_cnf(rng)
    spec, n = gen_3sat(f)
    agree += check_nZ(spec, n=n).holds == brute_force_sat(f)
print(f"{agree}/20 agree")

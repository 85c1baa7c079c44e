# # Cross-checking against the brute-force oracle
#
# The oracle explores concrete configurations with its own matcher and its own
# timestamp compression, and evaluates each property straight from its
# definition.  It is slow but shares no code with the δ-graph checkers.

import random

from tickforge import check
from tickforge.generators import corpus, random_source, random_spec
from tickforge.oracle import count_quotient_states, oracle_check, oracle_graph

tp = corpus()["Tprime"].spec
for h in range(4):
    print("horizon", h, "concrete states", len(oracle_graph(tp, None, h)))
print("quotient states", count_quotient_states(tp))

# A random small balanced spec, printed so it can be inspected.

rng = random.Random(5)
print(random_source(random.Random(42), progressing=True))

# Compare every verdict, bounded and unbounded, on a batch of random specs.

disagree = 0
for _ in range(30):
    spec = random_spec(rng, progressing=rng.random() < 0.5)
    for p in "ZSVL":
        disagree += check(spec, p).holds != oracle_check(spec, None, p)
    for n in (1, 2, 3):
        for p in "ZSL":
            disagree += check(spec, p, ticks=n).holds != oracle_check(spec, None, p, n)
print("disagreements:", disagree)

import pytest

from tickforge import generators
from tickforge.core import Fact, TFact, Configuration


def tf(pred, *args, at=0):
    return TFact(Fact(pred, tuple(args)), at)


def conf(time, *facts):
    return Configuration(time, tuple(facts))


PHOTO = """
spec photo;
sort Id = {d1, d2}; sort Pt = {p1, p2}; sort N = 0..20;
pred Dr(Id, N, N, N); pred P(Pt, N, N);
init { Time@5, Dr(d1,1,2,10)@5, Dr(d2,5,6,7)@5, P(p1,1,1)@3, P(p2,5,6)@0 }
// the photo rule: a drone at a point takes a picture
rule click: Time@T, P(I,X,Y)@T1, Dr(Id,X,Y,E+1)@T | { T1 < T } -> Time@T, P(I,X,Y)@T, Dr(Id,X,Y,E)@(T+1);
"""

SESSIONS = """
spec sessions;
sort N = nonce;
pred S(N); pred Req;
pragma progressing;
init { Time@0, Req@0 }
rule open: Time@T, Req@T1 | { T1 <= T } -> exists X. Time@T, S(X)@(T+1);
rule close: Time@T, S(X)@T1 | { T1 <= T } -> Time@T, Req@(T+1);
"""


@pytest.fixture(scope="session")
def corpus():
    return generators.corpus()

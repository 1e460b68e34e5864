"""Tensor of containers, the monoidal coherence checks, and the round trip to monoids."""

import itertools

from icmon.container import small_containers
from icmon.examples import scenario_container
from icmon.icms import check_icms, check_monoid, enumerate_icms, icms_to_monoid
from icmon.kernel import IndexSet
from icmon.monoidal import check_pentagon, check_triangle, tensor

C = scenario_container()
T = tensor(C, C)
for i in T.index_set:
    for s in T.shapes(i):
        print(f"C (x) C at {i}: {len(T.position_keys(i, s))} positions")

one = IndexSet(("*",))
S = list(small_containers(one))
bad = sum(check_triangle(X, Y) is not None for X, Y in itertools.product(S, S))
print(f"triangle failures over {len(S) ** 2} pairs: {bad}")
print("pentagon on the scenario container:", check_pentagon(C, C, C, C))

# Every lawful structure on a two-position reader, and its monoid.
(R,) = [D for D in small_containers(one, 1, 2) if len(D.position_keys("*", "s0")) == 2]
tables = list(enumerate_icms(R))
lawful = [t.to_icms() for t in tables if check_icms(R, t.to_icms(), budget=None).ok]
print(f"{len(tables)} candidate tables, {len(lawful)} lawful")
for m in lawful:
    eta, mu = icms_to_monoid(R, m)
    print("monoid diagrams:", check_monoid(R, eta, mu))

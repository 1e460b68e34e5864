"""Build the writer and state structures, check their laws and run their monads."""

from icmon.container import ExtentElem
from icmon.examples import MonoidAction, cyclic_monoid, indexed_state, indexed_writer
from icmon.icms import check_icms, override
from icmon.kernel import Assignment, Family, IndexSet
from icmon.monad import DerivedMonad, join_elem, unit_elem

I = IndexSet(("A", "B"))

# Z2 acting on {A, B} by swapping.
swap = {(0, "A"): "A", (0, "B"): "B", (1, "A"): "B", (1, "B"): "A"}
C, m = indexed_writer(MonoidAction(cyclic_monoid(2), I, swap))
report = check_icms(C, m, budget=None)
print("writer over Z2:")
print("\n".join("  " + line for line in report.lines()))

# A broken unit is reported with the first failing instance.
bad = override(m, "e", "A", 1)
print("\nwith e(A) = 1:")
for line in check_icms(C, bad, budget=None).lines()[:3]:
    print("  " + line)

# State over one index with two states: the derived monad is the usual one.
ONE = IndexSet(("*",))
S, sm = indexed_state(ONE, Family(ONE, {"*": [0, 1]}))
M = DerivedMonad(S, sm)
ret = unit_elem(M, "*", "x")
print("\nreturn x:", ret.shape, dict(ret.assign))

flip = Assignment({0: ("*", 1), 1: ("*", 0)})
inner = {k: ExtentElem("*", flip, Assignment({kk: ("seen", k[1][0]) for kk in S.position_keys("*", flip)}))
         for k in S.position_keys("*", flip)}
joined = join_elem(M, ExtentElem("*", flip, Assignment(inner)))
print("flip twice, joined:", joined.shape, dict(joined.assign))

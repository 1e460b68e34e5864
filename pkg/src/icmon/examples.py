"""Built-in container monoid structures.

Each constructor returns a pair ``(container, icms)``.  The product, state
and writer constructions are tabulated and checked exhaustively; the free
construction is programmatic and truncated by a depth budget.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import math
from collections.abc import Iterable, Iterator

from .container import ExtentElem, IndexedContainer
from .icms import Icms, InvalidIcms, check_icms
from .kernel import Assignment, BudgetExceeded, Family, FinSet, IndexSet
from .monoidal import REFL

PF = "pf"


# -- monoids and actions -----------------------------------------------------------


class InvalidMonoid(ValueError):
    def __init__(self, message: str, cell: tuple):
        super().__init__(f"{message} at {cell!r}")
        self.cell = cell


@dataclasses.dataclass(frozen=True)
class FinMonoid:
    """A finite monoid given by its multiplication table (validated eagerly)."""

    carrier: FinSet
    unit: object
    table: dict

    def __post_init__(self):
        W = self.carrier
        if not isinstance(W, FinSet):
            object.__setattr__(self, "carrier", W := FinSet(W))
        if self.unit not in W:
            raise InvalidMonoid("unit is not in the carrier", (self.unit,))
        for a in W:
            for b in W:
                if (a, b) not in self.table:
                    raise InvalidMonoid("multiplication table has no entry", (a, b))
                if self.table[(a, b)] not in W:
                    raise InvalidMonoid("product leaves the carrier", (a, b))
        for a in W:
            if self.mul(self.unit, a) != a:
                raise InvalidMonoid("left unit law fails", (self.unit, a))
            if self.mul(a, self.unit) != a:
                raise InvalidMonoid("right unit law fails", (a, self.unit))
        for a, b, c in itertools.product(W, repeat=3):
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise InvalidMonoid("associativity fails", (a, b, c))

    def mul(self, a, b):
        return self.table[(a, b)]

    def __hash__(self):
        return hash((self.carrier, self.unit, frozenset(self.table.items())))


def cyclic_monoid(n: int) -> FinMonoid:
    """``Z/n`` under addition, elements ``0 .. n-1``."""
    return FinMonoid(FinSet(range(n)), 0, {(a, b): (a + b) % n for a in range(n) for b in range(n)})


@dataclasses.dataclass(frozen=True)
class MonoidAction:
    """``act[(w, i)] = w |> i``, with ``(w.v) |> i = v |> (w |> i)``."""

    monoid: FinMonoid
    index_set: IndexSet
    act: dict

    def __post_init__(self):
        M, I = self.monoid, self.index_set
        for w in M.carrier:
            for i in I:
                if self.act.get((w, i)) not in I:
                    raise InvalidMonoid("action is not total or leaves the index set", (w, i))
        for i in I:
            if self.act[(M.unit, i)] != i:
                raise InvalidMonoid("unit does not act as the identity", (M.unit, i))
        for w, v in itertools.product(M.carrier, repeat=2):
            for i in I:
                if self.act[(M.mul(w, v), i)] != self.act[(v, self.act[(w, i)])]:
                    raise InvalidMonoid("action does not respect multiplication", (w, v, i))

    def __call__(self, w, i):
        return self.act[(w, i)]

    def __hash__(self):
        return hash((self.monoid, self.index_set, frozenset(self.act.items())))


def trivial_action(monoid: FinMonoid, index_set: IndexSet) -> MonoidAction:
    return MonoidAction(monoid, index_set, {(w, i): i for w in monoid.carrier for i in index_set})


def enumerate_monoids(n: int) -> list[FinMonoid]:
    """All monoids on ``{0, .., n-1}`` with unit ``0``, one per isomorphism class."""
    if n < 1:
        return []
    W = range(n)
    rest = list(range(1, n))
    cells = [(a, b) for a in rest for b in rest]
    seen: set = set()
    out = []
    for vals in itertools.product(W, repeat=len(cells)):
        table = {(0, a): a for a in W}
        table.update({(a, 0): a for a in W})
        table.update(zip(cells, vals))
        if any(
            table[(table[(a, b)], c)] != table[(a, table[(b, c)])]
            for a in rest
            for b in rest
            for c in rest
        ):
            continue
        form = min(
            tuple(_relabel(table, (0,) + p)[(a, b)] for a in W for b in W)
            for p in itertools.permutations(rest)
        )
        if form in seen:
            continue
        seen.add(form)
        out.append(FinMonoid(FinSet(W), 0, table))
    return out


def _relabel(table: dict, perm: tuple) -> dict:
    return {(perm[a], perm[b]): perm[c] for (a, b), c in table.items()}


def enumerate_actions(monoid: FinMonoid, index_set: IndexSet) -> Iterator[MonoidAction]:
    """Every action of ``monoid`` on ``index_set``, in lexicographic order."""
    I = list(index_set)
    others = [w for w in monoid.carrier if w != monoid.unit]
    funcs = list(itertools.product(I, repeat=len(I)))
    for choice in itertools.product(funcs, repeat=len(others)):
        act = {(monoid.unit, i): i for i in I}
        for w, f in zip(others, choice):
            act.update({(w, i): f[k] for k, i in enumerate(I)})
        ok = all(
            act[(monoid.mul(w, v), i)] == act[(v, act[(w, i)])]
            for w in others
            for v in others
            for i in I
        )
        if ok:
            yield MonoidAction(monoid, index_set, act)


# -- product -------------------------------------------------------------------------


class ProductFamily:
    """Fibrewise cartesian product of two lazy families."""

    def __init__(self, F0, F1):
        if F0.index_set != F1.index_set:
            raise ValueError("product of families over different index sets")
        self.index_set = F0.index_set
        self.F0, self.F1 = F0, F1

    def count(self, i) -> int:
        return self.F0.count(i) * self.F1.count(i)

    def elements(self, i):
        for a in self.F0.elements(i):
            for b in self.F1.elements(i):
                yield (a, b)

    def unrank(self, i, rank: int):
        q, r = divmod(rank, self.F1.count(i))
        return (self.F0.unrank(i, q), self.F1.unrank(i, r))


def _restrict(C: IndexedContainer, i, s, s1: Assignment, tag: str, k: int) -> Assignment:
    return Assignment({(j, p): s1[(j, (tag, p))][k] for j, p in C.position_keys(i, s)})


def product_icms(
    C0: IndexedContainer, m0: Icms, C1: IndexedContainer, m1: Icms, check: bool = True
) -> tuple[IndexedContainer, Icms]:
    """Pairs of shapes; positions are the tagged union ``("inl", p) | ("inr", p)``."""
    if check:
        for C, m in ((C0, m0), (C1, m1)):
            report = check_icms(C, m)
            if not report.ok:
                raise InvalidIcms(f"factor {m.name} fails {report.failing()}", report)

    def positions(i, s, j):
        return [("inl", p) for p in C0.positions(i, s[0], j)] + [
            ("inr", p) for p in C1.positions(i, s[1], j)
        ]

    def shape_ok(i, s):
        return isinstance(s, tuple) and len(s) == 2 and C0.has_shape(i, s[0]) and C1.has_shape(i, s[1])

    C = IndexedContainer(
        C0.index_set,
        ProductFamily(C0.shape_family, C1.shape_family),
        positions,
        bounded=C0.bounded or C1.bounded,
        name=f"({C0.name}x{C1.name})",
        shape_ok=shape_ok,
    )

    def parts(i, s, s1):
        a = _restrict(C0, i, s[0], s1, "inl", 0)
        b = _restrict(C1, i, s[1], s1, "inr", 1)
        return a, b

    def bullet(i, s, s1):
        a, b = parts(i, s, s1)
        return (m0.bullet(i, s[0], a), m1.bullet(i, s[1], b))

    def side(i, s, s1, p):
        tag, q = p
        a, b = parts(i, s, s1)
        return (m0, s[0], a, q) if tag == "inl" else (m1, s[1], b, q)

    def up(i, s, s1, j, p):
        m, t, t1, q = side(i, s, s1, p)
        return m.up(i, t, t1, j, q)

    def ul(i, s, s1, j, p):
        m, t, t1, q = side(i, s, s1, p)
        return (p[0], m.ul(i, t, t1, j, q))

    def ur(i, s, s1, j, p):
        m, t, t1, q = side(i, s, s1, p)
        return (p[0], m.ur(i, t, t1, j, q))

    m = Icms(lambda i: (m0.e(i), m1.e(i)), bullet, up, ul, ur, name=f"({m0.name}x{m1.name})")
    return C, m


# -- indexed state --------------------------------------------------------------------


class FunctionTables:
    """All total tables ``dom(i) -> cod`` as :class:`Assignment` values, lazily."""

    def __init__(self, index_set: IndexSet, dom: Family, cod: list):
        self.index_set = index_set
        self.dom = dom
        self.cod = cod

    def count(self, i) -> int:
        return len(self.cod) ** self.dom.count(i)

    def elements(self, i):
        keys = list(self.dom.elements(i))
        for vals in itertools.product(self.cod, repeat=len(keys)):
            yield Assignment(zip(keys, vals))

    def unrank(self, i, rank: int):
        keys = list(self.dom.elements(i))
        vals = []
        for _ in keys:
            rank, r = divmod(rank, len(self.cod))
            vals.append(self.cod[r])
        return Assignment(zip(keys, reversed(vals)))


def indexed_state(I: IndexSet, E: Family) -> tuple[IndexedContainer, Icms]:
    """Shapes at ``i`` are tables ``E i -> sum_j E j``; ``(e, refl)`` sits at ``fst(s e)``."""
    total = [(j, e) for j in I for e in E.elements(j)]
    shapes = FunctionTables(I, E, total)

    def positions(i, s, j):
        return [(e, REFL) for e in E.elements(i) if s[e][0] == j]

    def shape_ok(i, s):
        return (
            isinstance(s, Assignment)
            and set(s) == set(E.elements(i))
            and all(v in total for v in s.values())
        )

    C = IndexedContainer(I, shapes, positions, name="State", shape_ok=shape_ok)

    def e(i):
        return Assignment({x: (i, x) for x in E.elements(i)})

    def bullet(i, s, s1):
        out = {}
        for x, (j, x1) in s.items():
            out[x] = s1[(j, (x, REFL))][x1]
        return Assignment(out)

    def up(i, s, s1, j, p):
        return s[p[0]][0]

    def ul(i, s, s1, j, p):
        return (p[0], REFL)

    def ur(i, s, s1, j, p):
        return (s[p[0]][1], REFL)

    return C, Icms(e, bullet, up, ul, ur, name="state")


# -- indexed writer -------------------------------------------------------------------


def indexed_writer(action: MonoidAction) -> tuple[IndexedContainer, Icms]:
    """Every shape is a monoid element ``w``; its one position points at ``w |> i``."""
    M, I = action.monoid, action.index_set
    shapes = Family(I, {i: list(M.carrier) for i in I})

    def positions(i, w, j):
        return (PF,) if action(w, i) == j else ()

    C = IndexedContainer(
        I, shapes, positions, name="Writer", shape_ok=lambda i, w: w in M.carrier
    )

    def bullet(i, w, s1):
        return M.mul(w, s1[(action(w, i), PF)])

    def up(i, w, s1, j, p):
        return action(w, i)

    m = Icms(
        lambda i: M.unit,
        bullet,
        up,
        lambda i, w, s1, j, p: PF,
        lambda i, w, s1, j, p: PF,
        name="writer",
    )
    return C, m


# -- free construction -------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Leaf:
    def __repr__(self):
        return "Leaf"


LEAF = Leaf()


@dataclasses.dataclass(frozen=True)
class Node:
    shape: object
    kids: Assignment

    def __repr__(self):
        return f"Node({self.shape!r}, {self.kids!r})"


def tree_depth(t) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max((tree_depth(k) for k in t.kids.values()), default=0)


class TreeFamily:
    """Trees over ``base`` of depth at most ``depth`` (leaf depth 0)."""

    def __init__(self, base: IndexedContainer, depth: int):
        self.index_set = base.index_set
        self.base = base
        self.depth = depth
        self._counts: dict = {}

    def count_at(self, i, d: int) -> int:
        if (i, d) in self._counts:
            return self._counts[i, d]
        n = 1
        if d > 0:
            for s in self.base.shapes(i):
                n += math.prod(self.count_at(j, d - 1) for j, _ in self.base.position_keys(i, s))
        self._counts[i, d] = n
        return n

    def count(self, i) -> int:
        return self.count_at(i, self.depth)

    def elements_at(self, i, d: int) -> Iterator:
        yield LEAF
        if d == 0:
            return
        for s in self.base.shapes(i):
            keys = self.base.position_keys(i, s)
            pools = [list(self.elements_at(j, d - 1)) for j, _ in keys]
            for kids in itertools.product(*pools):
                yield Node(s, Assignment(zip(keys, kids)))

    def elements(self, i) -> Iterator:
        return self.elements_at(i, self.depth)

    def unrank(self, i, rank: int):
        return self.unrank_at(i, self.depth, rank)

    def unrank_at(self, i, d: int, rank: int):
        if rank == 0:
            return LEAF
        rank -= 1
        for s in self.base.shapes(i):
            keys = self.base.position_keys(i, s)
            sizes = [self.count_at(j, d - 1) for j, _ in keys]
            block = math.prod(sizes)
            if rank < block:
                kids = []
                for (j, _), n in zip(reversed(keys), reversed(sizes)):
                    rank, r = divmod(rank, n)
                    kids.append(self.unrank_at(j, d - 1, r))
                return Node(s, Assignment(zip(keys, reversed(kids))))
            rank -= block
        raise IndexError("rank out of range")


def tree_positions(base: IndexedContainer, i, t, k) -> list[tuple]:
    """Paths ``((j, q), ...)`` from the root to leaves sitting at index ``k``."""
    return list(_leaf_table(base, i, t).get(k, ()))


@functools.lru_cache(maxsize=1 << 16)
def _leaf_table(base: IndexedContainer, i, t) -> dict:
    """Every leaf path of ``t`` grouped by the index of the leaf, in one walk."""
    out: dict = {}

    def walk(j, u, path):
        if isinstance(u, Leaf):
            out.setdefault(j, []).append(path)
            return
        for key in base.position_keys(j, u.shape):
            walk(key[0], u.kids[key], path + (key,))

    walk(i, t, ())
    return {k: tuple(v) for k, v in out.items()}


def _well_formed(base: IndexedContainer, i, t) -> bool:
    if isinstance(t, Leaf):
        return True
    if not isinstance(t, Node) or i not in base.index_set or not base.has_shape(i, t.shape):
        return False
    keys = base.position_keys(i, t.shape)
    if set(keys) != set(t.kids):
        return False
    return all(_well_formed(base, j, t.kids[(j, q)]) for j, q in keys)


def graft(i, t, s1, prefix: tuple = ()):
    if isinstance(t, Leaf):
        return s1[(i, prefix)]
    kids = {(j, q): graft(j, kid, s1, prefix + ((j, q),)) for (j, q), kid in t.kids.items()}
    return Node(t.shape, Assignment(kids))


@functools.lru_cache(maxsize=1 << 16)
def split_path(i, t, path: tuple) -> tuple:
    """``(index of the leaf of t on path, outer prefix, inner suffix)``."""
    a, n = i, 0
    while isinstance(t, Node):
        j, q = path[n]
        t = t.kids[(j, q)]
        a, n = j, n + 1
    return a, path[:n], path[n:]


class GraftDomain:
    """Graft instances whose result has total depth at most ``depth``.

    With ``arity=3`` the elements are triples ``(s, s1, s2)`` packed as
    :func:`icmon.icms.assoc_domain` packs them; with ``arity=2`` they are
    pairs ``(s, s1)`` packed as extent elements over shapes.
    """

    def __init__(self, C: IndexedContainer, trees: TreeFamily, depth: int, arity: int = 3):
        self.index_set = C.index_set
        self.C, self.trees, self.depth, self.arity = C, trees, depth, arity
        self._cache: dict = {}

    def _assignments(self, i, s, d: int) -> Iterator[Assignment]:
        keys = self.C.position_keys(i, s)
        pools = [list(self.trees.elements_at(j, d)) for j, _ in keys]
        for choice in itertools.product(*pools):
            yield Assignment(zip(keys, choice))

    def _build(self, i) -> list:
        out = []
        for s in self.trees.elements_at(i, self.depth):
            r = self.depth - tree_depth(s)
            for s1 in self._assignments(i, s, r):
                if self.arity == 2:
                    out.append(ExtentElem(i, s, s1))
                    continue
                r2 = r - max((tree_depth(t) for t in s1.values()), default=0)
                keys = self.C.position_keys(i, s)
                inner_pools = [
                    [
                        ExtentElem(j, s1[(j, p)], a)
                        for a in self._assignments(j, s1[(j, p)], r2)
                    ]
                    for j, p in keys
                ]
                for inner in itertools.product(*inner_pools):
                    out.append(ExtentElem(i, s, Assignment(zip(keys, inner))))
        return out

    def _list(self, i) -> list:
        if i not in self._cache:
            self._cache[i] = self._build(i)
        return self._cache[i]

    def count(self, i) -> int:
        return len(self._list(i))

    def elements(self, i):
        return iter(self._list(i))

    def unrank(self, i, rank: int):
        return self._list(i)[rank]


def free_container(
    base: IndexedContainer, depth: int = 3
) -> tuple[IndexedContainer, Icms]:
    """Trees of base shapes with leaves; ``bullet`` grafts onto the leaves.

    Shapes are enumerated up to ``depth``; every finite tree is accepted as a
    shape, so composites of deep trees remain well typed.
    """
    trees = TreeFamily(base, depth)

    def positions(i, t, k):
        return tree_positions(base, i, t, k)

    C = IndexedContainer(
        base.index_set,
        trees,
        positions,
        bounded=True,
        name=f"Free({base.name})",
        shape_ok=lambda i, t: _well_formed(base, i, t),
    )
    C.law_pairs = GraftDomain(C, trees, depth, arity=2)
    C.law_triples = GraftDomain(C, trees, depth, arity=3)

    def bullet(i, t, s1):
        return graft(i, t, s1)

    m = Icms(
        lambda i: LEAF,
        bullet,
        lambda i, t, s1, k, p: split_path(i, t, p)[0],
        lambda i, t, s1, k, p: split_path(i, t, p)[1],
        lambda i, t, s1, k, p: split_path(i, t, p)[2],
        name="free",
    )
    return C, m


# -- the lambda signature ----------------------------------------------------------------

APP, LAM = False, True


def lambda_signature(N: int = 8) -> IndexedContainer:
    """Scopes ``0 .. N``; ``APP`` has two positions at ``n``, ``LAM`` one at ``n+1``.

    ``LAM`` is absent at scope ``N`` so that no tree leaves the window.
    """
    I = IndexSet(tuple(range(N + 1)))
    shapes = Family(I, {n: ([APP, LAM] if n < N else [APP]) for n in I})

    def positions(n, s, m):
        if s == APP:
            return (False, True) if m == n else ()
        return (REFL,) if m == n + 1 else ()

    def shape_ok(n, s):
        if s is True and n >= N:
            raise BudgetExceeded(f"a binder at scope {n} leaves the window 0..{N}")
        return isinstance(s, bool)

    return IndexedContainer(I, shapes, positions, name="Lam", shape_ok=shape_ok)


def lambda_container(N: int = 8, depth: int = 3) -> tuple[IndexedContainer, Icms]:
    return free_container(lambda_signature(N), depth)


# -- a scenario container ----------------------------------------------------------------


def scenario_container() -> IndexedContainer:
    """Two indices; ``a`` has one shape with one position, ``b`` one with two."""
    I = IndexSet(("a", "b"))
    return IndexedContainer.tabulated(
        I, {"a": ["s"], "b": ["t"]}, {("a", "s", "a"): ["p"], ("b", "t", "b"): ["q", "r"]}
    )


def iter_small_families(index_set: IndexSet, sizes: Iterable[int]) -> Iterator[Family]:
    for combo in itertools.product(sizes, repeat=len(index_set)):
        yield Family(index_set, {i: list(range(k)) for i, k in zip(index_set, combo)})


__all__ = [
    "APP",
    "LAM",
    "LEAF",
    "PF",
    "FinMonoid",
    "GraftDomain",
    "InvalidMonoid",
    "Leaf",
    "MonoidAction",
    "Node",
    "ProductFamily",
    "cyclic_monoid",
    "enumerate_actions",
    "enumerate_monoids",
    "free_container",
    "graft",
    "indexed_state",
    "indexed_writer",
    "lambda_container",
    "lambda_signature",
    "product_icms",
    "scenario_container",
    "split_path",
    "tree_depth",
    "tree_positions",
    "trivial_action",
]

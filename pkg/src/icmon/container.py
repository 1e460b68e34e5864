"""Indexed containers, their extents and container morphisms.

A container over an index set ``I`` has a set of shapes at every index and,
for a shape ``s`` at ``i``, a set of positions ``P i s j`` for every target
index ``j``.  Positions are stored flat: an element of an extent assigns a
value to every key ``(j, p)``, and the value must come from the fibre at ``j``.
"""

from __future__ import annotations

import bisect
import dataclasses
import functools
import itertools
import math
import random
from collections.abc import Callable, Iterable, Iterator, Mapping
from typing import Any

from .kernel import (
    DEFAULT_ENUM_CAP,
    Assignment,
    BudgetExceeded,
    Family,
    FamilyMap,
    IndexSet,
    LazyFamily,
    MismatchedFamilies,
    canon_key,
    canon_sorted,
    enumerate_family_maps,
    probe_families,
    sample_ranks,
)


class ContainerMismatch(ValueError):
    """Containers that were required to agree (index set, endpoints) do not."""


@dataclasses.dataclass(frozen=True)
class ExtentElem:
    """One element ``(s, v)`` of ``[[C]] X i``.

    ``assign`` maps every position key ``(j, p)`` of ``shape`` to a value in
    the fibre of ``X`` at ``j``.
    """

    index: Any
    shape: Any
    assign: Assignment
    _hash: int | None = dataclasses.field(default=None, init=False, repr=False, compare=False)

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.index, self.shape, self.assign)))
        return self._hash

    def __getitem__(self, key):
        return self.assign[key]

    def _canon(self):
        return (canon_key(self.index), canon_key(self.shape), self.assign._canon())

    def __repr__(self):
        return f"<{self.index!r}: {self.shape!r} | {self.assign!r}>"


class IndexedContainer:
    """Shapes per index and positions per ``(i, s, j)``.

    ``shape_family`` is any lazy family (see :class:`icmon.kernel.LazyFamily`)
    whose fibre at ``i`` is the set of shapes, possibly truncated by a budget
    for containers with infinitely many shapes; ``bounded`` records that.
    """

    def __init__(
        self,
        index_set: IndexSet,
        shape_family: LazyFamily,
        positions: Callable[[Any, Any, Any], Iterable],
        *,
        bounded: bool = False,
        name: str = "C",
        shape_ok: Callable[[Any, Any], bool] | None = None,
    ):
        if shape_family.index_set != index_set:
            raise ContainerMismatch("shape family lives over another index set")
        self.index_set = index_set
        self.shape_family = shape_family
        self._positions = positions
        self.bounded = bounded
        self.name = name
        self._shape_ok = shape_ok
        self._pos_cache: dict = {}
        self._keys_cache: dict = {}
        self._shapes_cache: dict = {}

    @classmethod
    def tabulated(
        cls,
        index_set: IndexSet,
        shapes: Mapping[Any, Iterable],
        positions: Mapping[tuple, Iterable],
        name: str = "C",
    ) -> IndexedContainer:
        """Build a finite container from explicit tables.

        ``positions`` maps ``(i, s, j)`` to the position labels; missing keys
        mean no positions.  Labels within one ``(i, s)`` must be distinct
        across all ``j``.
        """
        fam = Family(index_set, {i: list(shapes.get(i, ())) for i in index_set})
        table: dict = {}
        for (i, s, j), ps in positions.items():
            if i not in index_set or j not in index_set:
                raise ValueError(f"position key {(i, s, j)!r} uses an unknown index")
            if s not in fam.at[i]:
                raise ValueError(f"positions given for undeclared shape {s!r} at {i!r}")
            table[(i, s, j)] = tuple(canon_sorted(ps))
        for i in index_set:
            for s in fam.at[i]:
                seen = [p for j in index_set for p in table.get((i, s, j), ())]
                if len(seen) != len(set(seen)):
                    raise ValueError(f"position labels of {s!r} at {i!r} repeat across targets")

        def pos(i, s, j):
            return table.get((i, s, j), ())

        return cls(index_set, fam, pos, name=name, shape_ok=lambda i, s: s in fam.at[i])

    # -- queries -------------------------------------------------------------

    @property
    def is_tabulated(self) -> bool:
        return isinstance(self.shape_family, Family) and not self.bounded

    def shapes(self, i) -> tuple:
        got = self._shapes_cache.get(i)
        if got is None:
            got = tuple(self.shape_family.elements(i))
            self._shapes_cache[i] = got
        return got

    def positions(self, i, s, j) -> tuple:
        key = (i, s, j)
        got = self._pos_cache.get(key)
        if got is None:
            got = tuple(self._positions(i, s, j))
            self._pos_cache[key] = got
        return got

    def position_keys(self, i, s) -> tuple:
        """All ``(j, p)`` with ``p`` a position of ``s`` at target ``j``."""
        key = (i, s)
        got = self._keys_cache.get(key)
        if got is None:
            got = tuple((j, p) for j in self.index_set for p in self.positions(i, s, j))
            self._keys_cache[key] = got
        return got

    def has_shape(self, i, s) -> bool:
        if self._shape_ok is not None:
            return self._shape_ok(i, s)
        return True

    def __repr__(self):
        return f"IndexedContainer({self.name})"


class ExtentFamily:
    """The family ``[[C]] X`` computed lazily from a (lazy) family ``X``.

    Elements are ordered by shape, then lexicographically by the values at
    the position keys (in canonical key order).  ``unrank`` inverts that
    order, which gives uniform sampling for free.
    """

    def __init__(self, C: IndexedContainer, inner: LazyFamily):
        if C.index_set != inner.index_set:
            raise MismatchedFamilies("container and family live over different index sets")
        self.C = C
        self.inner = inner
        self.index_set = C.index_set
        self._count_cache: dict = {}
        self._shape_counts: dict = {}
        self._offset_cache: dict = {}

    def _shape_count(self, i, s) -> int:
        key = (i, s)
        got = self._shape_counts.get(key)
        if got is None:
            got = math.prod(self.inner.count(j) for j, _ in self.C.position_keys(i, s))
            self._shape_counts[key] = got
        return got

    def count(self, i) -> int:
        got = self._count_cache.get(i)
        if got is None:
            got = sum(self._shape_count(i, s) for s in self.C.shapes(i))
            self._count_cache[i] = got
        return got

    def elements(self, i) -> Iterator[ExtentElem]:
        for s in self.C.shapes(i):
            keys = self.C.position_keys(i, s)
            fibres = [list(self.inner.elements(j)) for j, _ in keys]
            for values in itertools.product(*fibres):
                yield ExtentElem(i, s, Assignment(zip(keys, values)))

    def _offsets(self, i) -> tuple[list, list[int]]:
        got = self._offset_cache.get(i)
        if got is None:
            shapes = list(self.C.shapes(i))
            ends = list(itertools.accumulate(self._shape_count(i, s) for s in shapes))
            got = self._offset_cache[i] = (shapes, ends)
        return got

    def unrank(self, i, rank: int) -> ExtentElem:
        if not 0 <= rank < self.count(i):
            raise IndexError(rank)
        shapes, ends = self._offsets(i)
        n = bisect.bisect_right(ends, rank)
        s = shapes[n]
        rank -= ends[n - 1] if n else 0
        keys = self.C.position_keys(i, s)
        values = []
        for j, _ in reversed(keys):
            rank, digit = divmod(rank, self.inner.count(j))
            values.append(self.inner.unrank(j, digit))
        values.reverse()
        return ExtentElem(i, s, Assignment(zip(keys, values)))

    def materialize(self, cap: int | None = DEFAULT_ENUM_CAP) -> Family:
        total = sum(self.count(i) for i in self.index_set)
        if cap is not None and total > cap:
            raise BudgetExceeded(f"extent has {total} elements, cap is {cap}")
        return Family(self.index_set, {i: list(self.elements(i)) for i in self.index_set})


def extent_at(
    C: IndexedContainer, X: LazyFamily, i, cap: int | None = DEFAULT_ENUM_CAP
) -> list[ExtentElem]:
    """All elements of ``[[C]] X i`` in canonical order."""
    fam = ExtentFamily(C, X)
    n = fam.count(i)
    if cap is not None and n > cap:
        raise BudgetExceeded(f"[[{C.name}]] X {i!r} has {n} elements, cap is {cap}")
    return list(fam.elements(i))


def extent_family(C: IndexedContainer, X: LazyFamily, cap: int | None = DEFAULT_ENUM_CAP) -> Family:
    return ExtentFamily(C, X).materialize(cap)


def map_elem(f: Callable[[Any, Any], Any], elem: ExtentElem) -> ExtentElem:
    """Post-compose the assignment of ``elem`` with ``f(j, x)``."""
    return ExtentElem(
        elem.index,
        elem.shape,
        Assignment({key: f(key[0], x) for key, x in elem.assign.items()}),
    )


def is_extent_elem(C: IndexedContainer, X: Family, elem) -> bool:
    if not isinstance(elem, ExtentElem) or not C.has_shape(elem.index, elem.shape):
        return False
    keys = C.position_keys(elem.index, elem.shape)
    if set(keys) != set(elem.assign):
        return False
    return all(elem.assign[(j, p)] in X.at[j] for j, p in keys)


def extent_map(C: IndexedContainer, f: FamilyMap) -> Callable[[ExtentElem], ExtentElem]:
    """The action of ``[[C]]`` on a family map: ``(s, v) |-> (s, v ; f)``."""

    def apply(elem: ExtentElem) -> ExtentElem:
        if not is_extent_elem(C, f.src, elem):
            raise MismatchedFamilies(f"{elem!r} is not an element of [[{C.name}]] of the source")
        return map_elem(f, elem)

    return apply


def extent_map_table(C: IndexedContainer, f: FamilyMap, cap: int | None = DEFAULT_ENUM_CAP) -> FamilyMap:
    src = extent_family(C, f.src, cap)
    dst = extent_family(C, f.dst, cap)
    tab = {i: {e: map_elem(f, e) for e in src.at[i]} for i in src.index_set}
    return FamilyMap(src, dst, tab, check=False)


# -- morphisms ---------------------------------------------------------------


class ContainerMorphism:
    """A shape map forward and, per shape, a position map backward.

    ``sigma(i, s)`` is a shape of ``dst`` at ``i``; ``pi(i, s, j, q)`` sends a
    position ``q`` of ``sigma(i, s)`` at target ``j`` to a position of ``s``
    at the same target.
    """

    def __init__(
        self,
        src: IndexedContainer,
        dst: IndexedContainer,
        sigma: Callable[[Any, Any], Any],
        pi: Callable[[Any, Any, Any, Any], Any],
        name: str = "f",
    ):
        if src.index_set != dst.index_set:
            raise ContainerMismatch("morphism endpoints live over different index sets")
        self.src = src
        self.dst = dst
        self.sigma = sigma
        self.pi = pi
        self.name = name

    @classmethod
    def from_tables(
        cls,
        src: IndexedContainer,
        dst: IndexedContainer,
        sigma: Mapping[tuple, Any],
        pi: Mapping[tuple, Any],
        name: str = "f",
    ) -> ContainerMorphism:
        """``sigma[(i, s)]`` and ``pi[(i, s, j, q)]`` as plain dictionaries."""
        sigma = dict(sigma)
        pi = dict(pi)

        def s_fn(i, s):
            try:
                return sigma[(i, s)]
            except KeyError:
                raise ValueError(f"shape map undefined at {(i, s)!r}") from None

        def p_fn(i, s, j, q):
            try:
                return pi[(i, s, j, q)]
            except KeyError:
                raise ValueError(f"position map undefined at {(i, s, j, q)!r}") from None

        return cls(src, dst, s_fn, p_fn, name=name)

    def tabulate(self, budget: int | None = None, seed: int = 0) -> tuple[dict, dict]:
        """Shape and position tables over (a sample of) the source shapes."""
        sig: dict = {}
        pis: dict = {}
        for i, s in _source_shapes(self.src, budget, seed):
            t = self.sigma(i, s)
            sig[(i, s)] = t
            for j, q in self.dst.position_keys(i, t):
                pis[(i, s, j, q)] = self.pi(i, s, j, q)
        return sig, pis

    def __repr__(self):
        return f"ContainerMorphism({self.name}: {self.src.name} -> {self.dst.name})"


def _source_shapes(C: IndexedContainer, budget: int | None, seed: int) -> Iterator[tuple]:
    fam = C.shape_family
    for i in C.index_set:
        n = fam.count(i)
        if budget is None or n <= budget:
            for s in C.shapes(i):
                yield i, s
        else:
            rng = random.Random(f"{seed}:{i!r}")
            for r in sample_ranks(n, budget, rng):
                yield i, fam.unrank(i, r)


def check_morphism(m: ContainerMorphism, budget: int | None = None) -> list[str]:
    """Typing problems of ``m``: shapes landing outside ``dst``, bad position maps."""
    problems = []
    for i, s in _source_shapes(m.src, budget, 0):
        t = m.sigma(i, s)
        if not m.dst.has_shape(i, t):
            problems.append(f"sigma({i!r}, {s!r}) = {t!r} is not a shape of {m.dst.name}")
            continue
        for j, q in m.dst.position_keys(i, t):
            p = m.pi(i, s, j, q)
            if p not in m.src.positions(i, s, j):
                problems.append(f"pi({i!r}, {s!r}, {j!r}, {q!r}) = {p!r} is not a position of {s!r}")
    return problems


def morphism_id(C: IndexedContainer) -> ContainerMorphism:
    return ContainerMorphism(C, C, lambda i, s: s, lambda i, s, j, q: q, name=f"id[{C.name}]")


def morphism_compose(m: ContainerMorphism, n: ContainerMorphism) -> ContainerMorphism:
    """``m ; n``: shapes forward through both, positions back through ``n`` then ``m``."""
    if m.dst is not n.src and m.dst.index_set != n.src.index_set:
        raise ContainerMismatch("morphisms are not composable")

    # pi needs m.sigma at every position of the image; remember the last few.
    first = functools.lru_cache(maxsize=1024)(m.sigma)

    def sigma(i, s):
        return n.sigma(i, first(i, s))

    def pi(i, s, j, q):
        return m.pi(i, s, j, n.pi(i, first(i, s), j, q))

    return ContainerMorphism(m.src, n.dst, sigma, pi, name=f"({m.name};{n.name})")


def morphism_equal(
    m: ContainerMorphism, n: ContainerMorphism, budget: int | None = None, seed: int = 0
) -> tuple | None:
    """``None`` if the morphisms agree, else the first disagreement found.

    Source shapes are compared exhaustively unless a fibre has more than
    ``budget`` shapes, in which case a seeded sample of ``budget`` is used.
    """
    for i, s in _source_shapes(m.src, budget, seed):
        t1, t2 = m.sigma(i, s), n.sigma(i, s)
        if t1 != t2:
            return ("sigma", i, s, t1, t2)
        for j, q in m.dst.position_keys(i, t1):
            p1, p2 = m.pi(i, s, j, q), n.pi(i, s, j, q)
            if p1 != p2:
                return ("pi", i, s, j, q, p1, p2)
    return None


def apply_morphism(m: ContainerMorphism, elem: ExtentElem) -> ExtentElem:
    """``(s, v) |-> (sigma s, pi ; v)``."""
    i, s = elem.index, elem.shape
    t = m.sigma(i, s)
    assign = Assignment(
        {(j, q): elem.assign[(j, m.pi(i, s, j, q))] for j, q in m.dst.position_keys(i, t)}
    )
    return ExtentElem(i, t, assign)


def interp_morphism(m: ContainerMorphism, X: LazyFamily, cap: int | None = DEFAULT_ENUM_CAP) -> FamilyMap:
    """The component at ``X`` of the natural transformation ``[[m]]``."""
    src = extent_family(m.src, X, cap)
    dst = extent_family(m.dst, X, cap)
    tab = {i: {e: apply_morphism(m, e) for e in src.at[i]} for i in src.index_set}
    return FamilyMap(src, dst, tab, check=False)


# -- full faithfulness, executable form ---------------------------------------


class NotNatural(ValueError):
    """A family of functions failed a naturality square."""

    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


Transformation = Callable[[Family, Any, ExtentElem], ExtentElem]


def representable_family(C: IndexedContainer, i, s) -> Family:
    """``P i s`` as a family: the positions of ``s`` grouped by target."""
    return Family(C.index_set, {j: list(C.positions(i, s, j)) for j in C.index_set})


def generic_element(C: IndexedContainer, i, s) -> ExtentElem:
    """``(s, id)`` in ``[[C]] (P i s) i``."""
    return ExtentElem(i, s, Assignment({(j, p): p for j, p in C.position_keys(i, s)}))


def nat_of_morphism(m: ContainerMorphism) -> Transformation:
    return lambda X, i, elem: apply_morphism(m, elem)


def default_probes(C: IndexedContainer, max_size: int = 2) -> list[Family]:
    """Small families plus every representable ``P i s`` of a tabulated ``C``."""
    probes = probe_families(C.index_set, max_size)
    for i in C.index_set:
        for s in C.shapes(i):
            rep = representable_family(C, i, s)
            if rep not in probes:
                probes.append(rep)
    return probes


def find_unnatural(
    C: IndexedContainer,
    D: IndexedContainer,
    nat: Transformation,
    probes: list[Family],
    cap: int | None = DEFAULT_ENUM_CAP,
) -> tuple | None:
    """First witness ``(kind, ...)`` that ``nat`` is ill-typed or not natural."""
    images: dict = {}
    for X in probes:
        for i in C.index_set:
            for e in extent_at(C, X, i, cap):
                out = nat(X, i, e)
                if not is_extent_elem(D, X, out) or out.index != i:
                    return ("ill-typed", X, i, e, out)
                images[(X, e)] = out
    for X in probes:
        for Y in probes:
            for f in enumerate_family_maps(X, Y, cap):
                for i in C.index_set:
                    for e in extent_at(C, X, i, cap):
                        lhs = images[(Y, map_elem(f, e))]
                        rhs = map_elem(f, images[(X, e)])
                        if lhs != rhs:
                            return ("square", X, Y, f, i, e, lhs, rhs)
    return None


def reify_natural(
    C: IndexedContainer,
    D: IndexedContainer,
    nat: Transformation,
    probes: list[Family] | None = None,
    check: bool = True,
) -> ContainerMorphism:
    """The unique container morphism whose interpretation is ``nat``.

    ``nat(X, i, elem)`` is evaluated on the generic element of every
    representable ``P i s``.  With ``check`` the transformation is first
    verified natural on ``probes`` (default: :func:`default_probes`).
    """
    if check:
        probes = default_probes(C) if probes is None else probes
        witness = find_unnatural(C, D, nat, probes)
        if witness is not None:
            raise NotNatural(f"transformation fails: {witness[0]}", witness)
    sig: dict = {}
    pis: dict = {}
    for i in C.index_set:
        for s in C.shapes(i):
            rep = representable_family(C, i, s)
            out = nat(rep, i, generic_element(C, i, s))
            sig[(i, s)] = out.shape
            for (j, q), p in out.assign.items():
                pis[(i, s, j, q)] = p
    return ContainerMorphism.from_tables(C, D, sig, pis, name="reified")


def enumerate_morphisms(
    C: IndexedContainer, D: IndexedContainer, cap: int | None = DEFAULT_ENUM_CAP
) -> Iterator[ContainerMorphism]:
    """Every morphism between two tabulated containers, in canonical order."""
    per_shape = []
    for i in C.index_set:
        for s in C.shapes(i):
            options = []
            for t in D.shapes(i):
                keys = D.position_keys(i, t)
                choices = [C.positions(i, s, j) for j, _ in keys]
                for images in itertools.product(*choices):
                    options.append((t, tuple(zip(keys, images))))
            per_shape.append(((i, s), options))
    total = math.prod(len(o) for _, o in per_shape)
    if cap is not None and total > cap:
        raise BudgetExceeded(f"{total} morphisms exceed the cap {cap}")
    for combo in itertools.product(*(o for _, o in per_shape)):
        sig = {}
        pis = {}
        for ((i, s), _), (t, images) in zip(per_shape, combo):
            sig[(i, s)] = t
            for (j, q), p in images:
                pis[(i, s, j, q)] = p
        yield ContainerMorphism.from_tables(C, D, sig, pis)


def small_containers(
    index_set: IndexSet, max_shapes: int = 2, max_positions: int = 2
) -> Iterator[IndexedContainer]:
    """Every tabulated container with at most ``max_shapes`` shapes per index
    and ``max_positions`` positions per target, one per isomorphism class.

    Shapes are ``s0, s1, ..``; the ``k``-th position towards the ``t``-th
    index is ``p<t><k>``.
    """
    labels = index_set.labels
    kinds = list(itertools.product(range(max_positions + 1), repeat=len(labels)))
    per_index = [
        [c for n in range(max_shapes + 1) for c in itertools.combinations_with_replacement(kinds, n)]
    ] * len(labels)
    for choice in itertools.product(*per_index):
        shapes = {}
        positions = {}
        for i, kinds_at in zip(labels, choice):
            names = [f"s{n}" for n in range(len(kinds_at))]
            shapes[i] = names
            for s, kind in zip(names, kinds_at):
                for t, (j, k) in enumerate(zip(labels, kind)):
                    if k:
                        positions[(i, s, j)] = [f"p{t}{n}" for n in range(k)]
        yield IndexedContainer.tabulated(index_set, shapes, positions)

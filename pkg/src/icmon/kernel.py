"""Finite index sets, families of finite sets and maps between families.

Everything here lives in the category of ``I``-indexed families of finite
sets.  Labels are arbitrary hashable values; a canonical total order on them
(:func:`canon_key`) makes every enumeration deterministic.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import random
from collections.abc import Iterable, Iterator, Mapping
from typing import Any, Protocol

DEFAULT_ENUM_CAP = 1_000_000


class MismatchedFamilies(ValueError):
    """Two families (or maps) that had to agree do not."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured cap."""


def canon_key(x: Any) -> tuple:
    """Sort key giving a total order on the label values used in this package."""
    if x is None:
        return (0,)
    if isinstance(x, bool):
        return (1, int(x))
    if isinstance(x, int):
        return (2, x)
    if isinstance(x, str):
        return (3, x)
    if isinstance(x, tuple):
        return (4, tuple(canon_key(y) for y in x))
    if isinstance(x, frozenset):
        return (5, tuple(sorted(canon_key(y) for y in x)))
    canon = getattr(x, "_canon", None)
    if canon is not None:
        return (6, type(x).__name__, canon())
    if dataclasses.is_dataclass(x):
        return (
            6,
            type(x).__name__,
            tuple(canon_key(getattr(x, f.name)) for f in dataclasses.fields(x)),
        )
    return (7, type(x).__name__, repr(x))


def canon_sorted(xs: Iterable) -> list:
    return sorted(xs, key=canon_key)


class Assignment(Mapping):
    """Immutable, hashable mapping.

    Equality is plain mapping equality; iteration follows insertion order and
    :meth:`canon_items` gives the canonical order.
    """

    __slots__ = ("_d", "_hash")

    def __init__(self, items: Mapping | Iterable = ()):
        self._d = dict(items)
        self._hash = None

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Assignment):
            return self._d == other._d
        return NotImplemented

    def canon_items(self) -> list[tuple]:
        return sorted(self._d.items(), key=lambda kv: canon_key(kv[0]))

    def _canon(self):
        return tuple((canon_key(k), canon_key(v)) for k, v in self.canon_items())

    def __repr__(self):
        inner = ", ".join(f"{k!r}: {v!r}" for k, v in self.canon_items())
        return "{" + inner + "}"


@dataclasses.dataclass(frozen=True)
class IndexSet:
    """The fixed, nonempty set of indices, in listed (canonical) order."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError("an index set must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate index labels in {labels!r}")

    def __iter__(self) -> Iterator:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, i) -> bool:
        return i in self.labels

    def position(self, i) -> int:
        return self.labels.index(i)


class FinSet:
    """A finite set of labels stored in canonical order."""

    __slots__ = ("_set", "elems")

    def __init__(self, elems: Iterable = ()):
        elems = list(elems)
        s = frozenset(elems)
        if len(s) != len(elems):
            raise ValueError(f"duplicate elements in {elems!r}")
        self.elems = tuple(canon_sorted(elems))
        self._set = s

    def __iter__(self):
        return iter(self.elems)

    def __len__(self):
        return len(self.elems)

    def __contains__(self, x):
        return x in self._set

    def __eq__(self, other):
        if isinstance(other, FinSet):
            return self._set == other._set
        return NotImplemented

    def __hash__(self):
        return hash(self._set)

    def __repr__(self):
        return f"FinSet({list(self.elems)!r})"


class LazyFamily(Protocol):
    """A family that can be counted, enumerated and sampled fibrewise."""

    index_set: IndexSet

    def count(self, i) -> int: ...

    def elements(self, i) -> Iterator: ...

    def unrank(self, i, rank: int): ...


class Family:
    """An object of ``Set^I``: a finite set for every index."""

    __slots__ = ("at", "index_set")

    def __init__(self, index_set: IndexSet, at: Mapping):
        missing = [i for i in index_set if i not in at]
        extra = [i for i in at if i not in index_set]
        if missing or extra:
            raise ValueError(
                f"family must be defined exactly on {index_set.labels!r} "
                f"(missing {missing!r}, unknown {extra!r})"
            )
        self.index_set = index_set
        self.at = {
            i: (at[i] if isinstance(at[i], FinSet) else FinSet(at[i])) for i in index_set
        }

    def __eq__(self, other):
        if not isinstance(other, Family):
            return NotImplemented
        return self.index_set == other.index_set and self.at == other.at

    def __hash__(self):
        return hash((self.index_set, tuple(self.at[i] for i in self.index_set)))

    def __repr__(self):
        inner = ", ".join(f"{i!r}: {list(self.at[i].elems)!r}" for i in self.index_set)
        return "Family({" + inner + "})"

    def count(self, i) -> int:
        return len(self.at[i])

    def elements(self, i) -> Iterator:
        return iter(self.at[i].elems)

    def unrank(self, i, rank: int):
        return self.at[i].elems[rank]


class FamilyMap:
    """A map ``X ->^I Y``: one total function table per index."""

    __slots__ = ("dst", "src", "tab")

    def __init__(self, src: Family, dst: Family, tab: Mapping, *, check: bool = True):
        if src.index_set != dst.index_set:
            raise MismatchedFamilies("source and target live over different index sets")
        self.src = src
        self.dst = dst
        self.tab = {i: dict(tab[i]) for i in src.index_set}
        if check:
            for i in src.index_set:
                row = self.tab[i]
                if set(row) != set(src.at[i].elems):
                    raise ValueError(f"map is not total on the fibre at {i!r}")
                for x, y in row.items():
                    if y not in dst.at[i]:
                        raise ValueError(f"{x!r} at {i!r} is sent outside the target fibre: {y!r}")

    def __call__(self, i, x):
        return self.tab[i][x]

    def __repr__(self):
        return f"FamilyMap({self.tab!r})"


def fam_id(X: Family) -> FamilyMap:
    return FamilyMap(X, X, {i: {x: x for x in X.at[i]} for i in X.index_set}, check=False)


def fam_compose(f: FamilyMap, g: FamilyMap) -> FamilyMap:
    """Diagrammatic composite ``f ; g`` (first ``f``, then ``g``)."""
    if f.dst != g.src:
        raise MismatchedFamilies("target of the first map differs from source of the second")
    tab = {i: {x: g.tab[i][y] for x, y in f.tab[i].items()} for i in f.src.index_set}
    return FamilyMap(f.src, g.dst, tab, check=False)


def fam_equal(f: FamilyMap, g: FamilyMap) -> bool:
    if f.src != g.src or f.dst != g.dst:
        raise MismatchedFamilies("maps with different source or target cannot be compared")
    return all(f.tab[i] == g.tab[i] for i in f.src.index_set)


def count_family_maps(X: Family, Y: Family) -> int:
    return math.prod(len(Y.at[i]) ** len(X.at[i]) for i in X.index_set)


def enumerate_family_maps(
    X: Family, Y: Family, cap: int | None = DEFAULT_ENUM_CAP
) -> Iterator[FamilyMap]:
    """Every map ``X ->^I Y`` exactly once, in lexicographic order of tables."""
    if X.index_set != Y.index_set:
        raise MismatchedFamilies("families over different index sets")
    total = count_family_maps(X, Y)
    if cap is not None and total > cap:
        raise BudgetExceeded(f"{total} family maps exceed the cap {cap}")
    labels = X.index_set.labels
    per_index = [
        list(itertools.product(Y.at[i].elems, repeat=len(X.at[i]))) for i in labels
    ]
    for choice in itertools.product(*per_index):
        tab = {i: dict(zip(X.at[i].elems, images)) for i, images in zip(labels, choice)}
        yield FamilyMap(X, Y, tab, check=False)


def probe_families(
    index_set: IndexSet, max_size: int = 2, prefix: str = "x"
) -> list[Family]:
    """All families whose fibres are ``{x0, .., x(k-1)}`` with ``k <= max_size``."""
    sizes = itertools.product(range(max_size + 1), repeat=len(index_set))
    out = []
    for combo in sizes:
        at = {i: [f"{prefix}{n}" for n in range(k)] for i, k in zip(index_set, combo)}
        out.append(Family(index_set, at))
    return out


def sample_ranks(total: int, budget: int, rng: random.Random) -> list[int]:
    """Sorted distinct ranks below ``total``; all of them if ``total <= budget``."""
    if total <= budget:
        return list(range(total))
    picked: set[int] = set()
    while len(picked) < budget:
        picked.add(rng.randrange(total))
    return sorted(picked)

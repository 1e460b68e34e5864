"""The monad on families carried by the extent of a container with an ICMS.

Unit and join are computed directly from the structure; bind is derived.
"""

from __future__ import annotations

import dataclasses
import random
from collections.abc import Callable, Sequence

from .container import ExtentElem, ExtentFamily, IndexedContainer, map_elem
from .icms import _EVAL_ERRORS, Icms, LawReport, Verdict
from .kernel import (
    DEFAULT_ENUM_CAP,
    Assignment,
    Family,
    FamilyMap,
    LazyFamily,
    canon_sorted,
    sample_ranks,
)

MONAD_LAWS = ("unit-left", "unit-right", "assoc", "unit-natural", "join-natural")


@dataclasses.dataclass(frozen=True)
class DerivedMonad:
    carrier: IndexedContainer
    icms: Icms


def unit_elem(M: DerivedMonad, i, x) -> ExtentElem:
    C, m = M.carrier, M.icms
    e = m.e(i)
    return ExtentElem(i, e, Assignment({key: x for key in C.position_keys(i, e)}))


def join_elem(M: DerivedMonad, elem: ExtentElem) -> ExtentElem:
    """Flatten an element of ``[[C]][[C]]X`` by grafting the inner shapes."""
    C, m = M.carrier, M.icms
    i, s, v = elem.index, elem.shape, elem.assign
    s1 = Assignment({key: inner.shape for key, inner in v.items()})
    t = m.bullet(i, s, s1)
    out = {}
    for k, p in C.position_keys(i, t):
        a, b, c = m.up(i, s, s1, k, p), m.ul(i, s, s1, k, p), m.ur(i, s, s1, k, p)
        out[(k, p)] = v[(a, b)].assign[(k, c)]
    return ExtentElem(i, t, Assignment(out))


def bind_elem(M: DerivedMonad, elem: ExtentElem, k: Callable) -> ExtentElem:
    """``k`` takes ``(j, x)`` and returns an extent element at ``j``."""
    return join_elem(M, map_elem(k, elem))


def m_unit(M: DerivedMonad, X: Family, cap: int | None = DEFAULT_ENUM_CAP) -> FamilyMap:
    TX = ExtentFamily(M.carrier, X).materialize(cap)
    tab = {i: {x: unit_elem(M, i, x) for x in X.elements(i)} for i in X.index_set}
    return FamilyMap(X, TX, tab, check=False)


def m_join(M: DerivedMonad, X: Family, cap: int | None = DEFAULT_ENUM_CAP) -> FamilyMap:
    C = M.carrier
    TTX = ExtentFamily(C, ExtentFamily(C, X)).materialize(cap)
    TX = ExtentFamily(C, X).materialize(cap)
    tab = {i: {e: join_elem(M, e) for e in TTX.elements(i)} for i in X.index_set}
    return FamilyMap(TTX, TX, tab, check=False)


def m_bind(M: DerivedMonad, X: Family, Y: Family, elem: ExtentElem, k: FamilyMap) -> ExtentElem:
    return bind_elem(M, elem, k)


def _fibre(fam: LazyFamily, i, budget: int | None, rng: random.Random):
    n = fam.count(i)
    if budget is None or n <= budget:
        return fam.elements(i), True
    return (fam.unrank(i, r) for r in sample_ranks(n, budget, rng)), False


def _random_map(X: Family, Y: Family, rng: random.Random) -> FamilyMap | None:
    if any(X.count(i) and not Y.count(i) for i in X.index_set):
        return None
    tab = {
        i: {x: rng.choice(list(Y.elements(i))) for x in X.elements(i)} for i in X.index_set
    }
    return FamilyMap(X, Y, tab, check=False)


def default_monad_probes(M: DerivedMonad) -> list[Family]:
    I = M.carrier.index_set
    if len(I) <= 3:
        from .kernel import probe_families

        return probe_families(I, 2)
    return [Family(I, {i: [f"x{n}" for n in range(k)] for i in I}) for k in (1, 2)]


def check_monad_laws(
    M: DerivedMonad,
    probe_budget: int | None = 2_000,
    probes: Sequence[Family] | None = None,
    maps_per_probe: int = 3,
    seed: int = 0,
) -> LawReport:
    """Unit laws, associativity and naturality of unit and join on probes.

    Each fibre with more than ``probe_budget`` elements is sampled.
    """
    C = M.carrier
    probes = default_monad_probes(M) if probes is None else list(probes)
    v = {n: Verdict(n) for n in MONAD_LAWS}
    full = not C.bounded
    rng = random.Random(seed)

    def record(law, ok, w, detail=""):
        v[law].checked += 1
        if not ok and v[law].witness is None:
            text = detail() if callable(detail) else detail
            v[law].status, v[law].witness, v[law].detail = "fail", w, text

    def safe(law, w, fn):
        try:
            a, b = fn()
        except _EVAL_ERRORS as exc:
            record(law, False, w, f"raised {exc!r}")
            return
        record(law, a == b, w, lambda: f"{a!r} != {b!r}")

    for X in probes:
        TX = ExtentFamily(C, X)
        TTTX = ExtentFamily(C, ExtentFamily(C, TX))
        targets = [Y for Y in probes if Y != X][:2] + [X]
        maps = []
        for Y in targets:
            for _ in range(maps_per_probe):
                f = _random_map(X, Y, rng)
                if f is not None:
                    maps.append(f)
        for i in C.index_set:
            for x in X.elements(i):
                for f in maps:
                    safe(
                        "unit-natural",
                        (X, i, x, f),
                        lambda: (map_elem(f, unit_elem(M, i, x)), unit_elem(M, i, f(i, x))),
                    )
            it, ok = _fibre(TX, i, probe_budget, rng)
            full &= ok
            for e in it:
                w = (X, i, e)
                safe("unit-left", w, lambda: (join_elem(M, unit_elem(M, i, e)), e))
                safe(
                    "unit-right",
                    w,
                    lambda: (join_elem(M, map_elem(lambda j, x: unit_elem(M, j, x), e)), e),
                )
            it, ok = _fibre(TTTX, i, probe_budget, rng)
            full &= ok
            for E in it:
                w = (X, i, E)
                safe(
                    "assoc",
                    w,
                    lambda: (
                        join_elem(M, join_elem(M, E)),
                        join_elem(M, map_elem(lambda j, inner: join_elem(M, inner), E)),
                    ),
                )
                inner = E.assign
                E2 = ExtentElem(
                    E.index,
                    E.shape,
                    Assignment({key: join_elem(M, val) for key, val in inner.items()}),
                )
                for f in maps:
                    safe(
                        "join-natural",
                        (X, i, E2, f),
                        lambda: (
                            map_elem(f, join_elem(M, E2)),
                            join_elem(M, map_elem(lambda j, t: map_elem(f, t), E2)),
                        ),
                    )
    for law in v.values():
        law.domain = law.checked
        if law.status == "pass" and not full:
            law.status = "bounded-pass"
    return LawReport(v, exhaustive=full, budget=probe_budget)


def transport_join(M: DerivedMonad, X: Family, mu, cap: int | None = DEFAULT_ENUM_CAP) -> list:
    """Elements where ``join`` and ``interp(mu) . psi`` disagree (expected empty)."""
    from .container import apply_morphism
    from .monoidal import psi_elem

    C = M.carrier
    bad = []
    for i in X.index_set:
        for E in ExtentFamily(C, ExtentFamily(C, X)).elements(i):
            a = join_elem(M, E)
            b = apply_morphism(mu, psi_elem(C, C, E))
            if a != b:
                bad.append((i, E, a, b))
    return canon_sorted(bad)[:1] if bad else []

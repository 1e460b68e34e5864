"""The composition monoidal structure on indexed containers.

The unit container has one shape ``*`` at every index with a single position
``refl`` pointing back at its own index.  The tensor ``C0 (x) C1`` has, as
shapes at ``i``, the elements of ``[[C0]] S1 i``; its positions are triples
``(j, p0, p1)`` keyed by the target of ``p1``.

Coherence (triangle, pentagon) is checked, not proved: each side of a law is
built as a container morphism and the two are compared with
:func:`icmon.container.morphism_equal`.
"""

from __future__ import annotations

import dataclasses
import functools
from collections.abc import Callable

from .container import (
    ContainerMismatch,
    ContainerMorphism,
    ExtentElem,
    ExtentFamily,
    IndexedContainer,
    apply_morphism,
    extent_at,
    map_elem,
    morphism_compose,
    morphism_equal,
    morphism_id,
)
from .kernel import (
    DEFAULT_ENUM_CAP,
    Assignment,
    Family,
    FamilyMap,
    IndexSet,
    enumerate_family_maps,
)

STAR = "*"
REFL = "refl"


@functools.lru_cache(maxsize=64)
def unit_container(index_set: IndexSet) -> IndexedContainer:
    """``S i = {*}``, ``P i * j = {refl}`` when ``i == j`` and empty otherwise."""
    shapes = Family(index_set, {i: [STAR] for i in index_set})

    def positions(i, s, j):
        return (REFL,) if i == j else ()

    return IndexedContainer(
        index_set, shapes, positions, name="I", shape_ok=lambda i, s: s == STAR
    )


def _tensor_shape_ok(C0: IndexedContainer, C1: IndexedContainer):
    def ok(i, e) -> bool:
        if not isinstance(e, ExtentElem) or e.index != i or not C0.has_shape(i, e.shape):
            return False
        keys = C0.position_keys(i, e.shape)
        if set(keys) != set(e.assign):
            return False
        return all(C1.has_shape(j, e.assign[(j, p)]) for j, p in keys)

    return ok


@functools.lru_cache(maxsize=32)
def tensor(C0: IndexedContainer, C1: IndexedContainer) -> IndexedContainer:
    """The composite container, whose extent is ``[[C0]] o [[C1]]``."""
    if C0.index_set != C1.index_set:
        raise ContainerMismatch("tensor of containers over different index sets")

    def positions(i, e, k):
        out = []
        for j, p0 in C0.position_keys(i, e.shape):
            for p1 in C1.positions(j, e.assign[(j, p0)], k):
                out.append((j, p0, p1))
        return out

    return IndexedContainer(
        C0.index_set,
        ExtentFamily(C0, C1.shape_family),
        positions,
        bounded=C0.bounded or C1.bounded,
        name=f"({C0.name}*{C1.name})",
        shape_ok=_tensor_shape_ok(C0, C1),
    )


def tensor_morphism(m: ContainerMorphism, n: ContainerMorphism) -> ContainerMorphism:
    """``m (x) n : C0 (x) C1 -> D0 (x) D1`` for ``m : C0 -> D0``, ``n : C1 -> D1``."""
    src = tensor(m.src, n.src)
    dst = tensor(m.dst, n.dst)

    def sigma(i, e):
        t = m.sigma(i, e.shape)
        assign = {
            (j, q0): n.sigma(j, e.assign[(j, m.pi(i, e.shape, j, q0))])
            for j, q0 in m.dst.position_keys(i, t)
        }
        return ExtentElem(i, t, Assignment(assign))

    def pi(i, e, k, pos):
        j, q0, q1 = pos
        p0 = m.pi(i, e.shape, j, q0)
        return (j, p0, n.pi(j, e.assign[(j, p0)], k, q1))

    return ContainerMorphism(src, dst, sigma, pi, name=f"({m.name}*{n.name})")


# -- unitors and associator ----------------------------------------------------


def unitor_l(C: IndexedContainer) -> ContainerMorphism:
    """``I (x) C -> C``."""
    unit = unit_container(C.index_set)
    return ContainerMorphism(
        tensor(unit, C),
        C,
        lambda i, e: e.assign[(i, REFL)],
        lambda i, e, k, p: (i, REFL, p),
        name=f"lambda[{C.name}]",
    )


def unitor_l_inv(C: IndexedContainer) -> ContainerMorphism:
    unit = unit_container(C.index_set)
    return ContainerMorphism(
        C,
        tensor(unit, C),
        lambda i, s: ExtentElem(i, STAR, Assignment({(i, REFL): s})),
        lambda i, s, k, pos: pos[2],
        name=f"lambda^-1[{C.name}]",
    )


def unitor_r(C: IndexedContainer) -> ContainerMorphism:
    """``C (x) I -> C``."""
    unit = unit_container(C.index_set)
    return ContainerMorphism(
        tensor(C, unit),
        C,
        lambda i, e: e.shape,
        lambda i, e, k, p: (k, p, REFL),
        name=f"rho[{C.name}]",
    )


def unitor_r_inv(C: IndexedContainer) -> ContainerMorphism:
    unit = unit_container(C.index_set)

    def sigma(i, s):
        return ExtentElem(i, s, Assignment({key: STAR for key in C.position_keys(i, s)}))

    return ContainerMorphism(
        C, tensor(C, unit), sigma, lambda i, s, k, pos: pos[1], name=f"rho^-1[{C.name}]"
    )


def associator(C0: IndexedContainer, C1: IndexedContainer, C2: IndexedContainer) -> ContainerMorphism:
    """``(C0 (x) C1) (x) C2 -> C0 (x) (C1 (x) C2)``."""

    def sigma(i, a):
        b = a.shape
        inner = {}
        for j, p0 in C0.position_keys(i, b.shape):
            s1 = b.assign[(j, p0)]
            w = {(k, p1): a.assign[(k, (j, p0, p1))] for k, p1 in C1.position_keys(j, s1)}
            inner[(j, p0)] = ExtentElem(j, s1, Assignment(w))
        return ExtentElem(i, b.shape, Assignment(inner))

    def pi(i, a, l, pos):
        j, p0, (k, p1, p2) = pos
        return (k, (j, p0, p1), p2)

    return ContainerMorphism(
        tensor(tensor(C0, C1), C2),
        tensor(C0, tensor(C1, C2)),
        sigma,
        pi,
        name=f"alpha[{C0.name},{C1.name},{C2.name}]",
    )


def associator_inv(C0: IndexedContainer, C1: IndexedContainer, C2: IndexedContainer) -> ContainerMorphism:
    """``C0 (x) (C1 (x) C2) -> (C0 (x) C1) (x) C2``."""

    def sigma(i, a):
        outer = Assignment({key: a.assign[key].shape for key in a.assign})
        w = {}
        for (j, p0), e in a.assign.items():
            for (k, p1), s2 in e.assign.items():
                w[(k, (j, p0, p1))] = s2
        return ExtentElem(i, ExtentElem(i, a.shape, outer), Assignment(w))

    def pi(i, a, l, pos):
        k, (j, p0, p1), p2 = pos
        return (j, p0, (k, p1, p2))

    return ContainerMorphism(
        tensor(C0, tensor(C1, C2)),
        tensor(tensor(C0, C1), C2),
        sigma,
        pi,
        name=f"alpha^-1[{C0.name},{C1.name},{C2.name}]",
    )


@dataclasses.dataclass(frozen=True)
class MonoidalWitness:
    """Builders for the structural isomorphisms, each paired with its inverse."""

    unitor_l: Callable[[IndexedContainer], ContainerMorphism]
    unitor_l_inv: Callable[[IndexedContainer], ContainerMorphism]
    unitor_r: Callable[[IndexedContainer], ContainerMorphism]
    unitor_r_inv: Callable[[IndexedContainer], ContainerMorphism]
    associator: Callable[..., ContainerMorphism]
    associator_inv: Callable[..., ContainerMorphism]

    def iso_failures(self, C0, C1, C2, budget: int | None = None) -> list[tuple]:
        """Round trips ``iso ; iso^-1`` and ``iso^-1 ; iso`` that are not the identity."""
        pairs = [
            ("lambda", self.unitor_l(C0), self.unitor_l_inv(C0)),
            ("rho", self.unitor_r(C0), self.unitor_r_inv(C0)),
            ("alpha", self.associator(C0, C1, C2), self.associator_inv(C0, C1, C2)),
        ]
        out = []
        for name, f, g in pairs:
            for label, comp, ident in (
                (f"{name};inv", morphism_compose(f, g), morphism_id(f.src)),
                (f"inv;{name}", morphism_compose(g, f), morphism_id(g.src)),
            ):
                w = morphism_equal(comp, ident, budget)
                if w is not None:
                    out.append((label, w))
        return out


MONOIDAL = MonoidalWitness(
    unitor_l, unitor_l_inv, unitor_r, unitor_r_inv, associator, associator_inv
)


def triangle_sides(X: IndexedContainer, Y: IndexedContainer) -> tuple[ContainerMorphism, ContainerMorphism]:
    """``alpha ; (id (x) lambda)`` and ``rho (x) id``, both out of ``(X (x) I) (x) Y``."""
    unit = unit_container(X.index_set)
    lhs = morphism_compose(associator(X, unit, Y), tensor_morphism(morphism_id(X), unitor_l(Y)))
    rhs = tensor_morphism(unitor_r(X), morphism_id(Y))
    return lhs, rhs


def pentagon_sides(W, X, Y, Z) -> tuple[ContainerMorphism, ContainerMorphism]:
    """The two paths ``((W X) Y) Z -> W (X (Y Z))``."""
    top = morphism_compose(associator(tensor(W, X), Y, Z), associator(W, X, tensor(Y, Z)))
    bottom = morphism_compose(
        morphism_compose(
            tensor_morphism(associator(W, X, Y), morphism_id(Z)),
            associator(W, tensor(X, Y), Z),
        ),
        tensor_morphism(morphism_id(W), associator(X, Y, Z)),
    )
    return top, bottom


def check_triangle(X, Y, budget: int | None = None) -> tuple | None:
    return morphism_equal(*triangle_sides(X, Y), budget)


def check_pentagon(W, X, Y, Z, budget: int | None = None) -> tuple | None:
    return morphism_equal(*pentagon_sides(W, X, Y, Z), budget)


# -- the extent functor is strong monoidal -----------------------------------------


def psi_elem(C0: IndexedContainer, C1: IndexedContainer, elem: ExtentElem) -> ExtentElem:
    """``[[C0]] ([[C1]] X) i -> [[C0 (x) C1]] X i``."""
    i = elem.index
    outer = Assignment({key: inner.shape for key, inner in elem.assign.items()})
    values = {}
    for (j, p0), inner in elem.assign.items():
        for (k, p1), x in inner.assign.items():
            values[(k, (j, p0, p1))] = x
    return ExtentElem(i, ExtentElem(i, elem.shape, outer), Assignment(values))


def psi_inv_elem(C0: IndexedContainer, C1: IndexedContainer, elem: ExtentElem) -> ExtentElem:
    i = elem.index
    sh = elem.shape
    inner = {}
    for (j, p0), s1 in sh.assign.items():
        w = {(k, p1): elem.assign[(k, (j, p0, p1))] for k, p1 in C1.position_keys(j, s1)}
        inner[(j, p0)] = ExtentElem(j, s1, Assignment(w))
    return ExtentElem(i, sh.shape, Assignment(inner))


def eps_elem(i, x) -> ExtentElem:
    """``X i -> [[I]] X i``."""
    return ExtentElem(i, STAR, Assignment({(i, REFL): x}))


def eps_inv_elem(elem: ExtentElem):
    return elem.assign[(elem.index, REFL)]


@dataclasses.dataclass
class StrongMonoidalIso:
    """``psi : [[C0]][[C1]]X ~ [[C0 (x) C1]]X`` and ``eps : X ~ [[I]]X`` at one ``X``."""

    psi: FamilyMap
    psi_inv: FamilyMap
    eps: FamilyMap
    eps_inv: FamilyMap


def strong_monoidal_iso(
    C0: IndexedContainer, C1: IndexedContainer, X: Family, cap: int | None = DEFAULT_ENUM_CAP
) -> StrongMonoidalIso:
    I = X.index_set
    nested = ExtentFamily(C0, ExtentFamily(C1, X)).materialize(cap)
    flat = ExtentFamily(tensor(C0, C1), X).materialize(cap)
    unit_ext = ExtentFamily(unit_container(I), X).materialize(cap)
    psi = {i: {e: psi_elem(C0, C1, e) for e in nested.at[i]} for i in I}
    psi_inv = {i: {e: psi_inv_elem(C0, C1, e) for e in flat.at[i]} for i in I}
    eps = {i: {x: eps_elem(i, x) for x in X.at[i]} for i in I}
    eps_inv = {i: {e: eps_inv_elem(e) for e in unit_ext.at[i]} for i in I}
    return StrongMonoidalIso(
        FamilyMap(nested, flat, psi),
        FamilyMap(flat, nested, psi_inv),
        FamilyMap(X, unit_ext, eps),
        FamilyMap(unit_ext, X, eps_inv),
    )


def check_strong_monoidal(
    C0: IndexedContainer,
    C1: IndexedContainer,
    C2: IndexedContainer,
    probes: list[Family],
    cap: int | None = DEFAULT_ENUM_CAP,
) -> list[tuple]:
    """Failures of: psi/eps being bijections, natural in ``X``, and coherent.

    Coherence covers the associativity square (psi against the associator)
    and the two unit squares (eps, psi against the unitors).
    """
    failures: list[tuple] = []
    I = C0.index_set
    for X in probes:
        iso = strong_monoidal_iso(C0, C1, X, cap)
        for i in I:
            for e, f in iso.psi.tab[i].items():
                if iso.psi_inv(i, f) != e:
                    failures.append(("psi;psi^-1", X, i, e))
            if len(iso.psi.tab[i]) != len(iso.psi_inv.tab[i]):
                failures.append(("psi not onto", X, i))
            for f, e in iso.psi_inv.tab[i].items():
                if iso.psi(i, e) != f:
                    failures.append(("psi^-1;psi", X, i, f))
            for x in X.at[i]:
                if iso.eps_inv(i, iso.eps(i, x)) != x:
                    failures.append(("eps;eps^-1", X, i, x))
            for u in iso.eps_inv.tab[i]:
                if iso.eps(i, iso.eps_inv(i, u)) != u:
                    failures.append(("eps^-1;eps", X, i, u))
    for X in probes:
        for Y in probes:
            for f in enumerate_family_maps(X, Y, cap):
                for i in I:
                    for e in extent_at(C0, ExtentFamily(C1, X), i, cap):
                        lhs = psi_elem(C0, C1, map_elem(lambda j, v: map_elem(f, v), e))
                        rhs = map_elem(f, psi_elem(C0, C1, e))
                        if lhs != rhs:
                            failures.append(("psi natural", X, Y, i, e))
                    for x in X.at[i]:
                        if eps_elem(i, f(i, x)) != map_elem(f, eps_elem(i, x)):
                            failures.append(("eps natural", X, Y, i, x))
    alpha = associator(C0, C1, C2)
    lam, rho = unitor_l(C0), unitor_r(C0)

    for X in probes:
        inner = ExtentFamily(C2, X)
        for i in I:
            for e in extent_at(C0, ExtentFamily(C1, inner), i, cap):
                left = psi_elem(C0, tensor(C1, C2), map_elem(lambda j, v: psi_elem(C1, C2, v), e))
                right = apply_morphism(
                    alpha, psi_elem(tensor(C0, C1), C2, psi_elem(C0, C1, e))
                )
                if left != right:
                    failures.append(("associativity square", X, i, e))
            for e in extent_at(C0, X, i, cap):
                unit = unit_container(I)
                via_l = apply_morphism(lam, psi_elem(unit, C0, eps_elem(i, e)))
                via_r = apply_morphism(rho, psi_elem(C0, unit, map_elem(eps_elem, e)))
                if via_l != e:
                    failures.append(("left unit square", X, i, e))
                if via_r != e:
                    failures.append(("right unit square", X, i, e))
    return failures

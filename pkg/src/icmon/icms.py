"""Indexed container monoid structures and their law checker.

An :class:`Icms` on a container ``C`` is given by

* ``e(i)``: the unit shape at ``i``;
* ``bullet(i, s, s1)``: grafting, where ``s1`` assigns a shape at ``j`` to
  every position key ``(j, p)`` of ``s``;
* ``up``, ``ul``, ``ur`` at ``(i, s, s1, j, p)`` for ``p`` a position of
  ``bullet(i, s, s1)`` at ``j``: the middle index ``a``, the outer position
  (a position of ``s`` at ``a``) and the inner position (a position of
  ``s1[(a, ul)]`` at ``j``).

The condition that unit shapes only have positions pointing at their own
index is checked by :func:`check_pe_eq` rather than stored.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import random
from collections.abc import Callable, Iterator, Mapping
from typing import Any

from .container import (
    ContainerMorphism,
    ExtentElem,
    ExtentFamily,
    IndexedContainer,
    morphism_compose,
    morphism_equal,
    morphism_id,
)
from .kernel import (
    DEFAULT_ENUM_CAP,
    Assignment,
    BudgetExceeded,
    LazyFamily,
    canon_key,
    sample_ranks,
)
from .monoidal import (
    REFL,
    STAR,
    associator,
    tensor,
    tensor_morphism,
    unit_container,
    unitor_l,
    unitor_r,
)

LAW_NAMES = (
    "e-unit-l",
    "↖-unit-l",
    "e-unit-r",
    "↗-unit-r",
    "•-assoc",
    "↑-↗↑-assoc",
    "↖↑-↑-assoc",
    "↖↖-↖-assoc",
    "↖↗-↗↖-assoc",
    "↗-↗↗-assoc",
)
HOM_LAW_NAMES = ("hom-e", "hom-Pe≡", "hom-•", "hom-↑", "hom-↖", "hom-↗")
MONOID_DIAGRAMS = ("unit-left", "unit-right", "associativity")

DEFAULT_BUDGET = 20_000

# Raised inside law evaluation when a component returns something of the
# wrong type (e.g. a position that is not in the expected set).
_EVAL_ERRORS = (KeyError, ValueError, TypeError, IndexError, AttributeError)


class InvalidIcms(ValueError):
    """The structure fails its laws (``report`` says which)."""

    def __init__(self, message: str, report: LawReport | None = None):
        super().__init__(message)
        self.report = report


class NotAMonoid(ValueError):
    """A unit/multiplication pair fails one of the monoid diagrams."""

    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


@dataclasses.dataclass(frozen=True)
class Icms:
    e: Callable[[Any], Any]
    bullet: Callable[[Any, Any, Assignment], Any]
    up: Callable[..., Any]
    ul: Callable[..., Any]
    ur: Callable[..., Any]
    name: str = "m"


def unit_icms() -> Icms:
    """The only structure on the unit container: everything is ``*`` or ``refl``."""
    return Icms(
        lambda i: STAR,
        lambda i, s, s1: STAR,
        lambda i, s, s1, j, p: i,
        lambda i, s, s1, j, p: REFL,
        lambda i, s, s1, j, p: REFL,
        name="unit",
    )


# -- derived operations -----------------------------------------------------------


def e_family(C: IndexedContainer, m: Icms, i, s) -> Assignment:
    """``e^P``: the unit shape at every position of ``s``."""
    return Assignment({(j, p): m.e(j) for j, p in C.position_keys(i, s)})


def const_family(C: IndexedContainer, m: Icms, i, s) -> Assignment:
    """``s-bar``: ``s`` at every position of the unit shape ``e(i)``."""
    return Assignment({key: s for key in C.position_keys(i, m.e(i))})


def bullet_p(m: Icms, s1: Mapping, s2: Mapping) -> Assignment:
    """``(s1 •^P s2)(k, q) = s1[(k, q)] • s2[(k, q)]``."""
    return Assignment({(k, q): m.bullet(k, t, s2[(k, q)]) for (k, q), t in s1.items()})


def smoosh(C: IndexedContainer, m: Icms, i, s, s1: Mapping, s2: Mapping) -> Assignment:
    """The family over positions of ``s • s1`` reading ``s2`` through ``up/ul/ur``."""
    out = {}
    for l, r in C.position_keys(i, m.bullet(i, s, s1)):
        a = m.up(i, s, s1, l, r)
        b = m.ul(i, s, s1, l, r)
        c = m.ur(i, s, s1, l, r)
        out[(l, r)] = s2[(a, b)][(l, c)]
    return Assignment(out)


# -- reports ----------------------------------------------------------------------


@dataclasses.dataclass
class Verdict:
    """Outcome of one law: ``pass``, ``bounded-pass`` or ``fail``.

    ``checked`` counts instances evaluated out of ``domain``; a failure
    always carries the first failing instance in enumeration order.
    """

    law: str
    status: str = "pass"
    checked: int = 0
    domain: int = 0
    witness: tuple | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "status": self.status,
            "checked": self.checked,
            "domain": self.domain,
            "witness": None if self.witness is None else [_jsonable(w) for w in self.witness],
            "detail": self.detail,
        }


@dataclasses.dataclass
class LawReport:
    verdicts: dict[str, Verdict]
    exhaustive: bool = True
    budget: int | None = None

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts.values())

    def failing(self) -> list[str]:
        return [name for name, v in self.verdicts.items() if not v.ok]

    def __getitem__(self, law: str) -> Verdict:
        return self.verdicts[law]

    def lines(self) -> list[str]:
        out = []
        for name, v in self.verdicts.items():
            word = {"pass": "PASS", "bounded-pass": "PASS (bounded)", "fail": "FAIL"}[v.status]
            line = f"{name} {word}"
            if v.status == "fail":
                line += f" witness={_show(v.witness)}"
                if v.detail:
                    line += f" ({v.detail})"
            out.append(line)
        return out

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "exhaustive": self.exhaustive,
            "budget": self.budget,
            "laws": [v.to_json() for v in self.verdicts.values()],
        }


IcmsMorphismReport = LawReport


def _jsonable(x):
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, ExtentElem):
        return {"index": _jsonable(x.index), "shape": _jsonable(x.shape), "assign": _jsonable(x.assign)}
    if isinstance(x, Assignment):
        return [[_jsonable(k), _jsonable(v)] for k, v in x.canon_items()]
    return repr(x)


def _show(w) -> str:
    return repr(w)


class _Recorder:
    def __init__(self, names, domain_sizes: dict, exhaustive: bool):
        self.v = {n: Verdict(n, domain=domain_sizes.get(n, 0)) for n in names}
        self.exhaustive = exhaustive
        self.failed = False

    def record(self, law: str, ok: bool, witness: tuple, detail: str | Callable[[], str] = ""):
        """``detail`` may be a thunk; it is only evaluated for the reported failure."""
        v = self.v[law]
        v.checked += 1
        if not ok and v.witness is None:
            self.failed = True
            v.status = "fail"
            v.witness = witness
            v.detail = detail() if callable(detail) else detail

    def finish(self, bounded: dict[str, bool], seen: dict[str, int] | None = None) -> dict[str, Verdict]:
        for n, v in self.v.items():
            if seen and n in seen:
                v.checked = seen[n]
            if v.status != "fail" and bounded.get(n, False):
                v.status = "bounded-pass"
        return self.v


# -- domains ----------------------------------------------------------------------


def assoc_domain(C: IndexedContainer) -> LazyFamily:
    """Triples ``(s, s1, s2)`` packed as shapes of ``C (x) (C (x) C)``."""
    return ExtentFamily(C, ExtentFamily(C, C.shape_family))


def _iter_domain(fam: LazyFamily, i, budget: int | None, seed) -> tuple[Iterator, int, bool]:
    n = fam.count(i)
    if budget is None or n <= budget:
        return fam.elements(i), n, True
    rng = random.Random(f"{seed}:{i!r}")
    ranks = sample_ranks(n, budget, rng)
    return (fam.unrank(i, r) for r in ranks), n, False


def unpack_triple(elem: ExtentElem) -> tuple[Any, Assignment, Assignment]:
    s1 = Assignment({k: v.shape for k, v in elem.assign.items()})
    s2 = Assignment({k: v.assign for k, v in elem.assign.items()})
    return elem.shape, s1, s2


# -- checks -----------------------------------------------------------------------


def check_pe_eq(C: IndexedContainer, m: Icms) -> LawReport:
    """Unit shapes have no positions ``i -> j`` with ``i != j``."""
    v = Verdict("Pe≡", domain=len(C.index_set) ** 2)
    for i in C.index_set:
        try:
            e = m.e(i)
            typed = C.has_shape(i, e)
        except _EVAL_ERRORS as exc:
            e, typed = None, False
            v.detail = f"e({i!r}) raised {exc!r}"
        if not typed:
            if v.witness is None:
                v.status, v.witness = "fail", (i, e)
                v.detail = v.detail or f"e({i!r}) is not a shape at {i!r}"
            continue
        for j in C.index_set:
            v.checked += 1
            if j != i and C.positions(i, e, j) and v.witness is None:
                v.status = "fail"
                v.witness = (i, e, j, C.positions(i, e, j)[0])
                v.detail = "unit shape has a position pointing at another index"
    if v.status == "pass" and C.bounded:
        v.status = "bounded-pass"
    return LawReport({"Pe≡": v}, exhaustive=not C.bounded)


def pair_domain(C: IndexedContainer) -> LazyFamily:
    """Pairs ``(s, s1)``; a container may supply its own as ``law_pairs``."""
    return getattr(C, "law_pairs", None) or ExtentFamily(C, C.shape_family)


def triple_domain(C: IndexedContainer) -> LazyFamily:
    """Triples ``(s, s1, s2)``; a container may supply its own as ``law_triples``."""
    return getattr(C, "law_triples", None) or assoc_domain(C)


def check_typing(
    C: IndexedContainer, m: Icms, budget: int | None = DEFAULT_BUDGET, seed: int = 0
) -> Verdict:
    """Every component lands in the set its type demands."""
    v = Verdict("typing")
    exhaustive = True
    fam = pair_domain(C)
    for i in C.index_set:
        it, n, full = _iter_domain(fam, i, budget, seed)
        v.domain += n
        exhaustive &= full
        for elem in it:
            s, s1 = elem.shape, elem.assign
            v.checked += 1
            problem = _typing_problem(C, m, i, s, s1)
            if problem is not None and v.witness is None:
                v.status, v.witness, v.detail = "fail", problem[0], problem[1]
    if v.status == "pass" and (not exhaustive or C.bounded):
        v.status = "bounded-pass"
    return v


def _typing_problem(C, m, i, s, s1):
    try:
        t = m.bullet(i, s, s1)
        if not C.has_shape(i, t):
            return (i, s, s1), f"bullet gives {t!r}, not a shape at {i!r}"
        for j, p in C.position_keys(i, t):
            a = m.up(i, s, s1, j, p)
            if a not in C.index_set:
                return (i, s, s1, j, p), f"up gives unknown index {a!r}"
            b = m.ul(i, s, s1, j, p)
            if b not in C.positions(i, s, a):
                return (i, s, s1, j, p), f"ul gives {b!r}, not a position of s at {a!r}"
            c = m.ur(i, s, s1, j, p)
            if c not in C.positions(a, s1[(a, b)], j):
                return (i, s, s1, j, p), f"ur gives {c!r}, not a position of s1(ul p) at {j!r}"
    except _EVAL_ERRORS as exc:
        return (i, s, s1), f"evaluation raised {exc!r}"
    return None


def _keys(C: IndexedContainer, i, t) -> tuple:
    """Position keys of a computed shape, refusing shapes not at ``i``."""
    if not C.has_shape(i, t):
        raise ValueError(f"{t!r} is not a shape at {i!r}")
    return C.position_keys(i, t)


def _unit_laws(C, m, i, s, rec: _Recorder):
    try:
        eP = e_family(C, m, i, s)
        t = m.bullet(i, s, eP)
    except _EVAL_ERRORS as exc:
        rec.record("e-unit-l", False, (i, s), f"raised {exc!r}")
        rec.record("↖-unit-l", False, (i, s), f"raised {exc!r}")
    else:
        rec.record("e-unit-l", t == s, (i, s), lambda: f"s • e^P = {t!r}")
        try:
            keys = _keys(C, i, t)
        except _EVAL_ERRORS as exc:
            keys = ()
            rec.record("↖-unit-l", False, (i, s), f"raised {exc!r}")
        for j, p in keys:
            try:
                got = (m.up(i, s, eP, j, p), m.ul(i, s, eP, j, p))
                ok = got == (j, p)
            except _EVAL_ERRORS as exc:
                got, ok = repr(exc), False
            rec.record("↖-unit-l", ok, (i, s, j, p), lambda: f"(up, ul) = {got!r}")
    try:
        e = m.e(i)
        sbar = const_family(C, m, i, s)
        t = m.bullet(i, e, sbar)
        keys = _keys(C, i, t)
    except _EVAL_ERRORS as exc:
        rec.record("e-unit-r", False, (i, s), f"raised {exc!r}")
        rec.record("↗-unit-r", False, (i, s), f"raised {exc!r}")
        return
    rec.record("e-unit-r", t == s, (i, s), lambda: f"e • s-bar = {t!r}")
    for j, p in keys:
        try:
            got = (m.up(i, e, sbar, j, p), m.ur(i, e, sbar, j, p))
            ok = got == (i, p)
        except _EVAL_ERRORS as exc:
            got, ok = repr(exc), False
        rec.record("↗-unit-r", ok, (i, s, j, p), lambda: f"(up, ur) = {got!r}")


_ASSOC_POSITION_LAWS = LAW_NAMES[5:]


def _assoc_laws(C, m, i, s, s1, s2, rec: _Recorder):
    w = (i, s, s1, s2)
    try:
        left = m.bullet(i, s, s1)
        sm = smoosh(C, m, i, s, s1, s2)
        lhs = m.bullet(i, left, sm)
        bp = bullet_p(m, s1, s2)
        rhs = m.bullet(i, s, bp)
        keys = _keys(C, i, lhs)
    except _EVAL_ERRORS as exc:
        for law in ("•-assoc",) + _ASSOC_POSITION_LAWS:
            rec.record(law, False, w, f"raised {exc!r}")
        return
    rec.record("•-assoc", lhs == rhs, w, lambda: f"{lhs!r} != {rhs!r}")
    for j, p in keys:
        wp = w + (j, p)
        try:
            u1 = m.up(i, left, sm, j, p)
            l1 = m.ul(i, left, sm, j, p)
            r1 = m.ur(i, left, sm, j, p)
            a = m.up(i, s, bp, j, p)
            b = m.ul(i, s, bp, j, p)
            c = m.ur(i, s, bp, j, p)
            t1, t2 = s1[(a, b)], s2[(a, b)]
            u2 = m.up(a, t1, t2, j, c)
            l2 = m.ul(a, t1, t2, j, c)
            r2 = m.ur(a, t1, t2, j, c)
            uu = m.up(i, s, s1, u1, l1)
            ll = m.ul(i, s, s1, u1, l1)
            rr = m.ur(i, s, s1, u1, l1)
        except _EVAL_ERRORS as exc:
            for law in _ASSOC_POSITION_LAWS:
                rec.record(law, False, wp, f"raised {exc!r}")
            continue
        rec.record("↑-↗↑-assoc", u1 == u2, wp, lambda: f"{u1!r} != {u2!r}")
        rec.record("↖↑-↑-assoc", uu == a, wp, lambda: f"{uu!r} != {a!r}")
        rec.record("↖↖-↖-assoc", (uu, ll) == (a, b), wp, lambda: f"{(uu, ll)!r} != {(a, b)!r}")
        rec.record("↖↗-↗↖-assoc", (uu, u1, rr) == (a, u2, l2), wp, lambda: f"{(uu, u1, rr)!r} != {(a, u2, l2)!r}")
        rec.record("↗-↗↗-assoc", (u1, r1) == (u2, r2), wp, lambda: f"{(u1, r1)!r} != {(u2, r2)!r}")


def check_icms(
    C: IndexedContainer,
    m: Icms,
    budget: int | None = DEFAULT_BUDGET,
    seed: int = 0,
    domain: LazyFamily | None = None,
    typing: bool = True,
    fail_fast: bool = False,
) -> LawReport:
    """Check the ten equations, each as a plain equality of keyed values.

    Unit laws range over every shape; associativity laws over every triple
    ``(s, s1, s2)`` from ``domain`` (default :func:`triple_domain`).  When a
    fibre has more than ``budget`` elements a seeded uniform sample of
    ``budget`` of them is checked and passing laws are reported as
    ``bounded-pass``.  The first failure in enumeration order is reported.
    Component typing and the unit-position condition appear as the extra
    entries ``typing`` and ``Pe≡``.  With ``fail_fast`` checking stops at
    the first failure; the remaining counts are then partial.
    """
    domain = triple_domain(C) if domain is None else domain
    rec = _Recorder(LAW_NAMES, {}, True)
    unit_full = True
    assoc_full = True
    n_unit = n_assoc = 0
    for i in C.index_set:
        it, n, full = _iter_domain(C.shape_family, i, budget, seed)
        unit_full &= full
        for law in LAW_NAMES[:4]:
            rec.v[law].domain += n
        for s in it:
            if fail_fast and rec.failed:
                break
            n_unit += 1
            _unit_laws(C, m, i, s, rec)
        it, n, full = _iter_domain(domain, i, budget, seed)
        assoc_full &= full
        for law in LAW_NAMES[4:]:
            rec.v[law].domain += n
        for elem in it:
            if fail_fast and rec.failed:
                break
            n_assoc += 1
            _assoc_laws(C, m, i, *unpack_triple(elem), rec)
    bounded = {law: C.bounded or not unit_full for law in LAW_NAMES[:4]}
    bounded.update({law: C.bounded or not assoc_full for law in LAW_NAMES[4:]})
    seen = {law: n_unit for law in LAW_NAMES[:4]}
    seen.update({law: n_assoc for law in LAW_NAMES[4:]})
    verdicts = rec.finish(bounded, seen)
    pe = check_pe_eq(C, m).verdicts["Pe≡"]
    verdicts["Pe≡"] = pe
    if typing:
        verdicts["typing"] = check_typing(C, m, budget, seed)
    exhaustive = unit_full and assoc_full and not C.bounded
    return LawReport(verdicts, exhaustive=exhaustive, budget=budget)


# -- the equivalence with monoids -----------------------------------------------------


def icms_to_monoid(
    C: IndexedContainer, m: Icms, check: bool = True, budget: int | None = DEFAULT_BUDGET
) -> tuple[ContainerMorphism, ContainerMorphism]:
    """``(eta, mu)``: ``eta * = (e, refl)`` and ``mu (s, s1) = (s • s1, (up, ul, ur))``."""
    if check:
        report = check_icms(C, m, budget)
        if not report.ok:
            raise InvalidIcms(f"structure fails {report.failing()}", report)
    unit = unit_container(C.index_set)

    def eta_pi(i, star, j, p):
        if i != j:
            raise ValueError(f"unit shape at {i!r} has a position towards {j!r}")
        return REFL

    eta = ContainerMorphism(unit, C, lambda i, star: m.e(i), eta_pi, name=f"eta[{m.name}]")

    def mu_sigma(i, e):
        return m.bullet(i, e.shape, e.assign)

    def mu_pi(i, e, k, p):
        s, s1 = e.shape, e.assign
        return (m.up(i, s, s1, k, p), m.ul(i, s, s1, k, p), m.ur(i, s, s1, k, p))

    mu = ContainerMorphism(tensor(C, C), C, mu_sigma, mu_pi, name=f"mu[{m.name}]")
    return eta, mu


def check_monoid(
    C: IndexedContainer,
    eta: ContainerMorphism,
    mu: ContainerMorphism,
    budget: int | None = DEFAULT_BUDGET,
    seed: int = 0,
) -> dict[str, tuple | None]:
    """Witness (or ``None``) for each of the three monoid diagrams."""
    ident = morphism_id(C)
    left = morphism_compose(tensor_morphism(eta, ident), mu)
    right = morphism_compose(tensor_morphism(ident, eta), mu)
    assoc_l = morphism_compose(tensor_morphism(mu, ident), mu)
    assoc_r = morphism_compose(
        morphism_compose(associator(C, C, C), tensor_morphism(ident, mu)), mu
    )
    out = {}
    for name, f, g in (
        ("unit-left", left, unitor_l(C)),
        ("unit-right", right, unitor_r(C)),
        ("associativity", assoc_l, assoc_r),
    ):
        try:
            out[name] = morphism_equal(f, g, budget, seed)
        except _EVAL_ERRORS as exc:
            out[name] = ("raised", repr(exc))
    return out


def monoid_to_icms(
    C: IndexedContainer,
    eta: ContainerMorphism,
    mu: ContainerMorphism,
    check: bool = True,
    budget: int | None = DEFAULT_BUDGET,
) -> Icms:
    """Read an :class:`Icms` off a unit/multiplication pair."""
    if check:
        for name, w in check_monoid(C, eta, mu, budget).items():
            if w is not None:
                raise NotAMonoid(f"the {name} diagram does not commute", (name,) + tuple(w))

    def e(i):
        return eta.sigma(i, STAR)

    def bullet(i, s, s1):
        return mu.sigma(i, ExtentElem(i, s, s1))

    def part(k):
        def f(i, s, s1, j, p):
            return mu.pi(i, ExtentElem(i, s, s1), j, p)[k]

        return f

    return Icms(e, bullet, part(0), part(1), part(2), name=f"from[{mu.name}]")


# -- tables -------------------------------------------------------------------------


@dataclasses.dataclass
class IcmsTables:
    """An :class:`Icms` as finite lookup tables.

    ``bullet`` is keyed by ``(i, s, s1)``; ``up``/``ul``/``ur`` by
    ``(i, s, s1, j, p)``.
    """

    e: dict
    bullet: dict
    up: dict
    ul: dict
    ur: dict

    def to_icms(self, name: str = "tables") -> Icms:
        e, bt, up, ul, ur = self.e, self.bullet, self.up, self.ul, self.ur
        return Icms(
            lambda i: e[i],
            lambda i, s, s1: bt[(i, s, s1)],
            lambda i, s, s1, j, p: up[(i, s, s1, j, p)],
            lambda i, s, s1, j, p: ul[(i, s, s1, j, p)],
            lambda i, s, s1, j, p: ur[(i, s, s1, j, p)],
            name=name,
        )

    def copy(self) -> IcmsTables:
        return IcmsTables(*(dict(getattr(self, f)) for f in ("e", "bullet", "up", "ul", "ur")))


def tabulate_icms(
    C: IndexedContainer, m: Icms, budget: int | None = None, seed: int = 0
) -> IcmsTables:
    """Evaluate ``m`` on every pair ``(s, s1)`` (or a seeded sample of them)."""
    tabs = IcmsTables({}, {}, {}, {}, {})
    pairs = pair_domain(C)
    for i in C.index_set:
        tabs.e[i] = m.e(i)
        it, _, _ = _iter_domain(pairs, i, budget, seed)
        for elem in it:
            s, s1 = elem.shape, elem.assign
            t = m.bullet(i, s, s1)
            tabs.bullet[(i, s, s1)] = t
            for j, p in C.position_keys(i, t):
                key = (i, s, s1, j, p)
                tabs.up[key] = m.up(*key)
                tabs.ul[key] = m.ul(*key)
                tabs.ur[key] = m.ur(*key)
    return tabs


def icms_equal(
    C: IndexedContainer, m1: Icms, m2: Icms, budget: int | None = DEFAULT_BUDGET, seed: int = 0
) -> tuple | None:
    """First disagreement between two structures on ``C``, or ``None``."""
    for i in C.index_set:
        if m1.e(i) != m2.e(i):
            return ("e", i, m1.e(i), m2.e(i))
    pairs = pair_domain(C)
    for i in C.index_set:
        it, _, _ = _iter_domain(pairs, i, budget, seed)
        for elem in it:
            s, s1 = elem.shape, elem.assign
            t1, t2 = m1.bullet(i, s, s1), m2.bullet(i, s, s1)
            if t1 != t2:
                return ("bullet", i, s, s1, t1, t2)
            for j, p in C.position_keys(i, t1):
                for name in ("up", "ul", "ur"):
                    a = getattr(m1, name)(i, s, s1, j, p)
                    b = getattr(m2, name)(i, s, s1, j, p)
                    if a != b:
                        return (name, i, s, s1, j, p, a, b)
    return None


def enumerate_icms(C: IndexedContainer, cap: int | None = DEFAULT_ENUM_CAP) -> Iterator[IcmsTables]:
    """Every well-typed table structure on a tabulated ``C``, lawful or not.

    Each position ``p`` of ``s • s1`` towards ``j`` gets a triple
    ``(up, ul, ur)`` with ``ul`` a position of ``s`` at ``up`` and ``ur`` a
    position of ``s1(up, ul)`` at ``j``.  Raises :class:`BudgetExceeded`
    when there are more than ``cap`` candidates.
    """
    I = C.index_set
    pairs = [(i, e.shape, e.assign) for i in I for e in pair_domain(C).elements(i)]

    def triples(i, s, s1, j):
        return [
            (k, b, c)
            for k, b in C.position_keys(i, s)
            for c in C.positions(k, s1[(k, b)], j)
        ]

    def position_choices(results):
        per = []
        for (i, s, s1), t in zip(pairs, results):
            for j, p in C.position_keys(i, t):
                per.append(((i, s, s1, j, p), triples(i, s, s1, j)))
        return per

    e_choices = list(itertools.product(*(C.shapes(i) for i in I)))
    b_choices = list(itertools.product(*(C.shapes(i) for i, _, _ in pairs)))
    if cap is not None:
        total = 0
        for results in b_choices:
            total += math.prod(len(c) for _, c in position_choices(results))
            if total * len(e_choices) > cap:
                raise BudgetExceeded(f"more than {cap} candidate structures")
    for es in e_choices:
        for results in b_choices:
            per = position_choices(results)
            for picks in itertools.product(*(c for _, c in per)):
                tabs = IcmsTables(dict(zip(I, es)), {}, {}, {}, {})
                for key, t in zip(pairs, results):
                    tabs.bullet[key] = t
                for (key, _), (k, b, c) in zip(per, picks):
                    tabs.up[key], tabs.ul[key], tabs.ur[key] = k, b, c
                yield tabs


# -- morphisms of structures ---------------------------------------------------------


def check_icms_morphism(
    f: ContainerMorphism,
    mA: Icms,
    mB: Icms,
    budget: int | None = DEFAULT_BUDGET,
    seed: int = 0,
) -> IcmsMorphismReport:
    """The six equations making ``f`` a morphism of structures.

    ``hom-Pe≡`` holds by construction here (positions of unit shapes carry
    their target index), so it is reported as passing without evaluation.
    """
    A, B = f.src, f.dst
    rec = _Recorder(HOM_LAW_NAMES, {}, True)
    for i in A.index_set:
        rec.v["hom-e"].domain += 1
        try:
            got = f.sigma(i, mA.e(i))
            rec.record("hom-e", got == mB.e(i), (i,), lambda: f"sigma(e) = {got!r}")
        except _EVAL_ERRORS as exc:
            rec.record("hom-e", False, (i,), f"raised {exc!r}")
    full = True
    n_pairs = 0
    pairs = pair_domain(A)
    for i in A.index_set:
        it, n, ok = _iter_domain(pairs, i, budget, seed)
        full &= ok
        for law in HOM_LAW_NAMES[1:]:
            rec.v[law].domain += n
        for elem in it:
            n_pairs += 1
            s, v = elem.shape, elem.assign
            _hom_instance(A, B, f, mA, mB, i, s, v, rec)
    bounded = {n: A.bounded or not full for n in HOM_LAW_NAMES}
    bounded["hom-e"] = A.bounded
    seen = {law: n_pairs for law in HOM_LAW_NAMES[1:]}
    seen["hom-e"] = len(A.index_set)
    verdicts = rec.finish(bounded, seen)
    verdicts["hom-Pe≡"].detail = "holds by construction"
    return LawReport(verdicts, exhaustive=full and not A.bounded, budget=budget)


def _hom_instance(A, B, f, mA, mB, i, s, v, rec):
    w = (i, s, v)
    try:
        sv = mA.bullet(i, s, v)
        fs = f.sigma(i, s)
        v2 = Assignment(
            {(j, q): f.sigma(j, v[(j, f.pi(i, s, j, q))]) for j, q in B.position_keys(i, fs)}
        )
        lhs = mB.bullet(i, fs, v2)
        rhs = f.sigma(i, sv)
        keys = _keys(B, i, rhs)
    except _EVAL_ERRORS as exc:
        for law in HOM_LAW_NAMES[2:]:
            rec.record(law, False, w, f"raised {exc!r}")
        return
    rec.record("hom-•", lhs == rhs, w, lambda: f"{lhs!r} != {rhs!r}")
    for j, p in keys:
        wp = w + (j, p)
        try:
            pp = f.pi(i, sv, j, p)
            a2 = mB.up(i, fs, v2, j, p)
            b2 = mB.ul(i, fs, v2, j, p)
            c2 = mB.ur(i, fs, v2, j, p)
            a = mA.up(i, s, v, j, pp)
            b = mA.ul(i, s, v, j, pp)
            c = mA.ur(i, s, v, j, pp)
            back_b = f.pi(i, s, a2, b2)
            inner = v[(a2, back_b)]
            back_c = f.pi(a2, inner, j, c2)
        except _EVAL_ERRORS as exc:
            for law in HOM_LAW_NAMES[3:]:
                rec.record(law, False, wp, f"raised {exc!r}")
            continue
        rec.record("hom-↑", a2 == a, wp, lambda: f"{a2!r} != {a!r}")
        rec.record("hom-↖", (a2, back_b) == (a, b), wp, lambda: f"{(a2, back_b)!r} != {(a, b)!r}")
        rec.record("hom-↗", (a2, back_c) == (a, c), wp, lambda: f"{(a2, back_c)!r} != {(a, c)!r}")


def least_witness(witnesses) -> Any:
    """Canonically least of several witnesses (used when merging partial reports)."""
    ws = [w for w in witnesses if w is not None]
    return min(ws, key=canon_key) if ws else None


# -- mutations --------------------------------------------------------------------------

FIELDS = ("e", "bullet", "up", "ul", "ur")


def override(m: Icms, field: str, key, value) -> Icms:
    """``m`` with one table entry replaced.

    ``key`` is ``i`` for ``e``, ``(i, s, s1)`` for ``bullet`` and
    ``(i, s, s1, j, p)`` for the position maps.
    """
    old = getattr(m, field)
    if field == "e":

        def new(i):
            return value if i == key else old(i)

    else:

        def new(*args):
            return value if args == key else old(*args)

    return dataclasses.replace(m, **{field: new}, name=f"{m.name}[{field}@{key!r}]")


@dataclasses.dataclass(frozen=True)
class Mutation:
    field: str
    key: Any
    old: Any
    new: Any
    icms: Icms


def single_mutations(
    C: IndexedContainer, m: Icms, count: int = 20, seed: int = 0, budget: int | None = 500
) -> list[Mutation]:
    """``count`` distinct single-entry mutations, cycling through the fields.

    Replacement values are drawn from values of the right kind (shapes at
    the same index, indices, position labels occurring in ``C``); when a
    field admits no other value a fresh label is used, which can only be
    caught by the typing check.
    """
    rng = random.Random(seed)
    tabs = tabulate_icms(C, m, budget=budget, seed=seed)
    labels = canon_sorted_values(list(tabs.ul.values()) + list(tabs.ur.values()))
    indices = list(C.index_set)
    sites = {
        "e": [(i, tabs.e[i]) for i in C.index_set],
        "bullet": list(tabs.bullet.items()),
        "up": list(tabs.up.items()),
        "ul": list(tabs.ul.items()),
        "ur": list(tabs.ur.items()),
    }

    def pool(field, key):
        if field == "e":
            return list(C.shapes(key))[:50]
        if field == "bullet":
            return list(C.shapes(key[0]))[:50]
        if field == "up":
            return indices
        return labels

    out: list[Mutation] = []
    used = set()
    fields = [f for f in FIELDS if sites[f]]
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        field = fields[attempts % len(fields)]
        attempts += 1
        key, old = rng.choice(sites[field])
        if (field, key) in used:
            continue
        options = [v for v in pool(field, key) if v != old]
        new = rng.choice(options) if options else ("junk", len(out))
        used.add((field, key))
        out.append(Mutation(field, key, old, new, override(m, field, key, new)))
    return out


def canon_sorted_values(xs: list) -> list:
    seen: dict = {}
    for x in xs:
        seen.setdefault(canon_key(x), x)
    return [seen[k] for k in sorted(seen)]

"""Well-scoped de Bruijn lambda terms.

A term at scope ``n`` is the shape of the free container over the lambda
signature together with a variable index at each leaf.  ``substitute`` is
computed with that container's grafting operation; ``oracle_substitute`` is
a separate textbook implementation used to check it.

Concrete syntax::

    term := lam | app
    lam  := "\\" "." term
    app  := atom+            (left associative)
    atom := NUMBER | "(" term ")"
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
from collections.abc import Iterator, Mapping, Sequence

from .container import ExtentElem
from .examples import APP, LAM, LEAF, Leaf, Node, lambda_container
from .kernel import Assignment, BudgetExceeded
from .monoidal import REFL

DEFAULT_WINDOW = 8


class ParseError(SyntaxError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.byte_offset = offset


class ScopeError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        where = "" if offset is None else f" at byte {offset}"
        super().__init__(message + where)
        self.byte_offset = offset


class FuelExhausted(RuntimeError):
    def __init__(self, term: Term):
        super().__init__("no normal form reached before fuel ran out")
        self.term = term


@dataclasses.dataclass(frozen=True)
class Var:
    index: int


@dataclasses.dataclass(frozen=True)
class App:
    fun: Term
    arg: Term


@dataclasses.dataclass(frozen=True)
class Lam:
    body: Term


Term = Var | App | Lam


def well_scoped(t: Term, n: int) -> bool:
    if isinstance(t, Var):
        return 0 <= t.index < n
    if isinstance(t, App):
        return well_scoped(t.fun, n) and well_scoped(t.arg, n)
    return well_scoped(t.body, n + 1)


def size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, App):
        return 1 + size(t.fun) + size(t.arg)
    return 1 + size(t.body)


def binder_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    if isinstance(t, App):
        return max(binder_depth(t.fun), binder_depth(t.arg))
    return 1 + binder_depth(t.body)


# -- syntax ------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, scope: int):
        self.text = text
        self.pos = 0
        self.scope = scope

    def offset(self, pos: int | None = None) -> int:
        return len(self.text[: self.pos if pos is None else pos].encode("utf-8"))

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise ParseError(f"expected {ch!r}, found {got!r}", self.offset())
        self.pos += 1

    def term(self, n: int) -> Term:
        if self.peek() == "\\":
            self.pos += 1
            self.expect(".")
            return Lam(self.term(n + 1))
        return self.app(n)

    def app(self, n: int) -> Term:
        t = self.atom(n)
        while self.peek() and (self.peek().isdigit() or self.peek() == "("):
            t = App(t, self.atom(n))
        return t

    def atom(self, n: int) -> Term:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            t = self.term(n)
            self.expect(")")
            return t
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            k = int(self.text[start : self.pos])
            if k >= n:
                raise ScopeError(f"variable {k} is not bound at scope {n}", self.offset(start))
            return Var(k)
        raise ParseError(f"unexpected {ch or 'end of input'!r}", self.offset())


def parse_term(text: str, scope: int = 0) -> Term:
    p = _Parser(text, scope)
    t = p.term(scope)
    if p.peek():
        raise ParseError(f"unexpected {p.peek()!r}", p.offset())
    return t


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return str(t.index)
    if isinstance(t, Lam):
        return "\\. " + print_term(t.body)
    head = print_term(t.fun)
    if isinstance(t.fun, Lam):
        head = f"({head})"
    arg = print_term(t.arg)
    if not isinstance(t.arg, Var):
        arg = f"({arg})"
    return f"{head} {arg}"


# -- terms as extent elements of the free container -------------------------------------


def term_positions(t: Term, n: int) -> dict[int, list[tuple]]:
    """Paths to variable leaves grouped by the scope the leaf sits in."""
    out: dict[int, list[tuple]] = {}

    def walk(u, m, path):
        if isinstance(u, Var):
            out.setdefault(m, []).append(path)
        elif isinstance(u, App):
            walk(u.fun, m, path + ((m, False),))
            walk(u.arg, m, path + ((m, True),))
        else:
            walk(u.body, m + 1, path + ((m + 1, REFL),))

    walk(t, n, ())
    return out


def to_extent(t: Term, n: int, window: int = DEFAULT_WINDOW) -> ExtentElem:
    """The shape tree of ``t`` at index ``n`` with the de Bruijn index at each leaf."""
    values = {}

    def build(u, m, path):
        if m > window:
            raise BudgetExceeded(f"scope {m} leaves the window 0..{window}")
        if isinstance(u, Var):
            values[(m, path)] = u.index
            return LEAF
        if isinstance(u, App):
            kf, ka = (m, False), (m, True)
            kids = {kf: build(u.fun, m, path + (kf,)), ka: build(u.arg, m, path + (ka,))}
            return Node(APP, Assignment(kids))
        if m + 1 > window:
            raise BudgetExceeded(f"a binder at scope {m} leaves the window 0..{window}")
        kb = (m + 1, REFL)
        return Node(LAM, Assignment({kb: build(u.body, m + 1, path + (kb,))}))

    tree = build(t, n, ())
    return ExtentElem(n, tree, Assignment(values))


def from_extent(elem: ExtentElem) -> Term:
    def read(tree, m, path):
        if isinstance(tree, Leaf):
            return Var(elem.assign[(m, path)])
        if tree.shape == APP:
            kf, ka = (m, False), (m, True)
            return App(read(tree.kids[kf], m, path + (kf,)), read(tree.kids[ka], m, path + (ka,)))
        kb = (m + 1, REFL)
        return Lam(read(tree.kids[kb], m + 1, path + (kb,)))

    return read(elem.shape, elem.index, ())


def rescope_tree(tree, n: int, m: int):
    """The same tree rooted at index ``m`` instead of ``n``."""
    if isinstance(tree, Leaf):
        return tree
    d = m - n
    kids = {(j + d, q): rescope_tree(kid, j, j + d) for (j, q), kid in tree.kids.items()}
    return Node(tree.shape, Assignment(kids))


# -- substitution -----------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Subst:
    """Variables ``0 .. src-1`` to terms at scope ``tgt``."""

    src: int
    tgt: int
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != self.src:
            raise ValueError(f"substitution needs {self.src} images, got {len(self.images)}")
        for k, u in enumerate(self.images):
            if not well_scoped(u, self.tgt):
                raise ScopeError(f"image of {k} is not well scoped at {self.tgt}")

    def __call__(self, k: int) -> Term:
        return self.images[k]

    @classmethod
    def identity(cls, n: int) -> Subst:
        return cls(n, n, tuple(Var(k) for k in range(n)))

    @classmethod
    def from_mapping(cls, src: int, tgt: int, mapping: Mapping[int, Term]) -> Subst:
        """Unlisted variables go to themselves (requires ``k < tgt``)."""
        return cls(src, tgt, tuple(mapping.get(k, Var(k)) for k in range(src)))


def _window_for(t: Term, n: int, sigma: Subst) -> int:
    inner = max((binder_depth(u) for u in sigma.images), default=0)
    return max(DEFAULT_WINDOW, n + binder_depth(t), sigma.tgt + binder_depth(t) + inner)


def substitute(t: Term, sigma: Subst, window: int | None = None) -> Term:
    """``t[sigma]`` computed by grafting in the free container.

    The tree of ``t`` is re-rooted at the target scope; a leaf under ``d``
    binders holding a free variable ``d + k`` receives the tree of
    ``sigma(k)`` and its free variables are shifted by ``d``.  Bound leaves
    receive the unit shape and keep their index.
    """
    n, m = sigma.src, sigma.tgt
    if window is None:
        window = _window_for(t, n, sigma)
    C, icms = _free(window)
    outer = to_extent(t, n, window)
    tree = rescope_tree(outer.shape, n, m)
    images = [to_extent(u, m, window) for u in sigma.images]

    inner_shapes = {}
    for (j, path), k in outer.assign.items():
        d = j - n
        key = (j + m - n, _shift_path(path, m - n))
        if k < d:
            inner_shapes[key] = LEAF
        else:
            inner_shapes[key] = rescope_tree(images[k - d].shape, m, m + d)
    s1 = Assignment(inner_shapes)
    result = icms.bullet(m, tree, s1)

    values = {}
    for leaf_scope, rpath in C.position_keys(m, result):
        a = icms.up(m, tree, s1, leaf_scope, rpath)
        b = icms.ul(m, tree, s1, leaf_scope, rpath)
        c = icms.ur(m, tree, s1, leaf_scope, rpath)
        d = a - m
        k = outer.assign[(a - m + n, _shift_path(b, n - m))]
        if k < d:
            values[(leaf_scope, rpath)] = k
            continue
        img = images[k - d]
        local = leaf_scope - a
        v = img.assign[(m + local, _shift_path(c, -d))]
        values[(leaf_scope, rpath)] = v if v < local else v + d
    return from_extent(ExtentElem(m, result, Assignment(values)))


def _shift_path(path: tuple, d: int) -> tuple:
    return tuple((j + d, q) for j, q in path)


@functools.lru_cache(maxsize=8)
def _free(window: int):
    return lambda_container(window, 1)


def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    """Add ``d`` to every variable ``>= cutoff``."""
    if isinstance(t, Var):
        return Var(t.index + d) if t.index >= cutoff else t
    if isinstance(t, App):
        return App(shift(t.fun, d, cutoff), shift(t.arg, d, cutoff))
    return Lam(shift(t.body, d, cutoff + 1))


def oracle_substitute(t: Term, sigma: Subst) -> Term:
    """Textbook substitution: traverse, lifting images under each binder."""

    def go(u, depth):
        if isinstance(u, Var):
            if u.index < depth:
                return u
            return _oracle_shift(sigma.images[u.index - depth], depth, 0)
        if isinstance(u, App):
            return App(go(u.fun, depth), go(u.arg, depth))
        return Lam(go(u.body, depth + 1))

    return go(t, 0)


def _oracle_shift(u, d, c):
    match u:
        case Var(k):
            return Var(k + d if k >= c else k)
        case App(f, a):
            return App(_oracle_shift(f, d, c), _oracle_shift(a, d, c))
        case Lam(b):
            return Lam(_oracle_shift(b, d, c + 1))


def compose_subst(sigma: Subst, tau: Subst, sub=substitute) -> Subst:
    """``k |-> sigma(k)[tau]``."""
    return Subst(sigma.src, tau.tgt, tuple(sub(u, tau) for u in sigma.images))


# -- normalization ----------------------------------------------------------------------


def beta_subst(n: int, arg: Term) -> Subst:
    """``0 |-> arg``, ``k+1 |-> k`` from scope ``n+1`` to ``n``."""
    return Subst(n + 1, n, (arg,) + tuple(Var(k) for k in range(n)))


def _step(t: Term, n: int, sub) -> Term | None:
    if isinstance(t, App):
        if isinstance(t.fun, Lam):
            return sub(t.fun.body, beta_subst(n, t.arg))
        f = _step(t.fun, n, sub)
        if f is not None:
            return App(f, t.arg)
        a = _step(t.arg, n, sub)
        return None if a is None else App(t.fun, a)
    if isinstance(t, Lam):
        b = _step(t.body, n + 1, sub)
        return None if b is None else Lam(b)
    return None


def beta_normalize(t: Term, fuel: int = 1000, scope: int = 0, sub=substitute) -> Term:
    """Leftmost-outermost reduction; each contraction costs one unit of fuel."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    while True:
        nxt = _step(t, scope, sub)
        if nxt is None:
            return t
        if fuel == 0:
            raise FuelExhausted(t)
        fuel -= 1
        t = nxt


# -- corpus ---------------------------------------------------------------------------


@functools.cache
def terms_of_size(k: int, n: int) -> tuple:
    """Every term with exactly ``k`` nodes at scope ``n``."""
    if k <= 0:
        return ()
    out: list = []
    if k == 1:
        out += [Var(v) for v in range(n)]
    out += [Lam(b) for b in terms_of_size(k - 1, n + 1)]
    for a in range(1, k - 1):
        for f in terms_of_size(a, n):
            for x in terms_of_size(k - 1 - a, n):
                out.append(App(f, x))
    return tuple(out)


def terms_up_to(k: int, n: int) -> list:
    return [t for j in range(1, k + 1) for t in terms_of_size(j, n)]


def substitutions(src: int, tgt: int, max_size: int) -> Iterator[Subst]:
    pool = terms_up_to(max_size, tgt)
    for images in itertools.product(pool, repeat=src):
        yield Subst(src, tgt, images)


def corpus(max_size: int = 6, max_scope: int = 2) -> list[tuple[Term, int]]:
    return [(t, n) for n in range(max_scope + 1) for t in terms_up_to(max_size, n)]


def parse_subst_map(items: Sequence[str], src: int, tgt: int) -> Subst:
    """``["0=\\. 0", ...]``; each right side is parsed at scope ``tgt``."""
    mapping = {}
    for item in items:
        lhs, sep, rhs = item.partition("=")
        if not sep or not lhs.strip().isdigit():
            raise ParseError(f"bad substitution entry {item!r}", 0)
        k = int(lhs)
        if k >= src:
            raise ScopeError(f"substituted variable {k} is not bound at scope {src}")
        mapping[k] = parse_term(rhs, tgt)
    for k in range(src):
        if k not in mapping and k >= tgt:
            raise ScopeError(f"variable {k} has no image and is not bound at scope {tgt}")
    return Subst.from_mapping(src, tgt, mapping)


__all__ = [
    "App",
    "FuelExhausted",
    "Lam",
    "ParseError",
    "ScopeError",
    "Subst",
    "Term",
    "Var",
    "beta_normalize",
    "compose_subst",
    "corpus",
    "from_extent",
    "oracle_substitute",
    "parse_subst_map",
    "parse_term",
    "print_term",
    "shift",
    "substitute",
    "substitutions",
    "term_positions",
    "terms_of_size",
    "terms_up_to",
    "to_extent",
    "well_scoped",
]

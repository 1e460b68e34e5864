import functools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icmon.kernel import BudgetExceeded
from icmon.lambda_terms import (
    App,
    FuelExhausted,
    Lam,
    ParseError,
    ScopeError,
    Subst,
    Var,
    beta_normalize,
    binder_depth,
    compose_subst,
    corpus,
    from_extent,
    oracle_substitute,
    parse_subst_map,
    parse_term,
    print_term,
    shift,
    size,
    substitute,
    term_positions,
    terms_of_size,
    to_extent,
    well_scoped,
)


@functools.cache
def terms(n: int, depth: int = 4):
    """Hypothesis strategy for terms well scoped at ``n``."""
    if depth == 0:
        return st.sampled_from([Var(k) for k in range(n)]) if n else st.nothing()
    leaves = [st.sampled_from([Var(k) for k in range(n)])] if n else []
    return st.one_of(
        *leaves,
        st.builds(Lam, st.deferred(lambda: terms(n + 1, depth - 1))),
        st.builds(App, st.deferred(lambda: terms(n, depth - 1)), st.deferred(lambda: terms(n, depth - 1))),
    )


@st.composite
def subst(draw, src=None, tgt=None):
    src = draw(st.integers(0, 3)) if src is None else src
    tgt = draw(st.integers(1, 3)) if tgt is None else tgt
    images = [draw(terms(tgt, 3)) for _ in range(src)]
    return Subst(src, tgt, images)


@functools.cache
def _count(k, n):
    # Number of terms with k nodes at scope n, by the size recursion alone.
    if k <= 0:
        return 0
    total = n if k == 1 else 0
    total += _count(k - 1, n + 1)
    total += sum(_count(a, n) * _count(k - 1 - a, n) for a in range(1, k - 1))
    return total


# -- syntax ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text, n, term",
    [
        ("0", 1, Var(0)),
        ("\\. 0", 0, Lam(Var(0))),
        ("0 1 2", 3, App(App(Var(0), Var(1)), Var(2))),
        ("0 (1 2)", 3, App(Var(0), App(Var(1), Var(2)))),
        ("\\.\\. 1 0", 0, Lam(Lam(App(Var(1), Var(0))))),
        ("(\\. 0) (\\. 0)", 0, App(Lam(Var(0)), Lam(Var(0)))),
    ],
)
def test_parse(text, n, term):
    assert parse_term(text, n) == term


@given(st.integers(0, 3).flatmap(lambda n: st.tuples(st.just(n), terms(n))))
def test_print_parse_round_trip(nt):
    n, t = nt
    assert parse_term(print_term(t), n) == t


@pytest.mark.parametrize(
    "text, n, exc, offset",
    [
        ("1", 1, ScopeError, 0),
        ("\\. 0 2", 1, ScopeError, 5),
        ("(0", 1, ParseError, 2),
        ("0 )", 1, ParseError, 2),
        ("\\ 0", 1, ParseError, 2),
        ("", 0, ParseError, 0),
        ("λ", 0, ParseError, 0),
        ("0 λ", 1, ParseError, 2),
    ],
)
def test_errors_carry_byte_offsets(text, n, exc, offset):
    with pytest.raises(exc) as info:
        parse_term(text, n)
    assert info.value.byte_offset == offset


def test_offset_counts_bytes_not_characters():
    with pytest.raises(ParseError) as info:
        parse_term("0 λ λ", 1)
    assert info.value.byte_offset == 2
    with pytest.raises(ScopeError) as info:
        parse_term("\u30000 5", 1)
    assert info.value.byte_offset == 5


def test_subst_map():
    s = parse_subst_map(["0=\\. 0"], 2, 2)
    assert s.images == (Lam(Var(0)), Var(1))
    with pytest.raises(ScopeError):
        parse_subst_map(["2=0"], 2, 1)
    with pytest.raises(ScopeError):
        parse_subst_map([], 2, 1)
    with pytest.raises(ParseError):
        parse_subst_map(["x"], 1, 1)


def test_subst_checks_scope():
    with pytest.raises(ScopeError):
        Subst(1, 1, (Var(1),))
    with pytest.raises(ValueError):
        Subst(2, 1, (Var(0),))


# -- terms as extent elements -------------------------------------------------------


@given(st.integers(0, 3).flatmap(lambda n: st.tuples(st.just(n), terms(n))))
def test_extent_round_trip(nt):
    n, t = nt
    elem = to_extent(t, n)
    assert elem.index == n
    assert from_extent(elem) == t
    assert len(elem.assign) == sum(len(v) for v in term_positions(t, n).values())


def test_positions_sit_in_their_scope():
    t = parse_term("0 (\\. 0 1)", 1)
    assert term_positions(t, 1) == {1: [((1, False),)], 2: [((1, True), (2, "refl"), (2, False)), ((1, True), (2, "refl"), (2, True))]}


def test_window_is_enforced():
    t = parse_term("\\.\\.\\. 0")
    with pytest.raises(BudgetExceeded):
        to_extent(t, 0, window=2)
    assert from_extent(to_extent(t, 0, window=3)) == t


@pytest.mark.parametrize("k", range(1, 8))
@pytest.mark.parametrize("n", range(3))
def test_term_counts(k, n):
    ts = terms_of_size(k, n)
    assert len(ts) == len(set(ts)) == _count(k, n)
    assert all(size(t) == k and well_scoped(t, n) for t in ts)


def test_closed_term_counts():
    # Closed terms by node count, variables counting one node.
    assert [len(terms_of_size(k, 0)) for k in range(1, 9)] == [0, 1, 2, 4, 13, 42, 139, 506]


# -- substitution ---------------------------------------------------------------------


def test_substitute_examples():
    sigma = Subst(1, 1, (App(Var(0), Var(0)),))
    assert substitute(parse_term("\\. 1 0", 1), sigma) == parse_term("\\. (1 1) 0", 1)
    lift = Subst(1, 2, (Var(1),))
    assert substitute(parse_term("\\. 1", 1), lift) == parse_term("\\. 2", 2)


@settings(max_examples=500)
@given(st.data())
def test_substitute_matches_oracle(data):
    sigma = data.draw(subst())
    t = data.draw(terms(sigma.src, 4))
    got = substitute(t, sigma)
    assert got == oracle_substitute(t, sigma)
    assert well_scoped(got, sigma.tgt)


@given(st.integers(0, 3).flatmap(lambda n: st.tuples(st.just(n), terms(n))))
def test_identity_substitution(nt):
    n, t = nt
    assert substitute(t, Subst.identity(n)) == t


@settings(max_examples=100)
@given(st.data())
def test_substitution_composes(data):
    sigma = data.draw(subst(src=2, tgt=2))
    tau = data.draw(subst(src=2, tgt=1))
    t = data.draw(terms(2, 3))
    assert substitute(substitute(t, sigma), tau) == substitute(t, compose_subst(sigma, tau))


@given(st.data())
def test_variable_then_substitute(data):
    sigma = data.draw(subst(src=3))
    k = data.draw(st.integers(0, 2))
    assert substitute(Var(k), sigma) == sigma(k)


def test_deep_terms_widen_the_window():
    t = Lam(Lam(Lam(Lam(Lam(Lam(Lam(Lam(Lam(Var(9))))))))))
    sigma = Subst(1, 1, (Lam(Lam(Var(2))),))
    assert binder_depth(t) == 9
    assert substitute(t, sigma) == oracle_substitute(t, sigma)


def test_shift():
    assert shift(parse_term("\\. 0 1", 1), 2) == parse_term("\\. 0 3", 3)


def test_corpus_is_well_scoped():
    cs = corpus(4, 2)
    assert all(well_scoped(t, n) for t, n in cs)
    assert len(cs) == sum(_count(k, n) for n in range(3) for k in range(1, 5))


# -- normalization --------------------------------------------------------------------


@pytest.mark.parametrize(
    "text, normal",
    [
        ("(\\. 0) (\\. 0)", "\\. 0"),
        ("(\\.\\. 1) (\\. 0)", "\\.\\. 0"),
        ("(\\.\\. 1 0) (\\. 0)", "\\. 0"),
        ("\\. (\\. 1 0) (\\. 0)", "\\. 0 (\\. 0)"),
    ],
)
def test_beta_normalize(text, normal):
    t = parse_term(text)
    assert beta_normalize(t) == parse_term(normal)
    assert beta_normalize(t, sub=oracle_substitute) == parse_term(normal)


def test_omega_runs_out_of_fuel():
    omega = parse_term("(\\. 0 0) (\\. 0 0)")
    with pytest.raises(FuelExhausted) as info:
        beta_normalize(omega, fuel=5)
    assert info.value.term == omega
    with pytest.raises(ValueError):
        beta_normalize(omega, fuel=-1)


def test_church_arithmetic():
    two = "(\\.\\. 1 (1 0))"
    plus = "(\\.\\.\\.\\. 3 1 (2 1 0))"
    four = beta_normalize(parse_term(f"{plus} {two} {two}"))
    assert four == parse_term("\\.\\. 1 (1 (1 (1 0)))")

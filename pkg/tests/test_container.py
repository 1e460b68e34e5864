import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from icmon.container import (
    ContainerMorphism,
    ExtentElem,
    ExtentFamily,
    IndexedContainer,
    NotNatural,
    check_morphism,
    default_probes,
    enumerate_morphisms,
    extent_at,
    extent_map,
    find_unnatural,
    generic_element,
    interp_morphism,
    map_elem,
    morphism_compose,
    morphism_equal,
    morphism_id,
    nat_of_morphism,
    reify_natural,
    small_containers,
)
from icmon.examples import scenario_container
from icmon.kernel import Assignment, Family, FamilyMap, IndexSet, MismatchedFamilies

AB = IndexSet(("a", "b"))
ONE = IndexSet(("*",))
SMALL1 = list(small_containers(ONE))
SMALL2 = list(small_containers(AB, 2, 1))


def test_scenario_extent_sizes():
    C = scenario_container()
    X = Family(AB, {"a": ["x0"], "b": ["y0", "y1"]})
    assert len(extent_at(C, X, "a")) == 1
    assert len(extent_at(C, X, "b")) == 4


def test_empty_position_shape_has_one_element():
    C = IndexedContainer.tabulated(ONE, {"*": ["nil"]}, {})
    X = Family(ONE, {"*": []})
    assert extent_at(C, X, "*") == [ExtentElem("*", "nil", Assignment({}))]


def test_tabulated_validation():
    with pytest.raises(ValueError):
        IndexedContainer.tabulated(ONE, {"*": ["s"]}, {("*", "t", "*"): ["p"]})
    with pytest.raises(ValueError):
        IndexedContainer.tabulated(AB, {"a": ["s"]}, {("a", "s", "a"): ["p"], ("a", "s", "b"): ["p"]})
    with pytest.raises(ValueError):
        IndexedContainer.tabulated(ONE, {"*": ["s"]}, {("*", "s", "zz"): ["p"]})


@given(st.sampled_from(SMALL2), st.integers(0, 2), st.integers(0, 2), st.data())
def test_unrank_matches_enumeration(C, na, nb, data):
    X = Family(AB, {"a": list(range(na)), "b": list(range(nb))})
    fam = ExtentFamily(C, X)
    for i in AB:
        elems = list(fam.elements(i))
        assert len(elems) == fam.count(i)
        if elems:
            r = data.draw(st.integers(0, len(elems) - 1))
            assert fam.unrank(i, r) == elems[r]


def test_extent_map_is_functorial():
    C = scenario_container()
    X = Family(AB, {"a": [0, 1], "b": [0, 1]})
    f = FamilyMap(X, X, {"a": {0: 1, 1: 1}, "b": {0: 1, 1: 0}})
    g = FamilyMap(X, X, {"a": {0: 0, 1: 0}, "b": {0: 0, 1: 0}})
    fg = FamilyMap(X, X, {i: {x: g(i, f(i, x)) for x in X.elements(i)} for i in AB})
    for i in AB:
        for e in extent_at(C, X, i):
            assert extent_map(C, fg)(e) == extent_map(C, g)(extent_map(C, f)(e))
    Y = Family(AB, {"a": [0], "b": [0]})
    with pytest.raises(MismatchedFamilies):
        extent_map(C, FamilyMap(Y, Y, {"a": {0: 0}, "b": {0: 0}}))(extent_at(C, X, "b")[-1])


def _morphisms(C, D, k=6):
    return list(itertools.islice(enumerate_morphisms(C, D), k))


@pytest.mark.parametrize("C", SMALL1)
def test_identity_and_composition_laws(C):
    rng = random.Random(0)
    D = rng.choice(SMALL1)
    E = rng.choice(SMALL1)
    for m in _morphisms(C, D):
        assert morphism_equal(morphism_compose(morphism_id(C), m), m) is None
        assert morphism_equal(morphism_compose(m, morphism_id(D)), m) is None
        for n in _morphisms(D, E, 3):
            for o in _morphisms(E, C, 2):
                lhs = morphism_compose(morphism_compose(m, n), o)
                rhs = morphism_compose(m, morphism_compose(n, o))
                assert morphism_equal(lhs, rhs) is None


def test_morphism_equal_reports_witness():
    C = scenario_container()
    swap = ContainerMorphism.from_tables(
        C, C, {("a", "s"): "s", ("b", "t"): "t"},
        {("a", "s", "a", "p"): "p", ("b", "t", "b", "q"): "r", ("b", "t", "b", "r"): "q"},
    )
    assert check_morphism(swap) == []
    assert morphism_equal(swap, morphism_id(C)) == ("pi", "b", "t", "b", "q", "r", "q")


def test_check_morphism_flags_bad_position():
    C = scenario_container()
    bad = ContainerMorphism.from_tables(
        C, C, {("a", "s"): "s", ("b", "t"): "t"},
        {("a", "s", "a", "p"): "zz", ("b", "t", "b", "q"): "q", ("b", "t", "b", "r"): "r"},
    )
    assert len(check_morphism(bad)) == 1


def test_enumerate_morphisms_count():
    C = scenario_container()
    # one shape each; p has 1 choice, q and r each pick q or r
    assert sum(1 for _ in enumerate_morphisms(C, C)) == 4


def test_reify_roundtrip_on_scenario():
    C = scenario_container()
    for m in enumerate_morphisms(C, C):
        back = reify_natural(C, C, nat_of_morphism(m))
        assert morphism_equal(back, m) is None


def test_generic_element_is_identity_assignment():
    C = scenario_container()
    g = generic_element(C, "b", "t")
    assert dict(g.assign) == {("b", "q"): "q", ("b", "r"): "r"}


def test_unnatural_transformation_is_rejected():
    C = IndexedContainer.tabulated(ONE, {"*": ["s"]}, {("*", "s", "*"): ["p"]})

    def nat(X, i, e):
        # sends every element to the least one: not natural
        xs = list(X.elements(i))
        return ExtentElem(i, "s", Assignment({("*", "p"): xs[0]}))

    w = find_unnatural(C, C, nat, default_probes(C))
    assert w is not None and w[0] == "square"
    with pytest.raises(NotNatural):
        reify_natural(C, C, nat)


def test_interp_is_pointwise_apply():
    C = scenario_container()
    X = Family(AB, {"a": [0], "b": [0, 1]})
    for m in enumerate_morphisms(C, C):
        f = interp_morphism(m, X)
        for i in AB:
            for e in extent_at(C, X, i):
                assert f(i, e).shape == m.sigma(i, e.shape)
                assert map_elem(lambda j, x: x, f(i, e)) == f(i, e)

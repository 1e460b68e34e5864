"""Acceptance suite: one group of tests per criterion (``test_c<N>_...``).

The summary hook in ``conftest.py`` prints one PASS/FAIL line per
criterion.  Parts that cannot be met at full scale are strict ``xfail``
tests; they are reported as unmet rather than hidden.
"""

import itertools
import json
import random
import subprocess
import sys
import time

import jsonschema
import oracles
import pytest
from conftest import AB, ONE, lam, product_sw, state_ab, state_bool, writer_swap

from icmon.bundled import BUNDLED, bundled_path
from icmon.container import (
    ExtentFamily,
    NotNatural,
    enumerate_morphisms,
    interp_morphism,
    morphism_equal,
    reify_natural,
    small_containers,
)
from icmon.examples import (
    enumerate_actions,
    enumerate_monoids,
    indexed_state,
    indexed_writer,
    lambda_container,
    product_icms,
    trivial_action,
)
from icmon.icms import (
    check_icms,
    check_monoid,
    enumerate_icms,
    icms_equal,
    icms_to_monoid,
    monoid_to_icms,
    single_mutations,
    triple_domain,
)
from icmon.kernel import Family, IndexSet, probe_families
from icmon.lambda_terms import (
    Subst,
    Var,
    compose_subst,
    oracle_substitute,
    substitute,
    terms_up_to,
    well_scoped,
)
from icmon.monad import DerivedMonad, check_monad_laws, join_elem, unit_elem
from icmon.monoidal import (
    MONOIDAL,
    check_pentagon,
    check_strong_monoidal,
    check_triangle,
    tensor,
    unit_container,
)
from icmon.specfile import schema

ABC = IndexSet(("A", "B", "C"))

# Largest per-index triple domain checked exhaustively; bigger ones are sampled.
EXHAUSTIVE_LIMIT = 20_000
SAMPLE_BUDGET = 2_000

LAW_SECONDS: dict[str, float] = {}


def _timed(name, fn):
    t = time.perf_counter()
    out = fn()
    LAW_SECONDS[name] = time.perf_counter() - t
    return out


def _state_configs():
    for I in (ONE, AB):
        for sizes in itertools.product(range(4), repeat=len(I)):
            E = Family(I, {i: list(range(k)) for i, k in zip(I, sizes)})
            yield sizes, indexed_state(I, E)


def _largest_fibre(C):
    D = triple_domain(C)
    return max(D.count(i) for i in C.index_set)


def _check_bounded(C, m):
    big = _largest_fibre(C) > EXHAUSTIVE_LIMIT
    return check_icms(C, m, budget=SAMPLE_BUDGET if big else None), big


def _products():
    Z2, Z3 = (indexed_writer(trivial_action(enumerate_monoids(k)[-1], ONE)) for k in (2, 3))
    S1 = indexed_state(ONE, Family(ONE, {"*": [0]}))
    yield "state2 x writer", product_sw()
    yield "state1 x Z2", product_icms(*S1, *Z2)
    yield "Z2 x Z3", product_icms(*Z2, *Z3)
    yield "swap x swap", product_icms(*writer_swap(), *writer_swap())
    yield "state_ab x swap", product_icms(*state_ab(), *writer_swap())


# -- 1. structure laws --------------------------------------------------------------------


def test_c1_writer_every_action():
    def run():
        n = 0
        for size in range(1, 5):
            for W in enumerate_monoids(size):
                for I in (ONE, AB, ABC):
                    for act in enumerate_actions(W, I):
                        report = check_icms(*indexed_writer(act), budget=None)
                        assert report.ok and report.exhaustive, (W, act, report.failing())
                        n += 1
        return n

    assert _timed("writer", run) == 1462


def test_c1_state():
    def run():
        sampled = []
        for sizes, (C, m) in _state_configs():
            report, big = _check_bounded(C, m)
            assert report.ok, (sizes, report.failing())
            assert report.exhaustive != big
            if big:
                sampled.append(sizes)
        return sampled

    sampled = _timed("state", run)
    assert (1, 2) in sampled and (1, 1) not in sampled


def test_c1_products():
    def run():
        for name, (C, m) in _products():
            report, _big = _check_bounded(C, m)
            assert report.ok, (name, report.failing())

    _timed("product", run)


def test_c1_lambda_depth_three():
    C, m = lambda_container(8, 3)
    report = _timed("lambda", lambda: check_icms(C, m, budget=None))
    assert report.ok
    assert all(v.status == "bounded-pass" for v in report.verdicts.values())
    assert all(v.checked > 0 for v in report.verdicts.values())


def test_c1_runtime():
    assert set(LAW_SECONDS) == {"writer", "state", "product", "lambda"}
    assert sum(LAW_SECONDS.values()) <= 60, LAW_SECONDS


@pytest.mark.xfail(strict=True, reason="state and product fibres up to ~1e31 triples")
def test_c1_exhaustive_coverage():
    too_big = [sizes for sizes, (C, _) in _state_configs() if _largest_fibre(C) > EXHAUSTIVE_LIMIT]
    too_big += [name for name, (C, _) in _products() if _largest_fibre(C) > EXHAUSTIVE_LIMIT]
    assert too_big == []


# -- 2. structures and monoids --------------------------------------------------------------


def _tiny_containers():
    for I in (ONE, AB):
        for C in small_containers(I, 1, 2):
            if all(len(C.shapes(i)) == 1 and len(C.position_keys(i, C.shapes(i)[0])) <= 2 for i in I):
                yield C


def test_c2_tiny_containers_exhaustive():
    seen = lawful_total = 0
    for C in _tiny_containers():
        seen += 1
        lawful = [t.to_icms() for t in enumerate_icms(C) if check_icms(C, t.to_icms(), budget=None).ok]
        for m in lawful:
            eta, mu = icms_to_monoid(C, m, budget=None)
            assert all(w is None for w in check_monoid(C, eta, mu, budget=None).values())
            assert icms_equal(C, m, monoid_to_icms(C, eta, mu, budget=None), budget=None) is None
        monoids = []
        for eta in enumerate_morphisms(unit_container(C.index_set), C):
            for mu in enumerate_morphisms(tensor(C, C), C):
                if all(w is None for w in check_monoid(C, eta, mu, budget=None).values()):
                    monoids.append((eta, mu))
        for eta, mu in monoids:
            m = monoid_to_icms(C, eta, mu, budget=None)
            assert check_icms(C, m, budget=None).ok
            eta2, mu2 = icms_to_monoid(C, m, budget=None)
            assert morphism_equal(eta, eta2) is None and morphism_equal(mu, mu2) is None
        assert len(monoids) == len(lawful)
        lawful_total += len(lawful)
    # One index: 0, 1 or 2 positions.  Two indices: a multiset of at most two
    # targets per index, 6 * 6.
    assert seen == 3 + 36 and lawful_total > 0


@pytest.mark.parametrize("name", sorted(BUNDLED))
def test_c2_builtin_round_trips(name):
    C, m = BUNDLED[name][0]()
    eta, mu = icms_to_monoid(C, m, budget=None)
    back = monoid_to_icms(C, eta, mu, budget=None)
    assert icms_equal(C, m, back, budget=None) is None
    eta2, mu2 = icms_to_monoid(C, back, budget=None)
    assert morphism_equal(eta, eta2) is None
    assert morphism_equal(mu, mu2, budget=SAMPLE_BUDGET) is None


def test_c2_lambda_round_trip_bounded():
    C, m = lam()
    eta, mu = icms_to_monoid(C, m, budget=None)
    back = monoid_to_icms(C, eta, mu, check=False)
    assert icms_equal(C, m, back, budget=None) is None
    assert check_icms(C, back, budget=None).ok


# -- 3. morphisms and natural transformations ------------------------------------------


def _interpreted(m):
    cache = {}

    def nat(X, i, elem):
        if X not in cache:
            cache[X] = interp_morphism(m, X)
        return cache[X](i, elem)

    return nat


def _reify_round_trip(C, D, m, check):
    nat = _interpreted(m)
    back = reify_natural(C, D, nat, check=check)
    assert morphism_equal(back, m) is None
    for X in probe_families(C.index_set, 2):
        again = interp_morphism(back, X)
        for i in C.index_set:
            for elem, out in again.tab[i].items():
                assert out == nat(X, i, elem)


def test_c3_one_index_every_morphism():
    S = list(small_containers(ONE))
    n = 0
    for C, D in itertools.product(S, S):
        for m in enumerate_morphisms(C, D):
            _reify_round_trip(C, D, m, check=True)
            n += 1
    assert n == 359


def test_c3_two_indices_sampled():
    S = list(small_containers(AB))
    rng = random.Random(3)
    n = 0
    while n < 1_000:
        C, D = rng.choice(S), rng.choice(S)
        for m in itertools.islice(enumerate_morphisms(C, D), 50):
            _reify_round_trip(C, D, m, check=n % 25 == 0)
            n += 1


def test_c3_unnatural_is_rejected():
    S = list(small_containers(ONE))
    rng = random.Random(5)
    rejected = 0
    for C, D in itertools.product(S, S):
        ms = list(enumerate_morphisms(C, D))
        if len(ms) < 2:
            continue
        a, b = rng.sample(ms, 2)
        if morphism_equal(a, b) is None:
            continue

        def mixed(X, i, elem, a=a, b=b):
            # Switch between two different morphisms depending on the family.
            return (_interpreted(a) if len(X.at[i]) % 2 else _interpreted(b))(X, i, elem)

        try:
            reify_natural(C, D, mixed)
        except NotNatural:
            rejected += 1
    assert rejected > 0


@pytest.mark.xfail(strict=True, reason="about 6.4e8 morphisms between two-index containers")
def test_c3_two_indices_exhaustive_coverage():
    assert len(list(small_containers(AB))) ** 2 <= 10_000


# -- 4. coherence ----------------------------------------------------------------------------


SMALL1 = list(small_containers(ONE))
SMALL2 = list(small_containers(AB))


def test_c4_triangle_one_index():
    for X, Y in itertools.product(SMALL1, SMALL1):
        assert check_triangle(X, Y) is None


def test_c4_triangle_two_indices_sampled():
    rng = random.Random(11)
    for _ in range(300):
        assert check_triangle(rng.choice(SMALL2), rng.choice(SMALL2)) is None


@pytest.mark.slow
def test_c4_pentagon_one_index():
    for quad in itertools.product(SMALL1, repeat=4):
        assert check_pentagon(*quad) is None, quad


def test_c4_pentagon_two_indices_sampled():
    rng = random.Random(13)
    for _ in range(20):
        assert check_pentagon(*(rng.choice(SMALL2) for _ in range(4)), budget=200) is None


def test_c4_structural_isomorphisms():
    for triple in itertools.product(SMALL1, repeat=3):
        assert MONOIDAL.iso_failures(*triple) == []


def test_c4_strong_monoidal():
    probes = probe_families(ONE, 2)
    for C0, C1 in itertools.product(SMALL1, SMALL1):
        assert check_strong_monoidal(C0, C1, C0, probes) == []
    rng = random.Random(17)
    probes2 = probe_families(AB, 1)
    checked = 0
    while checked < 40:
        C0, C1 = rng.choice(SMALL2), rng.choice(SMALL2)
        # The associativity square walks C0 (C1 (C0 X)); keep it within the exhaustive limit.
        nested = ExtentFamily(C0, ExtentFamily(C1, ExtentFamily(C0, probes2[-1])))
        if max(nested.count(i) for i in AB) > EXHAUSTIVE_LIMIT:
            continue
        assert check_strong_monoidal(C0, C1, C0, probes2) == []
        checked += 1


@pytest.mark.xfail(strict=True, reason="about 8.4e13 quadruples of two-index containers")
def test_c4_two_indices_exhaustive_coverage():
    assert len(SMALL2) ** 4 <= 10**6


# -- 5. classic monads --------------------------------------------------------------------------


XS = [Family(ONE, {"*": ["x0"]}), Family(ONE, {"*": ["x0", "x1"]})]


@pytest.mark.parametrize("n_states", [1, 2])
def test_c5_state_direct(n_states):
    states = list(range(n_states))
    M = DerivedMonad(*indexed_state(ONE, Family(ONE, {"*": states})))
    for X in XS:
        for x in X.elements("*"):
            assert oracles.to_classic(states, unit_elem(M, "*", x)) == oracles.state_eta(states, x)
        TTX = ExtentFamily(M.carrier, ExtentFamily(M.carrier, X))
        for E in TTX.elements("*"):
            want = oracles.state_mu(states, oracles.to_classic2(states, E))
            assert oracles.to_classic(states, join_elem(M, E)) == want


@pytest.mark.parametrize("n_states", [1, 2, 3])
def test_c5_state_generic(n_states):
    # join is natural in X, so agreeing on the element whose values name
    # their own positions decides agreement on every element.
    states = list(range(n_states))
    C, m = indexed_state(ONE, Family(ONE, {"*": states}))
    M = DerivedMonad(C, m)
    n = 0
    for E in oracles.generic_nested_state(C, states):
        want = oracles.state_mu(states, oracles.to_classic2(states, E))
        assert oracles.to_classic(states, join_elem(M, E)) == want
        n += 1
    assert n == (n_states**n_states) ** (n_states + 1)
    for X in XS:
        for x in X.elements("*"):
            assert oracles.to_classic(states, unit_elem(M, "*", x)) == oracles.state_eta(states, x)


@pytest.mark.parametrize("I", [ONE, AB, ABC], ids=["I1", "I2", "I3"])
def test_c5_writer_is_product(I):
    X = Family(I, {i: [f"x{k}" for k in range(1 + n % 2)] for n, i in enumerate(I)})
    for size in range(1, 5):
        for W in enumerate_monoids(size):
            M = DerivedMonad(*indexed_writer(trivial_action(W, I)))
            for i in I:
                for x in X.elements(i):
                    assert oracles.writer_pair(i, unit_elem(M, i, x)) == oracles.writer_eta(W, x)
                for E in ExtentFamily(M.carrier, ExtentFamily(M.carrier, X)).elements(i):
                    got = oracles.writer_pair(i, join_elem(M, E))
                    assert got == oracles.writer_mu(W, oracles.writer_pair2(i, E))


# -- 6. lambda substitution ----------------------------------------------------------------


def _substitutions(src):
    for tgt in range(3):
        if src and not tgt:
            continue
        pool = terms_up_to(3, tgt)
        for images in itertools.product(pool, repeat=src):
            yield Subst(src, tgt, images)


@pytest.mark.slow
def test_c6_oracle_and_laws():
    cases = 0
    for n in range(3):
        subs = list(_substitutions(n))
        taus = {tgt: [s for s in _substitutions(tgt)] for tgt in range(3)}
        for t_ix, t in enumerate(terms_up_to(6, n)):
            assert substitute(t, Subst.identity(n)) == t
            for s_ix, sigma in enumerate(subs):
                got = substitute(t, sigma)
                assert got == oracle_substitute(t, sigma), (t, sigma)
                assert well_scoped(got, sigma.tgt)
                cases += 1
                pool = taus[sigma.tgt]
                tau = pool[(t_ix * 7 + s_ix) % len(pool)]
                lhs = substitute(got, tau)
                assert lhs == substitute(t, compose_subst(sigma, tau))
                assert well_scoped(lhs, tau.tgt)
        for sigma in subs:
            for k in range(n):
                assert substitute(Var(k), sigma) == sigma(k)
    assert cases >= 10_000


# -- 7. mutations ---------------------------------------------------------------------------


MUTATION_TARGETS = {
    "state_bool": state_bool,
    "state_ab": state_ab,
    "writer_z2": BUNDLED["writer_z2.icms"][0],
    "writer_z3": BUNDLED["writer_z3.icms"][0],
    "product": product_sw,
    "product_bundled": BUNDLED["product.icms"][0],
    "lambda": lam,
}


@pytest.mark.parametrize("name", sorted(MUTATION_TARGETS))
def test_c7_mutations_are_caught(name):
    C, m = MUTATION_TARGETS[name]()
    muts = single_mutations(C, m, 20)
    assert len(muts) == 20
    silent = []
    for x in muts:
        caught = not check_icms(C, x.icms, budget=3_000, fail_fast=True).ok
        if not caught and check_monad_laws(DerivedMonad(C, x.icms), probe_budget=300).ok:
            silent.append((x.field, x.key, x.old, x.new))
    assert silent == []


def test_c7_unit_every_mutation():
    # The unit structure has only ten single-entry mutations in all.
    C, m = unit_container(AB), BUNDLED["unit.icms"][0]()[1]
    muts = single_mutations(C, m, 20)
    assert len(muts) == 10
    assert not any(check_icms(C, x.icms, budget=None).ok for x in muts)


# -- 8. command line -------------------------------------------------------------------------


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "icmon.cli", *map(str, args)], capture_output=True, check=False)


@pytest.mark.parametrize("name", sorted(BUNDLED))
def test_c8_bundled_runs_are_identical(name):
    path = bundled_path(name)
    text1, text2 = _cli("check", path), _cli("check", path)
    js1, js2 = _cli("check", path, "--json"), _cli("check", path, "--json")
    assert text1.returncode == text2.returncode == js1.returncode == js2.returncode == 0
    assert text1.stdout == text2.stdout and js1.stdout == js2.stdout
    doc = json.loads(js1.stdout)
    jsonschema.validate(doc, schema("report.schema.json"))
    C, m = BUNDLED[name][0]()
    direct = check_icms(C, m)
    assert [(x["law"], x["status"], x["checked"]) for x in doc["laws"]] == [
        (law, v.status, v.checked) for law, v in direct.verdicts.items()
    ]


def test_c8_exit_codes(tmp_path):
    doc = json.loads(bundled_path("writer_z2.icms").read_text("utf-8"))
    (row,) = [
        r for r in doc["icms"]["bullet"] if r["index"] == "A" and r["shape"] == 1 and r["family"][0][2] == 0
    ]
    row["result"] = 0
    bad = tmp_path / "bad.icms"
    bad.write_text(json.dumps(doc), "utf-8")
    out = _cli("check", bad, "--json")
    assert out.returncode == 1
    report = json.loads(out.stdout)
    jsonschema.validate(report, schema("report.schema.json"))
    assert {x["law"]: x["status"] for x in report["laws"]}["e-unit-l"] == "fail"
    doc["positions"][0]["shape"] = "nope"
    bad.write_text(json.dumps(doc, indent=1), "utf-8")
    out = _cli("check", bad)
    assert out.returncode == 2 and out.stdout == b""
    assert f"{bad}:".encode() in out.stderr
    assert _cli("lambda", "parse", "1").returncode == 2
    assert _cli("lambda", "norm", "(\\. 0 0) (\\. 0 0)", "--fuel", "3").returncode == 1

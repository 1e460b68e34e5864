import pytest
from hypothesis import HealthCheck, settings

from icmon.examples import (
    MonoidAction,
    cyclic_monoid,
    indexed_state,
    indexed_writer,
    lambda_container,
    product_icms,
    trivial_action,
)
from icmon.kernel import Family, IndexSet

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

AB = IndexSet(("A", "B"))
ONE = IndexSet(("*",))


def swap_action():
    act = {(0, "A"): "A", (0, "B"): "B", (1, "A"): "B", (1, "B"): "A"}
    return MonoidAction(cyclic_monoid(2), AB, act)


def state_bool():
    return indexed_state(ONE, Family(ONE, {"*": [0, 1]}))


def state_ab():
    return indexed_state(AB, Family(AB, {"A": ["a"], "B": ["b", "c"]}))


def writer_swap():
    return indexed_writer(swap_action())


def writer_trivial():
    return indexed_writer(trivial_action(cyclic_monoid(2), ONE))


def product_sw():
    C0, m0 = state_bool()
    C1, m1 = writer_trivial()
    return product_icms(C0, m0, C1, m1)


def lam():
    return lambda_container(8, 3)


BUILTINS = {
    "state_bool": state_bool,
    "writer_swap": writer_swap,
    "product": product_sw,
    "lambda": lam,
}


@pytest.fixture(params=sorted(BUILTINS))
def builtin(request):
    return request.param, BUILTINS[request.param]()


# -- acceptance summary ---------------------------------------------------------------

ACCEPTANCE_TITLES = {
    1: "structure laws on the built-ins",
    2: "structure <-> monoid round trips",
    3: "morphisms reify from their interpretation",
    4: "triangle, pentagon, strong monoidal extent",
    5: "classic state and writer recovered",
    6: "lambda substitution against the oracle",
    7: "single-entry mutations are caught",
    8: "CLI output, exit codes and report schema",
}


def _criterion(nodeid: str) -> int | None:
    if "test_acceptance.py::test_c" not in nodeid:
        return None
    name = nodeid.split("::test_c", 1)[1]
    digits = name.split("_", 1)[0]
    return int(digits) if digits.isdigit() else None


def pytest_terminal_summary(terminalreporter):
    seen: dict[int, dict] = {}
    for key in ("passed", "failed", "error", "xfailed", "xpassed", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            n = _criterion(getattr(rep, "nodeid", ""))
            if n is None or (key == "passed" and rep.when != "call"):
                continue
            entry = seen.setdefault(n, {"ok": 0, "bad": [], "gaps": [], "secs": 0.0})
            entry["secs"] += getattr(rep, "duration", 0.0)
            if key == "passed":
                entry["ok"] += 1
            elif key == "xfailed":
                entry["gaps"].append(rep.nodeid.split("::")[-1])
            else:
                entry["bad"].append(rep.nodeid.split("::")[-1])
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_TITLES):
        entry = seen.get(n)
        if entry is None:
            terminalreporter.write_line(f"criterion {n}: NOT RUN  {ACCEPTANCE_TITLES[n]}")
            continue
        verdict = "PASS" if not entry["bad"] and not entry["gaps"] else "FAIL"
        note = f"{entry['ok']} checks passed, {entry['secs']:.1f}s"
        if entry["gaps"]:
            note += "; unmet: " + ", ".join(entry["gaps"])
        if entry["bad"]:
            note += "; failed: " + ", ".join(entry["bad"])
        terminalreporter.write_line(f"criterion {n}: {verdict}  {ACCEPTANCE_TITLES[n]} ({note})")

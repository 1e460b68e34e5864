"""The spec files shipped in ``icmon/data``, regenerated from the built-ins."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .examples import (
    MonoidAction,
    cyclic_monoid,
    indexed_state,
    indexed_writer,
    product_icms,
    trivial_action,
)
from .icms import unit_icms
from .kernel import Family, IndexSet
from .monoidal import unit_container
from .specfile import dump_spec, spec_document


def _unit():
    I = IndexSet(("A", "B"))
    return unit_container(I), unit_icms()


def _writer_z2():
    I = IndexSet(("A", "B"))
    swap = {(0, "A"): "A", (0, "B"): "B", (1, "A"): "B", (1, "B"): "A"}
    return indexed_writer(MonoidAction(cyclic_monoid(2), I, swap))


def _writer_z3():
    I = IndexSet(("A", "B", "C"))
    rot = {(w, I.labels[k]): I.labels[(k + w) % 3] for w in range(3) for k in range(3)}
    return indexed_writer(MonoidAction(cyclic_monoid(3), I, rot))


def _state_bool():
    I = IndexSet(("*",))
    return indexed_state(I, Family(I, {"*": [0, 1]}))


def _state_ab():
    I = IndexSet(("A", "B"))
    return indexed_state(I, Family(I, {"A": ["a"], "B": ["b"]}))


def _product():
    I = IndexSet(("*",))
    C0, m0 = indexed_state(I, Family(I, {"*": [0]}))
    C1, m1 = indexed_writer(trivial_action(cyclic_monoid(2), I))
    return product_icms(C0, m0, C1, m1)


BUNDLED = {
    "unit.icms": (_unit, "unit container with its only structure"),
    "writer_z2.icms": (_writer_z2, "writer for Z2 acting on {A, B} by swapping"),
    "writer_z3.icms": (_writer_z3, "writer for Z3 acting on {A, B, C} by rotation"),
    "state_bool.icms": (_state_bool, "state over one index with two states"),
    "state_ab.icms": (_state_ab, "state over {A, B} with one state each"),
    "product.icms": (_product, "product of one-state state and Z2 writer"),
}


def render(name: str) -> str:
    make, comment = BUNDLED[name]
    C, m = make()
    return dump_spec(spec_document(C, m, name.removesuffix(".icms"), comment=comment))


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("icmon.data").joinpath(name)))


def write_bundled(directory: str | Path | None = None) -> list[Path]:
    out = []
    for name in BUNDLED:
        path = Path(directory) / name if directory else bundled_path(name)
        path.write_text(render(name), "utf-8")
        out.append(path)
    return out


if __name__ == "__main__":
    for p in write_bundled():
        print(p)

"""Reading and writing container/structure specification files.

A spec file is UTF-8 JSON validated against ``data/spec.schema.json``.
Every ``bullet`` row describes one pair ``(s, family)`` together with the
``up``/``ul``/``ur`` values at each position of the result, so a file is
total exactly when it has one row per pair.
"""

from __future__ import annotations

import dataclasses
import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import yaml

from .container import ExtentFamily, IndexedContainer
from .icms import Icms, IcmsTables, tabulate_icms
from .kernel import Assignment, Family, IndexSet

SPEC_VERSION = 1
REPORT_VERSION = 1


class SpecError(ValueError):
    """Invalid input, with a JSON path and (when known) a line and column."""

    def __init__(self, message: str, path: tuple = (), line: int | None = None, col: int | None = None):
        self.message = message
        self.path = tuple(path)
        self.line = line
        self.col = col
        super().__init__(self.render())

    def render(self, filename: str = "") -> str:
        where = filename
        if self.line is not None:
            where += f":{self.line}:{self.col}"
        at = "/".join(str(p) for p in self.path)
        prefix = f"{where}: " if where else ""
        return f"{prefix}{self.message}" + (f" (at /{at})" if at else "")


@dataclasses.dataclass
class SpecFile:
    name: str
    container: IndexedContainer
    tables: IcmsTables | None
    budget: int | None

    def icms(self) -> Icms:
        if self.tables is None:
            raise SpecError("the file has no icms section", ("icms",))
        return self.tables.to_icms(self.name)


def schema(name: str) -> dict:
    return json.loads(resources.files("icmon.data").joinpath(name).read_text("utf-8"))


def locate(text: str, path: tuple) -> tuple[int, int] | None:
    """Line and column (1-based) of the JSON node at ``path``."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return None
    best = node
    for step in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(step):
                    nxt = v
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(step, int) and step < len(node.value):
            node = node.value[step]
        else:
            node = None
        if node is None:
            break
        best = node
    return best.start_mark.line + 1, best.start_mark.column + 1


def _fail(text: str, message: str, path: tuple):
    loc = locate(text, path) if text else None
    line, col = loc if loc else (None, None)
    raise SpecError(message, path, line, col)


def load_spec_text(text: str) -> SpecFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc.msg}", (), exc.lineno, exc.colno) from None
    try:
        jsonschema.validate(doc, schema("spec.schema.json"))
    except jsonschema.ValidationError as exc:
        _fail(text, exc.message, tuple(exc.absolute_path))
    return _build(doc, text)


def load_spec(path: str | Path) -> SpecFile:
    try:
        text = Path(path).read_text("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    return load_spec_text(text)


def _build(doc: dict, text: str) -> SpecFile:
    labels = doc["index_set"]
    if len(set(labels)) != len(labels):
        _fail(text, "duplicate index label", ("index_set",))
    I = IndexSet(tuple(labels))
    shapes = doc["shapes"]
    for i in shapes:
        if i not in I:
            _fail(text, f"shapes given for undeclared index {i!r}", ("shapes", i))
    for i in I:
        ss = shapes.get(i, [])
        if len(set(map(_key, ss))) != len(ss):
            _fail(text, f"duplicate shape label at {i!r}", ("shapes", i))
    declared = {i: set(shapes.get(i, [])) for i in I}
    positions: dict = {}
    for n, row in enumerate(doc.get("positions", [])):
        i, s, j = row["index"], row["shape"], row["target"]
        here = ("positions", n)
        if i not in I:
            _fail(text, f"undeclared index {i!r}", here + ("index",))
        if j not in I:
            _fail(text, f"undeclared index {j!r}", here + ("target",))
        if s not in declared[i]:
            _fail(text, f"undeclared shape {s!r} at index {i!r}", here + ("shape",))
        if (i, s, j) in positions:
            _fail(text, f"positions of {s!r} towards {j!r} listed twice", here)
        positions[(i, s, j)] = list(row["labels"])
    try:
        C = IndexedContainer.tabulated(I, shapes, positions, name=doc.get("name", "spec"))
    except ValueError as exc:
        _fail(text, str(exc), ("positions",))
    tables = None
    if "icms" in doc:
        tables = _build_tables(doc["icms"], C, text)
    return SpecFile(doc.get("name", "spec"), C, tables, doc.get("budget"))


def _key(x):
    return (type(x).__name__, x)


def _build_tables(sec: dict, C: IndexedContainer, text: str) -> IcmsTables:
    I = C.index_set
    tabs = IcmsTables({}, {}, {}, {}, {})
    for i in I:
        if i not in sec["e"]:
            _fail(text, f"no unit shape for index {i!r}", ("icms", "e"))
    for i, s in sec["e"].items():
        if i not in I:
            _fail(text, f"undeclared index {i!r}", ("icms", "e", i))
        if not C.has_shape(i, s):
            _fail(text, f"undeclared shape {s!r} at index {i!r}", ("icms", "e", i))
        tabs.e[i] = s
    for n, row in enumerate(sec["bullet"]):
        here = ("icms", "bullet", n)
        i, s = row["index"], row["shape"]
        if i not in I:
            _fail(text, f"undeclared index {i!r}", here + ("index",))
        if not C.has_shape(i, s):
            _fail(text, f"undeclared shape {s!r} at index {i!r}", here + ("shape",))
        fam = {}
        for k, (j, p, t) in enumerate(row["family"]):
            if (j, p) not in C.position_keys(i, s):
                _fail(text, f"{p!r} towards {j!r} is not a position of {s!r}", here + ("family", k))
            if not C.has_shape(j, t):
                _fail(text, f"undeclared shape {t!r} at index {j!r}", here + ("family", k))
            fam[(j, p)] = t
        if set(fam) != set(C.position_keys(i, s)):
            _fail(text, f"family must cover every position of {s!r} exactly once", here + ("family",))
        s1 = Assignment(fam)
        if (i, s, s1) in tabs.bullet:
            _fail(text, "row repeats an earlier (index, shape, family)", here)
        r = row["result"]
        if not C.has_shape(i, r):
            _fail(text, f"undeclared shape {r!r} at index {i!r}", here + ("result",))
        tabs.bullet[(i, s, s1)] = r
        # Entries are taken as given: a position the result does not have, or
        # a missing one, shows up as a law failure when checked.
        for k, prow in enumerate(row["positions"]):
            j, p = prow["target"], prow["position"]
            if j not in I:
                _fail(text, f"undeclared index {j!r}", here + ("positions", k, "target"))
            if prow["up"] not in I:
                _fail(text, f"undeclared index {prow['up']!r}", here + ("positions", k, "up"))
            key = (i, s, s1, j, p)
            if key in tabs.up:
                _fail(text, f"position {p!r} towards {j!r} listed twice", here + ("positions", k))
            tabs.up[key], tabs.ul[key], tabs.ur[key] = prow["up"], prow["ul"], prow["ur"]
    pairs = ExtentFamily(C, C.shape_family)
    for i in I:
        for elem in pairs.elements(i):
            if (i, elem.shape, elem.assign) not in tabs.bullet:
                _fail(
                    text,
                    f"bullet table has no row for index {i!r}, shape {elem.shape!r}, "
                    f"family {elem.assign!r}",
                    ("icms", "bullet"),
                )
    return tabs


# -- writing --------------------------------------------------------------------------------


def label(x: Any) -> Any:
    """A JSON scalar naming ``x`` (strings, ints and bools pass through)."""
    if isinstance(x, (str, int, bool)):
        return x
    if isinstance(x, tuple):
        return ":".join(str(label(y)) for y in x)
    if isinstance(x, Assignment):
        return ",".join(f"{label(k)}>{label(v)}" for k, v in x.canon_items())
    return repr(x)


def spec_document(
    C: IndexedContainer, m: Icms | None, name: str, budget: int | None = None, comment: str = ""
) -> dict:
    """A spec document for a finite container (and structure) with string indices."""
    I = C.index_set
    doc: dict = {"spec_version": SPEC_VERSION, "name": name}
    if comment:
        doc["comment"] = comment
    doc["index_set"] = [str(i) for i in I]
    doc["shapes"] = {str(i): [label(s) for s in C.shapes(i)] for i in I}
    doc["positions"] = [
        {"index": str(i), "shape": label(s), "target": str(j), "labels": [label(p) for p in C.positions(i, s, j)]}
        for i in I
        for s in C.shapes(i)
        for j in I
        if C.positions(i, s, j)
    ]
    if budget is not None:
        doc["budget"] = budget
    if m is None:
        return doc
    tabs = tabulate_icms(C, m)
    rows = []
    for (i, s, s1), r in tabs.bullet.items():
        rows.append(
            {
                "index": str(i),
                "shape": label(s),
                "family": [[str(j), label(p), label(t)] for (j, p), t in s1.canon_items()],
                "result": label(r),
                "positions": [
                    {
                        "target": str(j),
                        "position": label(p),
                        "up": str(tabs.up[(i, s, s1, j, p)]),
                        "ul": label(tabs.ul[(i, s, s1, j, p)]),
                        "ur": label(tabs.ur[(i, s, s1, j, p)]),
                    }
                    for j, p in C.position_keys(i, r)
                ],
            }
        )
    doc["icms"] = {"e": {str(i): label(tabs.e[i]) for i in I}, "bullet": rows}
    return doc


def dump_spec(doc: dict) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def load_family(path: str | Path, index_set: IndexSet) -> Family:
    """``{"spec_version": 1, "family": {"A": ["x0", ...], ...}}``."""
    try:
        text = Path(path).read_text("utf-8")
        doc = json.loads(text)
    except (OSError, UnicodeDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc.msg}", (), exc.lineno, exc.colno) from None
    try:
        jsonschema.validate(doc, schema("family.schema.json"))
    except jsonschema.ValidationError as exc:
        _fail(text, exc.message, tuple(exc.absolute_path))
    fam = doc["family"]
    for i in fam:
        if i not in index_set:
            _fail(text, f"undeclared index {i!r}", ("family", i))
    for i in index_set:
        xs = fam.get(i, [])
        if len(set(map(_key, xs))) != len(xs):
            _fail(text, f"duplicate element at {i!r}", ("family", i))
    return Family(index_set, {i: fam.get(i, []) for i in index_set})

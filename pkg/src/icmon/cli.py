"""``icmon``: check structures in spec files, list extents, run the lambda demo.

Exit codes: 0 success, 1 a law fails (or no normal form), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .container import ExtentFamily
from .icms import DEFAULT_BUDGET, check_icms
from .kernel import BudgetExceeded
from .lambda_terms import (
    FuelExhausted,
    ParseError,
    ScopeError,
    beta_normalize,
    parse_subst_map,
    parse_term,
    print_term,
    substitute,
)
from .specfile import REPORT_VERSION, SpecError, load_family, load_spec

EXIT_OK, EXIT_LAW, EXIT_INPUT = 0, 1, 2


def _budget(arg: int | None, spec_budget: int | None) -> int | None:
    if arg is not None:
        n = arg
    elif spec_budget is not None:
        n = spec_budget
    elif os.environ.get("ICMON_BUDGET"):
        try:
            n = int(os.environ["ICMON_BUDGET"])
        except ValueError:
            raise SpecError(f"ICMON_BUDGET must be an integer, got {os.environ['ICMON_BUDGET']!r}")
    else:
        n = DEFAULT_BUDGET
    if n < 0:
        raise SpecError("budget must be nonnegative")
    return None if n == 0 else n


def cmd_check(args) -> int:
    spec = load_spec(args.file)
    budget = _budget(args.budget, spec.budget)
    report = check_icms(spec.container, spec.icms(), budget=budget)
    if args.json:
        doc = {"report_version": REPORT_VERSION, "spec": spec.name, **report.to_json()}
        print(json.dumps(doc, indent=1, ensure_ascii=False, sort_keys=True))
    else:
        mode = "exhaustive" if report.exhaustive else f"sampled, budget {budget}"
        print(f"# {spec.name} ({mode})")
        for line in report.lines():
            print(line)
    return EXIT_OK if report.ok else EXIT_LAW


def cmd_eval(args) -> int:
    spec = load_spec(args.file)
    C = spec.container
    X = load_family(args.family, C.index_set)
    if args.index not in C.index_set:
        raise SpecError(f"undeclared index {args.index!r}")
    fam = ExtentFamily(C, X)
    n = fam.count(args.index)
    print(f"# {n} element(s) at {args.index}")
    for elem in fam.elements(args.index):
        print(f"{elem.shape!r} {elem.assign!r}")
    return EXIT_OK


def cmd_lambda(args) -> int:
    if args.lam == "parse":
        print(print_term(parse_term(args.term, args.scope)))
    elif args.lam == "subst":
        target = args.scope if args.target is None else args.target
        t = parse_term(args.term, args.scope)
        sigma = parse_subst_map(args.map or [], args.scope, target)
        print(print_term(substitute(t, sigma)))
    else:
        t = parse_term(args.term, args.scope)
        try:
            print(print_term(beta_normalize(t, args.fuel, args.scope)))
        except FuelExhausted as exc:
            print(f"error: {exc} (fuel {args.fuel})", file=sys.stderr)
            return EXIT_LAW
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icmon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="check the structure laws in a spec file")
    c.add_argument("file")
    c.add_argument(
        "--budget",
        type=int,
        help="max instances per index before sampling (0 = no limit; default from the "
        f"file, then ICMON_BUDGET, then {DEFAULT_BUDGET})",
    )
    c.add_argument("--json", action="store_true", help="machine-readable report")
    c.set_defaults(run=cmd_check)

    e = sub.add_parser("eval", help="list the extent of a container at an index")
    e.add_argument("file")
    e.add_argument("--family", required=True, help="JSON file with the family X")
    e.add_argument("--index", required=True)
    e.set_defaults(run=cmd_eval)

    lam = sub.add_parser("lambda", help="de Bruijn lambda terms")
    lsub = lam.add_subparsers(dest="lam", required=True)
    for name, help_ in (
        ("parse", "parse and reprint a term"),
        ("subst", "apply a substitution"),
        ("norm", "beta-normalize a term"),
    ):
        q = lsub.add_parser(name, help=help_)
        q.add_argument("term")
        q.add_argument("--scope", type=int, default=0)
        if name == "subst":
            q.add_argument("--target", type=int, help="scope of the result (default: --scope)")
            q.add_argument("--map", action="append", metavar="K=TERM")
        if name == "norm":
            q.add_argument("--fuel", type=int, default=1000)
    lam.set_defaults(run=cmd_lambda)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except SpecError as exc:
        print(f"error: {exc.render(getattr(args, 'file', '') or '')}", file=sys.stderr)
    except (ParseError, ScopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

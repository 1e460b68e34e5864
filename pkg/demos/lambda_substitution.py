"""Substitution on de Bruijn terms, computed by grafting trees of the free container."""

from icmon.lambda_terms import (
    Subst,
    beta_normalize,
    oracle_substitute,
    parse_term,
    print_term,
    substitute,
    to_extent,
)

t = parse_term("\\. 1 (\\. 0 2)", 1)
print("term at scope 1:", print_term(t))
elem = to_extent(t, 1)
print("its leaves:", sorted(elem.assign.items()))

sigma = Subst(1, 2, (parse_term("1 0", 2),))
got = substitute(t, sigma)
print("t[0 := 1 0]:", print_term(got))
print("textbook substitution agrees:", got == oracle_substitute(t, sigma))

two = "(\\.\\. 1 (1 0))"
times = "(\\.\\.\\. 2 (1 0))"
print("2 * 2 =", print_term(beta_normalize(parse_term(f"{times} {two} {two}"))))

"""Seeded corpus of linear constant-coefficient ODE systems."""

import random
from fractions import Fraction

from odesymm.parser import parse_problem


def _coef(rng):
    if rng.random() < 0.4:
        return Fraction(0)
    return Fraction(rng.randint(-5, 5), rng.randint(1, 4))


def _term(c, name, k):
    d = name if k == 0 else f"diff({name},t,{k})" if k > 1 else f"diff({name},t)"
    return f"({c})*{d}"


def linear_system_text(rng) -> str:
    n = rng.randint(1, 2)
    names = ["y", "z"][:n]
    orders = [rng.randint(1, 3) for _ in range(n)]
    eqs = []
    for i, (nm, r) in enumerate(zip(names, orders)):
        terms = []
        for j, (other, ro) in enumerate(zip(names, orders)):
            if j != i and rng.random() < 0.5:
                continue
            for k in range(ro):
                c = _coef(rng)
                if c:
                    terms.append(_term(c, other, k))
        rhs = " + ".join(terms) if terms else "0"
        lead = f"diff({nm},t,{r})" if r > 1 else f"diff({nm},t)"
        eqs.append(f"{lead} = {rhs}")
    return f"ode: {', '.join(eqs)}; vars: {', '.join(f'{nm}(t)' for nm in names)};"


def linear_corpus(seed: int = 5, count: int = 50):
    rng = random.Random(seed)
    return [linear_system_text(rng) for _ in range(count)]


def parsed_corpus(seed: int = 5, count: int = 50):
    return [parse_problem(t) for t in linear_corpus(seed, count)]

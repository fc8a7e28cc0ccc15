"""Seeded random expression trees for property checks."""

import random
from fractions import Fraction

from odesymm.symkernel import Symbol, add, fn, mul, num, power, sym

X, Y, T = Symbol("x"), Symbol("y"), Symbol("t", "time")
SYMBOLS = (X, Y, T)


def random_tree(rng: random.Random, depth: int = 8, kernels: bool = True):
    """A random expression of nesting depth at most ``depth``."""
    if depth <= 1 or rng.random() < 0.3:
        if rng.random() < 0.35:
            return num(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        return sym(rng.choice(SYMBOLS))
    op = rng.random()
    sub = depth - 1
    if op < 0.35:
        return add(*[random_tree(rng, sub, kernels) for _ in range(rng.randint(2, 3))])
    if op < 0.65:
        return mul(*[random_tree(rng, sub, kernels) for _ in range(2)])
    if op < 0.8 or not kernels:
        base = random_tree(rng, min(sub, 3), kernels)
        q = rng.choice([2, 3, -1, Fraction(1, 2)])
        if q == -1 and base.kind == "num" and base.value == 0:
            q = 2
        try:
            return power(base, q)
        except ZeroDivisionError:
            return base
    name = rng.choice(["exp", "ln", "sin", "cos", "sqrt"])
    arg = random_tree(rng, min(sub, 2), kernels=False)
    if name == "ln" and arg.kind == "num" and arg.value <= 0:
        arg = add(arg, num(abs(arg.value) + 1))
    return fn(name, arg)


def trees(seed: int, count: int, depth: int = 8, kernels: bool = True):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        try:
            out.append(random_tree(rng, depth, kernels))
        except ZeroDivisionError:
            continue
    return out

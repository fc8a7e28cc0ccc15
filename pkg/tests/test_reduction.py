import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odesymm.parser import derivative_symbol, parse_problem
from odesymm.reduction import (
    CanonicalizationError, build_state_map, canonicalize, from_state,
    reduce_problem, state_symbol,
)
from odesymm.symkernel import is_zero, ln, normalize, power, sym

d = derivative_symbol
X = [None] + [sym(state_symbol(k)) for k in range(1, 7)]


def load(name):
    with open(f"problems/{name}.ode") as fh:
        return parse_problem(fh.read())


def test_kamke_canonical_form():
    cs = canonicalize(load("kamke120"))
    t, y = sym(cs.time), sym(d("y", 0))
    assert cs.orders == (1,)
    assert is_zero(cs.rhs[0] - y * (t * ln(t**2 / y) + 2) / t)
    # substituting back satisfies the original equation
    (lhs, rhs), = load("kamke120").equations
    from odesymm.symkernel import substitute
    assert is_zero(substitute(lhs - rhs, {d("y", 1): cs.rhs[0]}))


def test_oscillator_canonical_form():
    cs = canonicalize(parse_problem("ode: diff(x,t,2)+3*diff(x,t)+2*x=0; vars: x(t);"))
    assert cs.rhs[0] == normalize(-3 * sym(d("x", 1)) - 2 * sym(d("x", 0)))


def test_kepler_canonical_form():
    cs = canonicalize(load("kepler"))
    q1, q2 = sym(d("q1", 0)), sym(d("q2", 0))
    den = power(q1**2 + q2**2, Fraction(3, 2))
    assert cs.orders == (2, 2)
    assert is_zero(cs.rhs[0] + q1 / den) and is_zero(cs.rhs[1] + q2 / den)


def test_state_maps():
    cs = canonicalize(parse_problem("ode: y''=0; vars: y(t);"))
    sm = build_state_map(cs)
    assert sm.forward == {d("y", 0): state_symbol(1), d("y", 1): state_symbol(2)}
    sm = build_state_map(canonicalize(load("kepler")))
    assert sm.forward == {d("q1", 0): state_symbol(1), d("q1", 1): state_symbol(2),
                          d("q2", 0): state_symbol(3), d("q2", 1): state_symbol(4)}
    assert {v: k for k, v in sm.forward.items()} == sm.inverse
    sm = build_state_map(canonicalize(parse_problem("ode: y'=y; vars: y(t);")))
    assert sm.forward == {d("y", 0): state_symbol(1)}


def test_velocity_vectors():
    _, _, v = reduce_problem(parse_problem("ode: x''=-3*x'-2*x; vars: x(t);"))
    assert v.components == (X[2], normalize(-3 * X[2] - 2 * X[1]))
    _, _, v = reduce_problem(parse_problem("ode: y'=y; vars: y(t);"))
    assert v.components == (X[1],)
    _, _, v = reduce_problem(load("kepler"))
    den = power(X[1] ** 2 + X[3] ** 2, Fraction(3, 2))
    assert v.components[0] == X[2] and v.components[2] == X[4]
    assert is_zero(v.components[1] + X[1] / den) and is_zero(v.components[3] + X[3] / den)


def test_coupled_leading_derivatives_are_solved():
    cs = canonicalize(parse_problem("ode: u'' + v' = u, v' - u'' = v; vars: u(t), v(t);"))
    u, v = sym(d("u", 0)), sym(d("v", 0))
    assert cs.orders == (2, 1)
    assert is_zero(cs.rhs[0] - (u - v) / 2) and is_zero(cs.rhs[1] - (u + v) / 2)


@pytest.mark.parametrize("text, fragment", [
    ("ode: y' = z; vars: y(t), z(t);", "underdetermined"),
    ("ode: y'' = z'; vars: y(t), z(t);", "underdetermined"),
    ("ode: y'^2 = y; vars: y(t);", "not reducible"),
    ("ode: exp(y') = y; vars: y(t);", "not reducible"),
    ("ode: y'' + z'' = 0, 2*y'' + 2*z'' = 1; vars: y(t), z(t);", "not reducible"),
    ("ode: y' = 1, y' = 2; vars: y(t);", "not reducible"),
])
def test_canonicalization_errors(text, fragment):
    with pytest.raises(CanonicalizationError, match=fragment):
        canonicalize(parse_problem(text))


def _random_system(rng):
    n = rng.randint(1, 3)
    names = ["u", "v", "w"][:n]
    orders = [rng.randint(1, 3) for _ in range(n)]
    eqs = []
    for i in range(n):
        terms = [f"{rng.randint(1, 3)}*{names[i]}{chr(39) * orders[i]}"]
        for j in range(n):
            for k in range(orders[j]):
                c = rng.randint(-2, 2)
                if c:
                    terms.append(f"({c})*t^{rng.randint(0, 1)}*{names[j]}{chr(39) * k}")
        eqs.append(" + ".join(terms) + " = 0")
    return f"ode: {', '.join(eqs)}; vars: {', '.join(nm + '(t)' for nm in names)};", orders


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_block_shift_and_round_trip(seed):
    text, orders = _random_system(random.Random(seed))
    cs, sm, v = reduce_problem(parse_problem(text))
    assert list(cs.orders) == orders
    for i, (b, r) in enumerate(sm.blocks):
        for j in range(r - 1):
            comp = v.components[b + j]
            assert comp.kind == "sym" and comp.value == sm.states[b + j + 1]
        last = v.components[b + r - 1]
        assert is_zero(from_state(last, sm) - cs.rhs[i])
        allowed = {cs.time} | set(sm.states)
        assert last.free_symbols <= allowed

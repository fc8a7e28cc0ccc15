import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odesymm.parser import (
    ParseError, derivative_symbol, format_problem, parse_candidate, parse_expression,
    parse_problem,
)
from odesymm.symkernel import Symbol, ln, normalize, num, sym
from trees import SYMBOLS, random_tree

y0, y1, y2 = (derivative_symbol("y", k) for k in range(3))
t = Symbol("t", "time")


def test_kamke_statement():
    src = parse_problem("ode: t*diff(y,t) - y*(t*ln(t^2/y)+2) = 0; vars: y(t);")
    assert src.dependents == ["y"] and src.independent == "t"
    (lhs, rhs), = src.equations
    assert rhs == num(0)
    expected = sym(t) * sym(y1) - sym(y0) * (sym(t) * ln(sym(t) ** 2 / sym(y0)) + 2)
    assert lhs == expected


def test_second_order_equation():
    src = parse_problem("ode: diff(x,t,2) + 3*diff(x,t) + 2*x = 0; vars: x(t);")
    (lhs, _), = src.equations
    assert derivative_symbol("x", 2) in lhs.symbols()


def test_trivial_system():
    src = parse_problem("ode: diff(y,t)=0; vars: y(t);")
    assert src.equations == [(sym(y1), num(0))]


def test_derivative_notations_agree():
    a = parse_problem("ode: diff(y,t,t) = y; vars: y(t);")
    b = parse_problem("ode: y'' = y(t); vars: y(t);")
    c = parse_problem("ode: diff(y(t),t,2) = y; vars: y(t);")
    assert a == b == c


def test_precedence():
    x = Symbol("x")
    p = lambda s: parse_expression(s, {"x": x})
    X = sym(x)
    assert p("-x^2") == -(X**2)
    assert p("2^3^2") == num(2 ** 9)
    assert p("x^-2") == X ** -2
    assert p("1 - x - x") == 1 - 2 * X
    assert p("x/2*x") == X**2 / 2
    assert p("x**2") == X**2
    assert p("0.25*x") == X / 4


def test_params_options_and_hint():
    src = parse_problem("""
        ode: m*diff(x,t,2) + a*diff(x,t) + k*x = 0;  # oscillator
        vars: x(t);
        params: m = 1, a = 3, k = 2/3;
        hint: sum basis{exp(-t), exp(-2*t)};
        opts: split, showgen;
    """)
    assert src.params == {"m": 1, "a": 3, "k": Fraction(2, 3)}
    assert src.hint == "sum basis{exp(-t), exp(-2*t)}"
    assert src.options == ["split", "showgen"]


@pytest.mark.parametrize("text, fragment, line, col", [
    ("ode: y' = foo(t); vars: y(t);", "unknown function kernel 'foo'", 1, 11),
    ("ode: y' = z'; vars: y(t);", "undeclared dependent variable 'z'", 1, 11),
    ("ode: y' = diff(z,t); vars: y(t);", "undeclared dependent variable 'z'", 1, 11),
    ("ode: y' = k*y; vars: y(t); params: k=1, k=2;", "duplicate parameter 'k'", 1, 41),
    ("ode: y' = k*y; vars: y(t);", "undeclared symbol 'k'", 1, 11),
    ("ode: y' = y\n  + ; vars: y(t);", "unexpected ';'", 2, 5),
    ("ode: y' = y; vars: y(t), z(s);", "more than one independent variable", 1, 26),
    ("ode: y' = y; vars: y(t); opts: fast;", "unknown option 'fast'", 1, 32),
    ("ode: y' = y vars: y(t);", "expected ',' or ';'", 1, 13),
    ("ode: y' = y $; vars: y(t);", "unexpected character '$'", 1, 13),
    ("ode: y' = y;", "missing 'vars:'", 1, 1),
    ("ode: y' = diff(y,s); vars: y(t);", "independent variable is 't'", 1, 11),
    ("ode: y' = 1/0; vars: y(t);", "division by zero", 1, 12),
])
def test_located_errors(text, fragment, line, col):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert fragment in info.value.message
    assert (info.value.line, info.value.col) == (line, col)


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="ode:varsy(t)=;,+-*/^ 0123456789'diffln[]#\nxk", max_size=60))
def test_fuzz_never_panics(text):
    try:
        parse_problem(text)
    except ParseError as e:
        assert e.line >= 1 and e.col >= 1 or "missing" in e.message


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_expression_print_parse_round_trip(seed):
    e = random_tree(random.Random(seed), depth=6)
    names = {s.name: s for s in SYMBOLS}
    assert parse_expression(str(e), names) == e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_problem_round_trip(seed):
    rng = random.Random(seed)
    y = sym(y0)
    e = random_tree(rng, depth=4, kernels=False)
    from odesymm.symkernel import substitute
    rhs = substitute(e, {Symbol("x"): y, Symbol("y"): num(2)})
    src = parse_problem(f"ode: y'' + 2*y' = {rhs}; vars: y(t); params: c = -3/4; opts: split;")
    assert parse_problem(format_problem(src)) == src


def test_candidate_parsing():
    src = parse_problem("ode: t*diff(y,t) - y*(t*ln(t^2/y)+2) = 0; vars: y(t);")
    xi, (eta,) = parse_candidate("xi=-1/2, eta=-y/t", src)
    assert xi == num(Fraction(-1, 2)) and eta == normalize(-sym(y0) / sym(t))
    xi, (eta,) = parse_candidate("eta = y*ln(t^2/y)", src)
    assert xi == num(0)
    with pytest.raises(ParseError):
        parse_candidate("zeta=1", src)

import random
from fractions import Fraction

import pytest

from corpus import parsed_corpus
from helpers import load
from odesymm.extract import GeneratorSet
from odesymm.parser import derivative_symbol, parse_problem
from odesymm.pipeline import FindOptions, combine, find
from odesymm.reduction import reduce_problem, state_symbol
from odesymm.symkernel import Symbol, num, sym
from odesymm.symkernel import rational as R
from odesymm.verify import (
    CandidateError, FAIL, PASS, prolong, residual, verify_candidate, verify_generator,
)

t = sym(Symbol("t", "time"))
OSC = "ode: diff(x,t,2) = -3*diff(x,t) - 2*x; vars: x(t);"


def X(k):
    return R.rsym(state_symbol(k))


def test_translation_prolongs_to_zero():
    for name in ("kamke120.ode", "oscillator.ode", "kepler.ode"):
        src, cs, sm, v = load(name)
        g = GeneratorSet(num(1), tuple(num(0) for _ in src.dependents))
        assert all(c.is_zero() for c in prolong(g, sm, v))


def test_prolongation_by_hand():
    src, cs, sm, v = load(OSC)
    x, xp = sym(derivative_symbol("x", 0)), sym(derivative_symbol("x", 1))
    assert prolong(GeneratorSet(num(0), (x,)), sm, v) == [X(1), X(2)]
    dyn = prolong(GeneratorSet(num(0), (xp,)), sm, v)
    assert dyn[0] == X(2)
    assert R.rsub(dyn[1], R.rsum([R.rscale(X(2), -3), R.rscale(X(1), -2)])).is_zero()


@pytest.mark.parametrize("cand", [
    "xi=-1/2, eta=-y/t",
    "xi=0, eta=-y*exp(-t)",
    "xi=0, eta=-y/exp(t)",
    "xi=1, eta=2*y/t",
    "xi=0, eta=y*ln(t^2/y)",
])
def test_kamke_generators_pass(cand):
    src, cs, sm, v = load("kamke120.ode")
    rep = verify_candidate(cand, src, sm, v)
    assert rep.verdict == PASS
    assert all(e.zero for e in rep.evidence)


OSC_CLOSED_FORMS = [
    "xi=0, eta=x",
    "xi=0, eta=-m*x'/k",
    "xi=1, eta=0",
    "xi=0, eta=exp(-a*t/(2*m))*exp(t*sqrt(a^2-4*k*m)/(2*m))",
    "xi=0, eta=exp(-a*t/(2*m))*exp(-t*sqrt(a^2-4*k*m)/(2*m))",
]


@pytest.mark.parametrize("params", [(1, 3, 2), (2, 5, 2), (1, 4, 3), (3, 7, 2), (1, 3, 1)])
@pytest.mark.parametrize("cand", OSC_CLOSED_FORMS)
def test_oscillator_symbolic_forms_after_substitution(params, cand):
    m, a, k = params
    src = parse_problem(f"ode: m*diff(x,t,2)+a*diff(x,t)+k*x=0; vars: x(t); params: m={m}, a={a}, k={k};")
    cs, sm, v = reduce_problem(src)
    rep = verify_candidate(cand, src, sm, v)
    assert rep.verdict == PASS, (params, cand, [str(r) for r in rep.residuals])


def test_exponential_growth_rejects_constant_shift():
    src, cs, sm, v = load("ode: diff(y,t)=y; vars: y(t);")
    rep = verify_candidate("xi=0, eta=1", src, sm, v)
    assert rep.verdict == FAIL
    assert [str(r) for r in rep.residuals] == ["-1"]


def test_residual_function_matches_report():
    src, cs, sm, v = load("ode: diff(y,t)=y; vars: y(t);")
    g = GeneratorSet(num(0), (num(1),))
    assert [str(r) for r in residual(prolong(g, sm, v), g.xi, v)] == ["-1"]


def test_candidate_beyond_state_order_is_rejected():
    src, cs, sm, v = load("kamke120.ode")
    with pytest.raises(CandidateError):
        verify_candidate("xi=0, eta=y'", src, sm, v)


def test_costate_candidate_is_rejected():
    src, cs, sm, v = load("kamke120.ode")
    with pytest.raises(CandidateError):
        verify_generator(GeneratorSet(sym(Symbol("psi[1]", "costate")), (num(0),)), sm, v)


def _corpus_generators():
    out = []
    for src in parsed_corpus(count=12):
        res = find(src, FindOptions(split=True))
        cs, sm, v, _ = res.context
        out.append((src, sm, v, res.generators))
    return out


def test_linearity_of_the_symmetry_condition():
    rng = random.Random(11)
    for src, sm, v, gens in _corpus_generators():
        if len(gens) < 2:
            continue
        pick = rng.sample(gens, 2)
        coeffs = [Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for _ in pick]
        assert verify_generator(combine(pick, coeffs), sm, v).verdict == PASS


def test_failure_detection_by_t_squared():
    checked = 0
    for src, sm, v, gens in _corpus_generators():
        for g in gens:
            bumped = GeneratorSet(g.xi, (g.eta[0] + t ** 2,) + tuple(g.eta[1:]))
            t2 = GeneratorSet(num(0), (t ** 2,) + tuple(num(0) for _ in g.eta[1:]))
            if verify_generator(t2, sm, v).passed:
                continue   # t^2 is itself in the symmetry span here
            assert verify_generator(bumped, sm, v).verdict == FAIL
            checked += 1
    assert checked > 20

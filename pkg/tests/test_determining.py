import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import load
from odesymm.determining import (
    DeterminingError, build_invariance_polynomial, costate, determining_system, flatten_psi,
    invariance_polynomial_rat, make_profile, psidot, split_coefficients, xdot,
)
from odesymm.reduction import VelocityVector, state_symbol
from odesymm.symkernel import Symbol, from_rat, is_zero, num, sym, to_rat
from odesymm.symkernel import rational as R

t = Symbol("t", "time")


def velocity(*comps, r=None):
    comps = [c if not isinstance(c, (int, Fraction)) else num(c) for c in comps]
    states = tuple(state_symbol(k) for k in range(1, len(comps) + 1))
    return VelocityVector(tuple(comps), t, states)


def x(k):
    return sym(state_symbol(k))


def zero_values(dp):
    return {F: R.R_ZERO for F in dp.unknowns()}


def test_invariance_polynomial_for_exponential_growth_by_hand():
    v = velocity(x(1))
    dp = make_profile("minimal", t, v.states)
    X, W = sym(dp.X[0]), sym(dp.W[0][0])
    psi, xd = sym(costate(1)), sym(xdot(1))
    Tt = sym(dp.T.diff(t))
    Xx = sym(dp.X[0].diff(state_symbol(1)))
    # A = psi (X + x T') + psi W x ; B = -psi W - psi X_x ; C = 0
    expected = psi * (X + x(1) * Tt) + psi * W * x(1) + (-psi * W - psi * Xx) * xd
    assert is_zero(build_invariance_polynomial(v, dp) - expected)


def test_zero_velocity_shape():
    v = velocity(0, 0)
    dp = make_profile("full", t, v.states)
    poly = invariance_polynomial_rat(v, dp)
    ds = split_coefficients(from_rat(poly), 2, dp)
    # phi = 0 leaves A = -psi.X_t, B_j = -Psi_j - psi.X_{x_j}, C_j = -psi.X_{psi_j}
    psis = [R.rsym(costate(k)) for k in (1, 2)]
    A = R.rsum([R.rneg(R.rmul(p, R.rsym(Xi.diff(t)))) for p, Xi in zip(psis, dp.X)])
    assert R.rsub(to_rat(ds.groupA), A).is_zero()
    for j in range(2):
        B = R.rsum([R.rneg(R.rsym(dp.Psi[j]))] + [R.rneg(R.rmul(p, R.rsym(Xi.diff(state_symbol(j + 1)))))
                                                  for p, Xi in zip(psis, dp.X)])
        C = R.rsum([R.rneg(R.rmul(p, R.rsym(Xi.diff(costate(j + 1))))) for p, Xi in zip(psis, dp.X)])
        assert R.rsub(to_rat(ds.groupB[j]), B).is_zero()
        assert R.rsub(to_rat(ds.groupC[j]), C).is_zero()


@pytest.mark.parametrize("name", ["kamke120.ode", "oscillator.ode", "kepler.ode"])
@pytest.mark.parametrize("mode", ["minimal", "default", "full"])
def test_zero_assignment_kills_polynomial(name, mode):
    _, _, _, v = load(name)
    dp = make_profile(mode, v.time, v.states)
    assert invariance_polynomial_rat(v, dp, zero_values(dp)).is_zero()


def test_group_counts():
    ds = determining_system(velocity(x(1)), "minimal")
    assert (1, len(ds.groupB), len(ds.groupC)) == (1, 1, 1)
    _, _, _, v = load("kepler.ode")
    ds = determining_system(v)
    assert (len(ds.groupB), len(ds.groupC)) == (4, 4)
    assert len(ds.flattened) == 4 * (1 + 4)


def test_zero_polynomial_splits_to_zero_groups():
    ds = split_coefficients(num(0), 2)
    assert to_rat(ds.groupA).is_zero()
    assert all(to_rat(b).is_zero() for b in ds.groupB + ds.groupC)


def test_flattened_pdes_for_exponential_growth():
    ds = determining_system(velocity(x(1)), "minimal")
    assert [p.label for p in ds.flattened] == ["A/psi[1]", "B[1]/psi[1]"]
    assert all(costate(1) not in p.rat.free for p in ds.flattened)


def test_full_profile_keeps_costates():
    ds = determining_system(velocity(x(1)), "full")
    assert [p.label for p in ds.flattened] == ["A", "B[1]", "C[1]"]
    assert all(costate(1) in p.rat.free for p in ds.flattened)


def test_zero_assignment_empties_flattening():
    v = velocity(x(1))
    dp = make_profile("default", t, v.states)
    poly = invariance_polynomial_rat(v, dp, zero_values(dp))
    ds = split_coefficients(from_rat(poly), 1, dp)
    assert flatten_psi(ds, dp) == []


def test_nonlinear_dotted_dependence_is_rejected():
    with pytest.raises(DeterminingError):
        split_coefficients(sym(xdot(1)) ** 2, 1)


def test_flattened_pdes_are_first_order_linear_homogeneous():
    _, _, _, v = load("kepler.ode")
    for mode in ("minimal", "default", "full"):
        ds = determining_system(v, mode)
        for p in ds.flattened:
            funcs = [s for s in p.rat.free if s.role == "function"]
            assert funcs and all(f.order <= 1 for f in funcs)
            zero = R.rsubs(p.rat, {f: R.R_ZERO for f in funcs})
            assert zero.is_zero()
            for f in funcs:
                assert R.rdiff(R.rdiff(p.rat, f), f).is_zero()


def _random_velocity(rng, r):
    xs = [x(k) for k in range(1, r + 1)]
    comps = []
    for _ in range(r):
        e = num(0)
        for s in [sym(t)] + xs:
            c = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            if c:
                e = e + c * s * (s if rng.random() < 0.3 else 1)
        comps.append(e)
    return velocity(*comps)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.sampled_from(["minimal", "default", "full"]))
def test_reconstruction_property(seed, r, mode):
    v = _random_velocity(random.Random(seed), r)
    dp = make_profile(mode, t, v.states)
    poly = invariance_polynomial_rat(v, dp)
    ds = split_coefficients(from_rat(poly), r, dp)
    back = R.rsum([to_rat(ds.groupA)]
                  + [R.rmul(to_rat(b), R.rsym(xdot(j))) for j, b in enumerate(ds.groupB, 1)]
                  + [R.rmul(to_rat(c), R.rsym(psidot(j))) for j, c in enumerate(ds.groupC, 1)])
    assert R.rsub(back, poly).is_zero()
    if mode != "full":
        assert len(flatten_psi(ds, dp)) <= r * (1 + r)

"""Invariance condition of the abnormal control system and its determining PDEs.

For the control system x' = phi(t, x) with costates psi, the abnormal
Hamiltonian is H = psi . phi.  Requiring invariance under the generators
(T, X, Psi) and expanding total time derivatives gives a polynomial in the
dotted variables x'_j and psi'_j whose coefficients must all vanish.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .reduction import VelocityVector
from .symkernel import Expr, FunctionSymbol, NonPolynomialError, Symbol, from_rat, to_rat
from .symkernel import rational as R
from .symkernel.ops import collect_rat

MODES = ("minimal", "default", "full")


class DeterminingError(RuntimeError):
    """An internal invariant of the determining system was violated."""


def costate(k: int) -> Symbol:
    return Symbol(f"psi[{k}]", "costate")


def xdot(k: int) -> Symbol:
    return Symbol(f"xdot[{k}]", "dotted")


def psidot(k: int) -> Symbol:
    return Symbol(f"psidot[{k}]", "dotted")


@dataclass(frozen=True)
class DependencyProfile:
    """Which coordinates each unknown generator function may depend on.

    Under the minimal and default modes the costate generators are sought as
    Psi_j = sum_i psi_i W[j,i](t, x); ``W`` then holds those coefficient
    functions and ``Psi`` is empty.
    """

    mode: str
    time: Symbol
    states: tuple
    costates: tuple
    T: FunctionSymbol
    X: tuple
    Psi: tuple = ()
    W: tuple = ()          # W[j][i] as nested tuples

    @property
    def r(self) -> int:
        return len(self.states)

    def unknowns(self) -> list:
        out = [self.T, *self.X, *self.Psi]
        for row in self.W:
            out.extend(row)
        return out

    def psi_rat(self, j: int, values: dict | None = None):
        """Psi_j (0-based) as a rational form, optionally with concrete unknowns."""
        val = (lambda F: values.get(F, R.R_ZERO)) if values is not None else R.rsym
        if self.mode == "full":
            return val(self.Psi[j])
        return R.rsum([R.rmul(R.rsym(p), val(w)) for p, w in zip(self.costates, self.W[j])])


def make_profile(mode: str, time: Symbol, states) -> DependencyProfile:
    if mode not in MODES:
        raise ValueError(f"unknown dependency mode {mode!r}")
    states = tuple(states)
    r = len(states)
    psis = tuple(costate(k) for k in range(1, r + 1))
    tx = (time,) + states
    if mode == "full":
        args = tx + psis
        return DependencyProfile(
            mode, time, states, psis, FunctionSymbol("T", args),
            tuple(FunctionSymbol(f"X[{k}]", args) for k in range(1, r + 1)),
            tuple(FunctionSymbol(f"Psi[{k}]", args) for k in range(1, r + 1)))
    xargs = states if mode == "minimal" else tx
    W = tuple(tuple(FunctionSymbol(f"W[{j},{i}]", tx) for i in range(1, r + 1)) for j in range(1, r + 1))
    return DependencyProfile(
        mode, time, states, psis, FunctionSymbol("T", (time,)),
        tuple(FunctionSymbol(f"X[{k}]", xargs) for k in range(1, r + 1)), (), W)


def invariance_polynomial_rat(v: VelocityVector, dp: DependencyProfile, values: dict | None = None):
    """The invariance polynomial; ``values`` substitutes concrete generators for the unknowns."""
    t, xs, ps = dp.time, dp.states, dp.costates
    r = dp.r
    phi = v.rats
    val = (lambda F: values.get(F, R.R_ZERO)) if values is not None else R.rsym
    T = val(dp.T)
    X = [val(f) for f in dp.X]
    Psi = [dp.psi_rat(j, values) for j in range(r)]
    psi = [R.rsym(p) for p in ps]
    H = R.rsum([R.rmul(p, f) for p, f in zip(psi, phi)])          # psi . phi
    Tt = R.rdiff(T, t)
    # A: psi^T (phi_t T + phi_x X + phi T_t - X_t) + Psi^T phi
    inner = []
    for i in range(r):
        parts = [R.rmul(R.rdiff(phi[i], t), T), R.rmul(phi[i], Tt), R.rneg(R.rdiff(X[i], t))]
        parts += [R.rmul(R.rdiff(phi[i], xs[k]), X[k]) for k in range(r)]
        inner.append(R.rmul(psi[i], R.rsum(parts)))
    A = R.rsum(inner + [R.rmul(Psi[i], phi[i]) for i in range(r)])
    # B_j: -Psi_j + (psi . phi) T_{x_j} - sum_i psi_i X_i,x_j
    B = []
    for j in range(r):
        parts = [R.rneg(Psi[j]), R.rmul(H, R.rdiff(T, xs[j]))]
        parts += [R.rneg(R.rmul(psi[i], R.rdiff(X[i], xs[j]))) for i in range(r)]
        B.append(R.rsum(parts))
    # C_j: (psi . phi) T_{psi_j} - sum_i psi_i X_i,psi_j
    C = []
    for j in range(r):
        parts = [R.rmul(H, R.rdiff(T, ps[j]))]
        parts += [R.rneg(R.rmul(psi[i], R.rdiff(X[i], ps[j]))) for i in range(r)]
        C.append(R.rsum(parts))
    poly = R.rsum([A] + [R.rmul(B[j], R.rsym(xdot(j + 1))) for j in range(r)]
                  + [R.rmul(C[j], R.rsym(psidot(j + 1))) for j in range(r)])
    return poly


def build_invariance_polynomial(v: VelocityVector, dp: DependencyProfile) -> Expr:
    return from_rat(invariance_polynomial_rat(v, dp))


class ScalarPDE(NamedTuple):
    label: str      # e.g. "A/psi[1]" or "B[2]/psi[1]"
    rat: object     # rational form; use .expr for the tree

    @property
    def expr(self) -> Expr:
        return from_rat(self.rat)


@dataclass
class DeterminingSystem:
    groupA: Expr
    groupB: list
    groupC: list
    profile: DependencyProfile | None = None
    flattened: list | None = None

    @property
    def unknowns(self) -> list:
        return self.profile.unknowns() if self.profile else []


def _dotted_count(r_poly) -> int:
    r = 0
    for s in r_poly.free:
        if s.role == "dotted":
            r = max(r, int(s.name[s.name.index("[") + 1:-1]))
    return r


def split_coefficients(poly: Expr, r: int | None = None, profile: DependencyProfile | None = None):
    rp = to_rat(poly)
    if r is None:
        r = profile.r if profile is not None else _dotted_count(rp)
    xd = [xdot(k) for k in range(1, r + 1)]
    pd = [psidot(k) for k in range(1, r + 1)]
    try:
        parts = collect_rat(rp, xd + pd)
    except NonPolynomialError as exc:
        raise DeterminingError(f"invariance polynomial is not polynomial in the dotted variables: {exc}")
    A = R.R_ZERO
    B = [R.R_ZERO] * r
    C = [R.R_ZERO] * r
    for mono, coeff in parts.items():
        if not mono:
            A = coeff
        elif len(mono) == 1 and mono[0][1] == 1:
            s = mono[0][0]
            if s in xd:
                B[xd.index(s)] = coeff
            else:
                C[pd.index(s)] = coeff
        else:
            raise DeterminingError("invariance polynomial is non-linear in the dotted variables")
    return DeterminingSystem(from_rat(A), [from_rat(b) for b in B], [from_rat(c) for c in C], profile)


def flatten_psi(ds: DeterminingSystem, dp: DependencyProfile) -> list:
    """Scalar PDEs in the unknown functions; drops equations that are 0 = 0."""
    out = []
    groups = [("A", ds.groupA)] + [(f"B[{j}]", b) for j, b in enumerate(ds.groupB, 1)]
    if dp.mode == "full":
        groups += [(f"C[{j}]", c) for j, c in enumerate(ds.groupC, 1)]
        for label, e in groups:
            r = to_rat(e)
            if not r.is_zero():
                out.append(ScalarPDE(label, r))
        ds.flattened = out
        return out
    for j, c in enumerate(ds.groupC, 1):
        if not to_rat(c).is_zero():
            raise DeterminingError(f"C[{j}] does not vanish although no unknown depends on psi")
    psis = list(dp.costates)
    for label, e in groups:
        try:
            parts = collect_rat(to_rat(e), psis)
        except NonPolynomialError as exc:
            raise DeterminingError(f"{label} is not linear in the costates: {exc}")
        for mono, coeff in parts.items():
            if len(mono) != 1 or mono[0][1] != 1:
                if coeff.is_zero():
                    continue
                raise DeterminingError(f"{label} is not linear homogeneous in the costates")
            if not coeff.is_zero():
                out.append(ScalarPDE(f"{label}/{mono[0][0].name}", coeff))
    out.sort(key=lambda p: _label_key(p.label))
    ds.flattened = out
    return out


def _label_key(label: str):
    head, _, tail = label.partition("/")
    g = head[0]
    j = int(head[2:-1]) if "[" in head else 0
    i = int(tail[4:-1]) if tail else 0
    return (g, j, i)


def determining_system(v: VelocityVector, mode: str = "default"):
    """Convenience: profile, polynomial, split groups and flattened PDEs."""
    dp = make_profile(mode, v.time, v.states)
    poly = invariance_polynomial_rat(v, dp)
    ds = split_coefficients(from_rat(poly), dp.r, dp)
    flatten_psi(ds, dp)
    return ds

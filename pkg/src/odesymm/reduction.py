"""Canonical explicit form, state variables, and the first-order velocity vector."""

from __future__ import annotations

from dataclasses import dataclass

from .parser import ProblemSource, derivative_symbol
from .symkernel import Expr, NonPolynomialError, Symbol, from_rat, num, substitute, sym, to_rat
from .symkernel import rational as R
from .symkernel.ops import collect_rat


class CanonicalizationError(ValueError):
    pass


@dataclass(frozen=True)
class CanonicalSystem:
    names: tuple          # dependent variable names
    orders: tuple         # r_1..r_n
    rhs: tuple            # phi_1..phi_n as expressions
    time: Symbol

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def r(self) -> int:
        return sum(self.orders)

    def leading(self, i: int) -> Symbol:
        return derivative_symbol(self.names[i], self.orders[i])

    def coordinates(self) -> list:
        """t followed by y_i^(j), j < r_i, in block order."""
        return [self.time] + [derivative_symbol(nm, j) for nm, r in zip(self.names, self.orders)
                              for j in range(r)]


@dataclass(frozen=True)
class StateMap:
    forward: dict          # derivative symbol -> state symbol
    inverse: dict          # state symbol -> derivative symbol
    blocks: tuple          # (start index, r_i) per dependent variable, 0-based
    states: tuple          # x[1]..x[r]

    def block_of(self, k: int):
        """(variable index, derivative order) of 0-based state index k."""
        for i, (b, r) in enumerate(self.blocks):
            if b <= k < b + r:
                return i, k - b
        raise IndexError(k)


@dataclass(frozen=True)
class VelocityVector:
    components: tuple      # phi-hat_1..phi-hat_r as expressions in (t, x)
    time: Symbol
    states: tuple

    @property
    def rats(self) -> tuple:
        return tuple(to_rat(c) for c in self.components)


def state_symbol(k: int) -> Symbol:
    """1-based state symbol x[k]."""
    return Symbol(f"x[{k}]", "state")


def canonicalize(src: ProblemSource) -> CanonicalSystem:
    t = src.time
    binds = {s: num(src.params[n]) for n, s in src.param_symbols.items()}
    eqs = [to_rat(substitute(l - r, binds)) for l, r in src.equations]
    orders = []
    for name in src.dependents:
        k = 0
        for e in eqs:
            for s in e.free:
                if s.role == "dependent" and s.name.rstrip("'") == name:
                    k = max(k, len(s.name) - len(name))
        orders.append(k)
    for name, k in zip(src.dependents, orders):
        if k == 0:
            raise CanonicalizationError(f"underdetermined: {name!r} has no differential equation")
    n = len(src.dependents)
    if len(eqs) < n:
        raise CanonicalizationError(f"underdetermined: {n} dependent variables but {len(eqs)} equations")
    if len(eqs) > n:
        raise CanonicalizationError(
            f"not reducible to canonical form: {len(eqs)} equations for {n} dependent variables")
    lead = [derivative_symbol(nm, k) for nm, k in zip(src.dependents, orders)]
    # rows: sum_j A[i][j] * lead_j + b_i = 0
    A, b = [], []
    for idx, e in enumerate(eqs, 1):
        try:
            parts = collect_rat(e, lead)
        except NonPolynomialError:
            raise CanonicalizationError(
                f"not reducible to canonical form: equation {idx} is not linear in the leading derivatives")
        row = [R.R_ZERO] * n
        const = R.R_ZERO
        for mono, coeff in parts.items():
            if not mono:
                const = coeff
            elif len(mono) == 1 and mono[0][1] == 1:
                row[lead.index(mono[0][0])] = coeff
            else:
                raise CanonicalizationError(
                    f"not reducible to canonical form: equation {idx} is not linear in the leading derivatives")
        A.append(row)
        b.append(R.rneg(const))
    sol = _solve(A, b)
    if sol is None:
        raise CanonicalizationError(
            "not reducible to canonical form: the leading derivatives cannot be isolated")
    return CanonicalSystem(tuple(src.dependents), tuple(orders), tuple(from_rat(s) for s in sol), t)


def _solve(A, b):
    """Gauss-Jordan over rational functions; None when singular."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for c in range(n):
        p = next((i for i in range(c, n) if not M[i][c].is_zero()), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = R.rinv(M[c][c])
        M[c] = [R.rmul(v, inv) for v in M[c]]
        for i in range(n):
            if i != c and not M[i][c].is_zero():
                f = M[i][c]
                M[i] = [R.rsub(v, R.rmul(f, w)) for v, w in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]


def build_state_map(cs: CanonicalSystem) -> StateMap:
    forward, inverse, blocks, states = {}, {}, [], []
    k = 0
    for name, r in zip(cs.names, cs.orders):
        blocks.append((k, r))
        for j in range(r):
            d, x = derivative_symbol(name, j), state_symbol(k + 1)
            forward[d] = x
            inverse[x] = d
            states.append(x)
            k += 1
    return StateMap(forward, inverse, tuple(blocks), tuple(states))


def build_velocity(cs: CanonicalSystem, sm: StateMap) -> VelocityVector:
    fwd = {d: sym(x) for d, x in sm.forward.items()}
    comps = []
    for i, (b, r) in enumerate(sm.blocks):
        for j in range(r - 1):
            comps.append(sym(sm.states[b + j + 1]))
        comps.append(substitute(cs.rhs[i], fwd))
    return VelocityVector(tuple(comps), cs.time, sm.states)


def reduce_problem(src: ProblemSource):
    cs = canonicalize(src)
    sm = build_state_map(cs)
    return cs, sm, build_velocity(cs, sm)


def to_state(e: Expr, sm: StateMap) -> Expr:
    return substitute(e, {d: sym(x) for d, x in sm.forward.items()})


def from_state(e: Expr, sm: StateMap) -> Expr:
    return substitute(e, {x: sym(d) for x, d in sm.inverse.items()})

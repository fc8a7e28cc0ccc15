"""Public calculus and simplification operations on expressions."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import rational as R
from .expr import Expr, as_expr, from_rat, num, to_rat, to_string
from .symbols import SYM, Symbol

DEFAULT_SEED = 20050917
DEFAULT_POINTS = 8
DEFAULT_PREC = 120
TOLERANCE = mpmath.mpf(10) ** -30


class InconclusiveZeroTest(ArithmeticError):
    """Every sampled point of the randomized zero test hit a pole or domain error."""


class NonPolynomialError(ValueError):
    """An expression depends non-polynomially on a requested indeterminate."""


def differentiate(e: Expr, s: Symbol) -> Expr:
    return from_rat(R.rdiff(to_rat(as_expr(e)), s))


def substitute(e: Expr, bindings: dict) -> Expr:
    """Simultaneous substitution followed by normalization."""
    mapping = {k: to_rat(as_expr(v)) for k, v in bindings.items()}
    return from_rat(R.rsubs(to_rat(as_expr(e)), mapping))


def _divisor_bases(e: Expr, out: list):
    if e.kind == "pow" and e.value < 0:
        out.append(e.args[0])
    for a in e.args:
        _divisor_bases(a, out)


def normalize(e: Expr, notes: list | None = None) -> Expr:
    """Rational normal form.

    Pass a list as ``notes`` to receive ``"<d> != 0"`` entries for every
    divisor of the input that no longer shows up in the result's denominator.
    """
    e = as_expr(e)
    gcd_notes = [] if notes is not None else None
    r = R.rgcd_cancel(to_rat(e), gcd_notes)
    if notes is not None:
        den = r.den_poly()
        bases = []
        _divisor_bases(e, bases)
        seen = set()
        for b in bases:
            br = to_rat(b)
            if br.has_den or br.is_const():
                continue
            if R.divexact(den, br.num) is None:
                txt = f"{to_string(b)} != 0"
                if txt not in seen:
                    seen.add(txt)
                    notes.append(txt)
    return from_rat(r)


# ---------------------------------------------------------------------------
# numeric evaluation


def _eval_atom(a, point, memo):
    hit = memo.get(a)
    if hit is not None:
        return hit
    if a.kind == SYM:
        v = point[a]
    elif a.kind == R.KER:
        u = eval_rat(a.arg, point, memo)
        f = {"ln": mpmath.log, "sin": mpmath.sin, "cos": mpmath.cos}[a.name]
        if a.name == "ln" and u == 0:
            raise ZeroDivisionError("ln(0)")
        v = f(u)
    elif a.kind == R.RAD:
        v = _eval_poly(a.base, point, memo)
        if v == 0:
            raise ZeroDivisionError("radical of zero")
        v = mpmath.log(v)  # stored as the log; powers are exp(q*log)
    else:
        v = eval_rat(a.arg, point, memo)
    memo[a] = v
    return v


def _atom_pow(a, e, point, memo):
    v = _eval_atom(a, point, memo)
    if a.kind == R.RAD:
        return mpmath.exp(mpmath.mpf(e.numerator) / e.denominator * v)
    if a.kind == R.EXP:
        return mpmath.exp(mpmath.mpf(e.numerator) / mpmath.mpf(e.denominator) * v)
    return v ** int(e)


def _term_values(p, point, memo):
    out = []
    for m, c in p.terms.items():
        v = mpmath.mpf(c.numerator) / c.denominator
        for a, e in m:
            v = v * _atom_pow(a, e, point, memo)
        out.append(v)
    return out


def _eval_poly(p, point, memo):
    return mpmath.fsum(_term_values(p, point, memo))


def eval_rat(r, point, memo=None):
    """Complex value of a rational form at ``point`` (Symbol -> number)."""
    memo = {} if memo is None else memo
    top = _eval_poly(r.num, point, memo)
    if not r.has_den:
        return top
    den = _eval_poly(r.den_poly(), point, memo)
    if den == 0:
        raise ZeroDivisionError("pole")
    return top / den


def evaluate(e: Expr, point: dict, prec: int = DEFAULT_PREC):
    """Numeric value of ``e`` with ``point`` mapping Symbol to a number."""
    with mpmath.workprec(prec):
        pt = {k: mpmath.mpmathify(v if not isinstance(v, Fraction) else mpmath.mpf(v.numerator) / v.denominator)
              for k, v in point.items()}
        v = eval_rat(to_rat(as_expr(e)), pt)
        return v


@dataclass(frozen=True)
class ZeroTestResult:
    zero: bool | None  # None means inconclusive
    method: str        # "structural" or "randomized"
    points: int = 0    # sample points that were actually evaluated


def sample_point(symbols, rng: random.Random) -> dict:
    """A random positive rational point, deterministic for a given rng state."""
    return {s: Fraction(rng.randint(1, 60), rng.randint(7, 30)) for s in symbols}


def zero_test_rat(r, k: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED,
                  prec: int = DEFAULT_PREC) -> ZeroTestResult:
    if r.is_zero():
        return ZeroTestResult(True, "structural")
    if not r.transcendental:
        return ZeroTestResult(False, "structural")
    rng = random.Random(seed)
    syms = sorted(r.free, key=lambda s: s.key)
    used = 0
    with mpmath.workprec(prec):
        for _ in range(k):
            pt = sample_point(syms, rng)
            mp_pt = {s: mpmath.mpf(v.numerator) / v.denominator for s, v in pt.items()}
            memo = {}
            try:
                terms = _term_values(r.num, mp_pt, memo)
                if r.has_den:
                    dterms = _term_values(r.den_poly(), mp_pt, memo)
                    dscale = max(mpmath.mpf(1), mpmath.fsum(abs(t) for t in dterms))
                    if abs(mpmath.fsum(dterms)) <= TOLERANCE * dscale:
                        continue  # pole at this point
            except (ZeroDivisionError, ValueError, OverflowError):
                continue
            used += 1
            total = mpmath.fsum(terms)
            scale = max(mpmath.mpf(1), mpmath.fsum(abs(t) for t in terms))
            if abs(total) > TOLERANCE * scale:
                return ZeroTestResult(False, "randomized", used)
    if used == 0:
        return ZeroTestResult(None, "randomized", 0)
    return ZeroTestResult(True, "randomized", used)


def zero_test(e: Expr, k: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED,
              prec: int = DEFAULT_PREC) -> ZeroTestResult:
    return zero_test_rat(to_rat(as_expr(e)), k, seed, prec)


def is_zero(e: Expr, k: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED,
            prec: int = DEFAULT_PREC) -> bool:
    res = zero_test(e, k, seed, prec)
    if res.zero is None:
        raise InconclusiveZeroTest("all sample points hit poles")
    return res.zero


# ---------------------------------------------------------------------------
# coefficient collection


def collect_rat(r, indeterminates) -> dict:
    """Split ``r`` by monomials in ``indeterminates``.

    Returns ``{((sym, exp), ...): Rat}`` with the monomial sorted by symbol key.
    """
    ind = frozenset(indeterminates)
    if r.has_den:
        for a, _ in r.dmono:
            if ind & R.atom_free(a):
                raise NonPolynomialError(f"denominator depends on {sorted(s.name for s in ind & R.atom_free(a))}")
        for f, _ in r.dfac:
            if ind & f.free:
                raise NonPolynomialError("denominator depends on an indeterminate")
    groups = {}
    for m, c in r.num.terms.items():
        key, rest = [], []
        for a, e in m:
            if a.kind == SYM and a in ind:
                key.append((a, e))
            elif ind & R.atom_free(a):
                raise NonPolynomialError(f"non-polynomial dependence through {a!r}")
            else:
                rest.append((a, e))
        groups.setdefault(tuple(key), {})[tuple(rest)] = c
    inv_den = R.Rat(R.P_ONE, r.dmono, r.dfac) if r.has_den else None
    out = {}
    for key in sorted(groups, key=R.mono_key):
        part = R.Rat(R.Poly(groups[key]))
        out[key] = R.rmul(part, inv_den) if inv_den is not None else part
    return out


def collect(e: Expr, indeterminates) -> dict:
    """Map each monomial (as an expression) to its coefficient expression."""
    res = collect_rat(to_rat(as_expr(e)), indeterminates)
    out = {}
    for key, coeff in res.items():
        mono = from_rat(R.Rat(R.pmono(key))) if key else num(1)
        out[mono] = from_rat(coeff)
    return out

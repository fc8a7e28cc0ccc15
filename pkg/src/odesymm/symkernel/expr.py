"""Immutable expression trees with light canonicalization and a parseable printer."""

from __future__ import annotations

from fractions import Fraction

from . import rational as R
from .symbols import SYM as _ATOM_SYM
from .symbols import FunctionSymbol, Symbol

NUM, SYM, ADD, MUL, POW, FN = "num", "sym", "add", "mul", "pow", "fn"
KERNELS = ("exp", "ln", "sin", "cos", "sqrt")

_ORDER = {NUM: 0, SYM: 1, POW: 2, FN: 3, MUL: 4, ADD: 5}


class Expr:
    """A node of an expression tree.

    ``value`` holds the Fraction of a constant, the Symbol of a symbol, the
    exponent of a power, or the kernel name of a kernel application.  Build
    nodes with the module-level constructors, which keep the tree canonical.
    """

    __slots__ = ("kind", "args", "value", "_key", "_hash", "_rat")

    def __init__(self, kind, args=(), value=None):
        self.kind = kind
        self.args = args
        self.value = value
        self._key = None
        self._hash = None
        self._rat = None

    # identity ---------------------------------------------------------------
    @property
    def key(self):
        if self._key is None:
            k = self.kind
            if k == NUM:
                self._key = (0, self.value)
            elif k == SYM:
                s = self.value
                self._key = (1, s.name, s.role, s.key[3:])
            elif k == POW:
                self._key = (2, self.args[0].key, self.value)
            elif k == FN:
                self._key = (3, self.value, self.args[0].key)
            else:
                self._key = (_ORDER[k], tuple(a.key for a in self.args))
        return self._key

    def __eq__(self, other):
        return isinstance(other, Expr) and self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    # arithmetic sugar -------------------------------------------------------
    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return add(self, neg(as_expr(o)))

    def __rsub__(self, o):
        return add(as_expr(o), neg(self))

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return mul(self, power(as_expr(o), -1))

    def __rtruediv__(self, o):
        return mul(as_expr(o), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, q):
        return power(self, q)

    # queries ------------------------------------------------------------------
    @property
    def is_number(self):
        return self.kind == NUM

    @property
    def free_symbols(self) -> frozenset:
        return to_rat(self).free

    def symbols(self) -> frozenset:
        """Symbols occurring syntactically in the tree."""
        if self.kind == SYM:
            return frozenset((self.value,))
        out = frozenset()
        for a in self.args:
            out |= a.symbols()
        return out


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Symbol):
        return sym(v)
    if isinstance(v, (int, Fraction)):
        return num(v)
    raise TypeError(f"cannot convert {v!r} to an expression")


_NUM_CACHE = {}


def num(c) -> Expr:
    c = Fraction(c)
    hit = _NUM_CACHE.get(c)
    if hit is None:
        hit = Expr(NUM, (), c)
        if len(_NUM_CACHE) < 4096:
            _NUM_CACHE[c] = hit
    return hit


ZERO = num(0)
ONE = num(1)


def sym(s: Symbol) -> Expr:
    return Expr(SYM, (), s)


def _split_coeff(e: Expr):
    """(constant, rest) with rest None when e is a pure constant."""
    if e.kind == NUM:
        return e.value, None
    if e.kind == MUL and e.args[0].kind == NUM:
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else Expr(MUL, rest)
    return Fraction(1), e


def add(*items) -> Expr:
    terms = []
    for it in items:
        it = as_expr(it)
        if it.kind == ADD:
            terms.extend(it.args)
        else:
            terms.append(it)
    const = Fraction(0)
    coeffs = {}
    for t in terms:
        c, rest = _split_coeff(t)
        if rest is None:
            const += c
        else:
            coeffs[rest] = coeffs.get(rest, 0) + c
    out = [num(const)] if const else []
    for rest, c in coeffs.items():
        if c:
            out.append(rest if c == 1 else _mul_raw(num(c), rest))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda e: e.key)
    return Expr(ADD, tuple(out))


def _mul_raw(c: Expr, rest: Expr) -> Expr:
    if rest.kind == MUL:
        return Expr(MUL, (c,) + rest.args)
    return Expr(MUL, (c, rest))


def neg(e: Expr) -> Expr:
    return mul(num(-1), e)


def mul(*items) -> Expr:
    factors = []
    for it in items:
        it = as_expr(it)
        if it.kind == MUL:
            factors.extend(it.args)
        else:
            factors.append(it)
    const = Fraction(1)
    bases = {}
    for f in factors:
        if f.kind == NUM:
            const *= f.value
            continue
        if f.kind == POW:
            b, q = f.args[0], f.value
        else:
            b, q = f, Fraction(1)
        bases.setdefault(b, []).append(q)
    if const == 0:
        return ZERO
    out = []
    redo = False
    for b, qs in bases.items():
        q = sum(qs)
        if q == 0:
            if b.kind != NUM:
                # x*x^-1 is left standing so that normalize can note x != 0
                out.extend(power(b, qi) for qi in qs)
            continue
        p = power(b, q)
        if p.kind == NUM:
            const *= p.value
        elif p.kind == MUL:
            out.extend(p.args)
            redo = True
        else:
            out.append(p)
    if redo:
        return mul(num(const), *out)
    if not out:
        return num(const)
    out.sort(key=lambda e: e.key)
    if const != 1:
        out.insert(0, num(const))
    if len(out) == 1:
        return out[0]
    return Expr(MUL, tuple(out))


def power(base, q) -> Expr:
    base = as_expr(base)
    q = Fraction(q)
    if q == 0:
        return ONE
    if q == 1:
        return base
    if base.kind == NUM:
        c = base.value
        if q.denominator == 1:
            if c == 0 and q < 0:
                raise ZeroDivisionError("zero to a negative power")
            return num(c ** int(q))
        if c == 0:
            if q < 0:
                raise ZeroDivisionError("zero to a negative power")
            return ZERO
        if c == 1:
            return ONE
        root = R._exact_root(c, q.denominator)
        if root is not None:
            return num(root ** q.numerator)
        return Expr(POW, (base,), q)
    if q.denominator == 1:
        if base.kind == MUL:
            return mul(*[power(a, q) for a in base.args])
        if base.kind == POW:
            return power(base.args[0], base.value * q)
    return Expr(POW, (base,), q)


def fn(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if name == "sqrt":
        return power(arg, Fraction(1, 2))
    if name not in KERNELS:
        raise ValueError(f"unknown kernel {name!r}")
    if arg.kind == NUM:
        if name == "exp" and arg.value == 0:
            return ONE
        if name == "ln" and arg.value == 1:
            return ZERO
        if name == "sin" and arg.value == 0:
            return ZERO
        if name == "cos" and arg.value == 0:
            return ONE
    return Expr(FN, (arg,), name)


def exp(a):
    return fn("exp", a)


def ln(a):
    return fn("ln", a)


def sin(a):
    return fn("sin", a)


def cos(a):
    return fn("cos", a)


def sqrt(a):
    return fn("sqrt", a)


# ---------------------------------------------------------------------------
# tree <-> rational normal form


def to_rat(e: Expr) -> "R.Rat":
    r = e._rat
    if r is None:
        r = _build_rat(e)
        e._rat = r
    return r


def _build_rat(e: Expr):
    k = e.kind
    if k == NUM:
        return R.rconst(e.value)
    if k == SYM:
        return R.rsym(e.value)
    if k == ADD:
        return R.rsum([to_rat(a) for a in e.args])
    if k == MUL:
        return R.rprod([to_rat(a) for a in e.args])
    if k == POW:
        return R.rpow(to_rat(e.args[0]), e.value)
    return R.rkernel(e.value, to_rat(e.args[0]))


def fresh_rat(e: Expr):
    """Rational form computed from scratch, ignoring every cached value."""
    k = e.kind
    if k == NUM:
        return R.rconst(e.value)
    if k == SYM:
        return R.rsym(e.value)
    if k == ADD:
        return R.rsum([fresh_rat(a) for a in e.args])
    if k == MUL:
        return R.rprod([fresh_rat(a) for a in e.args])
    if k == POW:
        return R.rpow(fresh_rat(e.args[0]), e.value)
    return R.rkernel(e.value, fresh_rat(e.args[0]))


def _atom_expr(a, e) -> Expr:
    if a.kind == _ATOM_SYM:
        return power(sym(a), e)
    if a.kind == R.KER:
        return power(fn(a.name, from_rat(a.arg)), e)
    if a.kind == R.RAD:
        return power(from_poly(a.base), e)
    # a lone exponential with rational argument
    return fn("exp", mul(num(e), from_rat(a.arg)))


def _mono_expr(m, c) -> Expr:
    factors = [num(c)]
    poly_exp = []
    for a, e in m:
        if a.kind == R.EXP and a.polynomial_arg:
            poly_exp.append(mul(num(e), from_rat(a.arg)))
        else:
            factors.append(_atom_expr(a, e))
    if poly_exp:
        factors.append(fn("exp", add(*poly_exp)))
    return mul(*factors)


def from_poly(p: "R.Poly") -> Expr:
    return add(*[_mono_expr(m, c) for m, c in p.terms.items()])


def from_rat(r: "R.Rat") -> Expr:
    top = from_poly(r.num)
    if r.has_den:
        dens = [power(sym(a) if a.kind == _ATOM_SYM else fn(a.name, from_rat(a.arg)), -e)
                for a, e in r.dmono]
        dens += [power(from_poly(f), -e) for f, e in r.dfac]
        top = mul(top, *dens)
    top._rat = r
    return top


# ---------------------------------------------------------------------------
# printing


def _fmt_frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _atomic(s: str, e: Expr) -> str:
    return s if e.kind in (SYM, FN) or (e.kind == NUM and e.value >= 0 and e.value.denominator == 1) else f"({s})"


def _pow_str(b: Expr, q: Fraction) -> str:
    bs = _atomic(to_string(b), b)
    if q.denominator == 1 and q > 0:
        return f"{bs}^{q.numerator}"
    return f"{bs}^({_fmt_frac(q)})"


def _product_str(e: Expr):
    """(sign, text) for a product or any non-sum node."""
    if e.kind == NUM:
        c = e.value
        return (-1 if c < 0 else 1), _fmt_frac(abs(c))
    factors = e.args if e.kind == MUL else (e,)
    c = Fraction(1)
    top, bottom = [], []
    for f in factors:
        if f.kind == NUM:
            c *= f.value
        elif f.kind == POW and f.value < 0:
            q = -f.value
            b = f.args[0]
            bottom.append(to_string(b) if q == 1 and b.kind != ADD and b.kind != MUL
                          else (f"({to_string(b)})" if q == 1 else _pow_str(b, q)))
        elif f.kind == ADD:
            top.append(f"({to_string(f)})")
        else:
            top.append(to_string(f))
    sign = -1 if c < 0 else 1
    c = abs(c)
    if c.numerator != 1 or not top:
        top.insert(0, str(c.numerator))
    if c.denominator != 1:
        bottom.insert(0, str(c.denominator))
    s = "*".join(top)
    if bottom:
        s += "/" + (bottom[0] if len(bottom) == 1 else "(" + "*".join(bottom) + ")")
    return sign, s


def to_string(e: Expr) -> str:
    k = e.kind
    if k == NUM:
        return _fmt_frac(e.value)
    if k == SYM:
        return str(e.value)
    if k == FN:
        return f"{e.value}({to_string(e.args[0])})"
    if k == POW and e.value > 0:
        return _pow_str(e.args[0], e.value)
    if k == ADD:
        terms = [a for a in e.args if a.kind != NUM] + [a for a in e.args if a.kind == NUM]
        out = ""
        for i, t in enumerate(terms):
            sign, s = _product_str(t)
            if i == 0:
                out = s if sign > 0 else "-" + s
            else:
                out += (" + " if sign > 0 else " - ") + s
        return out
    sign, s = _product_str(e)
    return s if sign > 0 else "-" + s


# ---------------------------------------------------------------------------


def symbol(name: str, role: str = "parameter") -> Expr:
    return sym(Symbol(name, role))


def function(name: str, args, derivs=()) -> Expr:
    return sym(FunctionSymbol(name, tuple(args), tuple(derivs)))

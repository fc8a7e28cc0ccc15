"""Canonical rational functions over Q in a set of atoms.

This is the arithmetic engine behind :mod:`odesymm.symkernel.expr`.  A value
is ``num / den`` where ``num`` is a sparse polynomial in *atoms* and ``den``
is kept factored as a monomial times powers of monic multi-term polynomials.

Atoms are

* symbols (integer exponents),
* ``ln``/``sin``/``cos`` kernels of a canonical argument (integer exponents),
* radicals ``Rad(P)`` of a polynomial ``P`` carrying an exponent in (0, 1);
  an exponent reaching 1 is reduced by multiplying through by ``P``,
* exponentials.  ``exp(u)`` with polynomial ``u`` is split term-wise into
  atoms ``E(m)`` raised to the (rational, possibly negative) term
  coefficient, so ``exp(t)*exp(-t)`` is literally 1.  A rational ``u`` is a
  single atom ``E(u')`` with ``u = c*u'`` scaled so that ``u'`` is primitive.

Denominators never contain exponential or radical atoms; both are moved into
the numerator.  Cancellation is exact trial division by the stored
denominator factors, which is a complete gcd whenever those factors are
irreducible and pairwise coprime.
"""

from __future__ import annotations

from fractions import Fraction
import heapq
from functools import reduce

from .symbols import SYM, FunctionSymbol, Symbol

RAD, KER, EXP = 1, 2, 3

ZERO_F = Fraction(0)
ONE_F = Fraction(1)


def _item_key(item):
    return item[0].key


def _ne(e):
    """Exponents are stored as int whenever integral (cheaper to hash)."""
    if type(e) is Fraction and e.denominator == 1:
        return e.numerator
    return e


def mono_key(m):
    return tuple((a.key, e) for a, e in m)


# ---------------------------------------------------------------------------
# atoms


class RadAtom:
    """``P^q`` for a polynomial ``P``; q lives in the monomial exponent."""

    __slots__ = ("base", "key", "_hash", "free")
    kind = RAD

    def __init__(self, base: "Poly"):
        self.base = base
        self.key = (1, base.key)
        self._hash = hash(self.key)
        self.free = base.free

    def __eq__(self, other):
        return isinstance(other, RadAtom) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Rad({self.base!r})"


class KernelAtom:
    __slots__ = ("name", "arg", "key", "_hash", "free")
    kind = KER

    def __init__(self, name: str, arg: "Rat"):
        self.name = name
        self.arg = arg
        self.key = (2, name, arg.key)
        self._hash = hash(self.key)
        self.free = arg.free

    def __eq__(self, other):
        return isinstance(other, KernelAtom) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"{self.name}({self.arg!r})"


class ExpAtom:
    __slots__ = ("arg", "key", "_hash", "free")
    kind = EXP

    def __init__(self, arg: "Rat"):
        self.arg = arg
        self.key = (2, "exp", arg.key)
        self._hash = hash(self.key)
        self.free = arg.free

    @property
    def polynomial_arg(self) -> bool:
        return not self.arg.has_den

    def __eq__(self, other):
        return isinstance(other, ExpAtom) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"E({self.arg!r})"


def atom_free(a) -> frozenset:
    if a.kind == SYM:
        if isinstance(a, FunctionSymbol):
            return frozenset((a,) + a.args)
        return frozenset((a,))
    return a.free


def atom_transcendental(a) -> bool:
    if a.kind == SYM:
        return False
    if a.kind == RAD:
        return True
    return True


# ---------------------------------------------------------------------------
# monomials: tuples of (atom, exponent) sorted by atom key


def mono_mul(a, b):
    """Product of two monomials, reducing radicals.

    Returns ``(mono, extra)`` where ``extra`` is a polynomial factor produced by
    radical reduction, or None.
    """
    if not a:
        return b, None
    if not b:
        return a, None
    d = dict(a)
    for at, e in b:
        s = d.get(at)
        if s is None:
            d[at] = e
        else:
            s = _ne(s + e)
            if s == 0:
                del d[at]
            else:
                d[at] = s
    extra = None
    for at in [x for x in d if x.kind == RAD]:
        e = d[at]
        if e >= 1:
            e -= 1
            if e == 0:
                del d[at]
            else:
                d[at] = e
            extra = at.base if extra is None else pmul(extra, at.base)
    return tuple(sorted(d.items(), key=_item_key)), extra


def mono_mul_free(a, b):
    """Monomial product treating every atom as a free variable."""
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for at, e in b:
        s = _ne(d.get(at, 0) + e)
        if s == 0:
            d.pop(at, None)
        else:
            d[at] = s
    return tuple(sorted(d.items(), key=_item_key))


def mono_div(a, b, allow_negative_exp=True):
    """``a / b`` as a monomial, or None if an exponent would go negative.

    Exponential atoms are units and may always go negative when
    ``allow_negative_exp`` is set.
    """
    if not b:
        return a
    d = dict(a)
    for at, e in b:
        s = _ne(d.get(at, 0) - e)
        if s < 0 and not (allow_negative_exp and at.kind == EXP):
            return None
        if s == 0:
            d.pop(at, None)
        else:
            d[at] = s
    return tuple(sorted(d.items(), key=_item_key))


def mono_free(m) -> frozenset:
    out = frozenset()
    for a, _ in m:
        out |= atom_free(a)
    return out


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Sparse polynomial: dict monomial -> nonzero Fraction. Treat as immutable."""

    __slots__ = ("terms", "_key", "_hash", "_free", "_atoms")

    def __init__(self, terms: dict):
        self.terms = terms
        self._key = None
        self._hash = None
        self._free = None
        self._atoms = None

    @property
    def key(self):
        if self._key is None:
            self._key = tuple(sorted((mono_key(m), c) for m, c in self.terms.items()))
        return self._key

    def __eq__(self, other):
        return isinstance(other, Poly) and self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        return f"Poly({self.terms!r})"

    def __len__(self):
        return len(self.terms)

    @property
    def free(self) -> frozenset:
        if self._free is None:
            self._free = frozenset().union(*(mono_free(m) for m in self.terms)) if self.terms else frozenset()
        return self._free

    @property
    def atoms(self) -> frozenset:
        if self._atoms is None:
            self._atoms = frozenset(a for m in self.terms for a, _ in m)
        return self._atoms

    def is_const(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> Fraction:
        return self.terms.get((), ZERO_F)

    def lead(self):
        """Canonical leading term (max monomial key); used for monic scaling."""
        m = max(self.terms, key=mono_key)
        return m, self.terms[m]


P_ZERO = Poly({})
P_ONE = Poly({(): ONE_F})


def pconst(c) -> Poly:
    c = Fraction(c)
    return Poly({(): c}) if c else P_ZERO


def pmono(m, c=ONE_F) -> Poly:
    return Poly({m: Fraction(c)}) if c else P_ZERO


def _acc(d, m, c):
    v = d.get(m)
    if v is None:
        d[m] = c
    else:
        v = v + c
        if v:
            d[m] = v
        else:
            del d[m]


def padd(p: Poly, q: Poly) -> Poly:
    if not q.terms:
        return p
    if not p.terms:
        return q
    d = dict(p.terms)
    for m, c in q.terms.items():
        _acc(d, m, c)
    return Poly(d)


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, pscale(q, -1))


def pscale(p: Poly, c) -> Poly:
    if c == 1:
        return p
    if not c:
        return P_ZERO
    c = Fraction(c)
    return Poly({m: v * c for m, v in p.terms.items()})


def pmul_mono(p: Poly, m, c=ONE_F) -> Poly:
    d = {}
    for pm, pc in p.terms.items():
        mm, extra = mono_mul(pm, m)
        if extra is None:
            _acc(d, mm, pc * c)
        else:
            for em, ec in pmul_mono(extra, mm, pc * c).terms.items():
                _acc(d, em, ec)
    return Poly(d)


def pmul(p: Poly, q: Poly) -> Poly:
    if not p.terms or not q.terms:
        return P_ZERO
    if len(p.terms) < len(q.terms):
        p, q = q, p
    d = {}
    for qm, qc in q.terms.items():
        for pm, pc in p.terms.items():
            mm, extra = mono_mul(pm, qm)
            if extra is None:
                _acc(d, mm, pc * qc)
            else:
                for em, ec in pmul_mono(extra, mm, pc * qc).terms.items():
                    _acc(d, em, ec)
    return Poly(d)


def ppow(p: Poly, n: int) -> Poly:
    if n < 0:
        raise ValueError("negative polynomial power")
    result = P_ONE
    base = p
    while n:
        if n & 1:
            result = pmul(result, base)
        n >>= 1
        if n:
            base = pmul(base, base)
    return result


def _degrees(p: Poly) -> dict:
    out = {}
    for m in p.terms:
        for a, e in m:
            if a.kind != EXP and e > out.get(a, 0):
                out[a] = e
    return out


def _exp_min(p: Poly) -> dict:
    """Minimum exponent of each exponential atom (absent counts as 0)."""
    exps = {a for m in p.terms for a, _ in m if a.kind == EXP}
    if not exps:
        return {}
    out = {}
    for a in exps:
        lo = 0
        for m in p.terms:
            lo = min(lo, dict(m).get(a, 0))
        if lo:
            out[a] = lo
    return out


def _shift(p: Poly, shift: dict) -> Poly:
    if not shift:
        return p
    m = tuple(sorted(((a, -e) for a, e in shift.items()), key=_item_key))
    return Poly({mono_mul_free(pm, m): c for pm, c in p.terms.items()})


class _Desc:
    """Heap entry ordering monomials from the largest lex key down."""

    __slots__ = ("k", "m")

    def __init__(self, k, m):
        self.k = k
        self.m = m

    def __lt__(self, other):
        return self.k > other.k


def divexact(a: Poly, b: Poly):
    """Exact quotient ``a / b`` or None when ``b`` does not divide ``a``.

    Radicals are treated as free variables here, so the answer is sound but
    may miss divisibility that only holds modulo radical reduction.
    """
    if not b.terms:
        raise ZeroDivisionError("polynomial division by zero")
    if not a.terms:
        return P_ZERO
    if len(b.terms) == 1:
        (bm, bc), = b.terms.items()
        d = {}
        for m, c in a.terms.items():
            q = mono_div(m, bm)
            if q is None:
                return None
            d[q] = c / bc
        return Poly(d)
    da, db = _degrees(a), _degrees(b)
    for at, e in db.items():
        if da.get(at, 0) < e:
            return None
    sa, sb = _exp_min(a), _exp_min(b)
    a2, b2 = _shift(a, sa), _shift(b, sb)
    atoms = sorted(a2.atoms | b2.atoms, key=lambda x: x.key)
    idx = {x: i for i, x in enumerate(atoms)}

    def lk(m):
        return tuple((-idx[x], e) for x, e in m)

    ltb = max(b2.terms, key=lk)
    # lex order is multiplicative, so trailing terms must divide as well
    if mono_div(min(a2.terms, key=lk), min(b2.terms, key=lk), allow_negative_exp=False) is None:
        return None
    lcb = b2.terms[ltb]
    bterms = [(bm, bc) for bm, bc in b2.terms.items() if bm != ltb]
    r = dict(a2.terms)
    heap = [_Desc(lk(m), m) for m in r]
    heapq.heapify(heap)
    q = {}
    limit = 20 * (len(a.terms) + 1) * len(b.terms) + 200
    steps = 0
    while heap:
        top = heapq.heappop(heap)
        m = top.m
        c = r.pop(m, None)
        if c is None:
            continue  # stale entry
        qm = mono_div(m, ltb, allow_negative_exp=False)
        if qm is None:
            return None
        qc = c / lcb
        q[qm] = qc
        for bm, bc in bterms:
            mm = mono_mul_free(qm, bm)
            old = r.get(mm)
            if old is None:
                r[mm] = -qc * bc
                heapq.heappush(heap, _Desc(lk(mm), mm))
            else:
                v = old - qc * bc
                if v:
                    r[mm] = v
                else:
                    del r[mm]
        steps += 1
        if steps > limit:
            return None
    quot = Poly(q)
    # undo the unit shifts: a = Ua a2, b = Ub b2  =>  a/b = (Ua/Ub) a2/b2
    unit = {}
    for at, e in sa.items():
        unit[at] = unit.get(at, 0) + e
    for at, e in sb.items():
        unit[at] = unit.get(at, 0) - e
    unit = {k: v for k, v in unit.items() if v}
    if unit:
        um = tuple(sorted(unit.items(), key=_item_key))
        quot = Poly({mono_mul_free(m, um): c for m, c in quot.terms.items()})
    return quot


def poly_content_mono(p: Poly):
    """Largest monomial dividing every term (exponentials: min with absent=0)."""
    it = iter(p.terms)
    first = dict(next(it))
    common = {a: e for a, e in first.items()}
    for m in it:
        dm = dict(m)
        for a in list(common):
            e = dm.get(a, 0)
            if a.kind == EXP:
                common[a] = min(common[a], e)
            else:
                common[a] = min(common[a], e)
            if common[a] == 0:
                del common[a]
        for a, e in dm.items():
            if a.kind == EXP and e < 0 and a not in common:
                common[a] = e
    # exponentials absent from the first term but negative elsewhere
    for a in list(common):
        if a.kind == EXP:
            lo = min(dict(m).get(a, 0) for m in p.terms)
            if lo:
                common[a] = lo
            else:
                del common[a]
    exps = {a for m in p.terms for a, e in m if a.kind == EXP}
    for a in exps:
        if a not in common:
            lo = min(dict(m).get(a, 0) for m in p.terms)
            if lo < 0:
                common[a] = lo
    return tuple(sorted(common.items(), key=_item_key))


# ---------------------------------------------------------------------------
# rational functions


class Rat:
    """Immutable canonical rational function ``num / (dmono * prod(f**e))``."""

    __slots__ = ("num", "dmono", "dfac", "_key", "_hash", "_free", "_trans", "_dcache")

    def __init__(self, num: Poly, dmono=(), dfac=()):
        self.num = num
        self.dmono = dmono
        self.dfac = dfac
        self._key = None
        self._hash = None
        self._free = None
        self._trans = None
        self._dcache = None

    # -- identity ----------------------------------------------------------
    @property
    def key(self):
        if self._key is None:
            self._key = (self.num.key, mono_key(self.dmono),
                         tuple((f.key, e) for f, e in self.dfac))
        return self._key

    def __eq__(self, other):
        return isinstance(other, Rat) and self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        return f"Rat({self.num!r} / {self.dmono!r} {self.dfac!r})"

    # -- queries -----------------------------------------------------------
    @property
    def has_den(self) -> bool:
        return bool(self.dmono or self.dfac)

    def is_zero(self) -> bool:
        return not self.num.terms

    def is_const(self) -> bool:
        return not self.has_den and self.num.is_const()

    def const_value(self) -> Fraction:
        return self.num.const_value()

    @property
    def free(self) -> frozenset:
        if self._free is None:
            f = self.num.free | mono_free(self.dmono)
            for p, _ in self.dfac:
                f = f | p.free
            self._free = f
        return self._free

    @property
    def transcendental(self) -> bool:
        """True if any radical/kernel/exponential atom occurs anywhere."""
        if self._trans is None:
            atoms = set(self.num.atoms)
            atoms.update(a for a, _ in self.dmono)
            for p, _ in self.dfac:
                atoms.update(p.atoms)
            self._trans = any(a.kind != SYM for a in atoms)
        return self._trans

    def den_poly(self) -> Poly:
        p = pmono(self.dmono) if self.dmono else P_ONE
        for f, e in self.dfac:
            p = pmul(p, ppow(f, e))
        return p


R_ZERO = Rat(P_ZERO)
R_ONE = Rat(P_ONE)


def rconst(c) -> Rat:
    c = Fraction(c)
    if c == 0:
        return R_ZERO
    if c == 1:
        return R_ONE
    return Rat(pconst(c))


def rsym(s: Symbol) -> Rat:
    return Rat(pmono(((s, 1),)))


def rpoly(p: Poly) -> Rat:
    return Rat(p)


def _cancel(num: Poly, dmono: dict, dfac: dict) -> Rat:
    if not num.terms:
        return R_ZERO
    if dmono:
        common = None
        for m in num.terms:
            dm = dict(m)
            cur = {a: min(e, dm.get(a, 0)) for a, e in (dmono.items() if common is None else common.items())}
            common = {a: e for a, e in cur.items() if e > 0}
            if not common:
                break
        if common:
            cm = tuple(sorted(common.items(), key=_item_key))
            num = Poly({mono_div(m, cm): c for m, c in num.terms.items()})
            for a, e in common.items():
                left = dmono[a] - e
                if left:
                    dmono[a] = left
                else:
                    del dmono[a]
    if dfac:
        for f in list(dfac):
            e = dfac[f]
            while e:
                q = divexact(num, f)
                if q is None:
                    break
                num = q
                e -= 1
            if e:
                dfac[f] = e
            else:
                del dfac[f]
    dm = tuple(sorted(dmono.items(), key=_item_key)) if dmono else ()
    df = tuple(sorted(dfac.items(), key=lambda fe: fe[0].key)) if dfac else ()
    return Rat(num, dm, df)


def _den_cofactor(dmono_l: dict, dfac_l: dict, r: Rat) -> Poly:
    """``L / den(r)`` expanded, for a common multiple L of r's denominator."""
    d = dict(dmono_l)
    for a, e in r.dmono:
        left = d[a] - e
        if left:
            d[a] = left
        else:
            del d[a]
    p = pmono(tuple(sorted(d.items(), key=_item_key))) if d else P_ONE
    fe = dict(r.dfac)
    for f, e in dfac_l.items():
        k = e - fe.get(f, 0)
        if k:
            p = pmul(p, ppow(f, k))
    return p


def rsum(items) -> Rat:
    items = [r for r in items if r.num.terms]
    if not items:
        return R_ZERO
    if len(items) == 1:
        return items[0]
    dmono, dfac = {}, {}
    for r in items:
        for a, e in r.dmono:
            if e > dmono.get(a, 0):
                dmono[a] = e
        for f, e in r.dfac:
            if e > dfac.get(f, 0):
                dfac[f] = e
    if not dmono and not dfac:
        acc = {}
        for r in items:
            for m, c in r.num.terms.items():
                _acc(acc, m, c)
        return Rat(Poly(acc))
    acc = {}
    for r in items:
        if r.dmono == () and r.dfac == () and not dmono and not dfac:
            part = r.num
        else:
            part = pmul(r.num, _den_cofactor(dmono, dfac, r))
        for m, c in part.terms.items():
            _acc(acc, m, c)
    return _cancel(Poly(acc), dmono, dfac)


def radd(a: Rat, b: Rat) -> Rat:
    return rsum((a, b))


def rneg(a: Rat) -> Rat:
    return Rat(pscale(a.num, -1), a.dmono, a.dfac) if a.num.terms else a


def rsub(a: Rat, b: Rat) -> Rat:
    return rsum((a, rneg(b)))


def rscale(a: Rat, c) -> Rat:
    c = Fraction(c)
    if not c:
        return R_ZERO
    return Rat(pscale(a.num, c), a.dmono, a.dfac)


def rprod(items) -> Rat:
    items = list(items)
    if not items:
        return R_ONE
    num = P_ONE
    dmono, dfac = {}, {}
    cross = False
    for r in items:
        if not r.num.terms:
            return R_ZERO
        num = pmul(num, r.num) if num is not P_ONE else r.num
        for a, e in r.dmono:
            dmono[a] = dmono.get(a, 0) + e
            cross = True
        for f, e in r.dfac:
            dfac[f] = dfac.get(f, 0) + e
            cross = True
    if not cross:
        return Rat(num)
    return _cancel(num, dmono, dfac)


def rmul(a: Rat, b: Rat) -> Rat:
    return rprod((a, b))


def _inv_unit(common) -> Rat:
    """Reciprocal of a monomial (no coefficient) as a canonical Rat."""
    num_mono, den_mono, rad_bases = [], {}, []
    for a, e in common:
        if a.kind == EXP:
            num_mono.append((a, -e))
        elif a.kind == RAD:
            # P^-q = P^(1-q) / P
            num_mono.append((a, 1 - e))
            rad_bases.append(a.base)
        else:
            den_mono[a] = e
    num = pmono(tuple(sorted(num_mono, key=_item_key)))
    out = Rat(num, tuple(sorted(den_mono.items(), key=_item_key)), ())
    for b in rad_bases:
        out = rmul(out, rinv(Rat(b)))
    return out


def rinv(a: Rat) -> Rat:
    N = a.num
    if not N.terms:
        raise ZeroDivisionError("division by zero")
    common = poly_content_mono(N)
    if common:
        n1 = Poly({mono_div(m, common): c for m, c in N.terms.items()})
    else:
        n1 = N
    _, lc = n1.lead()
    n1 = pscale(n1, 1 / lc)
    num = pscale(a.den_poly(), 1 / lc)
    base = Rat(num, (), ((n1, 1),)) if len(n1.terms) > 1 else Rat(num)
    if common:
        return rmul(base, _inv_unit(common))
    if len(n1.terms) > 1:
        return _cancel(base.num, {}, {n1: 1})
    return base


def rdiv(a: Rat, b: Rat) -> Rat:
    return rmul(a, rinv(b))


def rpow_int(a: Rat, n: int) -> Rat:
    if n == 0:
        return R_ONE
    if n < 0:
        return rpow_int(rinv(a), -n)
    if n == 1:
        return a
    num = ppow(a.num, n)
    if not a.has_den:
        return Rat(num)
    dmono = {x: e * n for x, e in a.dmono}
    dfac = {f: e * n for f, e in a.dfac}
    return _cancel(num, dmono, dfac)


def _exact_root(c: Fraction, d: int):
    """Nonnegative exact d-th root of a nonnegative rational, or None."""
    if c < 0:
        return None

    def iroot(n):
        if n == 0:
            return 0
        x = int(round(n ** (1.0 / d)))
        for cand in (x - 1, x, x + 1):
            if cand >= 0 and cand ** d == n:
                return cand
        lo, hi = 0, n
        while lo <= hi:
            mid = (lo + hi) // 2
            v = mid ** d
            if v == n:
                return mid
            if v < n:
                lo = mid + 1
            else:
                hi = mid - 1
        return None

    p, q = iroot(c.numerator), iroot(c.denominator)
    if p is None or q is None:
        return None
    return Fraction(p, q)


def rpow(a: Rat, q) -> Rat:
    q = Fraction(q)
    if q.denominator == 1:
        return rpow_int(a, int(q))
    if a.is_zero():
        if q < 0:
            raise ZeroDivisionError("zero to a negative power")
        return R_ZERO
    n = q.numerator // q.denominator
    f = q - n
    d = f.denominator
    head = rpow_int(a, n)
    if a.is_const():
        c = a.const_value()
        root = _exact_root(c, d)
        if root is not None:
            return rmul(head, rconst(root ** f.numerator))
        rad = RadAtom(pconst(c))
        return rmul(head, Rat(pmono(((rad, f),))))
    if a.has_den:
        den = a.den_poly()
        base = pmul(a.num, ppow(den, d - 1))
        rad = RadAtom(base)
        tail = rdiv(Rat(pmono(((rad, f),))), rpow_int(Rat(den), f.numerator))
    else:
        rad = RadAtom(a.num)
        tail = Rat(pmono(((rad, f),)))
    return rmul(head, tail)


def rexp(u: Rat) -> Rat:
    if u.is_zero():
        return R_ONE
    if not u.has_den:
        mono = []
        for m, c in u.num.terms.items():
            mono.append((ExpAtom(Rat(pmono(m))), _ne(c)))
        return Rat(pmono(tuple(sorted(mono, key=_item_key))))
    _, c = u.num.lead()
    prim = rscale(u, 1 / c)
    return Rat(pmono(((ExpAtom(prim), _ne(c)),)))


def rkernel(name: str, u: Rat) -> Rat:
    if name == "exp":
        return rexp(u)
    if name == "sqrt":
        return rpow(u, Fraction(1, 2))
    if name == "ln":
        if u.is_zero():
            raise ZeroDivisionError("ln(0)")
        if u == R_ONE:
            return R_ZERO
    elif name == "sin":
        if u.is_zero():
            return R_ZERO
    elif name == "cos":
        if u.is_zero():
            return R_ONE
    else:
        raise ValueError(f"unknown kernel {name!r}")
    return Rat(pmono(((KernelAtom(name, u), 1),)))


# ---------------------------------------------------------------------------
# calculus


def _atom_diff(a, s: Symbol) -> Rat:
    """d(atom)/ds for symbol and kernel atoms (integer-exponent atoms)."""
    if a.kind == SYM:
        if a == s:
            return R_ONE
        if isinstance(a, FunctionSymbol):
            d = a.diff(s)
            return rsym(d) if d is not None else R_ZERO
        return R_ZERO
    # kernel
    du = rdiff(a.arg, s)
    if du.is_zero():
        return R_ZERO
    if a.name == "ln":
        return rdiv(du, a.arg)
    if a.name == "sin":
        return rmul(rkernel("cos", a.arg), du)
    if a.name == "cos":
        return rneg(rmul(rkernel("sin", a.arg), du))
    raise ValueError(a.name)


def _log_diff(a, s: Symbol) -> Rat:
    """d(log atom)/ds for radical and exponential atoms (per unit exponent)."""
    if a.kind == RAD:
        b = Rat(a.base)
        db = rdiff(b, s)
        return rdiv(db, b) if not db.is_zero() else R_ZERO
    return rdiff(a.arg, s)


def pdiff(p: Poly, s: Symbol) -> Rat:
    """Derivative of a polynomial in atoms, as a rational function."""
    if s not in p.free:
        return R_ZERO
    parts = []
    for a in sorted(p.atoms, key=lambda x: x.key):
        if s not in atom_free(a):
            continue
        if a.kind in (SYM, KER):
            formal = {}
            for m, c in p.terms.items():
                dm = dict(m)
                e = dm.get(a)
                if not e:
                    continue
                if e == 1:
                    del dm[a]
                else:
                    dm[a] = e - 1
                _acc(formal, tuple(sorted(dm.items(), key=_item_key)), c * e)
            da = _atom_diff(a, s)
            if formal and not da.is_zero():
                parts.append(rmul(Rat(Poly(formal)), da))
        else:
            euler = {}
            for m, c in p.terms.items():
                e = dict(m).get(a)
                if e:
                    _acc(euler, m, c * e)
            dl = _log_diff(a, s)
            if euler and not dl.is_zero():
                parts.append(rmul(Rat(Poly(euler)), dl))
    return rsum(parts)


def rdiff(a: Rat, s: Symbol) -> Rat:
    if s not in a.free:
        return R_ZERO
    cache = a._dcache
    if cache is None:
        cache = a._dcache = {}
    hit = cache.get(s)
    if hit is not None:
        return hit
    dn = pdiff(a.num, s)
    if not a.has_den:
        res = dn
    else:
        inv_den = Rat(P_ONE, a.dmono, a.dfac)
        term1 = rmul(dn, inv_den)
        logs = []
        for x, e in a.dmono:
            if s in atom_free(x):
                dx = _atom_diff(x, s)
                if not dx.is_zero():
                    logs.append(rscale(rdiv(dx, rsym(x) if x.kind == SYM else Rat(pmono(((x, 1),)))), e))
        for f, e in a.dfac:
            if s in f.free:
                df = pdiff(f, s)
                if not df.is_zero():
                    logs.append(rscale(rdiv(df, Rat(f)), e))
        res = rsub(term1, rmul(a, rsum(logs))) if logs else term1
    cache[s] = res
    return res


# ---------------------------------------------------------------------------
# substitution


def _atom_image(a, e, mapping, memo) -> Rat:
    key = (a, e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if a.kind == SYM:
        base = mapping.get(a)
        if base is None:
            base = rsym(a)
        img = rpow_int(base, e)
    elif a.kind == KER:
        img = rpow_int(rkernel(a.name, rsubs(a.arg, mapping)), e)
    elif a.kind == RAD:
        img = rpow(Rat(rsubs_poly(a.base, mapping, memo)), e)
    else:
        img = rexp(rscale(rsubs(a.arg, mapping), e))
    memo[key] = img
    return img


def rsubs_poly(p: Poly, mapping, memo=None) -> Poly:
    """Substitute into a polynomial whose images are all polynomials."""
    r = _subs_poly_rat(p, mapping, {} if memo is None else memo)
    if r.has_den:
        raise ValueError("substitution produced a denominator")
    return r.num


def _subs_poly_rat(p: Poly, mapping, memo) -> Rat:
    keys = mapping.keys()
    if not (p.free & keys):
        return Rat(p)
    plain = {}
    parts = []
    for m, c in p.terms.items():
        if not (mono_free(m) & keys):
            _acc(plain, m, c)
            continue
        imgs = [_atom_image(a, e, mapping, memo) for a, e in m]
        parts.append(rscale(rprod(imgs), c))
    if plain:
        parts.append(Rat(Poly(plain)))
    return rsum(parts)


def rsubs(a: Rat, mapping: dict) -> Rat:
    """Simultaneous substitution of symbols by rational functions."""
    if not mapping or not (a.free & mapping.keys()):
        return a
    memo = {}
    num = _subs_poly_rat(a.num, mapping, memo)
    if not a.has_den:
        return num
    keys = mapping.keys()
    dens = []
    fixed_mono, fixed_fac = {}, {}
    for x, e in a.dmono:
        if atom_free(x) & keys:
            dens.append(_atom_image(x, -e, mapping, memo))
        else:
            fixed_mono[x] = e
    for f, e in a.dfac:
        if f.free & keys:
            dens.append(rpow_int(rinv(_subs_poly_rat(f, mapping, memo)), e))
        else:
            fixed_fac[f] = e
    if fixed_mono or fixed_fac:
        num = _cancel(num.num, fixed_mono, fixed_fac) if not num.has_den else rmul(
            num, Rat(P_ONE, tuple(sorted(fixed_mono.items(), key=_item_key)),
                     tuple(sorted(fixed_fac.items(), key=lambda fe: fe[0].key))))
    if not dens:
        return num
    return rprod([num] + dens)


# ---------------------------------------------------------------------------
# exact polynomial gcd (polynomial atoms only), used by explicit normalization


def _poly_in(p: Poly, v) -> dict:
    """Split p as a polynomial in atom v: {degree: coefficient Poly}."""
    out = {}
    for m, c in p.terms.items():
        dm = dict(m)
        k = dm.pop(v, 0)
        rest = tuple(sorted(dm.items(), key=_item_key))
        out.setdefault(k, {})
        _acc(out[k], rest, c)
    return {k: Poly(d) for k, d in out.items() if d}


def _from_coeffs(coeffs: dict, v) -> Poly:
    acc = {}
    for k, cp in coeffs.items():
        vm = ((v, k),) if k else ()
        for m, c in cp.terms.items():
            _acc(acc, mono_mul_free(m, vm), c)
    return Poly(acc)


def _monic(p: Poly) -> Poly:
    if not p.terms:
        return p
    _, lc = p.lead()
    return pscale(p, 1 / lc)


def _gcd_atoms(p: Poly) -> bool:
    return all(a.kind in (SYM, KER) for a in p.atoms)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd of polynomials whose atoms are symbols or kernels."""
    if not a.terms:
        return _monic(b)
    if not b.terms:
        return _monic(a)
    atoms = sorted(a.atoms | b.atoms, key=lambda x: x.key)
    if not atoms:
        return P_ONE
    v = atoms[-1]
    if v not in a.atoms:
        return poly_gcd(a, _content(b, v))
    if v not in b.atoms:
        return poly_gcd(_content(a, v), b)
    ca, cb = _content(a, v), _content(b, v)
    pa, pb = divexact(a, ca), divexact(b, cb)
    c = poly_gcd(ca, cb)
    if _deg(pa, v) < _deg(pb, v):
        pa, pb = pb, pa
    while pb.terms and _deg(pb, v) > 0:
        r = _prem(pa, pb, v)
        pa, pb = pb, (_primitive(r, v) if r.terms else r)
    if pb.terms:
        g = P_ONE
    else:
        g = _primitive(pa, v)
    return _monic(pmul(c, g))


def _deg(p: Poly, v) -> int:
    return max((dict(m).get(v, 0) for m in p.terms), default=0)


def _content(p: Poly, v) -> Poly:
    coeffs = list(_poly_in(p, v).values())
    return reduce(poly_gcd, coeffs[1:], _monic(coeffs[0]))


def _primitive(p: Poly, v) -> Poly:
    c = _content(p, v)
    q = divexact(p, c)
    return _monic(q)


def _prem(a: Poly, b: Poly, v) -> Poly:
    db = _deg(b, v)
    lcb = _poly_in(b, v)[db]
    r = a
    while r.terms and _deg(r, v) >= db:
        dr = _deg(r, v)
        lcr = _poly_in(r, v)[dr]
        shift = pmono(((v, dr - db),)) if dr > db else P_ONE
        r = psub(pmul(lcb, r), pmul(pmul(lcr, shift), b))
    return r


def rgcd_cancel(a: Rat, notes=None) -> Rat:
    """Cancel numerator gcd against denominator factors beyond trial division."""
    if not a.dfac or not _gcd_atoms(a.num):
        return a
    num = a.num
    dfac = {}
    changed = False
    for f, e in a.dfac:
        if not _gcd_atoms(f):
            dfac[f] = dfac.get(f, 0) + e
            continue
        while e:
            g = poly_gcd(num, f)
            if g.is_const():
                break
            num = divexact(num, g)
            rest = _monic(divexact(f, g))
            if notes is not None:
                notes.append(g)
            changed = True
            e -= 1
            if not rest.is_const():
                dfac[rest] = dfac.get(rest, 0) + 1
        if e:
            dfac[f] = dfac.get(f, 0) + e
    if not changed:
        return a
    for f in list(dfac):
        lead = f.lead()[1]
        if lead != 1:
            num = pscale(num, 1 / lead ** dfac[f])
    return _cancel(num, dict(a.dmono), dfac)

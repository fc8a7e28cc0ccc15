"""Finite-dimensional ansatz for the determining PDEs and its exact linear solve.

Each unknown function is replaced by a linear combination of dictionary
functions with fresh coefficient symbols.  Substituting into the PDEs,
clearing denominators and reading off the coefficient of every distinct
monomial (in coordinates and kernels) gives a homogeneous linear system
over the rationals whose nullspace is the solution family.
"""

from __future__ import annotations

import itertools
import re
import time as _time
from dataclasses import dataclass, field

from .determining import DependencyProfile
from .linalg import RowReducer
from .parser import ParseError, parse_expression, problem_symbols
from .reduction import VelocityVector
from .symkernel import Expr, FunctionSymbol, Symbol, from_rat, num, substitute, sym, to_rat
from .symkernel import rational as R


class FeatureExtractionError(RuntimeError):
    """A substituted PDE is not linear in the ansatz coefficients."""


class HintError(ValueError):
    pass


class SolverTimeout(TimeoutError):
    pass


# ---------------------------------------------------------------------------
# specification


@dataclass(frozen=True)
class AnsatzSpec:
    """What each unknown is expanded in.

    ``base`` is ``("sum", d)``, ``("poly", d)`` or None.  ``extra`` is a basis
    added to every unknown whose coordinates cover it.  ``targeted`` maps
    "xi" or "eta<i>" to a basis that replaces the dictionary of that unknown.
    Without a base, unknowns that are neither targeted nor derivable from a
    targeted one are fixed to zero.
    """

    base: tuple | None = ("sum", 2)
    extra: tuple = ()
    targeted: dict = field(default_factory=dict)

    @staticmethod
    def separation(d: int = 2) -> "AnsatzSpec":
        return AnsatzSpec(("sum", d))

    @staticmethod
    def polynomial(d: int) -> "AnsatzSpec":
        if d < 0:
            raise HintError("polynomial degree must be >= 0")
        return AnsatzSpec(("poly", d))

    @staticmethod
    def basis(exprs) -> "AnsatzSpec":
        return AnsatzSpec(None, tuple(exprs))


_HINT_ITEM = re.compile(r"\s*(?:(sum|poly|nohint)(?:\((\d+)\))?|(basis|xi|eta\d*)\s*\{([^{}]*)\})\s*")


def parse_hint(text: str, src=None, sm=None, degree: int = 2) -> AnsatzSpec:
    """Parse hint text such as ``xi{1} eta{y/t}`` or ``sum basis{exp(-t)}``.

    Expressions are written in the problem's own variables; ``src`` and
    ``sm`` translate them into state coordinates.
    """
    base = None
    extra, targeted = [], {}
    pos = 0
    text = text.strip()
    if not text:
        return AnsatzSpec(("sum", degree))
    while pos < len(text):
        m = _HINT_ITEM.match(text, pos)
        if not m or m.end() == pos:
            raise HintError(f"cannot parse hint at {text[pos:]!r}")
        pos = m.end()
        if m.group(1):
            if base is not None:
                raise HintError("more than one of sum/poly/nohint in hint")
            d = int(m.group(2)) if m.group(2) else degree
            base = ("sum", d) if m.group(1) == "sum" else ("poly", d)
            continue
        exprs = tuple(_hint_expr(s, src, sm) for s in _split_commas(m.group(4)))
        key = m.group(3)
        if key == "basis":
            extra.extend(exprs)
        else:
            if key == "eta":
                key = "eta1"
            if src is not None and key != "xi" and not (1 <= int(key[3:]) <= len(src.dependents)):
                raise HintError(f"hint target {key!r} does not name a dependent variable")
            targeted[key] = targeted.get(key, ()) + exprs
    return AnsatzSpec(base, tuple(extra), targeted)


def _split_commas(s):
    depth, cur, out = 0, "", []
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    return out


def _hint_expr(s: str, src, sm) -> Expr:
    if src is None:
        raise HintError("hint expressions need a problem context")
    try:
        e = parse_expression(s, problem_symbols(src), src.dependents, src.independent)
    except ParseError as exc:
        raise HintError(f"in hint expression {s.strip()!r}: {exc.message}")
    binds = {sy: num(src.params[n]) for n, sy in src.param_symbols.items()}
    binds.update({d: sym(x) for d, x in sm.forward.items()})
    out = substitute(e, binds)
    stray = [x.name for x in out.free_symbols if x.role == "dependent"]
    if stray:
        raise HintError(f"hint expression {s.strip()!r} uses {', '.join(sorted(stray))}, "
                        "which is not a coordinate of the first-order system")
    return out


# ---------------------------------------------------------------------------
# dictionaries


def sum_dictionary(args, d: int) -> list:
    out = [R.R_ONE]
    for v in args:
        for k in range(1, d + 1):
            out.append(R.rpow_int(R.rsym(v), k))
    return out


def poly_dictionary(args, d: int) -> list:
    out = []
    for deg in range(d + 1):
        for combo in itertools.combinations_with_replacement(args, deg):
            out.append(R.rprod([R.rsym(v) for v in combo]))
    return out


def rat_terms(r) -> list:
    """Monomial pieces of ``r`` over its denominator, each with coefficient 1."""
    out = []
    for m in r.num.terms:
        out.append(R._cancel(R.pmono(m), dict(r.dmono), dict(r.dfac)))
    return out


def _normalized(r):
    """``r`` scaled so that its leading numerator coefficient is 1."""
    _, lc = r.num.lead()
    return R.rscale(r, 1 / lc)


def _dedupe(items) -> list:
    seen, out = set(), []
    for r in items:
        if r.is_zero():
            continue
        n = _normalized(r)
        if n not in seen:
            seen.add(n)
            out.append(n)
    return out


# ---------------------------------------------------------------------------
# instantiation


@dataclass
class Ansatz:
    """Unknown -> list of (coefficient symbol, dictionary Rat)."""

    terms: dict
    profile: DependencyProfile

    @property
    def coefficients(self) -> list:
        return [c for F in self.terms for c, _ in self.terms[F]]

    def assignment_rat(self, F):
        return R.rsum([R.rmul(R.rsym(c), b) for c, b in self.terms.get(F, [])])

    def assignments(self) -> dict:
        return {F: from_rat(self.assignment_rat(F)) for F in self.terms}


def _coef(k: int) -> Symbol:
    return Symbol(f"_c{k}", "coefficient")


def _base_dict(base, args):
    if base is None:
        return []
    kind, d = base
    return sum_dictionary(args, d) if kind == "sum" else poly_dictionary(args, d)


def _as_rat(e):
    return e if isinstance(e, R.Rat) else to_rat(e)


def _covers(b, args) -> bool:
    return b.free <= frozenset(args)


def _total_derivative(b, dp: DependencyProfile, phi):
    parts = [R.rdiff(b, dp.time)]
    parts += [R.rmul(R.rdiff(b, x), f) for x, f in zip(dp.states, phi)]
    return R.rsum(parts)


def instantiate(dp: DependencyProfile, spec: AnsatzSpec, v: VelocityVector | None = None,
                blocks=None) -> Ansatz:
    """Expand every unknown of ``dp`` according to ``spec``.

    ``blocks`` lists ``(start, r_i)`` per dependent variable (by default
    every state is its own block); ``v`` is needed for dictionaries derived
    by prolongation.
    """
    blocks = blocks or tuple((k, 1) for k in range(len(dp.X)))
    phi = v.rats if v is not None else None
    dicts = {}

    def targeted_dict(key, F):
        out = []
        for e in spec.targeted[key]:
            b = _as_rat(e)
            if not _covers(b, F.args):
                bad = sorted(s.name for s in b.free - frozenset(F.args))
                raise HintError(f"hint basis element {e} for {key} uses {', '.join(bad)}, outside "
                                f"the coordinates ({', '.join(a.name for a in F.args)}) of {F.name}")
            out.append(b)
        return out

    def general(F):
        out = _base_dict(spec.base, F.args)
        out += [_as_rat(e) for e in spec.extra if _covers(_as_rat(e), F.args)]
        return out

    # T
    dicts[dp.T] = targeted_dict("xi", dp.T) if "xi" in spec.targeted else general(dp.T)
    # X, block by block; derivative components may be derived by prolongation
    for i, (b0, ri) in enumerate(blocks):
        key = f"eta{i + 1}"
        first = dp.X[b0]
        is_targeted = key in spec.targeted
        dicts[first] = targeted_dict(key, first) if is_targeted else general(first)
        for j in range(1, ri):
            F = dp.X[b0 + j]
            own = general(F)
            if (is_targeted or spec.base is None) and phi is not None:
                derived = []
                for b in dicts[dp.X[b0 + j - 1]]:
                    derived += rat_terms(_total_derivative(b, dp, phi))
                for b in dicts[dp.T]:
                    derived += rat_terms(R.rmul(R.rsym(dp.states[b0 + j]), _total_derivative(b, dp, phi)))
                own = own + [d for d in _dedupe(derived) if _covers(d, F.args)]
            dicts[F] = own
    # costate generators: dictionaries derived from the B-group relations
    if dp.mode == "full":
        H = R.rsum([R.rmul(R.rsym(p), f) for p, f in zip(dp.costates, phi)]) if phi else None
        for j, F in enumerate(dp.Psi):
            derived = []
            for b in dicts[dp.T]:
                if H is not None:
                    derived += rat_terms(R.rmul(H, R.rdiff(b, dp.states[j])))
            for i, Xi in enumerate(dp.X):
                for b in dicts[Xi]:
                    derived += rat_terms(R.rmul(R.rsym(dp.costates[i]), R.rdiff(b, dp.states[j])))
            dicts[F] = general(F) + [d for d in _dedupe(derived) if _covers(d, F.args)]
    else:
        for j, row in enumerate(dp.W):
            for i, F in enumerate(row):
                derived = []
                for b in dicts[dp.X[i]]:
                    derived += rat_terms(R.rdiff(b, dp.states[j]))
                if phi is not None:
                    for b in dicts[dp.T]:
                        derived += rat_terms(R.rmul(phi[i], R.rdiff(b, dp.states[j])))
                dicts[F] = [d for d in _dedupe(derived) if _covers(d, F.args)]
    terms, k = {}, 0
    for F in dp.unknowns():
        lst = []
        for b in dicts.get(F, []):
            if b.is_zero():
                continue
            k += 1
            lst.append((_coef(k), b))
        terms[F] = lst
    return Ansatz(terms, dp)


# ---------------------------------------------------------------------------
# reduction to linear algebra


@dataclass
class LinearSystem:
    columns: list          # coefficient symbols in column order
    reducer: RowReducer
    ansatz: Ansatz
    equations: int = 0     # feature equations generated (before elimination)

    @property
    def ncols(self) -> int:
        return len(self.columns)


def _column_order(ans: Ansatz) -> list:
    dp = ans.profile
    aux = [F for row in dp.W for F in row] + list(dp.Psi)
    main = [dp.T, *dp.X]
    return [c for F in aux + main for c, _ in ans.terms.get(F, [])]


def _derivative_images(ans: Ansatz, atoms) -> dict:
    """``{coefficient: {function atom: Rat}}`` for every function atom in ``atoms``."""
    out = {}
    for a in atoms:
        base = a.base if a.order else a
        for c, b in ans.terms.get(base, []):
            img = b
            for s, k in zip(a.args, a.derivs):
                for _ in range(k):
                    img = R.rdiff(img, s)
            if not img.is_zero():
                out.setdefault(c, {})[a] = img
    return out


def reduce_to_linear(pdes, ans: Ansatz, deadline: float | None = None) -> LinearSystem:
    from .symkernel.ops import collect_rat

    cols = _column_order(ans)
    index = {c: i for i, c in enumerate(cols)}
    rr = RowReducer(len(cols))
    neq = 0
    for pde in pdes:
        rat = pde.rat if hasattr(pde, "rat") else _as_rat(pde)
        fatoms = [s for s in rat.free if isinstance(s, FunctionSymbol)]
        try:
            parts = collect_rat(rat, fatoms)
        except Exception as exc:
            raise FeatureExtractionError(f"PDE {getattr(pde, 'label', '')} is not linear in the unknowns: {exc}")
        gcoef = {}
        for mono, g in parts.items():
            if not mono:
                if not g.is_zero():
                    raise FeatureExtractionError(
                        f"PDE {getattr(pde, 'label', '')} has a term free of unknowns: {from_rat(g)}")
                continue
            if len(mono) != 1 or mono[0][1] != 1:
                raise FeatureExtractionError(
                    f"PDE {getattr(pde, 'label', '')} is non-linear in the unknowns")
            gcoef[mono[0][0]] = g
        images = _derivative_images(ans, gcoef)
        contrib = {}
        for c, per_atom in images.items():
            if deadline is not None and _time.monotonic() > deadline:
                raise SolverTimeout("time limit exceeded while building the linear system")
            e = R.rsum([R.rmul(gcoef[a], img) for a, img in per_atom.items()])
            if not e.is_zero():
                contrib[c] = e
        rows = _feature_rows(contrib, index, getattr(pde, "label", ""))
        for row in rows.values():
            neq += 1
            rr.add(row)
    return LinearSystem(cols, rr, ans, neq)


def _feature_rows(contrib: dict, index: dict, label: str) -> dict:
    """Clear a common denominator and split by monomial features."""
    if not contrib:
        return {}
    dmono, dfac = {}, {}
    for e in contrib.values():
        for a, k in e.dmono:
            dmono[a] = max(dmono.get(a, 0), k)
        for f, k in e.dfac:
            dfac[f] = max(dfac.get(f, 0), k)
    rows = {}
    for c, e in contrib.items():
        for a in e.num.atoms:
            if any(s.role == "coefficient" for s in R.atom_free(a)):
                raise FeatureExtractionError(
                    f"PDE {label}: ansatz coefficient inside a kernel in {from_rat(e)}")
        top = R.pmul(e.num, R._den_cofactor(dmono, dfac, e)) if (dmono or dfac) else e.num
        col = index[c]
        for m, v in top.terms.items():
            row = rows.setdefault(m, {})
            row[col] = row.get(col, 0) + v
    return {m: {k: v for k, v in row.items() if v} for m, row in rows.items()}


# ---------------------------------------------------------------------------
# solutions


@dataclass
class SolutionFamily:
    """Assignments linear in free constants C_1..C_k.

    ``members[j]`` is the assignment obtained with C_{j+1} = 1 and every
    other constant 0; it maps unknown functions to rational forms.
    """

    unknowns: list
    members: list
    constants: list = field(default_factory=list)

    def __post_init__(self):
        if not self.constants:
            self.constants = [constant(j) for j in range(1, len(self.members) + 1)]

    @property
    def k(self) -> int:
        return len(self.members)

    def assignment_rat(self, F):
        return R.rsum([R.rmul(R.rsym(C), m.get(F, R.R_ZERO)) for C, m in zip(self.constants, self.members)])

    @property
    def assignments(self) -> dict:
        return {F: from_rat(self.assignment_rat(F)) for F in self.unknowns}


def constant(j: int) -> Symbol:
    return Symbol(f"C{j}", "coefficient")


def solve_nullspace(ls: LinearSystem) -> SolutionFamily:
    basis = ls.reducer.nullspace()
    ans = ls.ansatz
    col_of = {c: i for i, c in enumerate(ls.columns)}
    members = []
    for vec in basis:
        m = {}
        for F, lst in ans.terms.items():
            parts = [R.rscale(b, vec[col_of[c]]) for c, b in lst if vec[col_of[c]]]
            val = R.rsum(parts)
            if not val.is_zero():
                m[F] = val
        members.append(m)
    return SolutionFamily(ans.profile.unknowns(), members)


def _vectorize(members, unknowns):
    """Express members as coordinate vectors over shared per-unknown features."""
    dens = {}
    for F in unknowns:
        dmono, dfac = {}, {}
        for m in members:
            v = m.get(F)
            if v is None:
                continue
            for a, k in v.dmono:
                dmono[a] = max(dmono.get(a, 0), k)
            for f, k in v.dfac:
                dfac[f] = max(dfac.get(f, 0), k)
        dens[F] = (dmono, dfac)
    keys, vecs = {}, []
    for m in members:
        d = {}
        for F in unknowns:
            v = m.get(F)
            if v is None or v.is_zero():
                continue
            dmono, dfac = dens[F]
            top = R.pmul(v.num, R._den_cofactor(dmono, dfac, v)) if (dmono or dfac) else v.num
            for mono, c in top.terms.items():
                kk = keys.setdefault((F.key, R.mono_key(mono)), len(keys))
                d[kk] = c
        vecs.append(d)
    return vecs, len(keys)


def reduce_constants(f: SolutionFamily, unknowns=None) -> SolutionFamily:
    """Merge constants that only ever occur in fixed combinations.

    Members are compared on ``unknowns`` (default: all); a maximal linearly
    independent subset is kept, so the spanned space is unchanged and k
    never grows.
    """
    unknowns = list(unknowns) if unknowns is not None else f.unknowns
    vecs, n = _vectorize(f.members, unknowns)
    rr = RowReducer(n)
    keep = []
    for m, v in zip(f.members, vecs):
        if rr.add(v):
            keep.append(m)
    return SolutionFamily(f.unknowns, keep)


def split_solutions(f: SolutionFamily, unknowns=None) -> list:
    """One assignment per constant, dropping zeros and duplicates up to scaling."""
    unknowns = list(unknowns) if unknowns is not None else f.unknowns
    out = []
    for m in f.members:
        if all(m.get(F, R.R_ZERO).is_zero() for F in unknowns):
            continue
        if any(_proportional(m, o, unknowns) for o in out):
            continue
        out.append(m)
    return out


def _proportional(a: dict, b: dict, unknowns) -> bool:
    ratio = None
    for F in unknowns:
        x, y = a.get(F, R.R_ZERO), b.get(F, R.R_ZERO)
        if x.is_zero() != y.is_zero():
            return False
        if x.is_zero():
            continue
        q = R.rdiv(x, y)
        if not q.is_const():
            return False
        if ratio is None:
            ratio = q.const_value()
        elif q.const_value() != ratio:
            return False
    return True


def solve(pdes, dp: DependencyProfile, spec: AnsatzSpec, v: VelocityVector | None = None,
          blocks=None, time_limit: float | None = None):
    """instantiate -> reduce_to_linear -> solve_nullspace."""
    deadline = _time.monotonic() + time_limit if time_limit else None
    ans = instantiate(dp, spec, v, blocks)
    ls = reduce_to_linear(pdes, ans, deadline)
    if deadline is not None and _time.monotonic() > deadline:
        raise SolverTimeout("time limit exceeded")
    return solve_nullspace(ls), ls

"""End-to-end ``find``: parse, reduce, build the determining system, solve, extract, verify."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ansatz import (
    AnsatzSpec, parse_hint, reduce_constants, solve, split_solutions,
)
from .determining import determining_system
from .extract import DisplayFlags, GeneratorSet, extract_generators
from .parser import ProblemSource
from .reduction import reduce_problem
from .symkernel import DEFAULT_SEED, as_expr
from .symkernel import rational as R
from .verify import CandidateError, verify_generator, verify_invariance

DEPS = {"min": "minimal", "default": "default", "all": "full"}


class UnverifiedGenerator(RuntimeError):
    """The solver produced a generator that the verifier rejects; this is a bug."""


@dataclass
class FindOptions:
    deps: str = "default"
    hint: str | None = None
    degree: int = 2
    split: bool = False
    all_const: bool = False
    show_dep: bool = False
    show_t: bool = False
    show_gen: bool = False
    seed: int = DEFAULT_SEED
    time_limit: float | None = None

    def merged(self, src: ProblemSource) -> "FindOptions":
        """Fold the problem file's ``opts:`` flags into these options."""
        o = FindOptions(**self.__dict__)
        flags = set(src.options)
        o.split |= "split" in flags
        o.all_const |= "allconst" in flags
        o.show_dep |= "showdep" in flags
        o.show_t |= "showt" in flags
        o.show_gen |= "showgen" in flags
        if o.deps == "default":
            if "mindep" in flags:
                o.deps = "min"
            elif "alldep" in flags:
                o.deps = "all"
        if o.hint is None:
            o.hint = src.hint or ""
        return o

    @property
    def flags(self) -> DisplayFlags:
        return DisplayFlags(self.show_dep, self.show_t, self.show_gen)


@dataclass
class FindResult:
    generators: list
    options: FindOptions
    diagnostics: dict = field(default_factory=dict)
    context: tuple = ()    # (cs, sm, v, ds) for callers that want the internals


def _shown(dp) -> list:
    return [dp.T, *dp.X, *dp.Psi]


def find(src: ProblemSource, opts: FindOptions | None = None) -> FindResult:
    opts = (opts or FindOptions()).merged(src)
    cs, sm, v = reduce_problem(src)
    ds = determining_system(v, DEPS[opts.deps])
    dp = ds.profile
    spec = parse_hint(opts.hint, src, sm, opts.degree) if opts.hint else AnsatzSpec.separation(opts.degree)
    fam, ls = solve(ds.flattened, dp, spec, v, sm.blocks, opts.time_limit)
    raw_k = fam.k
    if not opts.all_const:
        fam = reduce_constants(fam, _shown(dp))
    if opts.split:
        precursors = split_solutions(fam, _shown(dp))
        values = precursors
    else:
        values = [{F: fam.assignment_rat(F) for F in dp.unknowns()}] if fam.k else []
        precursors = [{F: val for F, val in m.items() if F in set(_shown(dp)) or opts.show_gen} for m in values]
    gens = extract_generators(precursors, sm, cs, opts.flags)
    for g, full in zip(gens, values):
        rep = _verify(g, full, sm, v, dp, opts.seed)
        if not rep.passed:
            raise UnverifiedGenerator(
                f"generator xi={g.xi}, eta={list(map(str, g.eta))} failed verification ({rep.verdict})")
        g.verified = True
    diags = {
        "profile": dp.mode,
        "pdes": len(ds.flattened),
        "ansatz_coefficients": ls.ncols,
        "feature_equations": ls.equations,
        "rank": ls.reducer.rank,
        "constants": fam.k,
        "constants_before_reduction": raw_k,
        "trivial_only": not gens,
    }
    return FindResult(gens, opts, diags, (cs, sm, v, ds))


def _verify(g: GeneratorSet, full: dict, sm, v, dp, seed):
    try:
        return verify_generator(g, sm, v, seed)
    except CandidateError:
        values = {F: (r if isinstance(r, R.Rat) else R.rsym(r)) for F, r in full.items()}
        return verify_invariance(values, v, dp, seed)


def combine(gens, coeffs) -> GeneratorSet:
    """Rational linear combination of generator sets (same problem)."""
    xi = as_expr(0)
    eta = None
    for g, c in zip(gens, coeffs):
        xi = xi + c * g.xi
        eta = [c * e for e in g.eta] if eta is None else [a + c * e for a, e in zip(eta, g.eta)]
    return GeneratorSet(xi, tuple(eta or ()))

"""Independent symmetry check on the first-order system.

A candidate (xi, eta) is prolonged to every state coordinate along the
flow, then the linearized invariance residual

    L_j = D_t X_j - phi_j,t xi - sum_k phi_j,x_k X_k - phi_j D_t xi

is tested for zero componentwise.
"""

from __future__ import annotations

from dataclasses import dataclass

from .determining import DependencyProfile, invariance_polynomial_rat
from .extract import GeneratorSet
from .parser import ProblemSource, parse_candidate
from .reduction import StateMap, VelocityVector, from_state
from .symkernel import DEFAULT_SEED, Expr, ZeroTestResult, as_expr, from_rat, substitute, sym, to_rat
from .symkernel import rational as R
from .symkernel.ops import zero_test_rat

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


class CandidateError(ValueError):
    """A candidate cannot be verified in (xi, eta) form."""


@dataclass
class VerificationReport:
    residuals: list          # Expr per state coordinate
    verdict: str
    evidence: list           # ZeroTestResult per residual

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


def _total_derivative(f, v: VelocityVector):
    parts = [R.rdiff(f, v.time)]
    parts += [R.rmul(R.rdiff(f, x), phi) for x, phi in zip(v.states, v.rats)]
    return R.rsum(parts)


def _state_rat(e, sm: StateMap):
    e = as_expr(e)
    return to_rat(substitute(e, {d: sym(x) for d, x in sm.forward.items()}))


def prolong(g: GeneratorSet, sm: StateMap, v: VelocityVector) -> list:
    """Full X vector (as rational forms in state coordinates) generated by ``g``."""
    xi = _state_rat(g.xi, sm)
    dxi = _total_derivative(xi, v)
    X = [R.R_ZERO] * len(sm.states)
    for i, (b, r) in enumerate(sm.blocks):
        X[b] = _state_rat(g.eta[i], sm)
        for j in range(1, r):
            X[b + j] = R.rsub(_total_derivative(X[b + j - 1], v),
                              R.rmul(R.rsym(sm.states[b + j]), dxi))
    return X


def residual_rats(X: list, xi, v: VelocityVector) -> list:
    xi = xi if isinstance(xi, R.Rat) else to_rat(as_expr(xi))
    dxi = _total_derivative(xi, v)
    out = []
    for Xj, phi in zip(X, v.rats):
        parts = [_total_derivative(Xj, v), R.rneg(R.rmul(R.rdiff(phi, v.time), xi)), R.rneg(R.rmul(phi, dxi))]
        parts += [R.rneg(R.rmul(R.rdiff(phi, x), Xk)) for x, Xk in zip(v.states, X)]
        out.append(R.rsum(parts))
    return out


def residual(X: list, xi, v: VelocityVector) -> list:
    return [from_rat(r) for r in residual_rats([x if isinstance(x, R.Rat) else to_rat(as_expr(x)) for x in X], xi, v)]


def _report(rats, seed, sm: StateMap | None = None) -> VerificationReport:
    evidence = [zero_test_rat(r, seed=seed) for r in rats]
    if any(e.zero is False for e in evidence):
        verdict = FAIL
    elif any(e.zero is None for e in evidence):
        verdict = INCONCLUSIVE
    else:
        verdict = PASS
    shown = [from_rat(r) for r in rats]
    if sm is not None:
        shown = [from_state(e, sm) for e in shown]
    return VerificationReport(shown, verdict, evidence)


def verify_generator(g: GeneratorSet, sm: StateMap, v: VelocityVector,
                     seed: int = DEFAULT_SEED) -> VerificationReport:
    for c in g.components:
        if any(s.role == "costate" for s in as_expr(c).free_symbols):
            raise CandidateError("candidate depends on costates; only (xi, eta) candidates can be verified")
    X = prolong(g, sm, v)
    xi = _state_rat(g.xi, sm)
    return _report(residual_rats(X, xi, v), seed, sm)


def verify_candidate(text: str, src: ProblemSource, sm: StateMap, v: VelocityVector,
                     seed: int = DEFAULT_SEED) -> VerificationReport:
    """Parse ``xi=..., eta=...`` in the problem's notation and verify it."""
    xi, etas = parse_candidate(text, src)
    binds = {s: as_expr(src.params[n]) for n, s in src.param_symbols.items()}
    xi = substitute(xi, binds)
    etas = tuple(substitute(e, binds) for e in etas)
    _check_orders(xi, etas, sm)
    return verify_generator(GeneratorSet(xi, etas), sm, v, seed)


def _check_orders(xi: Expr, etas, sm: StateMap):
    allowed = set(sm.forward)
    for e in (xi, *etas):
        for s in e.free_symbols:
            if s.role == "dependent" and s not in allowed:
                raise CandidateError(
                    f"candidate mentions {s.name}, which is not below the leading derivative order")


def verify_invariance(values: dict, v: VelocityVector, dp: DependencyProfile,
                      seed: int = DEFAULT_SEED) -> VerificationReport:
    """Check a full augmented generator (T, X, Psi) against the invariance polynomial.

    Used for generators that depend on costates, where no (xi, eta)
    projection exists.
    """
    poly = invariance_polynomial_rat(v, dp, values)
    return _report([poly], seed)


__all__ = [
    "PASS", "FAIL", "INCONCLUSIVE", "CandidateError", "VerificationReport", "prolong", "residual",
    "residual_rats", "verify_generator", "verify_candidate", "verify_invariance", "ZeroTestResult",
]

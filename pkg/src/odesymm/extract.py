"""Projection of solved generators back to (xi, eta) in the problem's own notation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .parser import split_derivative
from .reduction import CanonicalSystem, StateMap, from_state
from .symkernel import Expr, Symbol, as_expr, from_rat, substitute, sym, to_rat, to_string

_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


@dataclass(frozen=True)
class DisplayFlags:
    showdep: bool = False   # y(t) rather than y
    showt: bool = False     # xi(t, y, ...) rather than xi
    showgen: bool = False   # include the augmented generators


@dataclass
class GeneratorSet:
    """One symmetry generator.

    ``xi`` and ``eta`` use the original variables (t, y_i and derivatives
    below the leading order).  ``augmented`` holds every solved unknown,
    also renamed, and is only filled in when showgen is requested.
    """

    xi: Expr
    eta: tuple
    augmented: dict | None = None
    flags: DisplayFlags = field(default_factory=DisplayFlags)
    verified: bool | None = None

    @property
    def unreduced(self) -> bool:
        """True when a costate survives in xi or eta (full profile only)."""
        return any(s.role == "costate" for c in self.components for s in as_expr(c).free_symbols)

    @property
    def components(self) -> list:
        return [self.xi, *self.eta]


def display_name(name: str, k: int, showdep: bool = False) -> str:
    """``y``, ``y'``, ``y''``, ``y'''``, then ``y⁽⁴⁾`` and up."""
    s = name + "'" * k if k <= 3 else f"{name}⁽{str(k).translate(_SUPERSCRIPT)}⁾"
    return s + "(t)" if showdep else s


def format_expr(e: Expr, flags: DisplayFlags = DisplayFlags(), time_name: str = "t") -> str:
    """Text rendering with derivative symbols in display notation."""
    e = as_expr(e)
    ren = {}
    for s in e.free_symbols:
        if s.role == "dependent":
            base, k = split_derivative(s)
            shown = display_name(base, k, False)
            if flags.showdep:
                shown = shown + f"({time_name})"
            if shown != s.name:
                ren[s] = sym(Symbol(shown, "dependent"))
    return to_string(substitute(e, ren) if ren else e)


def derivative_objects(e: Expr) -> list:
    """Structured description of the derivative symbols an expression mentions."""
    out = []
    for s in sorted(as_expr(e).free_symbols, key=lambda s: s.key):
        if s.role == "dependent":
            base, k = split_derivative(s)
            out.append({"symbol": s.name, "variable": base, "order": k})
    return out


def _by_name(precursor: dict) -> dict:
    out = {}
    for F, v in precursor.items():
        name = F if isinstance(F, str) else F.name
        out[name] = v if isinstance(v, Expr) else from_rat(v)
    return out


def extract_generators(sets, sm: StateMap, cs: CanonicalSystem, flags: DisplayFlags = DisplayFlags()) -> list:
    out = []
    for pre in sets:
        named = _by_name(pre)
        xi = from_state(named.get("T", as_expr(0)), sm)
        eta = tuple(from_state(named.get(f"X[{b + 1}]", as_expr(0)), sm) for b, _ in sm.blocks)
        aug = None
        if flags.showgen:
            aug = {k: from_state(v, sm) for k, v in sorted(named.items(), key=lambda kv: _unknown_key(kv[0]))}
        out.append(GeneratorSet(xi, eta, aug, flags))
    return out


def _unknown_key(name: str):
    head, _, rest = name.partition("[")
    order = {"T": 0, "X": 1, "Psi": 2, "W": 3}.get(head, 4)
    idx = tuple(int(p) for p in rest.rstrip("]").split(",")) if rest else ()
    return (order, idx)


def is_trivial(g: GeneratorSet) -> bool:
    """True for the zero generator."""
    return all(to_rat(c).is_zero() for c in g.components)

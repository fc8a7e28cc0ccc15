"""Symbols and unknown-function symbols."""

from __future__ import annotations

ROLES = frozenset({
    "time",         # the independent variable t
    "dependent",    # y_i and its derivatives y_i', y_i'', ...
    "state",        # x[1..r]
    "costate",      # psi[1..r]
    "dotted",       # time derivatives of states/costates inside the invariance polynomial
    "parameter",
    "coefficient",  # ansatz coefficients and free constants
    "function",     # unknown functions T, X[i], Psi[i], W[j,i] and their partials
})

SYM = 0  # atom kind tag shared with the rational-function layer


class Symbol:
    """A named indeterminate. Two symbols are equal iff name and role agree."""

    __slots__ = ("name", "role", "key", "_hash")
    kind = SYM

    def __init__(self, name: str, role: str = "parameter"):
        if role not in ROLES:
            raise ValueError(f"unknown symbol role {role!r}")
        self.name = name
        self.role = role
        self.key = (0, name, role)
        self._hash = hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Symbol) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Symbol({self.name!r}, {self.role!r})"

    def __str__(self):
        return self.name

    def __reduce__(self):
        return (Symbol, (self.name, self.role))


class FunctionSymbol(Symbol):
    """An opaque unknown function F(args), or one of its partial derivatives.

    ``derivs`` counts differentiations per argument, so
    ``FunctionSymbol("T", (t, x1), (1, 0))`` stands for dT/dt.
    """

    __slots__ = ("args", "derivs")

    def __init__(self, name: str, args: tuple = (), derivs: tuple = ()):
        self.name = name
        self.role = "function"
        self.args = tuple(args)
        self.derivs = tuple(derivs) if derivs else (0,) * len(self.args)
        if len(self.derivs) != len(self.args):
            raise ValueError("derivs must match args")
        self.key = (0, name, "function", tuple(a.key for a in self.args), self.derivs)
        self._hash = hash(self.key)

    @property
    def base(self) -> "FunctionSymbol":
        return FunctionSymbol(self.name, self.args)

    @property
    def order(self) -> int:
        return sum(self.derivs)

    def diff(self, s: Symbol) -> "FunctionSymbol | None":
        """Partial derivative w.r.t. ``s``; None when the function ignores ``s``."""
        try:
            i = self.args.index(s)
        except ValueError:
            return None
        d = list(self.derivs)
        d[i] += 1
        return FunctionSymbol(self.name, self.args, tuple(d))

    def __repr__(self):
        return f"FunctionSymbol({self.name!r}, {self.args!r}, {self.derivs!r})"

    def __str__(self):
        if not any(self.derivs):
            return f"{self.name}({','.join(a.name for a in self.args)})"
        parts = []
        for a, k in zip(self.args, self.derivs):
            parts.extend([a.name] * k)
        return f"{self.name}_{{{','.join(parts)}}}"

    def __reduce__(self):
        return (FunctionSymbol, (self.name, self.args, self.derivs))

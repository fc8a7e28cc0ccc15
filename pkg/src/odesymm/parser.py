"""Problem-file parser.

Grammar (statements end with ``;``, ``#`` starts a comment)::

    ode:    expr = expr, expr = expr, ... ;
    vars:   y(t), q[1](t), ... ;
    params: m = 1, k = 3/2, ... ;
    hint:   <free text handed to the ansatz module> ;
    opts:   split, showgen, ... ;

Expressions use ``+ - * / ^`` (``**`` is accepted for ``^``), the kernels
``exp ln sin cos sqrt``, derivatives written ``diff(y,t,k)``, ``diff(y,t,t)``
or ``y''``, and ``y(t)`` as a synonym for ``y``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .symkernel import Expr, Symbol, fn, num, power, sym, to_string
from .symkernel.expr import KERNELS, NUM

FLAGS = ("allconst", "mindep", "alldep", "split", "showdep", "showt", "showgen")
KEYWORDS = ("ode", "vars", "params", "hint", "opts")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"line {line}, col {col}: {message}" if line else message)


def derivative_symbol(name: str, k: int) -> Symbol:
    """Symbol standing for the k-th derivative of dependent variable ``name``."""
    return Symbol(name + "'" * k, "dependent")


def split_derivative(s: Symbol):
    """Inverse of :func:`derivative_symbol`: ``(name, k)``."""
    base = s.name.rstrip("'")
    return base, len(s.name) - len(base)


@dataclass
class ProblemSource:
    equations: list                   # [(lhs Expr, rhs Expr)]
    dependents: list                  # [name] in declaration order
    independent: str                  # name of the independent variable
    params: dict = field(default_factory=dict)   # name -> Fraction, in declaration order
    hint: str | None = None
    options: list = field(default_factory=list)

    @property
    def time(self) -> Symbol:
        return Symbol(self.independent, "time")

    @property
    def param_symbols(self) -> dict:
        return {n: Symbol(n, "parameter") for n in self.params}

    def __eq__(self, other):
        if not isinstance(other, ProblemSource):
            return NotImplemented
        return (self.equations == other.equations and self.dependents == other.dependents
                and self.independent == other.independent and self.params == other.params
                and self.hint == other.hint and self.options == other.options)


# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?|\.\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*(?:\[\d+\])?'*)
  | (?P<op>\*\*|[-+*/^(),=;:])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    pos: int


class _Lexer:
    def __init__(self, text: str, start: int = 0, end: int | None = None):
        self.text = text
        self.pos = start
        self.end = len(text) if end is None else end
        self._peeked = None

    def where(self, pos: int):
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, msg, pos):
        raise ParseError(msg, *self.where(pos))

    def _scan(self) -> Tok:
        while self.pos < self.end:
            m = _TOKEN.match(self.text, self.pos, self.end)
            if not m:
                self.error(f"unexpected character {self.text[self.pos]!r}", self.pos)
            self.pos = m.end()
            if m.lastgroup != "ws":
                txt = m.group()
                return Tok(m.lastgroup, "^" if txt == "**" else txt, m.start())
        return Tok("eof", "", self.end)

    def peek(self) -> Tok:
        if self._peeked is None:
            self._peeked = self._scan()
        return self._peeked

    def next(self) -> Tok:
        tok = self.peek()
        self._peeked = None
        return tok

    def expect(self, text: str) -> Tok:
        tok = self.next()
        if tok.text != text or tok.kind == "eof":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            self.error(f"expected {text!r}, found {found}", tok.pos)
        return tok


# ---------------------------------------------------------------------------
# expression AST (resolved after all declarations are known)
#   ("num", Fraction, pos) ("id", name, primes, pos) ("call", name, [args], pos)
#   ("diff", name, order, var, pos) ("add"/"sub"/"mul"/"div"/"pow", a, b, pos) ("neg", a, pos)


def _parse_expr(lx: _Lexer):
    node = _parse_term(lx)
    while lx.peek().text in ("+", "-") and lx.peek().kind == "op":
        op = lx.next()
        node = ("add" if op.text == "+" else "sub", node, _parse_term(lx), op.pos)
    return node


def _parse_term(lx):
    node = _parse_unary(lx)
    while lx.peek().text in ("*", "/") and lx.peek().kind == "op":
        op = lx.next()
        node = ("mul" if op.text == "*" else "div", node, _parse_unary(lx), op.pos)
    return node


def _parse_unary(lx):
    tok = lx.peek()
    if tok.kind == "op" and tok.text in ("-", "+"):
        lx.next()
        inner = _parse_unary(lx)
        return ("neg", inner, tok.pos) if tok.text == "-" else inner
    return _parse_power(lx)


def _parse_power(lx):
    base = _parse_atom(lx)
    tok = lx.peek()
    if tok.kind == "op" and tok.text == "^":
        lx.next()
        return ("pow", base, _parse_exponent(lx), tok.pos)
    return base


def _parse_exponent(lx):
    tok = lx.peek()
    if tok.kind == "op" and tok.text in ("-", "+"):
        lx.next()
        inner = _parse_exponent(lx)
        return ("neg", inner, tok.pos) if tok.text == "-" else inner
    return _parse_power(lx)


def _parse_args(lx):
    args = []
    lx.expect("(")
    if lx.peek().text == ")":
        lx.next()
        return args
    while True:
        args.append(_parse_expr(lx))
        tok = lx.next()
        if tok.text == ")":
            return args
        if tok.text != ",":
            lx.error(f"expected ',' or ')', found {tok.text or 'end of input'!r}", tok.pos)


def _parse_atom(lx):
    tok = lx.next()
    if tok.kind == "num":
        return ("num", Fraction(tok.text), tok.pos)
    if tok.kind == "op" and tok.text == "(":
        node = _parse_expr(lx)
        lx.expect(")")
        return node
    if tok.kind == "id":
        name = tok.text.rstrip("'")
        primes = len(tok.text) - len(name)
        if lx.peek().text == "(" and lx.peek().kind == "op":
            if primes:
                lx.error(f"unexpected '(' after {tok.text!r}", lx.peek().pos)
            args = _parse_args(lx)
            if name == "diff":
                return _diff_node(lx, args, tok.pos)
            return ("call", name, args, tok.pos)
        return ("id", name, primes, tok.pos)
    found = "end of input" if tok.kind == "eof" else repr(tok.text)
    lx.error(f"unexpected {found}", tok.pos)


def _strip_call(node):
    """``y(t)`` used as the first argument of diff."""
    if node[0] == "call" and len(node[2]) == 1 and node[2][0][0] == "id":
        return ("id", node[1], 0, node[3])
    return node


def _diff_node(lx, args, pos):
    if len(args) < 2:
        lx.error("diff needs a function and a variable", pos)
    f = _strip_call(args[0])
    if f[0] != "id":
        lx.error("diff expects a dependent variable as first argument", pos)
    var = args[1]
    if var[0] != "id" or var[2]:
        lx.error("diff expects the independent variable as second argument", pos)
    rest = args[2:]
    order = 1
    if len(rest) == 1 and rest[0][0] == "num":
        k = rest[0][1]
        if k.denominator != 1 or k < 1:
            lx.error("derivative order must be a positive integer", rest[0][2])
        order = int(k)
    elif rest:
        for r in rest:
            if r[0] != "id" or r[1] != var[1] or r[2]:
                lx.error("repeated diff variables must all be the independent variable", pos)
        order = 1 + len(rest)
    return ("diff", f[1], f[2] + order, var[1], pos)


# ---------------------------------------------------------------------------
# resolution


class _Resolver:
    def __init__(self, lx, symbols: dict, dependents=(), independent=None):
        self.lx = lx
        self.symbols = symbols           # name -> Symbol for plain identifiers
        self.dependents = set(dependents)
        self.independent = independent

    def __call__(self, node) -> Expr:
        kind = node[0]
        if kind == "num":
            return num(node[1])
        if kind == "id":
            _, name, primes, pos = node
            return self._ident(name, primes, pos)
        if kind == "diff":
            _, name, order, var, pos = node
            if self.independent is not None and var != self.independent:
                self.lx.error(f"derivative with respect to {var!r}, but the independent variable is "
                              f"{self.independent!r}", pos)
            return self._ident(name, order, pos)
        if kind == "call":
            _, name, args, pos = node
            if name in self.dependents:
                if len(args) != 1 or args[0][0] != "id" or args[0][1] != self.independent:
                    self.lx.error(f"{name}(...) must be applied to the independent variable", pos)
                return self._ident(name, 0, pos)
            if name not in KERNELS:
                self.lx.error(f"unknown function kernel {name!r}", pos)
            if len(args) != 1:
                self.lx.error(f"{name} takes exactly one argument", pos)
            return fn(name, self(args[0]))
        if kind == "neg":
            return -self(node[1])
        a, b = self(node[1]), self(node[2])
        if kind == "add":
            return a + b
        if kind == "sub":
            return a - b
        if kind == "mul":
            return a * b
        if kind == "div":
            if b.kind == NUM and b.value == 0:
                self.lx.error("division by zero", node[3])
            return a / b
        # power
        if b.kind == NUM:
            if a.kind == NUM and a.value == 0 and b.value < 0:
                self.lx.error("division by zero", node[3])
            return power(a, b.value)
        return fn("exp", b * fn("ln", a))

    def _ident(self, name, primes, pos):
        if name in self.dependents:
            return sym(derivative_symbol(name, primes))
        if primes:
            self.lx.error(f"undeclared dependent variable {name!r}", pos)
        s = self.symbols.get(name)
        if s is None:
            if name in KERNELS or name == "diff":
                self.lx.error(f"kernel {name!r} used without an argument", pos)
            self.lx.error(f"undeclared symbol {name!r} (parameters must be bound in 'params:')", pos)
        return sym(s)


def _check_undeclared_calls(lx, node, dependents):
    """Report ``z(t)``/``diff(z,t)`` for undeclared ``z`` with a precise message."""
    kind = node[0]
    if kind == "diff" and node[1] not in dependents:
        lx.error(f"undeclared dependent variable {node[1]!r}", node[4])
    if kind == "call":
        name = node[1]
        if name not in dependents and name not in KERNELS:
            lx.error(f"unknown function kernel {name!r} (and not a declared dependent variable)", node[3])
        for a in node[2]:
            _check_undeclared_calls(lx, a, dependents)
    elif kind in ("add", "sub", "mul", "div", "pow"):
        _check_undeclared_calls(lx, node[1], dependents)
        _check_undeclared_calls(lx, node[2], dependents)
    elif kind == "neg":
        _check_undeclared_calls(lx, node[1], dependents)


# ---------------------------------------------------------------------------


def parse_problem(text: str) -> ProblemSource:
    lx = _Lexer(text)
    raw_eqs, decls, raw_params = [], [], []
    hint, options = None, []
    seen = set()
    while True:
        tok = lx.next()
        if tok.kind == "eof":
            break
        if tok.kind != "id" or tok.text not in KEYWORDS:
            lx.error(f"expected one of {', '.join(k + ':' for k in KEYWORDS)}, found {tok.text!r}", tok.pos)
        kw = tok.text
        if kw in seen:
            lx.error(f"duplicate {kw!r} statement", tok.pos)
        seen.add(kw)
        lx.expect(":")
        if kw == "hint":
            start = lx.pos if lx._peeked is None else lx._peeked.pos
            end = text.find(";", start)
            if end < 0:
                lx.error("unterminated hint (missing ';')", start)
            hint = " ".join(text[start:end].split()) or None
            lx.pos, lx._peeked = end + 1, None
            continue
        while True:
            if kw == "ode":
                lhs = _parse_expr(lx)
                eq = lx.expect("=")
                raw_eqs.append((lhs, _parse_expr(lx), eq.pos))
            elif kw == "vars":
                name_tok = lx.next()
                if name_tok.kind != "id" or name_tok.text.endswith("'"):
                    lx.error("expected a dependent variable name", name_tok.pos)
                lx.expect("(")
                ind = lx.next()
                if ind.kind != "id" or ind.text.endswith("'"):
                    lx.error("expected the independent variable", ind.pos)
                lx.expect(")")
                decls.append((name_tok.text, ind.text, name_tok.pos))
            elif kw == "params":
                name_tok = lx.next()
                if name_tok.kind != "id" or name_tok.text.endswith("'"):
                    lx.error("expected a parameter name", name_tok.pos)
                lx.expect("=")
                raw_params.append((name_tok.text, _parse_expr(lx), name_tok.pos))
            else:
                flag = lx.next()
                if flag.kind != "id" or flag.text not in FLAGS:
                    lx.error(f"unknown option {flag.text!r} (known: {', '.join(FLAGS)})", flag.pos)
                if flag.text not in options:
                    options.append(flag.text)
            sep = lx.next()
            if sep.text == ";":
                break
            if sep.text != ",":
                found = "end of input" if sep.kind == "eof" else repr(sep.text)
                lx.error(f"expected ',' or ';', found {found}", sep.pos)

    if not raw_eqs:
        raise ParseError("missing 'ode:' statement", 1, 1)
    if not decls:
        raise ParseError("missing 'vars:' statement", 1, 1)
    independents = []
    dependents = []
    for name, ind, pos in decls:
        if name in dependents:
            lx.error(f"dependent variable {name!r} declared twice", pos)
        if independents and ind != independents[0]:
            lx.error(f"more than one independent variable ({independents[0]!r} and {ind!r})", pos)
        if name == ind:
            lx.error(f"{name!r} cannot depend on itself", pos)
        independents.append(ind)
        dependents.append(name)
    t_name = independents[0]
    params = {}
    const_resolver = _Resolver(lx, {})
    for name, node, pos in raw_params:
        if name in params:
            lx.error(f"duplicate parameter {name!r}", pos)
        if name in dependents or name == t_name or name in KERNELS:
            lx.error(f"parameter {name!r} clashes with a variable or kernel name", pos)
        val = const_resolver(node)
        if val.kind != NUM:
            lx.error(f"parameter {name!r} must be bound to a rational number", pos)
        params[name] = val.value
    symbols = {t_name: Symbol(t_name, "time")}
    symbols.update({n: Symbol(n, "parameter") for n in params})
    res = _Resolver(lx, symbols, dependents, t_name)
    equations = []
    for lhs, rhs, _ in raw_eqs:
        _check_undeclared_calls(lx, lhs, dependents)
        _check_undeclared_calls(lx, rhs, dependents)
        equations.append((res(lhs), res(rhs)))
    return ProblemSource(equations, dependents, t_name, params, hint, options)


def parse_expression(text: str, symbols: dict, dependents=(), independent=None) -> Expr:
    """Parse a single expression, resolving identifiers via ``symbols``."""
    lx = _Lexer(text)
    node = _parse_expr(lx)
    tok = lx.next()
    if tok.kind != "eof":
        lx.error(f"unexpected {tok.text!r}", tok.pos)
    _check_undeclared_calls(lx, node, set(dependents))
    return _Resolver(lx, symbols, dependents, independent)(node)


def problem_symbols(src: ProblemSource) -> dict:
    out = {src.independent: src.time}
    out.update(src.param_symbols)
    return out


def parse_candidate(text: str, src: ProblemSource):
    """Parse ``xi=..., eta=...`` (or ``eta1=..., eta2=...``) into ``(xi, [eta_i])``.

    Omitted components are zero.
    """
    n = len(src.dependents)
    parts = {}
    for chunk in _split_top_level(text):
        if "=" not in chunk:
            raise ParseError(f"candidate component {chunk.strip()!r} lacks '='")
        key, val = chunk.split("=", 1)
        key = key.strip()
        if key == "eta" and n == 1:
            key = "eta1"
        if key != "xi" and not (key.startswith("eta") and key[3:].isdigit() and 1 <= int(key[3:]) <= n):
            raise ParseError(f"unknown candidate component {key!r}")
        if key in parts:
            raise ParseError(f"candidate component {key!r} given twice")
        parts[key] = parse_expression(val, problem_symbols(src), src.dependents, src.independent)
    xi = parts.get("xi", num(0))
    etas = [parts.get(f"eta{i}", num(0)) for i in range(1, n + 1)]
    return xi, etas


def _split_top_level(text: str):
    depth, cur, out = 0, [], []
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur))
    return out


def format_problem(src: ProblemSource) -> str:
    lines = ["ode: " + ", ".join(f"{to_string(l)} = {to_string(r)}" for l, r in src.equations) + ";",
             "vars: " + ", ".join(f"{d}({src.independent})" for d in src.dependents) + ";"]
    if src.params:
        lines.append("params: " + ", ".join(f"{k} = {v}" for k, v in src.params.items()) + ";")
    if src.hint:
        lines.append(f"hint: {src.hint};")
    if src.options:
        lines.append("opts: " + ", ".join(src.options) + ";")
    return "\n".join(lines) + "\n"

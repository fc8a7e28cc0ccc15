"""Minimal exact computer-algebra kernel."""

from .expr import (
    ONE, ZERO, Expr, add, as_expr, cos, exp, fn, from_rat, function, ln, mul, neg, num,
    power, sin, sqrt, sym, symbol, to_rat, to_string,
)
from .ops import (
    DEFAULT_POINTS, DEFAULT_PREC, DEFAULT_SEED, InconclusiveZeroTest, NonPolynomialError,
    ZeroTestResult, collect, collect_rat, differentiate, eval_rat, evaluate, is_zero,
    normalize, substitute, zero_test, zero_test_rat,
)
from .symbols import FunctionSymbol, Symbol

__all__ = [
    "ONE", "ZERO", "Expr", "add", "as_expr", "cos", "exp", "fn", "from_rat", "function", "ln",
    "mul", "neg", "num", "power", "sin", "sqrt", "sym", "symbol", "to_rat", "to_string",
    "DEFAULT_POINTS", "DEFAULT_PREC", "DEFAULT_SEED", "InconclusiveZeroTest",
    "NonPolynomialError", "ZeroTestResult", "collect", "collect_rat", "differentiate",
    "eval_rat", "evaluate", "is_zero", "normalize", "substitute", "zero_test", "zero_test_rat",
    "FunctionSymbol", "Symbol",
]

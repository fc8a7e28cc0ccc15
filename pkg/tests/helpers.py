"""Shared loading helpers for the test-suite."""

from pathlib import Path

from odesymm.parser import parse_problem
from odesymm.reduction import reduce_problem

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"


def problem_path(name: str) -> str:
    return str(PROBLEMS / name)


def load(name_or_text: str):
    """(src, cs, sm, v) for a problem file name or inline text."""
    text = (PROBLEMS / name_or_text).read_text() if name_or_text.endswith(".ode") else name_or_text
    src = parse_problem(text)
    cs, sm, v = reduce_problem(src)
    return src, cs, sm, v

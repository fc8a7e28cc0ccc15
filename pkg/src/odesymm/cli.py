"""``odesymm find|verify`` command-line front end."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from .ansatz import FeatureExtractionError, HintError, SolverTimeout
from .determining import DeterminingError
from .extract import DisplayFlags, derivative_objects, display_name, format_expr
from .parser import ParseError, format_problem, parse_problem
from .pipeline import FindOptions, UnverifiedGenerator, find
from .reduction import CanonicalizationError, reduce_problem
from .symkernel import DEFAULT_SEED, InconclusiveZeroTest, to_string
from .verify import CandidateError, verify_candidate

EXIT_OK, EXIT_PARSE, EXIT_CANON, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    input: str
    deps: str = "default"
    hint: str | None = None
    degree: int = 2
    split: bool = False
    all_const: bool = False
    show_dep: bool = False
    show_t: bool = False
    show_gen: bool = False
    format: str = "text"
    seed: int = DEFAULT_SEED
    time_limit: float | None = None
    candidates: list = field(default_factory=list)

    def find_options(self) -> FindOptions:
        return FindOptions(self.deps, self.hint, self.degree, self.split, self.all_const,
                           self.show_dep, self.show_t, self.show_gen, self.seed, self.time_limit)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="odesymm", description="Lie point and dynamic symmetries of ODE systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input", help="problem file, '-' for stdin, or inline problem text")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed of the randomized zero test")
        sp.add_argument("--show-dep", action="store_true", help="print y(t) instead of y")

    f = sub.add_parser("find", help="compute symmetry generators")
    common(f)
    f.add_argument("--deps", choices=("min", "default", "all"), default="default")
    f.add_argument("--hint", help="ansatz hint, e.g. 'xi{1} eta{y/t}' or 'sum basis{exp(-t)}'")
    f.add_argument("--degree", type=int, default=2)
    f.add_argument("--split", action="store_true", help="one generator per free constant")
    f.add_argument("--all-const", action="store_true", help="keep every solver constant")
    f.add_argument("--show-t", action="store_true", help="label xi and eta with their arguments")
    f.add_argument("--show-gen", action="store_true", help="also print the augmented generators")
    f.add_argument("--time-limit", type=float, help="seconds allowed for the ansatz solve")

    v = sub.add_parser("verify", help="check candidate generators")
    common(v)
    v.add_argument("--candidate", action="append", default=[], metavar="'xi=..., eta=...'")
    return p


def config_from_args(argv=None) -> RunConfig:
    a = build_parser().parse_args(argv)
    d = vars(a)
    return RunConfig(command=d["command"], input=d["input"], deps=d.get("deps", "default"),
                     hint=d.get("hint"), degree=d.get("degree", 2), split=d.get("split", False),
                     all_const=d.get("all_const", False), show_dep=d["show_dep"],
                     show_t=d.get("show_t", False), show_gen=d.get("show_gen", False),
                     format=d["format"], seed=d["seed"], time_limit=d.get("time_limit"),
                     candidates=d.get("candidate", []))


def _read_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    if ":" in source:
        return source
    raise FileNotFoundError(source)


# ---------------------------------------------------------------------------
# rendering


def _expr_json(e) -> dict:
    return {"text": to_string(e), "derivatives": derivative_objects(e)}


def _problem_json(src) -> dict:
    return {
        "equations": [f"{to_string(l)} = {to_string(r)}" for l, r in src.equations],
        "dependents": list(src.dependents),
        "independent": src.independent,
        "params": {k: str(v) for k, v in src.params.items()},
    }


def _labels(src, cs, flags: DisplayFlags):
    if not flags.showt:
        return "xi", [f"eta[{d}]" if len(src.dependents) > 1 else "eta" for d in src.dependents]
    args = [src.independent] + [display_name(nm, j, flags.showdep) for nm, r in zip(cs.names, cs.orders)
                                for j in range(r)]
    tail = "(" + ",".join(args) + ")"
    etas = [f"eta[{d}]" if len(src.dependents) > 1 else "eta" for d in src.dependents]
    return "xi" + tail, [e + tail for e in etas]


def render_find(src, res, cfg: RunConfig) -> str:
    cs = res.context[0]
    flags = res.options.flags
    if cfg.format == "json":
        gens = []
        for g in res.generators:
            item = {"xi": _expr_json(g.xi), "eta": [_expr_json(e) for e in g.eta]}
            if g.augmented is not None:
                item["augmented"] = {k: _expr_json(e) for k, e in g.augmented.items()}
            item["verified"] = bool(g.verified)
            item["unreduced"] = g.unreduced
            gens.append(item)
        opts = dict(res.options.__dict__)
        out = {"problem": _problem_json(src), "options": opts, "generators": gens,
               "diagnostics": res.diagnostics}
        return json.dumps(out, indent=2, sort_keys=False) + "\n"
    xi_lab, eta_labs = _labels(src, cs, flags)
    lines = [f"# {format_problem(src).strip().replace(chr(10), ' ')}"]
    mode = "split" if res.options.split else "coupled"
    if not res.generators:
        lines.append("only the trivial symmetry (xi = 0, eta = 0) was found for this ansatz")
    else:
        lines.append(f"{len(res.generators)} generator set(s), {mode}:")
    for i, g in enumerate(res.generators, 1):
        parts = [f"{xi_lab} = {format_expr(g.xi, flags, src.independent)}"]
        parts += [f"{lab} = {format_expr(e, flags, src.independent)}" for lab, e in zip(eta_labs, g.eta)]
        tag = "  (verified)" if g.verified else "  (UNVERIFIED)"
        if g.unreduced:
            tag += " (unreduced: depends on costates)"
        lines.append(f"[{i}] " + ", ".join(parts) + tag)
        if g.augmented is not None:
            for k, e in g.augmented.items():
                lines.append(f"      {k} = {format_expr(e, flags, src.independent)}")
    d = res.diagnostics
    lines.append(f"# profile={d['profile']} pdes={d['pdes']} coefficients={d['ansatz_coefficients']} "
                 f"rank={d['rank']} constants={d['constants']}")
    return "\n".join(lines) + "\n"


def render_verify(src, results, cfg: RunConfig) -> str:
    flags = DisplayFlags(cfg.show_dep)
    if cfg.format == "json":
        items = []
        for text, rep, err in results:
            if err:
                items.append({"candidate": text, "verdict": "error", "message": err})
                continue
            items.append({
                "candidate": text,
                "verdict": rep.verdict,
                "residuals": [_expr_json(r) for r in rep.residuals],
                "evidence": [{"zero": e.zero, "method": e.method, "points": e.points} for e in rep.evidence],
            })
        out = {"problem": _problem_json(src), "options": {"seed": cfg.seed}, "candidates": items,
               "diagnostics": {"passed": sum(1 for _, r, e in results if r and r.passed),
                               "total": len(results)}}
        return json.dumps(out, indent=2) + "\n"
    lines = []
    for text, rep, err in results:
        if err:
            lines.append(f"{text}: error: {err}")
            continue
        res = ", ".join(format_expr(r, flags, src.independent) for r in rep.residuals)
        how = "/".join(sorted({e.method for e in rep.evidence}))
        lines.append(f"{text}: {rep.verdict} [residuals: {res}] ({how})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry points


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        text = _read_input(cfg.input)
    except OSError as exc:
        err.write(f"odesymm: cannot read input: {exc}\n")
        return EXIT_PARSE
    try:
        src = parse_problem(text)
    except ParseError as exc:
        err.write(f"odesymm: parse error: {exc}\n")
        return EXIT_PARSE
    if cfg.command == "verify":
        return _run_verify(src, cfg, out, err)
    try:
        res = find(src, cfg.find_options())
    except HintError as exc:
        err.write(f"odesymm: hint error: {exc}\n")
        return EXIT_PARSE
    except CanonicalizationError as exc:
        err.write(f"odesymm: {exc}\n")
        return EXIT_CANON
    except SolverTimeout as exc:
        err.write(f"odesymm: solver failure: {exc}; no partial results are reported\n")
        return EXIT_SOLVER
    except (FeatureExtractionError, DeterminingError, InconclusiveZeroTest) as exc:
        err.write(f"odesymm: solver failure: {exc}\n")
        return EXIT_SOLVER
    except UnverifiedGenerator as exc:
        err.write(f"odesymm: solver bug: {exc}\n")
        return EXIT_SOLVER
    out.write(render_find(src, res, cfg))
    return EXIT_OK


def _run_verify(src, cfg: RunConfig, out, err) -> int:
    try:
        _, sm, v = reduce_problem(src)
    except CanonicalizationError as exc:
        err.write(f"odesymm: {exc}\n")
        return EXIT_CANON
    if not cfg.candidates:
        err.write("odesymm: verify needs at least one --candidate\n")
        return EXIT_PARSE
    results = []
    for text in cfg.candidates:
        try:
            results.append((text, verify_candidate(text, src, sm, v, cfg.seed), None))
        except ParseError as exc:
            err.write(f"odesymm: parse error in candidate {text!r}: {exc}\n")
            return EXIT_PARSE
        except CandidateError as exc:
            results.append((text, None, str(exc)))
    out.write(render_verify(src, results, cfg))
    ok = all(rep is not None and rep.passed for _, rep, _ in results)
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None) -> int:
    return run(config_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())

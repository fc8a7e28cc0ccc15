import io
import json
import os
import subprocess
import sys

import pytest

from helpers import ROOT, problem_path
from odesymm import cli
from odesymm.ansatz import FeatureExtractionError


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(cli.config_from_args(list(argv)), out, err)
    return code, out.getvalue(), err.getvalue()


def test_kepler_split_three_verified_lines():
    code, out, _ = run("find", problem_path("kepler.ode"), "--split", "--hint", "nohint", "--degree", "1")
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln.startswith("[")]
    assert len(lines) == 3 and all(ln.endswith("(verified)") for ln in lines)


def test_constant_rate_includes_translations():
    code, out, _ = run("find", "ode: diff(y,t)=1; vars: y(t);", "--split", "--degree", "1")
    assert code == 0
    assert "xi = 1, eta = 0  (verified)" in out
    assert "xi = 0, eta = 1  (verified)" in out


def test_verify_logarithmic_candidate_passes():
    code, out, _ = run("verify", problem_path("kamke120.ode"), "--candidate", "xi=0, eta=y*ln(t^2/y)")
    assert code == 0 and ": pass" in out


def test_verify_failure_exit_code():
    code, out, _ = run("verify", "ode: diff(y,t)=y; vars: y(t);", "--candidate", "xi=0, eta=1")
    assert code == 4 and ": fail" in out


def test_parse_error_exit_code():
    code, _, err = run("find", "ode: diff(y,t) = ; vars: y(t);")
    assert code == 1 and "parse error" in err


def test_missing_file_exit_code():
    code, _, err = run("find", "no_such_file.ode")
    assert code == 1


def test_bad_hint_exit_code():
    code, _, err = run("find", problem_path("kamke120.ode"), "--hint", "eta7{y}")
    assert code == 1 and "hint" in err


def test_canonicalization_exit_code():
    code, _, err = run("find", "ode: diff(y,t)^2 = y; vars: y(t);")
    assert code == 2 and "canonical" in err
    code, _, err = run("find", "ode: diff(y,t) = z; vars: y(t), z(t);")
    assert code == 2 and "underdetermined" in err


def test_solver_failure_exit_code(monkeypatch):
    def boom(*a, **k):
        raise FeatureExtractionError("feature extraction failed: offending term ln(t*y)")
    monkeypatch.setattr(cli, "find", boom)
    code, out, err = run("find", problem_path("kamke120.ode"))
    assert code == 3 and "feature extraction" in err and out == ""


def test_timeout_is_all_or_nothing():
    code, out, err = run("find", problem_path("kepler.ode"), "--time-limit", "0.000000001")
    assert code == 3 and out == "" and "time limit" in err


def test_trivial_only_is_reported():
    code, out, _ = run("find", "ode: diff(y,t) = y^2 + exp(t); vars: y(t);", "--degree", "1")
    assert code == 0
    assert "only the trivial symmetry" in out


def test_json_schema():
    code, out, _ = run("find", problem_path("oscillator.ode"), "--split", "--format", "json", "--show-gen")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"problem", "options", "generators", "diagnostics"}
    assert doc["problem"]["dependents"] == ["x"]
    for g in doc["generators"]:
        assert g["verified"] is True
        assert set(g) >= {"xi", "eta", "augmented", "verified"}
        assert isinstance(g["eta"], list) and "text" in g["eta"][0]
    dyn = [g for g in doc["generators"] if "x'" in g["eta"][0]["text"]]
    assert dyn and {"symbol": "x'", "variable": "x", "order": 1} in dyn[0]["eta"][0]["derivatives"]


def test_json_without_showgen_has_no_augmented():
    code, out, _ = run("find", problem_path("oscillator.ode"), "--format", "json")
    assert all("augmented" not in g for g in json.loads(out)["generators"])


def test_show_flags_only_change_text():
    a = json.loads(run("find", problem_path("oscillator.ode"), "--format", "json")[1])
    b = json.loads(run("find", problem_path("oscillator.ode"), "--format", "json", "--show-t", "--show-dep")[1])
    assert a["generators"] == b["generators"]
    text = run("find", problem_path("oscillator.ode"), "--show-t", "--show-dep")[1]
    assert "xi(t,x(t),x'(t))" in text


def test_all_const_keeps_redundant_constants():
    code, out, _ = run("find", "ode: diff(y,t)=y; vars: y(t);", "--hint", "xi{1, 2} eta{y}", "--all-const")
    assert code == 0 and "C1" in out and "C2" in out and "C3" in out
    code, out, _ = run("find", "ode: diff(y,t)=y; vars: y(t);", "--hint", "xi{1, 2} eta{y}")
    assert "C3" not in out


def test_problem_opts_are_honoured():
    code, out, _ = run("find", problem_path("kepler.ode"), "--hint", "nohint", "--degree", "1")
    assert "split" in out and out.count("(verified)") == 3


def _subprocess(args, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    return subprocess.run([sys.executable, "-m", "odesymm", *args], capture_output=True, text=True,
                          env=env, cwd=ROOT).stdout


@pytest.mark.parametrize("args", [
    ["find", "problems/kepler.ode", "--hint", "nohint", "--degree", "1", "--format", "json"],
    ["find", "problems/oscillator.ode", "--hint", "sum basis{exp(-t), exp(-2*t)}", "--show-gen"],
    ["verify", "problems/kamke120.ode", "--candidate", "xi=0, eta=1", "--format", "json"],
])
def test_output_is_byte_identical_across_hash_seeds(args):
    outs = {_subprocess(args, s) for s in (0, 1, 12345)}
    assert len(outs) == 1 and next(iter(outs))

import json
import re

import pytest

from chowcert.cli import bundled_script, main
from chowcert.cycles import as_sum
from chowcert.goncharov import make_cycle
from chowcert.script import (Options, ScriptSyntaxError, evaluate, parse_assignment, parse_object, parse_script,
                             parse_steps, run)
from chowcert.textform import format_cycle, parse_cycle

CATALOG = ["ZA", "Zprime", "Zdoubleprime", "Z3fB", "Z3Af", "Z3AB", "rhoxZ2", "rhoyZ4", "X1", "X2",
           "Y1", "Y2", "Y3", "Y4", "Y3p", "Y4p", "L", "Lp", "Lpp"]


def _run(text, **opts):
    return run(parse_script(text, "t.gcs"), Options(**opts))


def _cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _no_floats(obj):
    if isinstance(obj, float):
        return False
    if isinstance(obj, dict):
        return all(_no_floats(v) for v in obj.values())
    if isinstance(obj, list):
        return all(_no_floats(v) for v in obj)
    return True


# --- parsing ------------------------------------------------------------------

def test_dangling_comma_position():
    with pytest.raises(ScriptSyntaxError) as ei:
        parse_script("let X = cycle [x,] params (x)\n", "f.gcs")
    assert (ei.value.line, ei.value.column) == (1, 17)
    assert str(ei.value) == "f.gcs:1:17: dangling comma"


@pytest.mark.parametrize("text, line, col", [
    ("let X = ZA\n  let Y = QQ\n", 2, 11),
    ("let X = ZA\nlet X = ZA\n", 2, 5),
    ("assert equal ZA ZA\n", 1, 17),
    ("let X = ZA let Y = ZA\n", 1, 12),
    ("# c\n\nfrobnicate ZA\n", 3, 1),
    ("let X = [x, 1 - x params (x)\n", 1, 19),
])
def test_syntax_errors_carry_line_and_column(text, line, col):
    with pytest.raises(ScriptSyntaxError) as ei:
        parse_script(text)
    assert (ei.value.line, ei.value.column) == (line, col), str(ei.value)


def test_assignment_and_steps_parsing():
    assert parse_assignment("a=2,b=3/2, c=-5") == {"a": 2, "b": pytest.approx(1.5), "c": -5}
    assert str(parse_assignment("b=3/2")["b"]) == "3/2"
    assert parse_steps("1-3,7") == frozenset({1, 2, 3, 7})
    assert parse_steps("2..4") == frozenset({2, 3, 4})
    for bad in ("a", "a=x", "q=1"):
        with pytest.raises(ValueError):
            parse_assignment(bad)
    with pytest.raises(ValueError):
        parse_steps("0-3")


# --- running ------------------------------------------------------------------

def test_passing_script():
    rep = _run("let Ca = cycle [x, y, 1 - x, 1 - y/x, 1 - a/y] params (x,y)\n"
               "assert equal Ca == braceC(a)\n"
               "assert admissible Ca  # comment\n"
               "assert boundary Ca = 0 mod discards\n"
               "assert equal eval(Ca) == {a}\n"
               "assert equal eval(Ca) == {1/a}\n"
               "assert inadmissible [x, y, x, 1 - y/x, 1 - c/y] params (x,y)\n"
               "assert negligible [x, y, a, 1 - y/x, 1 - a/y] params (x,y)\n"
               "check ddzero 3\n"
               "check alternation 5\n")
    assert rep.verdict == "pass" and rep.exit_code == 0
    assert [s.status for s in rep.results][1:] == ["verified"] * 7 + ["verified", "verified"]


def test_failing_equality_shows_residue():
    rep = _run("assert equal eval(braceC(a)) == eval(braceC(b))\n"
               "assert equal braceC(a) == braceC(b)\n")
    assert rep.exit_code == 1 and rep.verdict == "fail"
    sym, cyc = rep.results
    assert sym.status == "failed" and sym.detail["residue"] == "-{b} + {a}"
    assert cyc.status == "failed"
    assert sorted(cyc.detail["residue_terms"]) == ["-[x, y, 1 - x, 1 - y/x, 1 - b/y] params (x,y)",
                                                   "[x, y, 1 - x, 1 - y/x, 1 - a/y] params (x,y)"]
    assert "sides differ" in rep.text()


def test_runtime_error_is_reported_and_dependents_fail():
    rep = _run("let X = boundary(eta)\nprint X\n")
    assert [s.status for s in rep.results] == ["error", "error"]
    assert rep.exit_code == 1


def test_specialized_run_keeps_free_symbols_and_tau_order():
    rep = _run("let S = cycle [x, y, (1 - s*x)/(1 - t*x), 1 - y/x, 1 - u/y] params (x,y)\n"
               "assert equal eval(S) == {s*u} - {t*u}\n"
               "assert equal split4(tau(sigma_xy(Y1)), p4) == Y4p mod discards\n",
               specialize={"a": 2, "b": 3, "c": 5})
    assert rep.verdict == "pass", rep.text()


def test_involution_syntax():
    rep = _run("assert equal rho_x(rho_x(ZA)) == ZA\n"
               "assert equal apply(rho_xy, Z1(AA)) == Z3fB\n"
               "assert equal apply(subst(x -> 1/x), [x, 1 - x, 1 - a/x] params (x)) =="
               " [1/x, 1 - 1/x, 1 - a*x] params (x)\n")
    assert rep.verdict == "pass", rep.text()


# --- text round trip over the catalog ----------------------------------------

@pytest.mark.parametrize("name", CATALOG)
def test_catalog_round_trip(name):
    for t in as_sum(make_cycle(name)).terms():
        text = format_cycle(t)
        assert parse_cycle(text) == t
        assert as_sum(evaluate(parse_object(text))) == as_sum(t)
        rep = _run(f"let W = cycle {text}\nassert equal W == {text}\n")
        assert rep.verdict == "pass"


# --- command line -------------------------------------------------------------

def test_cli_normalize_and_json(capsys):
    code, out, _ = _cli(capsys, "normalize", "2*[x, 1 - x] params (x) - [x, 1 - x] params (x)", "--json")
    js = json.loads(out)
    assert code == 0 and js["schema"] == 1 and js["command"] == "normalize"
    assert _no_floats(js)


def test_cli_boundary_and_admissible(capsys):
    code, out, _ = _cli(capsys, "boundary", "[x, 1 - x, 1 - a/x] params (x)")
    assert code == 0 and "[" in out
    code, out, _ = _cli(capsys, "admissible", "[x, y, x, 1 - y/x, 1 - c/y] params (x,y)")
    assert code == 1 and "INADMISSIBLE" in out
    code, out, _ = _cli(capsys, "admissible", "ZA", "--json")
    assert code == 0 and json.loads(out)["verdict"] == "admissible"


def test_cli_eval(capsys):
    code, out, _ = _cli(capsys, "eval", "[x, y, 1 - 2*x, 1 - y/x, 1 - 3/y] params (x,y)")
    assert code == 0 and out.strip() == "{1/6}"  # {6} = {1/6}, one representative is printed
    code, out, _ = _cli(capsys, "eval", "braceC(a)", "--specialize", "a=2/3,b=1,c=1", "--json")
    assert json.loads(out)["symbols"] == "{2/3}"


def test_cli_exit_codes(tmp_path, capsys):
    assert _cli(capsys, "replay", str(tmp_path / "missing.gcs"))[0] == 2
    bad = tmp_path / "bad.gcs"
    bad.write_text("let X = cycle [x,] params (x)\n")
    code, out, err = _cli(capsys, "replay", str(bad), "--json")
    assert code == 2 and json.loads(out)["error"] == {"kind": "syntax", "message": "bad.gcs:1:17: dangling comma",
                                                       "line": 1, "column": 17}
    assert "bad.gcs:1:17" in err
    assert _cli(capsys, "normalize", "[x,, y]")[0] == 2
    assert _cli(capsys, "theorem", "--specialize", "a=2,b=3")[0] == 2
    assert _cli(capsys, "theorem", "--specialize", "a=2,b=3,c=1")[0] == 2
    assert _cli(capsys, "frobnicate")[0] == 2
    fail = tmp_path / "fail.gcs"
    fail.write_text("assert equal eval(braceC(a)) == eval(braceC(b))\n")
    code, out, _ = _cli(capsys, "replay", str(fail))
    assert code == 1 and "residue: -{b} + {a}" in out


def test_cli_json_is_byte_identical(tmp_path, capsys):
    s = tmp_path / "s.gcs"
    s.write_text("let Ca = braceC(a)\nassert admissible Ca\neval Ca\ncheck ddzero 2\n"
                 "assert equal Ca == braceC(b)\n")
    runs = [_cli(capsys, "replay", str(s), "--json", "--seed", "4")[1] for _ in range(2)]
    assert runs[0] == runs[1]
    js = json.loads(runs[0])
    assert js["schema"] == 1 and _no_floats(js)
    assert not re.search(r"\d\.\d", runs[0])


def test_bundled_script_exists_and_parses():
    script = parse_script(bundled_script().read_text(), "theorem41.gcs")
    kinds = [st.kind for st in script.statements]
    assert kinds.count("replay") == 2 and "assert" in kinds

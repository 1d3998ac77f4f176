"""Command-line interface: commands, formats, and exit codes."""

import json

from addlam.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_pretty_prints(capsys):
    code, out, _ = run(capsys, "parse", r"(\x. x) (a+b)")
    assert code == 0
    assert out.strip() == r"(\x. x) (a + b)"


def test_parse_error_exits_two(capsys):
    code, _, err = run(capsys, "parse", "(a +")
    assert code == 2
    assert "parse error" in err


def test_reduce_prints_a_trace(capsys):
    code, out, _ = run(capsys, "reduce", r"(\x. x) y + zero")
    assert code == 0
    assert out.strip().splitlines()[-1] == "y"


def test_check_uses_the_context(capsys):
    code, out, _ = run(capsys, "check", "--ctx", "a: X", r"(\x: X. x) a")
    assert code == 0
    assert ": X" in out
    code, _, err = run(capsys, "check", r"(\x: X. x) a")
    assert code == 1


def test_translate_emits_the_pair_calculus(capsys):
    code, out, _ = run(
        capsys, "translate", "--ctx", "a: X, b: X",
        r"(gen Z. \x: Z. x) (a + b) { Z | Z | [X], [X] | Z }",
    )
    assert code == 0
    assert "proj_l" in out and "X * X" in out


def test_reverse_term_and_undefined(capsys):
    code, out, _ = run(capsys, "reverse", "<proj_l f u, proj_r f u>")
    assert code == 0 and out.strip() == "f u"
    code, out, _ = run(capsys, "reverse", "proj_l x")
    assert code == 0 and out.strip() == "undefined"


def test_suite_json_schema(capsys):
    code, out, _ = run(capsys, "suite", "ac", "--cases", "50", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == {"suite", "seed", "cases", "failures", "millis"}
    assert payload["suite"] == "ac" and payload["failures"] == []


def test_suite_respects_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("ADDLAM_SEED", "7")
    code, out, _ = run(capsys, "suite", "ac", "--cases", "10", "--format", "json")
    assert code == 0
    assert json.loads(out)["seed"] == 7

import textwrap

import pytest

from cli import main

APPEND_ANALYSIS = ["--entry", "List.append", "--assume", "acyclic:this", "--assume", "unshared:this,ys", "--this-nonnull"]

RECURSIVE = textwrap.dedent(
    """\
    Class:
     Name: R
     Classbody:
      Superclass: Object
      Methods:
       Method: unit loop
        Methodbody:
         MaxStack: 1
         MaxVars: 0
         Bytecode:
          00: Load 0
          01: Invoke loop 0
          02: Return
    """
)


@pytest.fixture
def append_path(corpus_dir):
    return str(corpus_dir / "append.jbc")


def test_parse_prints_the_program(append_path, capsys):
    assert main(["parse", append_path]) == 0
    assert "append" in capsys.readouterr().out


def test_parse_rejects_recursion(tmp_path, capsys):
    path = tmp_path / "recursive.jbc"
    path.write_text(RECURSIVE, encoding="utf-8")
    assert main(["parse", str(path)]) == 2
    assert "recursi" in capsys.readouterr().err


def test_missing_file_is_an_io_error(tmp_path, capsys):
    assert main(["parse", str(tmp_path / "absent.jbc")]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_run_reports_the_step_count(append_path, capsys):
    code = main(["run", append_path, "--entry", "List.append", "--arg", "List{val:1,next:null}", "--arg", "null"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m = 15"
    assert lines[1].startswith("returns")


def test_run_out_of_fuel(append_path, capsys):
    args = ["run", append_path, "--entry", "List.append", "--arg", "List{val:1,next:null}", "--arg", "null"]
    assert main(args + ["--fuel", "3"]) == 3
    assert "failed" in capsys.readouterr().out


@pytest.mark.parametrize(
    "extra",
    [
        ["--entry", "List.append", "--fuel", "0"],
        ["--entry", "append"],
        ["--entry", "List.missing"],
        ["--entry", "List.append", "--arg", "List{colour:1}", "--arg", "null"],
        [],
    ],
)
def test_run_rejects_bad_settings(append_path, extra):
    assert main(["run", append_path] + extra) == 2


def test_malformed_assumption_is_rejected(append_path):
    assert main(["graph", append_path, "--entry", "List.append", "--assume", "cyclic:this"]) == 2


def test_graph_writes_dot_and_dump(append_path, tmp_path, capsys):
    dot, dump = tmp_path / "append.dot", tmp_path / "append.txt"
    assert main(["graph", append_path, *APPEND_ANALYSIS, "--dot", str(dot), "--dump", str(dump)]) == 0
    assert capsys.readouterr().out.startswith("nodes: ")
    assert "digraph computation {" in dot.read_text(encoding="utf-8")
    assert dump.read_text(encoding="utf-8").startswith("n0 [entry]")


def test_graph_limit_is_reported(append_path):
    assert main(["graph", append_path, "--entry", "List.append", "--max-nodes", "3"]) == 3


def test_ctrs_output_is_deterministic(append_path, tmp_path):
    first, second = tmp_path / "first.ctrs", tmp_path / "second.ctrs"
    assert main(["ctrs", append_path, *APPEND_ANALYSIS, "-o", str(first)]) == 0
    assert main(["ctrs", append_path, *APPEND_ANALYSIS, "-o", str(second)]) == 0
    text = first.read_text(encoding="utf-8")
    assert text.startswith("(SORTS int bool univ)")
    assert text == second.read_text(encoding="utf-8")


def test_simulate_reports_the_bounds(append_path, capsys):
    args = ["simulate", append_path, *APPEND_ANALYSIS, "--arg", "List{val:1,next:List{val:2,next:null}}", "--arg", "null"]
    assert main(args) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "m <= L <= K*m: yes"


def test_simulate_with_a_corrupted_system_is_a_violation(append_path, tmp_path, capsys):
    emitted = tmp_path / "append.ctrs"
    assert main(["ctrs", append_path, *APPEND_ANALYSIS, "-o", str(emitted)]) == 0
    text = emitted.read_text(encoding="utf-8")
    corrupted = tmp_path / "corrupted.ctrs"
    corrupted.write_text(text[: text.index("(RULES")] + "(RULES\n)\n", encoding="utf-8")

    args = ["simulate", append_path, *APPEND_ANALYSIS, "--arg", "List{val:1,next:null}", "--arg", "null"]
    assert main(args + ["--ctrs", str(corrupted)]) == 4
    assert "violation" in capsys.readouterr().err


def test_simulate_checks_the_assumptions(append_path, capsys):
    args = ["simulate", append_path, *APPEND_ANALYSIS, "--arg", "#1 List{val:1,next:@1}", "--arg", "null"]
    assert main(args) == 4
    assert "acyclic" in capsys.readouterr().err


@pytest.mark.parametrize("command", ["graph", "ctrs"])
def test_trusted_assumptions_are_announced(append_path, command, capsys):
    assert main([command, append_path, *APPEND_ANALYSIS]) == 0
    err = capsys.readouterr().err
    assert err.startswith("warning:")
    assert "acyclic:this unshared:this,ys" in err


def test_analysis_without_assumptions_stays_quiet(append_path, capsys):
    assert main(["graph", append_path, "--entry", "List.append", "--this-nonnull"]) == 0
    assert "warning" not in capsys.readouterr().err


def test_simulate_announces_the_assumptions_of_its_graph(append_path, capsys):
    args = ["simulate", append_path, *APPEND_ANALYSIS, "--arg", "List{val:1,next:null}", "--arg", "null"]
    assert main(args) == 0
    assert "warning: assuming acyclic:this" in capsys.readouterr().err

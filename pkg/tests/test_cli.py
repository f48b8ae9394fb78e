import io

import pytest

from cli import main
from services.lang import parse_program


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_run_success(data_dir):
    code, out, _ = invoke("run", str(data_dir / "cancel.chr"), "a, a, a")
    assert code == 0
    assert out == "a\n"


def test_run_prints_bindings(data_dir):
    code, out, _ = invoke("run", str(data_dir / "cancel.chr"), "X = a")
    assert code == 0
    assert out == "X = a\n"


def test_run_empty_final_state(data_dir):
    code, out, _ = invoke("run", str(data_dir / "cancel.chr"), "a, a")
    assert code == 0
    assert out == "true\n"


def test_run_failure(data_dir):
    code, out, _ = invoke("run", str(data_dir / "cancel.chr"), "c")
    assert code == 1
    assert out == "false\n"


def test_run_step_limit_and_trace(data_dir):
    code, out, err = invoke("run", str(data_dir / "cancel.chr"), "b", "--step-limit", "10", "--trace")
    assert code == 2
    assert "% step limit reached" in out
    assert err.splitlines()[0] == "1\tintroduce\t-\t1\t0"


def test_run_validated_hybrid(data_dir):
    code, out, _ = invoke("run", str(data_dir / "bisim.chr"), "l ~ k", "--hybrid", "--validate")
    assert code == 0
    assert "a(0, l ~ k)" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["run"],
        ["frobnicate"],
        ["run", "missing.chr", "a"],
        ["regex-eq", "(a,", "a"],
        ["fixpoint", "data/cancel.chr", "--root", "a", "--mode", "sideways"],
        ["run", "data/cancel.chr", "a", "--step-limit", "0"],
    ],
)
def test_usage_and_input_errors(argv):
    code, _, err = invoke(*argv)
    assert code == 3
    assert err


def test_translate_output_reparses(data_dir):
    code, out, _ = invoke("translate", str(data_dir / "bisim.chr"))
    assert code == 0
    names = [rule.name for rule in parse_program(out).rules]
    assert names == ["bisim", "bisim_1", "stamp", "set", "unfreeze"]


def test_logical(data_dir):
    code, out, _ = invoke("logical", str(data_dir / "cancel.chr"))
    assert code == 0
    assert "pair: ∀((a ∧ a) ↔ true)" in out.splitlines()


def test_fixpoint_lfp(data_dir):
    code, out, _ = invoke("fixpoint", str(data_dir / "cancel.chr"), "--root", "a, a", "--root", "a")
    assert code == 1
    assert out == "a, a\tMEMBER\na\tNON-MEMBER\n"


def test_fixpoint_bounded_gfp(data_dir):
    code, out, _ = invoke(
        "fixpoint", str(data_dir / "successor.chr"), "--mode", "gfp", "--root", "q(1)", "--root", "q(0)", "--bound", "30"
    )
    assert code == 2
    assert out == "q(1)\tNO-INCONSISTENCY-WITHIN-BOUND\nq(0)\tNON-MEMBER\n"


def test_fixpoint_hybrid_rejects_non_hybrid_program(data_dir):
    code, out, err = invoke("fixpoint", str(data_dir / "successor.chr"), "--mode", "hybrid", "--root", "q(1)")
    assert (code, out) == (3, "")
    assert "not hybrid" in err


def test_regex_eq():
    assert invoke("regex-eq", "a+", "(a,a*)")[:2] == (0, "EQUAL\n")
    assert invoke("regex-eq", "a+", "a*")[:2] == (1, "NOT-EQUAL\n")


def test_regex_eq_limit():
    code, out, _ = invoke("regex-eq", "((b*,a)*,(a,b*))*", "[[]*, (a,[a,b]*), ([a,b]*,(a,(a,[a,b]*)))]", "--step-limit", "5")
    assert code == 2
    assert out == "LIMIT\n"


def test_bisim(data_dir):
    assert invoke("bisim", str(data_dir / "sample.aut"), "l1", "k1")[:2] == (0, "EQUAL\n")
    assert invoke("bisim", str(data_dir / "sample.aut"), "l1", "k2")[:2] == (1, "NOT-EQUAL\n")


def trace_lines(err):
    return [line.split("\t") for line in err.splitlines() if line.count("\t") == 4]


def test_bisim_trace_ends_in_inconsistent_store(data_dir):
    code, out, err = invoke("bisim", str(data_dir / "sample.aut"), "l1", "k2", "--trace")
    assert (code, out) == (1, "NOT-EQUAL\n")
    lines = trace_lines(err)
    # the last transition tells the failing built-in
    assert lines[-1][1:3] == ["solve", "-"]
    assert [int(line[0]) for line in lines] == list(range(1, len(lines) + 1))


def test_regex_eq_trace():
    code, out, err = invoke("regex-eq", "a+", "a*", "--trace")
    assert (code, out) == (1, "NOT-EQUAL\n")
    lines = trace_lines(err)
    assert lines
    assert lines[-1][1] == "solve"
    assert trace_lines(invoke("regex-eq", "a+", "a*")[2]) == []


def test_bisim_step_limit_is_inconclusive(data_dir):
    code, _, err = invoke("bisim", str(data_dir / "sample.aut"), "l1", "k1", "--step-limit", "5")
    assert code == 2
    assert "step_limit" in err


def test_environment_defaults(data_dir, monkeypatch):
    monkeypatch.setenv("CHR_STEP_LIMIT", "10")
    code, out, _ = invoke("run", str(data_dir / "cancel.chr"), "b")
    assert code == 2
    assert "% step limit reached" in out

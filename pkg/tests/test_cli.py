import json
from pathlib import Path

import pytest

from ptslab.cli import main, search_counterexample
from ptslab import Atom, models, parse_formula

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(x) for x in argv])
    out = capsys.readouterr().out
    return code, out


def test_derive_exit_codes(capsys):
    code, _ = run(capsys, "derive", DATA / "two_rule.base", "q")
    assert code == 0
    code, _ = run(capsys, "derive", DATA / "empty.base", "p")
    assert code == 1


def test_models_holds(capsys):
    code, out = run(capsys, "models", DATA / "two_rule.base", "a | ~a")
    assert code == 0 and "holds" in out


def test_models_with_context(capsys):
    code, _ = run(capsys, "models", DATA / "empty.base", "p", "bot")
    assert code == 0  # unobtainable context member
    code, _ = run(capsys, "models", DATA / "empty.base", "p")
    assert code == 1


def test_consequence_base_variant(capsys):
    code, _ = run(capsys, "consequence", "base", "a | ~a",
                  "--family", "enumerate:atoms=2,rules=2")
    assert code == 0
    code, _ = run(capsys, "consequence", "base", "a",
                  "--family", "enumerate:atoms=1,rules=1")
    assert code == 1


def test_consequence_validity_variants(capsys):
    fam = ["--family", "enumerate:atoms=1,rules=1"]
    assert run(capsys, "consequence", "delta", "a | ~a", *fam)[0] == 0
    assert run(capsys, "consequence", "delta-sh", "a | ~a", *fam)[0] == 0
    assert run(capsys, "consequence", "delta-s", "a | ~a", *fam)[0] == 2


def test_reduce_command(capsys):
    code, _ = run(capsys, "reduce", DATA / "detour.rules", DATA / "redex.struct",
                  DATA / "contractum.struct")
    assert code == 0
    code, _ = run(capsys, "reduce", DATA / "detour.rules", DATA / "redex.struct",
                  DATA / "contractum.struct", "--max-steps", "0")
    assert code == 1


def test_valid_command(capsys):
    code, out = run(capsys, "valid", DATA / "redex.struct", DATA / "detour.rules",
                    DATA / "abc.base")
    assert code == 0, out
    code, _ = run(capsys, "valid", DATA / "redex.struct", DATA / "detour.rules",
                  DATA / "empty.base")
    assert code == 1


def test_search_command(capsys):
    code, out = run(capsys, "search", "p -> q", "--atoms", "p,q", "--max-rules", "1")
    assert code == 1 and "{-> p}" in out
    code, _ = run(capsys, "search", "a | ~a", "--atoms", "a", "--max-rules", "2")
    assert code == 0


def test_search_counterexample_op():
    p, q = Atom("p"), Atom("q")
    found = search_counterexample((), parse_formula("p -> q"), [p, q], 1)
    assert found is not None and found.id == "{-> p}"
    assert not models(found, (), parse_formula("p -> q"))
    assert search_counterexample((), parse_formula("p"), [p], 1).id == "{}"
    assert search_counterexample((), parse_formula("a | ~a"), [Atom("a")], 2) is None


def test_demos_pass(capsys):
    for name in ("detour", "chain", "graph"):
        code, _ = run(capsys, "demo", name)
        assert code == 0, name
    code, out = run(capsys, "demo", "em", "--family", "enumerate:atoms=1,rules=1")
    assert code == 0
    assert out.count("excluded middle on") == 4  # one witness line per base


def test_lines_format_parses_back(capsys):
    code, out = run(capsys, "models", DATA / "two_rule.base", "q | s", "--format", "lines")
    assert code == 0
    rec = json.loads(out.strip())
    assert rec == {
        "record": "result",
        "command": "models",
        "base": "two_rule",
        "context": [],
        "goal": "q | s",
        "holds": True,
    }


def test_lines_format_demo_records(capsys):
    code, out = run(capsys, "demo", "em", "--family", "enumerate:atoms=1,rules=1",
                    "--format", "lines")
    assert code == 0
    records = [json.loads(line) for line in out.strip().splitlines()]
    assert all(r["record"] == "demo" and r["name"] == "em" for r in records)
    assert all(r["status"] == "valid" for r in records)
    arms = {r["arm"] for r in records}
    assert "em_refute" in arms and any(a.startswith("em_assert") for a in arms)


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 3


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.base"
    bad.write_text("p q r\n", encoding="utf-8")
    code = main(["derive", str(bad), "p"])
    assert code == 3
    err = capsys.readouterr().err
    assert "line 1" in err


def test_missing_file_exit_code(capsys):
    assert main(["derive", "no/such/file.base", "p"]) == 3


def test_valid_command_pool_flags(capsys, tmp_path):
    pool = tmp_path / "pool.structs"
    pool.write_text('(inf cls "a | b" (inf atm "a" (empty)))\n', encoding="utf-8")
    code, _ = run(capsys, "valid", DATA / "redex.struct", DATA / "detour.rules",
                  DATA / "abc.base", "--sigma-pool", pool)
    assert code == 0
    code, _ = run(capsys, "valid", DATA / "redex.struct", DATA / "detour.rules",
                  DATA / "abc.base", "--extensions", DATA / "detour.rules")
    assert code == 0


def test_family_enumeration_cap_is_a_clean_error(capsys):
    code = main(["consequence", "base", "a", "--family", "enumerate:atoms=4,rules=9"])
    assert code == 3
    assert "cap" in capsys.readouterr().err

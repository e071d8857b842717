from __future__ import annotations

import json
import subprocess
import sys

import pytest

from locallimit.cli import RunConfig, build_parser, main
from locallimit.measures import load_table, marginals_rooted, save_table


@pytest.fixture
def tables(tmp_path):
    paths = {}
    for name, argv in {
        "reg2": ["regular", "--d", "2", "--depth", "3"],
        "reg3": ["regular", "--d", "3", "--depth", "3"],
        "ugw": ["ugw", "--deg", "1:1/2,3:1/2", "--depth", "4"],
        "path3": ["atom", "--tree", "path3", "--depth", "2"],
    }.items():
        path = tmp_path / f"{name}.json"
        assert main(["marginals", *argv, "-o", str(path)]) == 0
        paths[name] = path
    return paths


def test_marginals_files_validate(tables, capsys):
    for name in ("reg3", "ugw"):
        assert main(["validate", str(tables[name])]) == 0
    assert "status\tPASS" in capsys.readouterr().out


def test_marginals_atom_values(tables):
    from fractions import Fraction

    level = load_table(tables["path3"]).levels[1]
    assert sorted(level.values()) == [Fraction(1, 3), Fraction(2, 3)]


def test_validate_rejects_endpoint_path(tmp_path, capsys):
    path = tmp_path / "end.json"
    save_table(marginals_rooted(3, [(0, 1), (1, 2)], 0, 3), path)
    assert main(["validate", str(path)]) == 1
    out = capsys.readouterr().out
    assert "e3\tr=1\t2.1:0>1.0\t1\t0" in out
    assert main(["validate", str(path), "--json"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert not doc["passed"] and doc["violations"][0]["equation"] in {"e2", "e3"}


def test_validate_corrupt_file(tmp_path, tables):
    bad = tmp_path / "bad.json"
    bad.write_bytes(tables["reg2"].read_bytes()[:100])
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_synthesize_then_verify(tmp_path, tables, capsys):
    out = tmp_path / "g.txt"
    assert main(["synthesize", str(tables["reg2"]), "-r", "1", "--epsilon", "0.05", "-o", str(out)]) == 0
    assert main(["verify", str(out), str(tables["reg2"]), "-r", "1", "--workers", "1"]) == 0
    assert "status\tPASS" in capsys.readouterr().out
    assert main(["census", str(out), "-r", "1", "--json", "--workers", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["radius"] == 1 and sum(doc["counts"].values()) == doc["vertices"]


def test_verify_fails_on_wrong_table(tmp_path, tables):
    out = tmp_path / "g.txt"
    assert main(["synthesize", str(tables["reg2"]), "-r", "1", "-o", str(out)]) == 0
    path = tmp_path / "line.json"
    assert main(["marginals", "atom", "--tree", "K2", "--d", "2", "--depth", "2", "-o", str(path)]) == 0
    assert main(["verify", str(out), str(path), "-r", "1", "--workers", "1"]) == 1


def test_max_n_exit_code(tmp_path, tables, capsys):
    rc = main(["synthesize", str(tables["ugw"]), "-r", "2", "--max-N", "1000", "-o", str(tmp_path / "u.txt")])
    assert rc == 3
    assert "required_N\t" in capsys.readouterr().err


def test_synthesize_is_deterministic(tmp_path, tables):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        assert main(["synthesize", str(tables["ugw"]), "-r", "1", "--seed", "99", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_random_seed_is_recorded(tmp_path, tables):
    out = tmp_path / "g.txt"
    assert main(["synthesize", str(tables["reg2"]), "-r", "1", "--seed", "random", "-o", str(out)]) == 0
    seed_line = next(ln for ln in out.read_text().splitlines() if ln.startswith("# seed"))
    assert 0 <= int(seed_line.split()[2]) < 2**64


def test_sequence(tmp_path, capsys):
    table = tmp_path / "reg2.json"
    assert main(["marginals", "regular", "--d", "2", "--depth", "4", "-o", str(table)]) == 0
    capsys.readouterr()
    assert main(["sequence", str(table), "-K", "2", "--out-dir", str(tmp_path / "seq"), "--workers", "1"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert len(rows) == 3 and (tmp_path / "seq" / "G_2.txt").exists()


def test_selftest_quick(capsys):
    assert main(["selftest", "--quick"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_bad_flags_exit_2():
    for argv in (["synthesize", "x", "-r", "1", "-o", "y", "--epsilon", "2"],
                 ["synthesize", "x", "-r", "1", "-o", "y", "--seed", "-1"],
                 ["census", "x", "-r", "1", "--workers", "0"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 2


def test_help_documents_every_flag():
    parser = build_parser()
    for action in parser._subparsers._group_actions[0].choices.values():
        for a in action._actions:
            if a.option_strings and a.dest != "help":
                assert a.help, f"{a.option_strings} lacks help"


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("synthesize", max_N=0)
    with pytest.raises(ValueError):
        RunConfig("synthesize", seed=2**64)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "locallimit", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("marginals", "validate", "synthesize", "census", "verify", "sequence", "selftest"):
        assert cmd in res.stdout

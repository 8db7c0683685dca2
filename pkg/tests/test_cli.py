import json
import subprocess
import sys

import pytest

from reprank.cli import RunConfig, UsageError, format_score, main


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def rank_args(fx, *extra):
    return ("rank", fx / "running.dlp", "--query", "hotel(X)", "--reports", fx / "reports.json",
            "--user-spo", fx / "user_spo.json", *extra)


def test_check_running(run, fixtures_dir):
    code, out, _ = run("check", fixtures_dir / "running.dlp")
    assert code == 0
    assert "tgds: 7 (linear 7, guarded 0, other 0)" in out
    assert out.strip().endswith("consistent")


@pytest.mark.parametrize("name, code", [("violated_nc.dlp", 1), ("inconsistent.dlp", 1), ("malformed.dlp", 2)])
def test_check_failures(run, fixtures_dir, name, code):
    assert run("check", fixtures_dir / name)[0] == code


def test_missing_file(run, tmp_path):
    assert run("check", tmp_path / "absent.dlp")[0] == 2


def test_query(run, fixtures_dir):
    code, out, _ = run("query", fixtures_dir / "running.dlp", "hotel(X) & locatedIn(X, oxfordCenter)")
    assert code == 0 and out.split() == ["a2", "h2"]
    code, out, _ = run("query", fixtures_dir / "running.dlp", "hotel(X)", "--atoms")
    assert out.split() == ["hotel(a2)", "hotel(h1)", "hotel(h2)"]
    code, out, _ = run("query", fixtures_dir / "running.dlp", "Q() = exists R room(R, h1)")
    assert out.strip() == "yes"


def test_query_on_inconsistent_kb(run, fixtures_dir):
    code, _, err = run("query", fixtures_dir / "violated_nc.dlp", "hotel(X)")
    assert code == 1 and "inconsistent" in err


def test_dump_chase(run, fixtures_dir):
    code, out, _ = run("dump-chase", fixtures_dir / "running.dlp", "--level", "1")
    assert code == 0
    assert "% level 1" in out and "room(_:n2,h1)." in out and "% level 2" not in out


def test_rank_hist(run, fixtures_dir):
    code, out, _ = run(*rank_args(fixtures_dir, "--algo", "hist", "--k", "2",
                                   "--rel-threshold", "0.1", "--collapse", "drop-lowest"))
    assert code == 0
    assert out == "1\thotel(h1)\t2.016667\n2\thotel(h2)\t1.633333\n"


def test_rank_basic(run, fixtures_dir):
    code, out, _ = run(*rank_args(fixtures_dir, "--algo", "basic", "--k", "2"))
    assert code == 0
    assert [line.split("\t")[1] for line in out.splitlines()] == ["hotel(h2)", "hotel(h1)"]


def test_rank_k1_and_json(run, fixtures_dir):
    _, out, _ = run(*rank_args(fixtures_dir, "--k", "1"))
    assert len(out.splitlines()) == 1
    _, out, _ = run(*rank_args(fixtures_dir, "--k", "3", "--format", "json"))
    doc = json.loads(out)
    assert [d["atom"] for d in doc] == ["hotel(h2)", "hotel(h1)", "hotel(a2)"]
    assert doc[2]["score"] == 0.0


def test_rank_empty_answers(run, fixtures_dir):
    code, out, _ = run("rank", fixtures_dir / "running.dlp", "--query",
                       "hotel(X) & locatedIn(X, cambridge)", "--reports", fixtures_dir / "reports.json")
    assert code == 0 and out == ""


@pytest.mark.parametrize(
    "extra",
    [
        ("--collapse", "mean10"),
        ("--algo", "hist", "--collapse", "weighted"),
        ("--algo", "hist", "--collapse", "weighted", "--weights", "1,2"),
        ("--k", "0"),
        ("--algo", "hist", "--rel-threshold", "1.5"),
        ("--hierarchy", "s1"),
    ],
)
def test_rank_usage_errors(run, fixtures_dir, extra):
    assert run(*rank_args(fixtures_dir, *extra))[0] == 2


def test_rank_greports(run, fixtures_dir):
    code, out, _ = run("rank", fixtures_dir / "greports_kb.dlp", "--query", "hotel(X)",
                       "--greports", fixtures_dir / "greports.json", "--user-spo",
                       fixtures_dir / "user_spo.json", "--hierarchy", "s1,s2,s3,s4")
    assert code == 0
    assert sorted(line.split("\t")[1] for line in out.splitlines()) == [
        "hotel(a2)", "hotel(h1)", "hotel(h2)", "hotel(h3)"]


def test_compare_greports(run, fixtures_dir):
    code, out, _ = run("compare-greports", fixtures_dir / "greports_kb.dlp", "--greports",
                       fixtures_dir / "greports.json", "--hierarchy", "s1,s2,s3,s4")
    assert code == 0
    lines = set(out.splitlines())
    assert "gr1\tmore-general\tgr4" in lines
    assert "gr1\tmore-general\tgr3" in lines
    assert "gr1\tincomparable\tgr2" in lines


def test_bad_hierarchy(run, fixtures_dir):
    code, _, err = run("compare-greports", fixtures_dir / "greports_kb.dlp", "--greports",
                       fixtures_dir / "greports.json", "--hierarchy", "s1,s6")
    assert code == 2 and "features" in err


@pytest.mark.parametrize(
    "score, text",
    [(2.0166666666666666, "2.016667"), (0.0000005, "0.000000"), (0.0000015, "0.000002"), (1.0, "1.000000")],
)
def test_format_score(score, text):
    assert format_score(score) == text


def test_config_validation(fixtures_dir):
    with pytest.raises(UsageError):
        RunConfig(kb=fixtures_dir / "running.dlp", query="hotel(X)").validate()


def test_console_script_deterministic(fixtures_dir):
    cmd = [sys.executable, "-m", "reprank.cli", *map(str, rank_args(fixtures_dir, "--k", "3"))]
    outs = {subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(3)}
    assert len(outs) == 1

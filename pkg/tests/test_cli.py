import argparse
import csv

import pytest

from a2e import credential
from a2e.bench import HEADER
from a2e.cli import main, parse_range


@pytest.mark.parametrize("text, expect", [("3", [3]), ("1..5", [1, 2, 3, 4, 5]), ("1,3,10", [1, 3, 10])])
def test_parse_range(text, expect):
    assert parse_range(text) == expect


@pytest.mark.parametrize("text", ["", "5..1", "a..b", "1,x"])
def test_parse_range_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        parse_range(text)


def test_demo_is_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"t{i}.jsonl"
        assert main(["demo", "--seed", "3", "--M", "6", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0].count(b"\n") > 20
    assert "trace" in capsys.readouterr().out.lower()


def test_verify_fails_on_a_broken_pairing_check(monkeypatch, capsys):
    monkeypatch.setattr(credential, "pairing_check", lambda pairs: False)
    assert main(["verify", "--only", "1"]) == 1
    assert "[FAIL] 1." in capsys.readouterr().out


def test_verify_passes_on_a_sound_build(capsys):
    assert main(["verify", "--only", "8"]) == 0
    assert "[PASS] 8." in capsys.readouterr().out


def test_bench_writes_csv(tmp_path):
    path = tmp_path / "b.csv"
    code = main(["bench", "--N", "2", "--Nprime", "1", "--M", "3", "--U", "1", "--reps", "1",
                 "--phases", "auth", "--out", str(path)])
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == HEADER and len(rows) > 1


def test_bench_prints_csv_without_out(capsys):
    assert main(["bench", "--N", "1", "--Nprime", "1", "--M", "2", "--U", "1", "--reps", "1",
                 "--phases", "update"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == ",".join(HEADER)


@pytest.mark.parametrize("argv", [["demo", "--lambda", "80"], ["demo", "--L", "100"]])
def test_unsupported_parameters_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_invalid_sweep_exits_nonzero(capsys):
    assert main(["bench", "--N", "2", "--Nprime", "3", "--reps", "1"]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0

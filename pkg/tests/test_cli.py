import json

import pytest

import logbarrier_games.harness as hs
from logbarrier_games.cli import main
from logbarrier_games.errors import NumericalError
from logbarrier_games.fileio import read_records, save_game
from logbarrier_games.games import matching_pennies, two_stage_toy


@pytest.fixture
def files(tmp_path):
    save_game(matching_pennies(), tmp_path / "mp.json")
    save_game(two_stage_toy(), tmp_path / "toy.json")
    return tmp_path


def test_validate_pass_and_fail(capsys):
    assert main(["validate", "--eta", "0.05", "--tau", "10", "--delta", "0.05", "--k", "4"]) == 0
    out = capsys.readouterr().out
    assert "T0 = 1350" in out and "overall: PASS" in out
    assert main(["validate", "--eta", "10", "--tau", "10", "--delta", "0.5", "--k", "4",
                 "--t0", "55"]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_validate_infeasible_exits_2(capsys):
    assert main(["validate", "--eta", "0.05", "--tau", "1.0", "--delta", "0.05", "--k", "4"]) == 2
    assert "error" in capsys.readouterr().err


def test_solve_and_fit(files, capsys):
    out = files / "run.csv"
    code = main(["solve", "matrix", "--game", str(files / "mp.json"), "--steps", "3000",
                 "--seed", "2", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "T0 = 1350" in text and "monitor" in text
    recs = read_records(out)
    assert recs[-1].t == 3000
    meta = json.loads((files / "run.csv.json").read_text())
    assert meta["config"]["seed"] == 2
    assert main(["fit", "--in", str(out), "--tail", "0.5"]) == 0
    text = capsys.readouterr().out
    assert "slope = " in text and "T0 = 1350" in text


def test_solve_efg_with_stride(files, capsys):
    out = files / "efg.csv"
    assert main(["solve", "efg", "--game", str(files / "toy.json"), "--steps", "200",
                 "--log-stride", "50", "--out", str(out)]) == 0
    assert [r.t for r in read_records(out)] == [0, 50, 100, 150, 200]


def test_solve_errors(files, capsys):
    # wrong game kind
    assert main(["solve", "efg", "--game", str(files / "mp.json"), "--steps", "10",
                 "--out", str(files / "x.csv")]) == 2
    assert "holds a matrix game" in capsys.readouterr().err
    # unreadable file
    assert main(["solve", "matrix", "--game", str(files / "nope.json"), "--steps", "10",
                 "--out", str(files / "x.csv")]) == 2
    # range error in the game file
    (files / "bad.json").write_text('{"type": "matrix", "loss": [[0.2, 1.2], [0, 1]]}')
    assert main(["solve", "matrix", "--game", str(files / "bad.json"), "--steps", "10",
                 "--out", str(files / "x.csv")]) == 2
    assert "loss[0][1]" in capsys.readouterr().err
    # failed parameter validation
    assert main(["solve", "matrix", "--game", str(files / "mp.json"), "--steps", "10",
                 "--tau", "1.0", "--out", str(files / "x.csv")]) == 2
    with pytest.raises(SystemExit):
        main(["solve", "matrix", "--game", "g", "--steps", "1", "--out", "o", "--t0", "zero"])


def test_unchecked_offset_is_refused(files, capsys):
    code = main(["solve", "matrix", "--game", str(files / "mp.json"), "--steps", "200",
                 "--eta", "50", "--tau", "1.5", "--delta", "0.5", "--t0", "1",
                 "--out", str(files / "x.csv")])
    assert code == 2
    assert "validation failed" in capsys.readouterr().err


def test_numerical_failure_exits_3(files, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericalError("root finder did not converge", residual=1.0)

    monkeypatch.setattr(hs, "player_update", boom)
    code = main(["solve", "matrix", "--game", str(files / "mp.json"), "--steps", "5",
                 "--out", str(files / "x.csv")])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_fit_insufficient_data(files, capsys):
    out = files / "short.csv"
    assert main(["solve", "matrix", "--game", str(files / "mp.json"), "--steps", "10",
                 "--out", str(out)]) == 0
    assert main(["fit", "--in", str(out), "--tail", "0.5"]) == 2
    assert "at least 10" in capsys.readouterr().err


def test_sweep(files, capsys):
    cfg = files / "sweep.json"
    cfg.write_text(json.dumps({"game": str(files / "mp.json"), "steps": 100, "seeds": [0, 1]}))
    assert main(["sweep", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and json.loads(lines[1])["seed"] == 1

import csv
import json
import math

import numpy as np
import pytest

from tightbound.channel import AchievingChannel, induced_confusion
from tightbound.cli import run
from tightbound.formats import confusion_to_csv, parse_confusion_csv
from tightbound.oracle import example_family


@pytest.fixture
def eq8_csv(tmp_path):
    path = tmp_path / "eq8_n5.csv"
    path.write_text(confusion_to_csv(example_family(5)))
    return path


@pytest.fixture
def identity_csv(tmp_path):
    path = tmp_path / "identity.csv"
    path.write_text(confusion_to_csv(np.eye(3) / 3))
    return path


def test_bound_table(eq8_csv, capsys):
    assert run(["bound", "--confusion", str(eq8_csv)]) == 0
    out = capsys.readouterr().out
    assert "bound_confusion    0.950977500433" in out
    assert "bound_kovalevsky   0.8" in out
    assert "      5" in out  # 1-based labels


def test_bound_json_is_stable(eq8_csv, capsys):
    assert run(["bound", "--confusion", str(eq8_csv), "--json"]) == 0
    first = capsys.readouterr().out
    run(["bound", "--confusion", str(eq8_csv), "--json"])
    assert capsys.readouterr().out == first
    data = json.loads(first)
    assert list(data) == ["h_x", "h_x_given_xhat", "i_x_xhat", "bound_confusion", "bound_kovalevsky", "overall_eps", "mi_upper"]
    assert data["bound_confusion"] == pytest.approx(0.6 * math.log2(3), abs=1e-11)


def test_header_flag(tmp_path, capsys):
    path = tmp_path / "h.csv"
    path.write_text("a,b\n0.5,0\n0,0.5\n")
    assert run(["validate", "--confusion", str(path)]) == 2
    assert run(["validate", "--confusion", str(path), "--header"]) == 0


def test_validate_exit_codes(tmp_path, eq8_csv, capsys):
    assert run(["validate", "--confusion", str(eq8_csv)]) == 0
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1,0.4\n0.2,0.3\n")
    assert run(["validate", "--confusion", str(bad)]) == 2
    out = capsys.readouterr().out
    assert "NotMapConsistent" in out and "column 1" in out


def test_bound_on_invalid_file(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0.5,0.5\nx,0\n")
    assert run(["bound", "--confusion", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_construct_then_bound_identity(identity_csv, tmp_path, capsys):
    out = tmp_path / "ch.json"
    assert run(["construct", "--confusion", str(identity_csv), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "achieved equivocation  0\n" in text
    ch = AchievingChannel.from_dict(json.loads(out.read_text()))
    assert ch.equivocation() == 0
    assert run(["bound", "--confusion", str(identity_csv)]) == 0


def test_construct_eq8_dump(eq8_csv, tmp_path, capsys):
    out = tmp_path / "ch.json"
    assert run(["construct", "--confusion", str(eq8_csv), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"p_hat", "fibers"}
    assert data["fibers"][4]["xhat"] == 4
    ch = AchievingChannel.from_dict(data)
    np.testing.assert_allclose(induced_confusion(ch).joint, example_family(5).joint, atol=1e-11)
    assert "|achieved - bound|" in capsys.readouterr().out


def test_construct_leaves_no_file_on_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1,0.4\n0.2,0.3\n")
    out = tmp_path / "ch.json"
    assert run(["construct", "--confusion", str(bad), "--out", str(out)]) == 2
    assert list(tmp_path.iterdir()) == [bad]


def test_oracle_check(tmp_path, capsys):
    out = tmp_path / "stress.json"
    assert run(["oracle-check", "--trials", "50", "--seed", "3", "--nx", "4", "--ny", "10", "--out", str(out)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data == json.loads(out.read_text())
    assert data["violations"] == [] and data["master_seed"] == 3 and data["trials"] == 50


def test_oracle_check_violation_exit(monkeypatch, capsys):
    import tightbound.oracle as oracle

    monkeypatch.setattr(oracle, "channel_slack", lambda ch: -1.0)
    assert run(["oracle-check", "--trials", "2", "--seed", "0"]) == 3
    assert capsys.readouterr().err.startswith("error:")


def test_example_csv(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    assert run(["example", "--n-list", "2..30", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["n"]) for r in rows] == list(range(2, 31))
    for r in rows:
        assert float(r["bound_kov"]) <= float(r["bound_ours"]) <= float(r["h_post"])
    assert run(["example", "--n-list", "2,3,7", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4


def test_estimate_with_dump(tmp_path, capsys):
    samples = tmp_path / "s.csv"
    samples.write_text("x,y\na,u\na,u\nb,v\nb,u\n")
    dump = tmp_path / "c.csv"
    assert run(["estimate", "--samples", str(samples), "--dump-confusion", str(dump)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["n_samples"] == 4 and rep["i_lower"] <= rep["mi_upper"]
    cm = parse_confusion_csv(dump.read_text())
    np.testing.assert_allclose(cm.joint, [[0.5, 0.0], [0.25, 0.25]])


def test_estimate_parse_error(tmp_path, capsys):
    samples = tmp_path / "s.csv"
    samples.write_text("x,y\na\n")
    assert run(["estimate", "--samples", str(samples)]) == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["bound"],
        ["bound", "--confusion", "x.csv", "--bogus"],
        ["example", "--n-list", "1..3", "--out", "f.csv"],
        ["oracle-check", "--trials", "0", "--seed", "1"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_file_is_io_error(tmp_path, capsys):
    assert run(["bound", "--confusion", str(tmp_path / "nope.csv")]) == 4
    assert capsys.readouterr().err.startswith("error:")


def test_help_lists_formats(capsys):
    with pytest.raises(SystemExit):
        run(["--help"])
    out = capsys.readouterr().out
    assert "confusion CSV" in out and "1-based" in out

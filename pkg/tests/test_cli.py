import csv
import io

import pytest

from snsqkd.cli import CSV_COLUMNS, main
from snsqkd.config import RunConfig, load_config, parse_config, parse_distances
from snsqkd.errors import DomainError

POINT = ["--mu-x", "0.001", "--mu-y", "0.002", "--mu-z", "0.06", "--epsilon", "0.05"]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_defaults_match_the_experimental_table():
    cfg = RunConfig()
    assert (cfg.p_d, cfg.e_d, cfg.eta_d, cfg.f, cfg.alpha_db_per_km) == (1e-8, 0.03, 0.30, 1.1, 0.2)
    assert cfg.plob_include_detector is False


def test_config_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# experiment\nphases = 4, 6\nmodes = 4int,3int\ndistances = 0:100:50\ne_d = 0.02  # lower\n")
    cfg = load_config(path)
    assert cfg.phases == (4, 6)
    assert cfg.modes == ("4int", "3int")
    assert cfg.distances == (0.0, 50.0, 100.0)
    assert cfg.e_d == 0.02
    with pytest.raises(DomainError):
        parse_config("colour = blue")
    with pytest.raises(DomainError):
        parse_config("e_d 0.02")
    assert parse_distances("10,20") == (10.0, 20.0)


def test_rate_command(capsys):
    code = main(["rate", "--distance", "300", "--phases", "6", *POINT])
    out = capsys.readouterr()
    assert code == 0
    rows = _rows(out.out)
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert float(rows[0]["R"]) > 0.0
    assert "R = " in out.err


def test_invalid_intensities_exit_2(capsys):
    code = main(["rate", "--distance", "300", "--phases", "6", "--mu-x", "0.003", "--mu-y", "0.002",
                 "--mu-z", "0.06", "--epsilon", "0.05"])
    assert code == 2
    assert "mu_x < mu_y" in capsys.readouterr().err


def test_condition_violation_exits_3(capsys):
    code = main(["rate", "--distance", "300", "--phases", "6", "--mu-x", "2", "--mu-y", "8",
                 "--mu-z", "0.1", "--epsilon", "0.05"])
    assert code == 3
    assert "condition" in capsys.readouterr().err


def test_empty_distance_list_exits_2():
    assert main(["scan", "--distance", ""]) == 2


def test_unwritable_output_exits_4(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    assert main(["scan", "--distance", "0", "--phases", "4", "--out", str(target)]) == 4


def test_missing_config_exits_4(tmp_path):
    assert main(["scan", "--config", str(tmp_path / "none.cfg")]) == 4


def test_scan_output_format(tmp_path):
    out = tmp_path / "scan.csv"
    code = main(["scan", "--distance", "0,100", "--phases", "4", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.endswith("\n") and "\r" not in text
    rows = _rows(text)
    assert len(rows) == 2
    for row in rows:
        assert float(row["R"]) >= 0.0
        assert 0.0 <= float(row["eph_U"]) <= 0.5
        assert row["mode"] == "4int"


def test_optimize_command(capsys):
    assert main(["optimize", "--distance", "50", "--phases", "4", "--mode", "3int"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0]["mu_y"] == rows[0]["mu_z"]


def test_plob_flag_changes_benchmark(capsys):
    main(["rate", "--distance", "300", "--phases", "6", *POINT])
    plain = float(_rows(capsys.readouterr().out)[0]["plob"])
    main(["rate", "--distance", "300", "--phases", "6", "--plob-include-detector", *POINT])
    with_detector = float(_rows(capsys.readouterr().out)[0]["plob"])
    assert with_detector == pytest.approx(0.3 * plain, rel=1e-6)


def test_verify_on_ideal_channel(tmp_path, capsys):
    cfg = tmp_path / "ideal.cfg"
    cfg.write_text("p_d = 0\ne_d = 0\nverify_distances = 100\nverify_phases = 12\n")
    code = main(["verify", "--config", str(cfg), "--mu-x", "0.001", "--mu-y", "0.002",
                 "--mu-z", "0.4", "--epsilon", "0.05"])
    report = capsys.readouterr().out
    assert code == 0
    eph_line = next(line for line in report.splitlines() if "eph_U >= eph" in line)
    assert float(eph_line.split("\t")[4]) < 1e-8

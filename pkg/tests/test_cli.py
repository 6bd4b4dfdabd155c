import csv
import io

import pytest

from tfqkd.cli import CSV_HEADER, main


def test_point_itemises_components(capsys):
    assert main(["point", "--distance", "20", "--samples", "1e10"]) == 0
    out = capsys.readouterr().out
    for label in ("uncertainty credit", "reconciliation leakage", "total (before floor)", "bits/s"):
        assert label in out


def test_point_abort_exit_code(capsys):
    assert main(["point", "--distance", "10", "--set", "d0=0.01"]) == 2
    assert "distance_threshold_exceeded" in capsys.readouterr().out


def test_scan_csv(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--scan", "0:60:20", "--samples", "1e9", "--output", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == CSV_HEADER
    assert [float(r[0]) for r in rows[1:]] == [0, 20, 40, 60]
    assert int(rows[1][4]) > int(rows[-1][4])
    assert all(r[-1] in ("none", "distance_threshold_exceeded", "no_single_photon_bound", "infeasible_cutoff") for r in rows[1:])


def test_scan_to_stdout(capsys):
    assert main(["scan", "--scan", "0:10:10"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == ",".join(CSV_HEADER)


def test_unwritable_output(capsys):
    assert main(["scan", "--scan", "0:0:1", "--output", "/nonexistent/dir/out.csv"]) == 1
    assert "cannot write" in capsys.readouterr().err


def test_config_errors_listed_together(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("mu = 0.1, 0.1, 0.2\np_mu = 0.5, 0.2, 0.2\n")
    assert main(["point", "--config", str(path)]) == 1
    err = capsys.readouterr().err
    assert "mu1 > mu2 + mu3" in err and "sum to 1" in err


def test_bad_set_syntax(capsys):
    assert main(["point", "--set", "beta"]) == 1


def test_requirements(capsys):
    assert main(["requirements", "--distance", "50"]) == 0
    assert "minimum frame time" in capsys.readouterr().out


@pytest.mark.slow
def test_validate_passes(capsys):
    assert main(["validate", "--mc-samples", "200000"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 6

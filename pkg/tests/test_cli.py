import json
import subprocess
import sys

import pytest

from duelbatch.cli import main
from duelbatch.prefmat import condorcet_analysis, load_csv


def test_bound_prints_constants(capsys):
    assert main(["bound", "--K", "10", "--T", "100000", "--B", "16", "--delta", "0.01", "--dmin", "0.2"]) == 0
    out = capsys.readouterr().out
    assert "q = T^(1/B) = 2.05353" in out
    assert "C(delta) = 4" in out
    assert "A = 4238.65" in out
    assert "r(delta) = 16" in out
    assert "shape-only" in out


def test_bound_domain_error_is_usage(capsys):
    assert main(["bound", "--K", "10", "--T", "100000", "--B", "40", "--dmin", "0.2"]) == 1
    assert "error" in capsys.readouterr().err


def test_gen_writes_valid_matrix(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["gen", "--kind", "uniform-gap", "--K", "3", "--eps", "0.2", "--seed", "7", "--out", str(out)]) == 0
    m = load_csv(out)
    assert m.K == 3 and condorcet_analysis(m).winner == 0


def test_gen_to_stdout(capsys):
    assert main(["gen", "--K", "2", "--eps", "0.1"]) == 0
    assert capsys.readouterr().out == "0.5,0.6\n0.4,0.5\n"


def test_unknown_flag_is_usage_error(capsys):
    assert main(["run", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_matrix_is_runtime_error(tmp_path, capsys):
    code = main(["run", "--matrix", str(tmp_path / "none.csv"), "--T", "100", "--out", str(tmp_path / "r")])
    assert code == 2


def test_malformed_matrix_is_runtime_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0.5,0.6\n0.5,0.5\n")
    assert main(["run", "--matrix", str(bad), "--T", "100", "--out", str(tmp_path / "r")]) == 2


def test_run_with_small_q_warns_and_proceeds(tmp_path, capsys):
    prefix = tmp_path / "r"
    code = main(["run", "--K", "3", "--T", "1000", "--B", "12", "--repeats", "2", "--out", str(prefix), "--svg"])
    assert code == 0
    assert "q = T^(1/B)" in capsys.readouterr().err
    assert (tmp_path / "r.csv").exists() and (tmp_path / "r.json").exists() and (tmp_path / "r.svg").exists()


def test_sweep_and_plot(tmp_path, capsys):
    out_dir = tmp_path / "sw"
    code = main(
        ["sweep", "--K", "3", "--T", "2000", "--B-list", "4,8", "--algos", "c2b,c2b-kl", "--repeats", "2", "--out-dir", str(out_dir)]
    )
    assert code == 0
    summary = (out_dir / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("label,algorithm,B") and len(summary) == 5
    ext = tmp_path / "ext.csv"
    ext.write_text("t,regret\n1,0\n500,3\n2000,5\n")
    svg = tmp_path / "p.svg"
    code = main(["plot", str(out_dir / "c2b_B4.csv"), str(out_dir / "c2b-kl_B8.csv"), "--overlay", str(ext), "--bound", "--log-x", "--out", str(svg)])
    assert code == 0 and svg.read_text().count("<svg") == 1


def test_run_json_has_no_wall_clock_unless_asked(tmp_path):
    main(["run", "--K", "3", "--T", "500", "--repeats", "1", "--out", str(tmp_path / "a")])
    main(["run", "--K", "3", "--T", "500", "--repeats", "1", "--timing", "--out", str(tmp_path / "b")])
    assert "wall_clock_s" not in json.loads((tmp_path / "a.json").read_text())
    assert "wall_clock_s" in json.loads((tmp_path / "b.json").read_text())


@pytest.mark.slow
def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "duelbatch", "gen", "--K", "2", "--eps", "0.2"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("0.5,0.7")

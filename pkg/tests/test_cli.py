import numpy as np
import pytest

from mnclust.cli import EXIT_INPUT, EXIT_OK, main
from mnclust.core import parse_count_csv, write_count_csv
from mnclust.datagen import two_cluster_sparse


@pytest.fixture
def matrix(tmp_path):
    x, _ = two_cluster_sparse(30, seed=1)
    path = tmp_path / "x.csv"
    write_count_csv(x, path)
    return path


def _csv_lines(text):
    return [ln for ln in text.splitlines() if "," in ln and not ln.startswith(" ")]


def test_sweep_prints_table_and_csv(matrix, capsys):
    assert main(["sweep", str(matrix)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "chosen K = " in out
    assert "k,discrepancy,penalty,delta,chosen,converged,support_violation" in out
    assert out.rstrip().splitlines()[-1].startswith("# seed=0, version=")


def test_sweep_single_candidate(matrix, capsys):
    main(["sweep", str(matrix), "--kmin", "1", "--kmax", "1"])
    assert "chosen K = 1" in capsys.readouterr().out


def test_sweep_is_byte_identical(matrix, capsys):
    main(["sweep", str(matrix), "--seed", "3"])
    first = capsys.readouterr().out
    main(["sweep", str(matrix), "--seed", "3"])
    assert capsys.readouterr().out == first


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    assert main(["sweep", str(bad)]) == EXIT_INPUT
    assert "line 2, column 2" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["sweep", str(tmp_path / "none.csv")]) == EXIT_INPUT


def test_config_precedence(matrix, tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[sweep]\nkmax = 1\nseed = 9\n")
    main(["sweep", str(matrix), "--config", str(cfg)])
    out = capsys.readouterr().out
    assert "chosen K = 1" in out and "# seed=9," in out
    main(["sweep", str(matrix), "--config", str(cfg), "--kmax", "2", "--seed", "2"])
    out = capsys.readouterr().out
    assert "   2 " in out and "# seed=2," in out


def test_bad_config_key(matrix, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[sweep]\nbogus = 1\n")
    assert main(["sweep", str(matrix), "--config", str(cfg)]) == EXIT_INPUT


def test_out_file(matrix, tmp_path, capsys):
    out = tmp_path / "r.csv"
    main(["sweep", str(matrix), "--out", str(out)])
    assert out.read_text().startswith("k,discrepancy")


def test_mc_table2(capsys):
    assert main(["mc-table2", "--d-list", "50", "--reps", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "d,delta_successes,aic_successes"
    assert lines[1].startswith("50,")
    assert main(["mc-table2", "--d-list", "10"]) == EXIT_INPUT


def test_graph_experiment_poisson(capsys):
    assert main(["graph-experiment", "--mode", "poisson-blocks", "--rho", "1", "--agg-c", "5", "--reps", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("mode,rho,c,n,reps,ari_ours")
    assert lines[1].startswith("poisson-blocks,1.0,5,")


def test_theorem_checks(capsys):
    assert main(["theorem-check", "--which", "t1", "--grid", "100", "--reps", "50"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("ell,estimate,std_error,limit")
    assert main(["theorem-check", "--which", "t3", "--grid", "20x10", "--reps", "2", "--cap", "max"]) == EXIT_OK
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[3] == row[4]


def test_gen_round_trip(tmp_path, capsys):
    assert main(["gen", "swimmer", "--pgm-dir", str(tmp_path / "img")]) == EXIT_OK
    x = parse_count_csv(capsys.readouterr().out)
    assert x.shape == (220, 256)
    assert len(list((tmp_path / "img").glob("*.pgm"))) == 256
    assert main(["gen", "sparse", "--pgm-dir", str(tmp_path)]) == EXIT_INPUT

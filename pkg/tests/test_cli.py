import json

import pytest

from bkt.cli.bkt_cmd import build_parser, main
from bkt.runner import read_paired_csv

CHAIN = ["--iters", "20", "--burnin", "6", "--thin", "2", "--hmc-steps", "2", "--warmup-inner", "1", "--leapfrog", "3"]


@pytest.fixture
def synth_csv(tmp_path):
    path = tmp_path / "data.csv"
    assert main(["synth", "--scenario", "gauss_mean1", "--n", "30", "--seed", "2", "--out", str(path)]) == 0
    return path


def test_no_command_prints_help(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().out.lower()


def test_unknown_option_exits_with_usage_code():
    with pytest.raises(SystemExit) as exc:
        main(["bf", "--bogus"])
    assert exc.value.code == 1


def test_synth_writes_readable_csv(synth_csv):
    data = read_paired_csv(synth_csv)
    assert data.n == 30
    assert synth_csv.read_text(encoding="utf-8").startswith("# format_version=1\n# config=")


def test_synth_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("BKT_SEED", "2")
    path = tmp_path / "env.csv"
    assert main(["synth", "--scenario", "gauss_mean1", "--n", "30", "--out", str(path)]) == 0
    explicit = tmp_path / "explicit.csv"
    assert main(["synth", "--scenario", "gauss_mean1", "--n", "30", "--seed", "2", "--out", str(explicit)]) == 0
    assert path.read_text(encoding="utf-8") == explicit.read_text(encoding="utf-8")


def test_bf_verb(synth_csv, tmp_path, capsys):
    out = tmp_path / "bf"
    assert main(["bf", "--input", str(synth_csv), "--s", "6", "--out", str(out)]) == 0
    assert "log10 BF" in capsys.readouterr().out
    body = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert body["config"]["verb"] == "bf"


def test_bf_grid(synth_csv, tmp_path):
    out = tmp_path / "grid"
    assert main(["bf", "--input", str(synth_csv), "--s", "6", "--theta-grid", "0.5:2:4", "--out", str(out)]) == 0
    assert (out / "curve.csv").is_file()


def test_test_verb(synth_csv, tmp_path, capsys):
    out = tmp_path / "test"
    assert main(["test", "--input", str(synth_csv), "--s", "6", "--out", str(out), *CHAIN]) == 0
    assert "P(H1 | D)" in capsys.readouterr().out
    assert (out / "samples.csv").is_file()


@pytest.mark.parametrize("argv", [
    ["bf", "--s", "5"],
    ["bf", "--theta", "1", "--theta-grid", "0.1:1:3"],
    ["bf", "--theta-grid", "1:0.5:3"],
    ["test", "--iters", "10", "--burnin", "10"],
])
def test_configuration_errors_exit_1(synth_csv, tmp_path, argv, capsys):
    code = main([*argv, "--input", str(synth_csv), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "エラー" in capsys.readouterr().err


def test_unknown_scenario_exits_1(tmp_path):
    assert main(["synth", "--scenario", "nope", "--n", "10", "--out", str(tmp_path / "x.csv")]) == 1


def test_missing_input_exits_2(tmp_path):
    assert main(["bf", "--input", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 2


def test_bad_cell_reports_line(write_csv, tmp_path, capsys):
    path = write_csv("x1,y1\n0,1\n1,2\nnan,3\n")
    assert main(["bf", "--input", str(path), "--s", "2", "--out", str(tmp_path / "o")]) == 2
    assert "line 4" in capsys.readouterr().err


def test_degenerate_data_exits_2(write_csv, tmp_path):
    path = write_csv("x1,y1\n1,1\n1,1\n1,1\n")
    assert main(["bf", "--input", str(path), "--s", "2", "--out", str(tmp_path / "o")]) == 2


def test_check_verb(capsys):
    assert main(["check", "--instances", "10"]) == 0
    assert "OK" in capsys.readouterr().out


def test_check_detects_perturbation():
    assert main(["check", "--instances", "10", "--perturb", "1e-3"]) != 0


def test_experiment_verb(tmp_path, monkeypatch):
    monkeypatch.setenv("BKT_THREADS", "1")
    out = tmp_path / "exp"
    argv = ["experiment", "--scenario", "gauss_null", "--scenario", "gauss_mean3", "--n", "20",
            "--replicates", "1", "--s", "4", "--out", str(out), *CHAIN]
    assert main(argv) == 0
    assert (out / "experiment.csv").is_file()


def test_experiment_rejects_bad_sizes(tmp_path):
    argv = ["experiment", "--scenario", "gauss_null", "--n", "20,abc", "--out", str(tmp_path)]
    assert main(argv) == 1


def test_parser_defaults():
    args = build_parser().parse_args(["test", "--input", "d.csv"])
    assert (args.s, args.iters, args.burnin, args.thin, args.hmc_steps) == (40, 2000, 500, 2, 9)
    assert args.sigma_method == 2

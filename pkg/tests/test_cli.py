import warnings

import pytest

from blockprec.cli import main


def run_cli(args, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = main(args)
    return code, capsys.readouterr().out


def test_table_subcommand(capsys, tmp_path):
    out = tmp_path / "table.csv"
    code, _ = run_cli(["table", "--n", "30", "--seed", "5",
                       "--kinds", "L", "D+", "--tags", "M",
                       "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header.startswith("experiment,matrix_tag,n,")
    assert any(",L," in l for l in lines)
    assert any(l.startswith("# rho=") for l in lines)


def test_table_deterministic_output(capsys, tmp_path):
    args = ["table", "--n", "25", "--seed", "2", "--kinds", "L", "--tags", "N"]
    _, text1 = run_cli(args + ["--out", "-"], capsys)
    _, text2 = run_cli(args + ["--out", "-"], capsys)
    assert text1 == text2


def test_table_strict_exit_code(capsys):
    # starving the solver of iterations leaves unconverged cells
    code, _ = run_cli(["table", "--n", "30", "--seed", "1", "--kinds", "Dhat+",
                       "--tags", "M", "--max-iters", "2", "--strict",
                       "--out", "-"], capsys)
    assert code == 2


def test_ratio_sweep_subcommand(capsys):
    code, text = run_cli(["ratio-sweep", "--mode", "star", "--n", "30",
                          "--seed", "3", "--eps-grid", "0,1", "--out", "-"],
                         capsys)
    assert code == 0
    assert "ratio_star" in text


def test_spectrum_curves_subcommand(capsys):
    code, text = run_cli(["spectrum-curves", "--grid", "1:4:4",
                          "--kinds", "Dhat-", "--out", "-"], capsys)
    assert code == 0
    assert "Dhat-,4.0,2.0,2.0" in text


def test_verify_theorem_subcommand(capsys):
    code, text = run_cli(["verify-theorem", "--n2", "4",
                          "--lambdas", "2,5,0.5,-3", "--seed", "3",
                          "--strict", "--out", "-"], capsys)
    assert code == 0
    rows = [l for l in text.splitlines() if not l.startswith("#")]
    assert rows[0] == "kind,max_residual,spectrum_distance,complete,passed"
    assert all(l.endswith("true") for l in rows[1:])


def test_vef_subcommand_single_solve(capsys):
    code, text = run_cli(["vef", "--elements", "25", "--sigma-a", "0.9",
                          "--kind", "D", "--out", "-"], capsys)
    assert code == 0
    assert "# h1_nodes=51" in text
    row = [l for l in text.splitlines() if l.startswith("25,")][0]
    assert row.split(",")[2] == "D"


def test_vef_subcommand_outer_driver(capsys):
    code, text = run_cli(["vef", "--elements", "15", "--sigma-a", "0.9",
                          "--kind", "L", "--outer", "--out", "-"], capsys)
    assert code == 0
    assert ",true" in text


def test_vef_symmetrized(capsys):
    code, text = run_cli(["vef", "--elements", "15", "--sigma-a", "0.0",
                          "--kind", "L", "--symmetrized", "--out", "-"], capsys)
    assert code == 0
    assert ",true,true" not in text  # lumped=false, symmetrized=true
    assert ",false,true," in text


def test_unknown_subcommand_rejected(capsys):
    with pytest.raises(SystemExit):
        main(["bogus"])

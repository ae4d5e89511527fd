import json

import pytest

from cones.cli import main


def test_run_writes_trace_and_summary(tmp_path, capsys):
    code = main(
        [
            "run",
            "--policy",
            "frugal",
            "--family",
            "frozen",
            "--param",
            "T_freeze=7",
            "--param",
            "r0=1",
            "--param",
            "D=4",
            "--T",
            "200",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "jumps=1" in out
    csv = (tmp_path / "frugal_frozen_200.csv").read_text().strip().split("\n")
    assert len(csv) == 201
    jump_rows = [l for l in csv if l.endswith("jump,1")]
    t_jump = int(jump_rows[0].split(",")[0])
    assert 165 <= t_jump <= 167


def test_run_greedy_directional_nonpositive_regret(tmp_path, capsys):
    code = main(
        [
            "run",
            "--policy",
            "greedy",
            "--family",
            "directional",
            "--param",
            "D=10",
            "--T",
            "5",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert "regret=" in capsys.readouterr().out
    rows = (tmp_path / "greedy_directional_5.csv").read_text().strip().split("\n")
    regret_col = rows[0].split(",").index("regret_cum")
    assert float(rows[-1].split(",")[regret_col]) <= 1e-9


def test_unknown_family_is_domain_error(tmp_path, capsys):
    code = main(["run", "--policy", "greedy", "--family", "bogus", "--T", "4"])
    assert code == 1
    assert "choose from" in capsys.readouterr().err


def test_unknown_param_is_usage_error():
    with pytest.raises(SystemExit):
        main(
            [
                "run",
                "--policy",
                "greedy",
                "--family",
                "sc_lb",
                "--param",
                "bogus=3",
                "--T",
                "4",
            ]
        )


def test_sweep_single_horizon(tmp_path, capsys):
    code = main(
        [
            "sweep",
            "--policy",
            "greedy",
            "--family",
            "sc_lb",
            "--T-list",
            "12",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    rows = (tmp_path / "sweep_greedy_sc_lb_12.csv").read_text().strip().split("\n")
    assert len(rows) == 2


def test_sweep_lsp_eps_expression(tmp_path, capsys):
    code = main(
        [
            "sweep",
            "--policy",
            "lsp",
            "--family",
            "sc_lb",
            "--T-list",
            "16,32,64,128",
            "--param",
            "eps=1/T",
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert code == 0
    assert "slope" in capsys.readouterr().out


def test_reproduce_fig3_bundle(tmp_path):
    assert main(["reproduce", "fig3", "--out-dir", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {
        "fig3_instance.json",
        "fig3_geometry.csv",
        "fig3_greedy.csv",
        "fig3_frugal.csv",
        "fig3_lsp.csv",
    } <= names
    payload = json.loads((tmp_path / "fig3_instance.json").read_text())
    assert payload["objective"]["kind"] == "squared_norm"
    assert len(payload["sets"]) == 7


def test_reproduce_fig5_bundle(tmp_path):
    assert main(["reproduce", "fig5", "--out-dir", str(tmp_path)]) == 0
    frugal = (tmp_path / "fig5_frugal.csv").read_text().strip().split("\n")
    assert len(frugal) == 201


def test_reproduce_unknown_figure_usage_error():
    with pytest.raises(SystemExit):
        main(["reproduce", "fig9"])


def test_env_out_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CONES_OUT", str(tmp_path / "envout"))
    code = main(["run", "--policy", "greedy", "--family", "sc_lb", "--T", "6"])
    assert code == 0
    assert (tmp_path / "envout" / "greedy_sc_lb_6.csv").exists()


def test_verify_suite_exit_code(capsys):
    assert main(["verify", "determinism"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "checks passed" in out

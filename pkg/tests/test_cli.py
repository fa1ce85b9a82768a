import json
import math

import numpy as np
import pytest

from chamberwalk.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_rho_command(capsys):
    code, out = run_cli(capsys, "rho", "B", "3")
    assert code == 0
    data = json.loads(out)
    assert data["rho"] == [5.0, 3.0, 1.0]
    assert data["manifest"]["command"] == "rho"
    assert "version" in data["manifest"]


def test_eval_semicharacter(capsys):
    code, out = run_cli(capsys, "eval", "semichar", "A", "1", "--x", "[1,-1]")
    assert code == 0
    data = json.loads(out)
    assert np.isclose(data["value_re"], 1.8134302039235095)
    assert data["regularized"] is False


def test_eval_m1(capsys):
    code, out = run_cli(capsys, "eval", "m1", "A", "1", "--x", "[1,-1]")
    assert code == 0
    data = json.loads(out)
    assert np.allclose(data["value"], [0.5373147207275482, -0.5373147207275482])


def test_eval_psi_trivial(capsys):
    code, out = run_cli(capsys, "eval", "psi", "A", "2",
                        "--lambda", "[0,0,0]", "--x", "[0,0,0]")
    assert code == 0
    data = json.loads(out)
    assert data["value_re"] == 1.0 and data["value_im"] == 0.0


def test_eval_phi_regularized_flag(capsys):
    code, out = run_cli(capsys, "eval", "phi", "A", "2",
                        "--lambda", "[1,0,-1]", "--x", "[0.5,0.5,-1]")
    assert code == 0
    data = json.loads(out)
    assert data["regularized"] is True
    assert data["est_abs_error"] > 0


def test_usage_errors_exit_2(capsys):
    assert main(["eval", "psi", "A", "2", "--x", "[1,0,-1]"]) == 2  # missing lambda
    capsys.readouterr()
    assert main(["eval", "semichar", "A", "2", "--x", "[1,-1]"]) == 2  # wrong dim
    capsys.readouterr()
    assert main(["eval", "semichar", "A", "2", "--x", "not-json"]) == 2
    capsys.readouterr()
    assert main(["rho", "B", "1"]) == 2  # rank below minimum
    capsys.readouterr()
    assert main(["convolve", "hermitian", "--d", "2", "--x", "[2,-1]", "--y", "[1,-1]"]) == 2
    capsys.readouterr()


def test_unknown_family_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["rho", "E", "6"])
    assert exc.value.code == 2


def test_convolve_writes_artifacts(tmp_path, capsys):
    prefix = str(tmp_path / "cloud")
    code, _ = run_cli(capsys, "convolve", "hermitian", "--d", "2",
                      "--x", "[1,-1]", "--y", "[1,-1]",
                      "--n", "500", "--seed", "3", "--out", prefix)
    assert code == 0
    summary = json.loads((tmp_path / "cloud.json").read_text())
    assert summary["n"] == 500
    assert 0.0 <= summary["extent_max"][0] <= 2.0 + 1e-9
    csv_text = (tmp_path / "cloud.csv").read_text()
    assert csv_text.startswith("# manifest: ")
    assert csv_text.splitlines()[1] == "x1,x2,weight"
    assert len(csv_text.splitlines()) == 502


def test_convolve_deterministic_for_seed(tmp_path, capsys):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    for prefix in (a, b):
        run_cli(capsys, "convolve", "group", "--d", "2", "--x", "[1,-1]",
                "--y", "[0.5,-0.5]", "--n", "200", "--seed", "11", "--out", prefix)
    csv_a = (tmp_path / "a.csv").read_text()
    csv_b = (tmp_path / "b.csv").read_text()
    # identical apart from the differing --out path recorded in the manifest
    assert csv_a.splitlines()[1:] == csv_b.splitlines()[1:]


def test_check_deformation_passes(capsys):
    code, out = run_cli(capsys, "check", "deformation", "--d", "2",
                        "--x", "[0.5,-0.5]", "--y", "[0.5,-0.5]",
                        "--n", "20000", "--seed", "2")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True


def test_check_support_passes(capsys):
    code, out = run_cli(capsys, "check", "support", "--d", "2",
                        "--x", "[1,-1]", "--y", "[0.5,-0.5]",
                        "--n", "2000", "--seed", "2")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_check_transform_homomorphism(capsys):
    code, out = run_cli(capsys, "check", "transform-homomorphism", "--d", "2",
                        "--x", "[1,-1]", "--y", "[0.5,-0.5]",
                        "--lambda", "[0.6,-0.6]", "--n", "3000", "--seed", "2")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_walk_command_with_flags(tmp_path, capsys):
    prefix = str(tmp_path / "walk")
    code, _ = run_cli(capsys, "walk", "--d", "2", "--x", "[0.5,-0.5]",
                      "--n", "300", "--replicas", "2", "--seed", "5",
                      "--out", prefix)
    assert code == 0
    report = json.loads((tmp_path / "walk.json").read_text())
    assert report["checkpoints"][-1] == 300
    assert math.isclose(report["limit_c"][0], 0.15651764274966565)
    csv_lines = (tmp_path / "walk.csv").read_text().splitlines()
    assert csv_lines[1] == "n,q1_over_n,q2_over_n,mz_scaled_dev"


def test_walk_command_with_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "d": 2, "atoms": [[0.5, -0.5]], "weights": [1.0],
        "n_steps": 100, "seed": 2,
    }))
    code, out = run_cli(capsys, "walk", "--config", str(cfg_path))
    assert code == 0
    assert json.loads(out)["checkpoints"][-1] == 100


def test_walk_crosscheck_flag(capsys):
    code, out = run_cli(capsys, "walk", "--d", "2", "--x", "[0.5,-0.5]",
                        "--n", "25", "--replicas", "300", "--seed", "6",
                        "--crosscheck")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True
    assert len(data["ks_distances"]) == 2


def test_threads_flag_does_not_change_results(capsys, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("CHAMBERWALK_THREADS", threads)
        _, out = run_cli(capsys, "convolve", "hermitian", "--d", "2",
                         "--x", "[1,-1]", "--y", "[1,-1]", "--n", "100", "--seed", "1")
        outs.append(json.loads(out))
    assert outs[0]["mean"] == outs[1]["mean"]


def test_selftest_mutation_fails(tmp_path, capsys, monkeypatch):
    # corrupting a rho table must flip the selftest to exit code 1
    import chamberwalk.selftest as st

    broken = dict(st.RHO_FORMULAS)
    broken["A"] = lambda r: np.arange(r, -r - 1, -2, dtype=float) + 1.0
    monkeypatch.setattr(st, "RHO_FORMULAS", broken)
    monkeypatch.setattr(st, "FAST", {**st.FAST, "n_mc": 2000, "n_conv": 2000,
                                     "n_supp": 200, "n_extent": 2000, "lln_steps": 64,
                                     "lln_reps": 1, "ks_reps": 120, "ks_steps": 10,
                                     "qr_walks": 3, "contract_pairs": 10, "n_pts": 1})
    code = main(["selftest", "--level", "fast", "--seed", "0",
                 "--out", str(tmp_path / "st")])
    capsys.readouterr()
    assert code == 1

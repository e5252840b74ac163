import json
import subprocess
import sys

import pytest

from incentive_mckp.cli import main
from incentive_mckp.io import save_instance


@pytest.fixture
def t1_file(t1, tmp_path):
    p = tmp_path / "t1.json"
    save_instance(t1, p)
    return p


def test_solve_budget_8(t1_file, tmp_path, capsys):
    curve, pol, log = tmp_path / "c.csv", tmp_path / "p.json", tmp_path / "l.csv"
    code = main(["solve", str(t1_file), "--budget", "8", "--curve-out", str(curve),
                 "--policy-out", str(pol), "--log-out", str(log)])
    out = capsys.readouterr().out
    assert code == 0
    assert "welfare_gain: 12.0" in out and "gap_bound: 0.0" in out
    assert curve.read_text().splitlines()[-1] == "8.0,12.0"
    assert json.loads(pol.read_text())["transfers"][1] == {"individual": 1, "alternative": 2,
                                                            "amount": 6.0}
    assert len(log.read_text().splitlines()) == 3


def test_solve_negative_budget(t1_file):
    assert main(["solve", str(t1_file), "--budget", "-1"]) == 2


def test_solve_needs_one_mode(t1_file):
    assert main(["solve", str(t1_file)]) == 2
    assert main(["solve", str(t1_file), "--budget", "1", "--target-inverse-efficiency", "1"]) == 2


def test_solve_target(t1_file, capsys):
    assert main(["solve", str(t1_file), "--target-inverse-efficiency", "1",
                 "--criterion", "incremental"]) == 0
    assert "iterations: 2" in capsys.readouterr().out


def test_solve_unreadable(tmp_path):
    assert main(["solve", str(tmp_path / "nope.json"), "--budget", "1"]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["solve", str(bad), "--budget", "1"]) == 3


def test_curve_alias(t1_file, tmp_path):
    curve = tmp_path / "c.csv"
    assert main(["curve", str(t1_file), "--budget", "8", "--curve-out", str(curve)]) == 0
    assert curve.read_text() == "spend,welfare_gain\n0.0,0.0\n2.0,4.0\n8.0,12.0\n"


def test_compare(t1_file, tmp_path):
    out = tmp_path / "cmp.json"
    assert main(["compare", str(t1_file), "--budget", "8", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 4
    assert len({round(r["disutility"], 9) for r in rows}) == 1
    csv_out = tmp_path / "cmp.csv"
    assert main(["compare", str(t1_file), "--budget", "0", "--out", str(csv_out)]) == 0
    for line in csv_out.read_text().splitlines()[1:]:
        assert all(float(x) == 0 for x in line.split(",")[1:])


def test_compare_missing(tmp_path):
    assert main(["compare", str(tmp_path / "x.json"), "--budget", "8"]) == 3


def test_compare_byte_stable(t1_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["compare", str(t1_file), "--budget", "8", "--out", str(a)])
    main(["compare", str(t1_file), "--budget", "8", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_generate(tmp_path):
    out = tmp_path / "inst.json"
    assert main(["generate", "--n", "50", "--seed", "3", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["individuals"]) == 50
    again = tmp_path / "inst2.json"
    main(["generate", "--n", "50", "--seed", "3", "--out", str(again)])
    assert out.read_bytes() == again.read_bytes()


def test_generate_empty(tmp_path):
    out = tmp_path / "e.json"
    assert main(["generate", "--n", "0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["individuals"] == []


def test_generate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"mu": -2}')
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "o.json")]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_simulate(t1_file, tmp_path):
    out = tmp_path / "sim.json"
    args = ["simulate-imperfect", str(t1_file), "--budget", "8", "--mu", "1.0",
            "--seed", "4", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    data = json.loads(first)
    assert set(data["summary"]) == {"perfect", "imperfect"}


def test_simulate_budget_zero(t1_file, capsys):
    assert main(["simulate-imperfect", str(t1_file), "--budget", "0", "--mu", "1"]) == 0
    assert "imperfect.incentives_proposed: 0" in capsys.readouterr().out


def test_simulate_from_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"n_individuals": 200}')
    assert main(["simulate-imperfect", "--config", str(cfg), "--budget", "20"]) == 0


def test_simulate_needs_mu(t1_file):
    assert main(["simulate-imperfect", str(t1_file), "--budget", "1"]) == 2


def test_verify_clean(capsys):
    assert main(["verify", "--n-instances", "30"]) == 0
    assert "policy_reproduction" in capsys.readouterr().out


def test_verify_negative_control():
    assert main(["verify", "--n-instances", "30", "--inject-fault", "tie-break"]) == 4


def test_verify_vacuous():
    assert main(["verify", "--n-instances", "0"]) == 0


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2


def test_module_entry_point(t1_file):
    proc = subprocess.run([sys.executable, "-m", "incentive_mckp.cli", "solve", str(t1_file),
                           "--budget", "8"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "budget_used: 8.0" in proc.stdout

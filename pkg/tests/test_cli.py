import csv
import json
import math
import subprocess
import sys

import pytest

from pcg_eur.cli import EXIT_CONFIG, EXIT_OK, EXIT_SCHEME, main, parse_angle


def write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def last_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_parse_angle():
    assert parse_angle("pi/2") == pytest.approx(math.pi / 2)
    assert parse_angle("-2*pi/3") == pytest.approx(-2 * math.pi / 3)
    assert parse_angle("pi") == pytest.approx(math.pi)
    assert parse_angle(0.25) == 0.25 and parse_angle("0.5") == 0.5


def test_verify_eur_canonical(tmp_path):
    cfg = write(tmp_path, "c.json", {"d": 2, "T_theta": 2 * math.sqrt(math.pi), "n_states": 100, "seed": 3})
    assert main(["verify-eur", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_OK
    table = rows(tmp_path / "o" / "reports.csv")
    assert len(table) == 100 * 5
    assert min(float(r["deficit"]) for r in table) >= -2e-3
    assert {r["alpha"] for r in table} == {"0.5", "0.666666666667", "1", "2", "inf"}
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["exit_status"] == 0 and manifest["seed"] == 3
    assert set(manifest["outputs"]) >= {"reports.csv", "reports.json", "probabilities.csv"}


def test_determinism_and_replay(tmp_path):
    cfg = write(tmp_path, "c.json", {"d": 3, "n_states": 10, "orders": ["1/2", 1, "inf"]})
    for out in ("a", "b"):
        assert main(["verify-eur", "--config", cfg, "--out", str(tmp_path / out), "-q", "--seed", "7"]) == 0
    a = (tmp_path / "a" / "reports.csv").read_text()
    assert a == (tmp_path / "b" / "reports.csv").read_text()
    assert main(["verify-eur", "--config", str(tmp_path / "a" / "manifest.json"),
                 "--out", str(tmp_path / "c"), "-q"]) == 0
    assert a == (tmp_path / "c" / "reports.csv").read_text()
    assert main(["verify-eur", "--config", cfg, "--out", str(tmp_path / "d"), "-q", "--seed", "8"]) == 0
    assert a != (tmp_path / "d" / "reports.csv").read_text()


def test_threads_do_not_change_results(tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.json", {"d": 2, "n_states": 12})
    main(["verify-eur", "--config", cfg, "--out", str(tmp_path / "one"), "-q"])
    monkeypatch.setenv("PCG_EUR_THREADS", "4")
    main(["verify-eur", "--config", cfg, "--out", str(tmp_path / "four"), "-q"])
    assert (tmp_path / "one" / "reports.csv").read_text() == (tmp_path / "four" / "reports.csv").read_text()


def test_check_mub_invalid(tmp_path, capsys):
    T = math.sqrt(2 * math.pi)
    cfg = write(tmp_path, "c.json", {"d": 2, "T_theta": T, "T_theta_prime": T})
    out = tmp_path / "o"
    assert main(["check-mub", "--config", cfg, "--out", str(out), "-q"]) == EXIT_SCHEME
    row = rows(out / "reports.csv")[0]
    assert row["valid"] == "false" and row["reason"] == "coprimality-failure" and row["M"] == "2"


def test_check_mub_valid(tmp_path):
    T = 2 * math.sqrt(math.pi)
    cfg = write(tmp_path, "c.json", {"d": 2, "T_theta": T, "T_theta_prime": T})
    assert main(["check-mub", "--config", cfg, "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK


def test_invalid_scheme_writes_nothing(tmp_path, capsys):
    T = math.sqrt(2 * math.pi)
    cfg = write(tmp_path, "c.json", {"d": 4, "T_theta": T, "T_theta_prime": T})
    out = tmp_path / "o"
    assert main(["verify-eur", "--config", cfg, "--out", str(out), "-q"]) == EXIT_SCHEME
    assert not out.exists()
    err = last_error(capsys)
    assert err["reason"] == "coprimality-failure" and err["exit"] == EXIT_SCHEME


@pytest.mark.parametrize("cfg, reason", [
    ({"d": 2, "bogus": 1}, "config-error"),
    ({"d": 2, "orders": [0.2]}, "config-error"),
    ({"d": 2, "state_family": "nope"}, "config-error"),
    ({"command": "minimize", "d": 2}, "command-mismatch"),
    ({"n_states": 3}, "config-error"),
])
def test_config_errors(tmp_path, capsys, cfg, reason):
    path = write(tmp_path, "c.json", cfg)
    assert main(["verify-eur", "--config", path, "--out", str(tmp_path / "o"), "-q"]) == EXIT_CONFIG
    assert last_error(capsys)["reason"] == reason
    assert not (tmp_path / "o").exists()


def test_unreadable_config(tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["verify-eur", "--config", str(tmp_path / "bad.json")]) == EXIT_CONFIG
    assert main(["verify-eur", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_scan_invalid(tmp_path):
    cfg = write(tmp_path, "c.json", {"d_max": 4})
    assert main(["scan-invalid", "--config", cfg, "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
    table = rows(tmp_path / "o" / "reports.csv")
    bad = [r for r in table if r["coprime"] == "false"]
    assert bad and all(float(r["deviation"]) > 0.05 for r in bad)
    assert all(float(r["deviation"]) < 2e-3 for r in table if r["coprime"] == "true")


def test_limit_study_command(tmp_path):
    cfg = write(tmp_path, "c.json", {"ds": [4, 16]})
    assert main(["limit-study", "--config", cfg, "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
    table = rows(tmp_path / "o" / "limit_table.csv")
    assert [int(r["d"]) for r in table] == [4, 16]


def test_minimize_command(tmp_path):
    cfg = write(tmp_path, "c.json", {"d": 2, "family": "hermite", "n_modes": 4, "budget": 100, "restarts": 2,
                                     "orders": [1]})
    assert main(["minimize", "--config", cfg, "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
    (row,) = rows(tmp_path / "o" / "reports.csv")
    assert float(row["deficit"]) >= -2e-3


def test_steering_command(tmp_path):
    cfg = write(tmp_path, "c.json", {"d": 2, "squeezing": [0, 1.5], "product_cases": 2})
    assert main(["steering", "--config", cfg, "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
    table = rows(tmp_path / "o" / "reports.csv")
    assert [r["kind"] for r in table] == ["two-mode-squeezed"] * 2 + ["product", "mixture"] * 2
    assert table[1]["violated"] == "true"
    assert all(r["violated"] == "false" for r in table[2:])


def test_mask_demo(tmp_path):
    cfg = write(tmp_path, "c.json", {"d": 2, "T": 2.0, "samples": 1000})
    assert main(["mask-demo", "--config", cfg, "--out", str(tmp_path / "o"), "-q"]) == EXIT_OK
    table = rows(tmp_path / "o" / "reports.csv")
    errs = [float(r["l2_error"]) for r in table]
    assert errs == sorted(errs, reverse=True)
    assert len(rows(tmp_path / "o" / "mask_samples.csv")) == 1000


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, "c.json", {"d": 2, "n_states": 2})
    proc = subprocess.run([sys.executable, "-m", "pcg_eur", "verify-eur", "--config", cfg,
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0 and "verify-eur:" in proc.stdout

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from circlerds.cli import main
from circlerds.report import strip_timing
from circlerds.verify import default_config_path

CONFIGS = default_config_path().parent


def cfg(name):
    return str(CONFIGS / f"{name}.toml")


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    return lines[0], np.array([float(v) for v in lines[1:]])


def test_stationary_single_map(tmp_path):
    assert main(["stationary", "--config", cfg("single_map"), "--out", str(tmp_path)]) == 0
    head, x = read_csv(tmp_path / "single_map_eta.csv")
    assert head == "x" and np.all(x == 0.0)
    _, xm = read_csv(tmp_path / "single_map_eta_minus.csv")
    assert np.all(xm == 0.5)
    rep = json.loads((tmp_path / "single_map_stationary.json").read_text())
    assert rep["eta"]["atom_scan"] == [0.0]
    for key in ("seed", "generator_id", "config_hash", "version", "timing"):
        assert key in rep


def test_stationary_sl2(tmp_path):
    assert main(["stationary", "--config", cfg("sl2_pair"), "--out", str(tmp_path)]) == 0
    _, x = read_csv(tmp_path / "sl2_pair_eta.csv")
    assert x.size == 100_000
    rep = json.loads((tmp_path / "sl2_pair_stationary.json").read_text())
    assert rep["eta"]["atom_scan"] == [] and rep["eta_minus"]["atom_scan"] == []


def test_csv_has_17_significant_digits(tmp_path):
    main(["stationary", "--config", cfg("sl2_pair"), "--out", str(tmp_path), "--seed", "3"])
    rows = (tmp_path / "sl2_pair_eta.csv").read_text().splitlines()[1:200]
    digits = [len(r.split("e")[0].replace(".", "").lstrip("0")) for r in rows]
    assert max(digits) == 17
    assert all(float("%.17g" % float(r)) == float(r) for r in rows)


def test_bad_probabilities_exit_2(tmp_path, capsys):
    src = Path(cfg("sl2_pair")).read_text().replace("probs = [0.5, 0.5]", "probs = [0.5, 0.4]")
    p = tmp_path / "bad.toml"
    p.write_text(src)
    assert main(["stationary", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "family.probs" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["stationary", "--out", str(tmp_path)]) == 2


def test_rotations_stationary_exit_3(tmp_path):
    assert main(["stationary", "--config", cfg("rotations"), "--out", str(tmp_path)]) == 3


def test_exponents_rotations_zero(tmp_path):
    assert main(["exponents", "--config", cfg("rotations"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "rotations_exponents.json").read_text())
    assert rep["kingman"]["lambda"] == 0.0 and rep["kingman"]["Lambda"] == 0.0
    assert "skipped" in rep["integral"]


def test_exponents_single_map(tmp_path):
    assert main(["exponents", "--config", cfg("single_map"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "single_map_exponents.json").read_text())
    ln4 = 2 * np.log(2)
    assert rep["kingman"]["lambda"] == pytest.approx(-ln4, abs=0.05)
    assert rep["kingman"]["Lambda"] == pytest.approx(ln4, abs=0.05)
    assert rep["integral"]["lambda"] == pytest.approx(-ln4, abs=1e-12)
    assert rep["integral"]["Lambda"] == pytest.approx(ln4, abs=1e-12)
    assert rep["oracle"]["lambda1"]["value"] == pytest.approx(np.log(2), abs=1e-12)


def test_dimension_single_map_exit_4(tmp_path):
    assert main(["dimension", "--config", cfg("single_map"), "--out", str(tmp_path)]) == 4
    rep = json.loads((tmp_path / "single_map_dimension.json").read_text())
    assert rep["hypotheses"]["verdict"] == "fail"


def test_sync_and_entropy(tmp_path):
    assert main(["sync", "--config", cfg("sl2_pair"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "sl2_pair_sync.json").read_text())
    assert rep["sync_rate"]["value"] < 0 and rep["arc_collapse_fraction"] >= 0.99
    assert main(["entropy", "--config", cfg("sl2_pair"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "sl2_pair_entropy.json").read_text())
    assert rep["entropy"]["value"] > 0


def test_reports_identical_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sync", "--config", cfg("sl2_pair"), "--out", str(a), "--threads", "1"]) == 0
    assert main(["sync", "--config", cfg("sl2_pair"), "--out", str(b), "--threads", "3"]) == 0
    ta = (a / "sl2_pair_sync.json").read_text()
    tb = (b / "sl2_pair_sync.json").read_text()
    assert strip_timing(ta) == strip_timing(tb)


def test_seed_override_recorded(tmp_path):
    main(["sync", "--config", cfg("single_map"), "--out", str(tmp_path), "--seed", "99"])
    assert json.loads((tmp_path / "single_map_sync.json").read_text())["seed"] == 99


def test_bad_threads_exit_2(tmp_path):
    assert main(["sync", "--config", cfg("single_map"), "--threads", "0"]) == 2


def test_verify_truncated_config_exit_2(tmp_path):
    src = default_config_path().read_text()
    p = tmp_path / "verify.toml"
    p.write_text(src[: src.index("[criteria.c2]") + 8])
    assert main(["verify", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_verify_subset(tmp_path, capsys):
    code = main(["verify", "--config", cfg("verify_quick"), "--only", "c3,c9",
                 "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert set(rep["criteria"]) == {"c3", "c9"} and rep["all_passed"]
    out = capsys.readouterr().out
    assert "[PASS] c3" in out and "[PASS] c9" in out


def test_verify_failure_exit_1(tmp_path):
    src = Path(cfg("verify_quick")).read_text()
    for f in CONFIGS.glob("*.toml"):
        shutil.copy(f, tmp_path / f.name)
    # a tolerance no estimator can meet must fail, and be reported as such
    (tmp_path / "verify_quick.toml").write_text(
        src.replace("[criteria.c3]\nseeds = 3\n", "[criteria.c3]\nseeds = 3\nprojective_tol = 1e-30\n"))
    code = main(["verify", "--config", str(tmp_path / "verify_quick.toml"), "--only", "c3",
                 "--out", str(tmp_path / "o")])
    assert code == 1
    rep = json.loads((tmp_path / "o" / "verify.json").read_text())
    assert rep["failed"] == ["c3"]

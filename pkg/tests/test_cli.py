import csv
import json
import math
import os

import pytest

from gravitas.cli import main

SEED = ["--seed", "20260810"]


def _read_manifest(path):
    return json.loads(path.with_suffix(path.suffix + ".manifest.json")
                      .read_text(encoding="utf-8"))


def test_missing_seed_is_config_error(tmp_path, monkeypatch):
    monkeypatch.delenv("GRAVITAS_SEED", raising=False)
    out = tmp_path / "bc.csv"
    assert main(["box-cut", "--out", str(out), "--n-samples", "1000"]) == 2


def test_env_seed_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("GRAVITAS_SEED", "123")
    out = tmp_path / "bc.csv"
    code = main(["box-cut", "--out", str(out), "--n-samples", "50000",
                 "--s-grid", "4.1"])
    assert code in (0, 1)  # statistical gate; seed accepted either way
    assert out.exists()


def test_bad_env_seed_rejected(tmp_path, monkeypatch):
    monkeypatch.setenv("GRAVITAS_SEED", "not-a-number")
    assert main(["box-cut", "--out", str(tmp_path / "x.csv")]) == 2


def test_missing_config_file_rejected(tmp_path):
    assert main(["optical-tree", "--config", str(tmp_path / "nope.json")]) == 2


def test_optical_tree_default(tmp_path):
    out = tmp_path / "ot.json"
    assert main(["optical-tree", "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert abs(doc["ratio_restored"] - 1.0) <= 0.01
    assert "undefined" in doc["ratio_elastic_only"]
    man = _read_manifest(out)
    assert man["outputs"] == [out.name]
    assert man["checks"]["ratio_restored_within_tolerance"] is True
    assert man["resolved_config"]["mu"] == 0.05


def test_optical_tree_unachievable_tolerance(tmp_path, capsys):
    out = tmp_path / "ot.json"
    assert main(["optical-tree", "--out", str(out), "--tolerance", "1e-9"]) == 1
    assert "outside" in capsys.readouterr().err


def test_box_cut_csv_schema_and_flags(tmp_path):
    out = tmp_path / "bc.csv"
    code = main(["box-cut", "--out", str(out), "--n-samples", "50000",
                 "--s-grid", "3.5", "4.1", *SEED])
    assert code in (0, 1)
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert [r["s"] for r in rows] == ["3.5", "4.1"]
    assert rows[0]["flag"] == "below-threshold"
    assert rows[0]["ratio_restored"] == ""
    header = list(rows[0].keys())
    assert header == ["s", "im_box", "mc_err", "rhs_annih", "mc_err_annih",
                      "rhs_elastic", "ratio_restored", "ratio_elastic", "flag"]


def test_entangle_zero_horizon(tmp_path):
    out = tmp_path / "en.csv"
    assert main(["entangle", "--out", str(out), "--delta-t", "0",
                 "--n-grid", "1"]) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert all(float(r["duan"]) >= 1.0 - 1e-12 for r in rows)


def test_entangle_default_schema(tmp_path):
    out = tmp_path / "en.csv"
    assert main(["entangle", "--out", str(out), "--n-grid", "50"]) == 0
    with out.open() as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "duan", "E_N", "var_xminus", "var_pplus"]


def test_semiclassical_schema_and_checks(tmp_path):
    out = tmp_path / "sc.csv"
    assert main(["semiclassical", "--out", str(out), "--n-steps", "200",
                 "--horizon", "2", "--n-traj", "64", *SEED]) == 0
    with out.open() as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "E_N_unconditional", "duan", "var_p_mean", "n_traj"]
    man = _read_manifest(out)
    assert man["checks"]["no_entanglement"] is True
    assert man["checks"]["duan_never_below_1"] is True


def test_compare_records_channel_discrimination(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--out", str(out), "--n-steps", "800",
                 "--horizon", "12", "--n-traj", "64", *SEED]) == 0
    man = _read_manifest(out)
    assert man["checks"]["unitary_entangles"] is True
    assert man["checks"]["semiclassical_does_not"] is True


def test_deflection_record(tmp_path):
    out = tmp_path / "d.json"
    assert main(["deflection", "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["deflection_diff_rad"] == pytest.approx(7.43e-28, rel=0.01)
    assert doc["photon_energy_ev"] == pytest.approx(1.24, rel=0.01)


def test_phase_space_check(tmp_path):
    out = tmp_path / "ps.json"
    assert main(["phase-space-check", "--out", str(out), "--n-samples",
                 "150000", *SEED]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert set(doc["results"]) == {"gaussian", "shell-indicator", "rational"}


def test_self_test_determinism(tmp_path):
    out = tmp_path / "st.json"
    assert main(["self-test", "--out", str(out), "--threads", "3",
                 "--n-samples", "20000", *SEED]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["rerun_identical"] is True
    assert doc["thread_count_invariant"] is True


def test_config_file_precedence(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"optical-tree": {"mu": 0.03,
                                                    "out": str(tmp_path / "a.json")}}),
                       encoding="utf-8")
    # file value used when no flag
    assert main(["optical-tree", "--config", str(cfgfile)]) == 0
    man = _read_manifest(tmp_path / "a.json")
    assert man["resolved_config"]["mu"] == 0.03
    # flag overrides file
    out2 = tmp_path / "b.json"
    assert main(["optical-tree", "--config", str(cfgfile), "--mu", "0.08",
                 "--out", str(out2)]) == 0
    assert _read_manifest(out2)["resolved_config"]["mu"] == 0.08


def test_outputs_are_bit_identical_across_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["box-cut", "--out", str(out), "--n-samples", "20000",
                     "--s-grid", "4.1", "6.0", *SEED]) in (0, 1)
    assert a.read_bytes() == b.read_bytes()


def test_help_lists_units():
    with pytest.raises(SystemExit) as exc:
        main(["box-cut", "--help"])
    assert exc.value.code == 0

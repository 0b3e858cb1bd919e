import json
import subprocess
import sys

import pytest

from pqpan.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_estimate_outputs_breakdown(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-1024",
                           "--att-mtu", "204", "--ll-pdu", "208")
    assert code == 0
    data = json.loads(out)
    assert data["scheme"] == "ML-KEM-1024"
    assert set(data["raw_uJ"]) == {"keygen", "decap", "notify_pk", "write_ct"}
    # Transfer terms track the reference cell (293.46 / 287.63) within the
    # fit tolerance, calibrated by 1.15.
    assert data["adjusted_uJ"]["notify_pk"] == pytest.approx(1.15 * 293.46, rel=0.02)
    assert data["adjusted_uJ"]["write_ct"] == pytest.approx(1.15 * 287.63, rel=0.02)
    assert 0 < data["comm_share"] < 1


def test_estimate_identity_comm_gamma(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                           "--att-mtu", "65", "--ll-pdu", "27", "--gamma-comm", "1.0")
    assert code == 0
    data = json.loads(out)
    assert data["adjusted_uJ"]["notify_pk"] == data["raw_uJ"]["notify_pk"]
    assert data["adjusted_uJ"]["write_ct"] == data["raw_uJ"]["write_ct"]


def test_estimate_signature_scheme_exits_3(capsys):
    code, _, err = run_cli(capsys, "estimate", "--scheme", "ecdsa-p256",
                           "--att-mtu", "65", "--ll-pdu", "27")
    assert code == 3
    assert "energy model" in err


def test_estimate_missing_flags_exits_2(capsys):
    assert main(["estimate", "--scheme", "ml-kem-512"]) == 2


def test_estimate_invalid_link_exits_3(capsys):
    code, _, err = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                           "--att-mtu", "10", "--ll-pdu", "27")
    assert code == 3
    assert "att_mtu" in err


def test_sweep_single_cell_matches_estimate(capsys):
    code, sweep_out, _ = run_cli(capsys, "sweep", "--schemes", "ml-kem-768",
                                 "--att-mtus", "104", "--ll-pdus", "108",
                                 "--format", "json")
    assert code == 0
    rows = {r["op"]: r["e_theor_uJ"] for r in json.loads(sweep_out)}
    code, est_out, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-768",
                               "--att-mtu", "104", "--ll-pdu", "108")
    assert code == 0
    est = json.loads(est_out)["raw_uJ"]
    assert rows["Notify_PK"] == pytest.approx(est["notify_pk"], abs=0.005)
    assert rows["Write_CT"] == pytest.approx(est["write_ct"], abs=0.005)


def test_sweep_reference_grid_compare(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--reference-grid", "--compare")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "scheme,att_mtu,ll_pdu,op,e_theor_uJ,e_ref_uJ,rel_err_pct"
    assert len(lines) == 49
    errs = [abs(float(line.rsplit(",", 1)[1])) for line in lines[1:]]
    assert max(errs) <= 2.0


def test_sweep_rows_deterministically_ordered(capsys):
    _, out_a, _ = run_cli(capsys, "sweep", "--schemes",
                          "ml-kem-1024,ml-kem-512", "--att-mtus", "104,65",
                          "--ll-pdus", "27")
    _, out_b, _ = run_cli(capsys, "sweep", "--schemes",
                          "ml-kem-512,ml-kem-1024", "--att-mtus", "65,104",
                          "--ll-pdus", "27")
    assert out_a == out_b


def test_sweep_writes_file(capsys, tmp_path):
    out_file = tmp_path / "grid.csv"
    code, _, _ = run_cli(capsys, "sweep", "--schemes", "ml-kem-512",
                         "--att-mtus", "65", "--ll-pdus", "27",
                         "--out", str(out_file))
    assert code == 0
    assert out_file.read_text().startswith("scheme,att_mtu,ll_pdu,op,e_theor_uJ")


def test_fit_report(capsys, tmp_path):
    report_path = tmp_path / "fit.json"
    code, out, _ = run_cli(capsys, "fit", "--out", str(report_path))
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["ifs_slots"] == 2
    assert report["max_abs_rel_err"] <= 0.02
    assert len(report["residuals"]) == 48
    assert "not datasheet" in report["provenance"]
    summary = json.loads(out)
    assert summary["profile"]["i_tx"] == report["profile"]["i_tx"]


def test_fit_slot_pinning_reports_tie(capsys):
    code1, out1, _ = run_cli(capsys, "fit", "--ifs-slots", "1")
    code2, out2, _ = run_cli(capsys, "fit", "--ifs-slots", "2")
    assert code1 == code2 == 0
    r1, r2 = json.loads(out1), json.loads(out2)
    assert r1["ifs_slots"] == 1 and r2["ifs_slots"] == 2
    assert r1["max_abs_rel_err"] == pytest.approx(r2["max_abs_rel_err"], rel=1e-9)
    # Same accounting, halved gap count: the recovered ifs current doubles.
    assert r1["profile"]["i_ifs"] == pytest.approx(2 * r2["profile"]["i_ifs"], rel=1e-6)


def test_fit_missing_table_exits_4(capsys):
    code, _, err = run_cli(capsys, "fit", "--table", "/nonexistent/table.csv")
    assert code == 4


def test_fitted_report_round_trips_as_config(capsys, tmp_path):
    report_path = tmp_path / "fit.json"
    run_cli(capsys, "fit", "--out", str(report_path))
    code, out, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                           "--att-mtu", "65", "--ll-pdu", "27",
                           "--config", str(report_path))
    assert code == 0
    assert json.loads(out)["raw_uJ"]["notify_pk"] == pytest.approx(362.63, rel=0.02)


def test_simulate_deterministic_outputs(capsys, tmp_path):
    paths = {}
    for tag in ("a", "b"):
        trace = tmp_path / f"trace_{tag}.jsonl"
        ledger = tmp_path / f"ledger_{tag}.json"
        code, _, _ = run_cli(capsys, "simulate", "--scheme", "ml-kem-512",
                             "--seed", "7", "--trace", str(trace),
                             "--ledger", str(ledger))
        assert code == 0
        paths[tag] = (trace.read_bytes(), ledger.read_bytes())
    assert paths["a"] == paths["b"]


def test_simulate_trace_counts(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, _, _ = run_cli(capsys, "simulate", "--scheme", "ml-kem-512",
                         "--att-mtu", "65", "--ll-pdu", "27",
                         "--trace", str(trace), "--ledger", str(tmp_path / "l.json"))
    assert code == 0
    records = [json.loads(line) for line in trace.read_text().splitlines()]
    data = [r for r in records if not r["is_ack"]]
    acks = [r for r in records if r["is_ack"]]
    assert len(data) == 77 and len(acks) == 77


def test_simulate_payload_prints_session_total(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "simulate", "--scheme", "ml-kem-512",
                           "--payload", "1024", "--trace", str(tmp_path / "t.jsonl"),
                           "--ledger", str(tmp_path / "l.json"))
    assert code == 0
    data = json.loads(out)
    assert data["session_total_uJ"] > data["ledger"]["peripheral_pqke_total_uJ"]
    assert data["session_keys_match"] is True
    # Pairing dominates a 1 kB session.
    assert data["ledger"]["peripheral_pqke_total_uJ"] > data["payload_energy_uJ"]


def test_env_var_config_fallback(capsys, tmp_path, monkeypatch):
    config = tmp_path / "profile.json"
    config.write_text(json.dumps({"gamma_comm": 1.0}))
    monkeypatch.setenv("PQPAN_PROFILE", str(config))
    code, out, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                           "--att-mtu", "65", "--ll-pdu", "27")
    assert code == 0
    data = json.loads(out)
    assert data["adjusted_uJ"]["notify_pk"] == data["raw_uJ"]["notify_pk"]


def test_config_unknown_key_exits_3(capsys, tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"gamma_com": 1.0}))
    code, _, err = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                           "--att-mtu", "65", "--ll-pdu", "27",
                           "--config", str(config))
    assert code == 3
    assert "gamma_com" in err


def test_config_missing_file_exits_4(capsys):
    code, _, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                         "--att-mtu", "65", "--ll-pdu", "27",
                         "--config", "/nonexistent/profile.json")
    assert code == 4


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pqpan", "estimate", "--scheme", "ml-kem-768",
         "--att-mtu", "404", "--ll-pdu", "251"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["scheme"] == "ML-KEM-768"


def test_config_custom_cycles_file(capsys, tmp_path):
    cycles = tmp_path / "cycles.csv"
    cycles.write_text("scheme,keygen,encaps,decaps\n"
                      "ML-KEM-512,640000,700000,660000\n")
    config = tmp_path / "profile.json"
    config.write_text(json.dumps({"cycles_file": "cycles.csv"}))
    code, out, _ = run_cli(capsys, "estimate", "--scheme", "ml-kem-512",
                           "--att-mtu", "65", "--ll-pdu", "27",
                           "--config", str(config))
    assert code == 0
    # 640k cycles at the default 3 mA / 3 V / 64 MHz: 90 uJ raw keygen.
    assert json.loads(out)["raw_uJ"]["keygen"] == pytest.approx(90.0, abs=0.01)

"""Command-line interface.

Four subcommands tie the model together:

* ``estimate``  - handshake energy breakdown for one scheme and link config.
* ``sweep``     - theoretical transfer energies over a config grid, as CSV
  or JSON, optionally compared against the bundled reference table.
* ``fit``       - recover radio currents from a reference table and emit a
  profile/residual report (valid ``--config`` input).
* ``simulate``  - run the deterministic two-party handshake, writing a
  JSON-lines frame trace and an energy-ledger JSON.

Exit codes: 0 success, 2 usage error, 3 model/domain error, 4 I/O error.
Outputs are pure functions of flags and config files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

from .config import ModelConfig, resolve_config
from .energy import (comm_energy, fit_radio_currents, pqke_total)
from .errors import PqpanError
from .link import LinkConfig, airtime, plan_transfer
from .reference import (CalibrationFactors, OP_NOTIFY_PK, OP_WRITE_CT,
                        load_reference_table, lookup_scheme)
from .sim import run_handshake, send_secured_payload

DEFAULT_SWEEP_SCHEMES = "ML-KEM-512,ML-KEM-768,ML-KEM-1024"
DEFAULT_SWEEP_ATT = "65,104,204,404"
DEFAULT_SWEEP_LL = "27,69,108,208,251"


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", "--profile", dest="config", metavar="PATH",
                   help="JSON config file (falls back to $PQPAN_PROFILE)")
    p.add_argument("--gamma-comm", type=float, metavar="G",
                   help="override the communication calibration factor")
    p.add_argument("--gamma-keygen", type=float, metavar="G",
                   help="override the key-generation calibration factor (all levels)")
    p.add_argument("--gamma-decap", type=float, metavar="G",
                   help="override the decapsulation calibration factor (all levels)")


def _add_link_flags(p: argparse.ArgumentParser, require: bool,
                    default_att: int | None = None, default_ll: int | None = None) -> None:
    p.add_argument("--att-mtu", type=int, required=require, default=default_att,
                   help="ATT MTU in bytes (>= 23)")
    p.add_argument("--ll-pdu", type=int, required=require, default=default_ll,
                   help="link-layer PDU payload cap in bytes (27..251)")
    p.add_argument("--ifs-slots", type=int, choices=(1, 2), default=None,
                   help="inter-frame gaps charged per data/ack exchange")


def _apply_overrides(cfg: ModelConfig, args) -> ModelConfig:
    gamma = cfg.gamma
    if args.gamma_comm is not None or args.gamma_keygen is not None \
            or args.gamma_decap is not None:
        gamma = CalibrationFactors(
            gamma_keygen={lvl: args.gamma_keygen for lvl in gamma.gamma_keygen}
            if args.gamma_keygen is not None else gamma.gamma_keygen,
            gamma_decap={lvl: args.gamma_decap for lvl in gamma.gamma_decap}
            if args.gamma_decap is not None else gamma.gamma_decap,
            gamma_comm=args.gamma_comm if args.gamma_comm is not None
            else gamma.gamma_comm,
        )
    ifs_slots = args.ifs_slots if getattr(args, "ifs_slots", None) else cfg.ifs_slots
    return replace(cfg, gamma=gamma, ifs_slots=ifs_slots)


def _link_config(cfg: ModelConfig, att_mtu: int, ll_pdu: int) -> LinkConfig:
    return LinkConfig(att_mtu=att_mtu, ll_pdu=ll_pdu, phy_rate=cfg.phy_rate,
                      ifs=cfg.ifs, conn_interval=cfg.conn_interval,
                      ifs_slots=cfg.ifs_slots)


def _round_tree(obj, ndigits=2):
    if isinstance(obj, dict):
        return {k: _round_tree(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, float):
        return round(obj, ndigits)
    return obj


def cmd_estimate(args) -> int:
    cfg = _apply_overrides(resolve_config(args.config), args)
    link = _link_config(cfg, args.att_mtu, args.ll_pdu)
    breakdown = pqke_total(args.scheme, link, cfg.profile, cfg.cycles, cfg.gamma,
                           include_encap=args.include_encap)
    out = {"scheme": lookup_scheme(args.scheme).name,
           "att_mtu": link.att_mtu, "ll_pdu": link.ll_pdu,
           "ifs_slots": link.ifs_slots}
    body = _round_tree(breakdown.as_dict())
    body["comm_share"] = round(breakdown.comm_share, 4)
    out.update(body)
    print(json.dumps(out, indent=2))
    return 0


def _sweep_rows(cfg: ModelConfig, cells):
    rows = []
    for scheme_name, att, ll in cells:
        scheme = lookup_scheme(scheme_name)
        link = _link_config(cfg, att, ll)
        for op, artifact, as_receiver in ((OP_NOTIFY_PK, scheme.pk_size, False),
                                          (OP_WRITE_CT, scheme.ct_size, True)):
            budget = airtime(plan_transfer(artifact, link), link)
            e = comm_energy(budget, cfg.profile, as_receiver=as_receiver)
            rows.append({"scheme": scheme.name, "att_mtu": att, "ll_pdu": ll,
                         "op": op, "e_theor_uJ": e})
    rows.sort(key=lambda r: (lookup_scheme(r["scheme"]).nist_level or 99,
                             r["scheme"], r["att_mtu"], r["ll_pdu"], r["op"]))
    return rows


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(resolve_config(args.config), args)
    if args.reference_grid:
        ref_rows = load_reference_table(args.table)
        cells = sorted({(r.scheme, r.att_mtu, r.ll_pdu) for r in ref_rows})
    else:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
        atts = [int(v) for v in args.att_mtus.split(",")]
        lls = [int(v) for v in args.ll_pdus.split(",")]
        if not schemes or not atts or not lls:
            raise PqpanError("sweep axes must be non-empty")
        cells = [(s, a, l) for s in schemes for a in atts for l in lls]
    rows = _sweep_rows(cfg, cells)

    fields = ["scheme", "att_mtu", "ll_pdu", "op", "e_theor_uJ"]
    if args.compare:
        reference = {(r.scheme.upper(), r.att_mtu, r.ll_pdu, r.op): r.e_theor_uj
                     for r in load_reference_table(args.table)}
        fields += ["e_ref_uJ", "rel_err_pct"]
        for row in rows:
            key = (row["scheme"].upper(), row["att_mtu"], row["ll_pdu"], row["op"])
            if key in reference:
                ref = reference[key]
                row["e_ref_uJ"] = ref
                row["rel_err_pct"] = (row["e_theor_uJ"] - ref) / ref * 100.0
            else:
                row["e_ref_uJ"] = None
                row["rel_err_pct"] = None

    sink = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        if args.format == "json":
            json.dump([_round_tree(r, 3) for r in rows], sink, indent=2)
            sink.write("\n")
        else:
            writer = csv.DictWriter(sink, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                rec = dict(row)
                rec["e_theor_uJ"] = f"{rec['e_theor_uJ']:.2f}"
                if args.compare:
                    rec["e_ref_uJ"] = "" if rec["e_ref_uJ"] is None else f"{rec['e_ref_uJ']:.2f}"
                    rec["rel_err_pct"] = ("" if rec["rel_err_pct"] is None
                                          else f"{rec['rel_err_pct']:.3f}")
                writer.writerow(rec)
    finally:
        if args.out:
            sink.close()
    return 0


def cmd_fit(args) -> int:
    rows = load_reference_table(args.table)
    result = fit_radio_currents(rows, ifs_slots=args.ifs_slots)
    report = result.as_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        summary = {k: report[k] for k in ("ifs_slots", "candidates_max_abs_rel_err",
                                          "max_abs_rel_err", "mean_abs_rel_err",
                                          "profile")}
        print(json.dumps(summary, indent=2))
        print(f"report written to {args.out}", file=sys.stderr)
    else:
        print(json.dumps(report, indent=2))
    return 0


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(resolve_config(args.config), args)
    link = _link_config(cfg, args.att_mtu, args.ll_pdu)
    backend = args.backend or cfg.kem_backend
    result = run_handshake(args.scheme, link, cfg.profile, cfg.gamma, cfg.cycles,
                           seed=args.seed, backend=backend)
    trace = result.trace
    summary = {
        "scheme": result.peripheral.scheme.name,
        "att_mtu": link.att_mtu, "ll_pdu": link.ll_pdu, "seed": args.seed,
        "backend": backend,
        "peripheral_phase": result.peripheral.phase.value,
        "central_phase": result.central.phase.value,
        "session_keys_match":
            result.peripheral.session_key.key == result.central.session_key.key,
        "data_frames": trace.data_frame_count(),
        "acks": trace.ack_count(),
        "ledger": result.ledger.as_dict(),
    }

    if args.payload is not None:
        delta, payload_energy = send_secured_payload(result, bytes(args.payload))
        trace = type(trace)(records=trace.records + delta.records)
        summary["payload_B"] = args.payload
        summary["payload_energy_uJ"] = payload_energy
        summary["session_total_uJ"] = (result.ledger.peripheral_pqke_total()
                                       + payload_energy)

    with open(args.trace, "w", encoding="utf-8") as fh:
        fh.write(trace.to_jsonl())
    with open(args.ledger, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(json.dumps(_round_tree(summary), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqpan",
        description="Energy model and handshake simulator for post-quantum key "
                    "establishment over BLE-class links.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="handshake energy breakdown for one config")
    p.add_argument("--scheme", required=True, help="KEM scheme name, e.g. ml-kem-768")
    _add_link_flags(p, require=True)
    p.add_argument("--include-encap", action="store_true",
                   help="include the remote party's encapsulation energy")
    _add_config_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="theoretical transfer energies over a grid")
    p.add_argument("--schemes", default=DEFAULT_SWEEP_SCHEMES,
                   help="comma-separated scheme names")
    p.add_argument("--att-mtus", default=DEFAULT_SWEEP_ATT,
                   help="comma-separated ATT MTU values")
    p.add_argument("--ll-pdus", default=DEFAULT_SWEEP_LL,
                   help="comma-separated LL PDU values")
    p.add_argument("--reference-grid", action="store_true",
                   help="sweep exactly the (scheme, att, ll) cells of the reference table")
    p.add_argument("--compare", action="store_true",
                   help="join the bundled reference energies and report relative error")
    p.add_argument("--table", default=None, metavar="PATH",
                   help="reference table CSV (defaults to the bundled copy)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="output file (defaults to stdout)")
    p.add_argument("--ifs-slots", type=int, choices=(1, 2), default=None)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="recover radio currents from a reference table")
    p.add_argument("--table", default=None, metavar="PATH",
                   help="reference table CSV (defaults to the bundled copy)")
    p.add_argument("--ifs-slots", type=int, choices=(1, 2), default=None,
                   help="pin the IFS accounting instead of trying both")
    p.add_argument("--out", default=None, metavar="PATH",
                   help="write the full report JSON here (summary goes to stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="run the deterministic two-party handshake")
    p.add_argument("--scheme", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_link_flags(p, require=False, default_att=404, default_ll=251)
    p.add_argument("--payload", type=int, default=None, metavar="BYTES",
                   help="also send one secured payload and print the session total")
    p.add_argument("--backend", choices=("stub", "real"), default=None)
    p.add_argument("--trace", default="pqpan_trace.jsonl", metavar="PATH",
                   help="JSON-lines frame trace output")
    p.add_argument("--ledger", default="pqpan_ledger.json", metavar="PATH",
                   help="energy ledger JSON output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PqpanError as exc:
        print(f"pqpan: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"pqpan: i/o error: {exc}", file=sys.stderr)
        return 4


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

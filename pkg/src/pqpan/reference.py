"""Bundled reference data.

Three data sets ship with the package:

* ``schemes.csv``     - artifact byte sizes for standardized key-encapsulation
  and signature schemes, plus classical baselines.
* ``table2.csv``      - the 48-row communication-energy reference table
  (theoretical and hardware-measured microjoules per transfer operation,
  across ATT MTU / LL PDU configurations and ML-KEM parameter sets).
* default calibration factors aligning analytical energy with measurement.

All loaders return immutable values; loaded tables are safe to share
read-only across threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ConsistencyError, ParseError, UnknownScheme

KIND_KEM = "KEM"
KIND_SIGNATURE = "Signature"

OP_NOTIFY_PK = "Notify_PK"
OP_WRITE_CT = "Write_CT"

#: Rows expected in the reference energy table: 3 schemes x 8 configs x 2 ops.
REFERENCE_ROW_COUNT = 48

#: Tolerance for re-deriving a stored delta from its (theoretical, empirical)
#: energy pair.
DELTA_TOLERANCE = 1e-3


@dataclass(frozen=True)
class KemParamSet:
    """Named scheme with its artifact byte sizes.

    ``ct_or_sig_min``/``ct_or_sig_max`` differ only for signature schemes
    whose size is published as a range; for every KEM they are equal and
    exposed as :attr:`ct_size`.
    """

    name: str
    kind: str
    pk_size: int
    sk_size: int
    ct_or_sig_min: int
    ct_or_sig_max: int
    nist_level: int | None = None

    def __post_init__(self):
        if self.kind not in (KIND_KEM, KIND_SIGNATURE):
            raise ConsistencyError(f"{self.name}: unknown kind {self.kind!r}")
        for field in ("pk_size", "sk_size", "ct_or_sig_min", "ct_or_sig_max"):
            if getattr(self, field) <= 0:
                raise ConsistencyError(f"{self.name}: {field} must be positive")
        if self.ct_or_sig_min > self.ct_or_sig_max:
            raise ConsistencyError(f"{self.name}: size range is inverted")
        if self.nist_level is not None and self.nist_level not in (1, 3, 5):
            raise ConsistencyError(f"{self.name}: level must be 1, 3, or 5")

    @property
    def is_kem(self) -> bool:
        return self.kind == KIND_KEM

    @property
    def ct_size(self) -> int:
        """Ciphertext size in bytes (KEMs only; signature sizes may be ranges)."""
        if self.ct_or_sig_min != self.ct_or_sig_max:
            raise ConsistencyError(f"{self.name}: ciphertext size is a range")
        return self.ct_or_sig_min


@dataclass(frozen=True)
class ReferenceEnergyRow:
    """One cell of the communication-energy reference table."""

    scheme: str
    att_mtu: int
    ll_pdu: int
    op: str
    e_theor_uj: float
    e_emp_uj: float
    delta: float  # (e_emp - e_theor) / e_emp, as a fraction

    def derived_delta(self) -> float:
        return (self.e_emp_uj - self.e_theor_uj) / self.e_emp_uj


@dataclass(frozen=True)
class CalibrationFactors:
    """Multiplicative corrections applied to theoretical energies.

    ``gamma_keygen``/``gamma_decap`` map a NIST security level to the factor
    for that computation phase; ``gamma_comm`` applies to both transfer
    phases regardless of level.
    """

    gamma_keygen: dict[int, float]
    gamma_decap: dict[int, float]
    gamma_comm: float

    def __post_init__(self):
        values = [self.gamma_comm, *self.gamma_keygen.values(), *self.gamma_decap.values()]
        if any(g < 1.0 for g in values):
            raise ConsistencyError("calibration factors must be >= 1.0")

    def keygen_for(self, level: int) -> float:
        return self.gamma_keygen[level]

    def decap_for(self, level: int) -> float:
        return self.gamma_decap[level]


def default_calibration() -> CalibrationFactors:
    """Calibration defaults for the nRF52-class reference platform."""
    return CalibrationFactors(
        gamma_keygen={1: 1.27, 3: 1.38, 5: 1.62},
        gamma_decap={1: 1.12, 3: 1.19, 5: 1.32},
        gamma_comm=1.15,
    )


def identity_calibration() -> CalibrationFactors:
    """All-ones factors; adjusted energies equal raw energies."""
    return CalibrationFactors(
        gamma_keygen={1: 1.0, 3: 1.0, 5: 1.0},
        gamma_decap={1: 1.0, 3: 1.0, 5: 1.0},
        gamma_comm=1.0,
    )


def _bundled(name: str):
    return resources.files("pqpan").joinpath("data").joinpath(name)


def _int_field(raw: str, *, path: str, row: int, column: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"expected integer, got {raw!r}", path=path, row=row,
                         column=column) from None


def _float_field(raw: str, *, path: str, row: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"expected number, got {raw!r}", path=path, row=row,
                         column=column) from None


@lru_cache(maxsize=1)
def load_schemes() -> dict[str, KemParamSet]:
    """Parse the bundled scheme-size table, keyed by upper-cased name."""
    path = "schemes.csv"
    text = _bundled(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    schemes: dict[str, KemParamSet] = {}
    for i, rec in enumerate(reader, start=2):
        level_raw = (rec.get("level") or "").strip()
        scheme = KemParamSet(
            name=rec["name"],
            kind=rec["kind"],
            pk_size=_int_field(rec["pk"], path=path, row=i, column="pk"),
            sk_size=_int_field(rec["sk"], path=path, row=i, column="sk"),
            ct_or_sig_min=_int_field(rec["ct_or_sig_min"], path=path, row=i,
                                     column="ct_or_sig_min"),
            ct_or_sig_max=_int_field(rec["ct_or_sig_max"], path=path, row=i,
                                     column="ct_or_sig_max"),
            nist_level=_int_field(level_raw, path=path, row=i, column="level")
            if level_raw else None,
        )
        schemes[scheme.name.upper()] = scheme
    return schemes


def lookup_scheme(name: str) -> KemParamSet:
    """Look up a scheme by (case-insensitive) name.

    Raises UnknownScheme for names not in the bundled table.
    """
    try:
        return load_schemes()[name.strip().upper()]
    except KeyError:
        known = ", ".join(sorted(load_schemes()))
        raise UnknownScheme(f"unknown scheme {name!r} (known: {known})") from None


_TABLE_COLUMNS = ("scheme", "att_mtu", "ll_pdu", "op", "e_theor_uJ", "e_emp_uJ",
                  "delta_pct")


def load_reference_table(path: str | Path | None = None) -> tuple[ReferenceEnergyRow, ...]:
    """Load the 48-row communication-energy reference table.

    ``path`` defaults to the bundled copy. Each row's stored delta is checked
    against the (theoretical, empirical) pair it was derived from; rows where
    the hardware measurement undercuts the model (negative delta) are valid.
    """
    if path is None:
        label = "table2.csv"
        text = _bundled(label).read_text(encoding="utf-8")
    else:
        label = str(path)
        text = Path(path).read_text(encoding="utf-8")

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", path=label) from None
    if tuple(header) != _TABLE_COLUMNS:
        raise ParseError(f"expected header {','.join(_TABLE_COLUMNS)}", path=label, row=1)

    rows: list[ReferenceEnergyRow] = []
    for i, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(_TABLE_COLUMNS):
            raise ParseError(f"expected {len(_TABLE_COLUMNS)} columns, got {len(rec)}",
                             path=label, row=i)
        op = rec[3]
        if op not in (OP_NOTIFY_PK, OP_WRITE_CT):
            raise ParseError(f"unknown op {op!r}", path=label, row=i, column="op")
        row = ReferenceEnergyRow(
            scheme=rec[0],
            att_mtu=_int_field(rec[1], path=label, row=i, column="att_mtu"),
            ll_pdu=_int_field(rec[2], path=label, row=i, column="ll_pdu"),
            op=op,
            e_theor_uj=_float_field(rec[4], path=label, row=i, column="e_theor_uJ"),
            e_emp_uj=_float_field(rec[5], path=label, row=i, column="e_emp_uJ"),
            delta=_float_field(rec[6], path=label, row=i, column="delta_pct") / 100.0,
        )
        if row.e_theor_uj <= 0 or row.e_emp_uj <= 0:
            raise ParseError("energies must be positive", path=label, row=i)
        if abs(row.delta - row.derived_delta()) > DELTA_TOLERANCE:
            raise ConsistencyError(
                f"{label}:row {i}: stored delta {row.delta:.4f} does not match "
                f"(e_emp - e_theor)/e_emp = {row.derived_delta():.4f}")
        rows.append(row)

    if len(rows) != REFERENCE_ROW_COUNT:
        raise ConsistencyError(
            f"{label}: expected {REFERENCE_ROW_COUNT} rows, got {len(rows)}")
    return tuple(rows)


def save_reference_table(rows: tuple[ReferenceEnergyRow, ...] | list[ReferenceEnergyRow],
                         path: str | Path) -> None:
    """Write rows back in the bundled CSV format (2-decimal energies)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TABLE_COLUMNS)
        for r in rows:
            writer.writerow([r.scheme, r.att_mtu, r.ll_pdu, r.op,
                             f"{r.e_theor_uj:.2f}", f"{r.e_emp_uj:.2f}",
                             f"{r.delta * 100:.2f}"])

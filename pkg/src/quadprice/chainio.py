"""Option-chain CSV files and versioned JSON report files.

The chain format is seven named columns (tau, strike, rate, spot, mid,
bid, ask) with a mandatory header, '#' comment lines, and '.' decimals.
Parse failures name the offending token and line. Report files wrap a
result object's dict form in an envelope carrying a schema version and a
kind tag so they can be loaded back without knowing what was saved.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Union

from .calibration import CalibrationReport, OptionChain
from .census import StudyReport
from .model import MarketQuote
from .pricing import PriceResult
from .quadrature import QuadratureResult

__all__ = [
    "ChainParseError",
    "read_chain",
    "write_chain",
    "dump_report",
    "load_report",
    "report_kind",
    "CHAIN_COLUMNS",
    "SCHEMA_VERSION",
]

CHAIN_COLUMNS = ("tau", "strike", "rate", "spot", "mid", "bid", "ask")
SCHEMA_VERSION = 1


class ChainParseError(ValueError):
    """Malformed chain file; the message carries the line and token."""


def _rows_with_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def read_chain(path: Union[str, os.PathLike]) -> OptionChain:
    """Parse a chain CSV into an OptionChain.

    Raises ChainParseError for structural problems (missing header or
    columns, bad numbers, bid > ask, non-positive mid). A file that
    parses but fails chain invariants (for example bid == ask, which
    leaves a quote with zero weight) raises plain ValueError instead.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    rows = list(_rows_with_lines(text))
    if not rows:
        raise ChainParseError(f"{path}: no header row found")
    header_line, header_raw = rows[0]
    header = next(csv.reader([header_raw]))
    names = [h.strip().lower() for h in header]
    missing = [c for c in CHAIN_COLUMNS if c not in names]
    if missing:
        raise ChainParseError(
            f"{path} line {header_line}: header is missing "
            f"column(s) {', '.join(missing)}")
    col = {c: names.index(c) for c in CHAIN_COLUMNS}
    need = max(col.values()) + 1

    quotes = []
    for lineno, raw in rows[1:]:
        fields = next(csv.reader([raw]))
        if len(fields) < need:
            raise ChainParseError(
                f"{path} line {lineno}: expected at least {need} fields, "
                f"got {len(fields)}")
        values = {}
        for c in CHAIN_COLUMNS:
            token = fields[col[c]].strip()
            try:
                values[c] = float(token)
            except ValueError:
                raise ChainParseError(
                    f"{path} line {lineno}: bad number {token!r} "
                    f"in column '{c}'") from None
        if values["bid"] > values["ask"]:
            raise ChainParseError(
                f"{path} line {lineno}: bid {values['bid']} exceeds "
                f"ask {values['ask']}")
        if not values["mid"] > 0:
            raise ChainParseError(
                f"{path} line {lineno}: mid must be positive, "
                f"got {values['mid']}")
        try:
            quotes.append(MarketQuote(tau=values["tau"], strike=values["strike"],
                                      rate=values["rate"], spot=values["spot"],
                                      bid=values["bid"], ask=values["ask"],
                                      mid=values["mid"]))
        except ValueError as exc:
            raise ChainParseError(f"{path} line {lineno}: {exc}") from None
    if not quotes:
        raise ChainParseError(f"{path}: no data rows after the header")
    return OptionChain(quotes=tuple(quotes))


def write_chain(chain: OptionChain, path: Union[str, os.PathLike]) -> None:
    """Inverse of read_chain; full float precision via repr."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CHAIN_COLUMNS)
        for q in chain.quotes:
            writer.writerow([repr(getattr(q, c)) for c in CHAIN_COLUMNS])


_KINDS = {
    QuadratureResult: "quadrature",
    PriceResult: "price",
    CalibrationReport: "calibration",
    StudyReport: "study",
}
_LOADERS = {
    "quadrature": QuadratureResult.from_dict,
    "price": PriceResult.from_dict,
    "calibration": CalibrationReport.from_dict,
    "study": StudyReport.from_dict,
}


def report_kind(obj) -> str:
    try:
        return _KINDS[type(obj)]
    except KeyError:
        raise TypeError(f"no report kind registered for {type(obj).__name__}") from None


def dump_report(obj, path: Union[str, os.PathLike]) -> None:
    """Write any known result object as a versioned JSON report file."""
    envelope = {
        "schema_version": SCHEMA_VERSION,
        "kind": report_kind(obj),
        "payload": obj.as_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, indent=2)
        fh.write("\n")


def load_report(path: Union[str, os.PathLike]):
    """Load a report file back into the object it was written from."""
    with open(path, encoding="utf-8") as fh:
        envelope = json.load(fh)
    version = envelope.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version!r}")
    kind = envelope.get("kind")
    loader = _LOADERS.get(kind)
    if loader is None:
        raise ValueError(f"{path}: unknown report kind {kind!r}")
    return loader(envelope["payload"])

"""Deterministic report records and their JSON/CSV serialization.

Reports are byte-identical across runs with identical inputs and seed:
keys are sorted, rationals are serialized as exact "p/q" strings, floats
use repr, and the timestamp honours SOURCE_DATE_EPOCH (reproducible-build
convention) so pinned environments produce pinned bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import os
from fractions import Fraction

from . import __version__
from .exact import DomainError, decimal12, fmt_rational


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.datetime.fromtimestamp(int(epoch),
                                                 datetime.timezone.utc)
    else:
        moment = datetime.datetime.now(datetime.timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def encode(value):
    """Recursively convert payloads to JSON-stable structures."""
    if isinstance(value, Fraction):
        return fmt_rational(value)
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, float, str)):
        return value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: encode(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {str(encode(k)): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items, key=repr)
        return [encode(v) for v in items]
    return repr(value)


@dataclasses.dataclass
class Report:
    operation: str
    params: dict
    status: str
    result: object = None
    witnesses: list = dataclasses.field(default_factory=list)
    assumptions: list = dataclasses.field(default_factory=list)
    seed: int | None = None
    tool_version: str = __version__
    timestamp: str = dataclasses.field(default_factory=_timestamp)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "operation": self.operation,
            "params": encode(self.params),
            "status": self.status,
            "result": encode(self.result),
            "witnesses": encode(self.witnesses),
            "assumptions": encode(self.assumptions),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _tabular_rows(report: Report):
    payload = report.result
    if isinstance(payload, dict) and "growth_profile" in payload:
        rows = [("R", "mass_exact", "mass_decimal", "h")]
        for R, mass, h in payload["growth_profile"]:
            rows.append((fmt_rational(R), fmt_rational(mass),
                         decimal12(mass), repr(float(h))))
        return rows
    if isinstance(payload, dict) and "ratio_scan" in payload:
        rows = [("r", "lhs_exact", "rhs", "slack")]
        for r, lhs, rhs in payload["ratio_scan"]:
            rows.append((fmt_rational(r), fmt_rational(lhs), repr(float(rhs)),
                         repr(float(rhs) - float(lhs))))
        return rows
    raise DomainError("report payload is not tabular; cannot export CSV")


def write_csv(report: Report, stream) -> None:
    writer = csv.writer(stream, dialect="excel", lineterminator="\r\n")
    writer.writerows(_tabular_rows(report))


def export_csv(report: Report, path) -> None:
    """RFC 4180 CSV for tabular payloads (growth profiles, ratio scans)."""
    rows = _tabular_rows(report)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, dialect="excel", lineterminator="\r\n")
        writer.writerows(rows)

"""Certified-inequality records: one checked instance of ``lhs <= rhs``."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .config import DEFAULT

FIELDS = ("claim", "chain", "params", "lhs", "rhs", "slack", "passed", "must_pass", "provenance")


@dataclass(frozen=True)
class VerifyRecord:
    claim: str
    chain: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    provenance: str = ""
    must_pass: bool = True
    tol: float = DEFAULT.record_slack

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tol) and not math.isnan(self.slack)

    def sort_key(self):
        return (self.claim, self.chain, json.dumps(self.params, sort_keys=True, default=str))

    def to_dict(self) -> dict:
        return {"claim": self.claim, "chain": self.chain, "params": self.params,
                "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "passed": self.passed, "must_pass": self.must_pass,
                "provenance": self.provenance}


def record(claim, chain, lhs, rhs, provenance, must_pass=True, tol=None, **params) -> VerifyRecord:
    return VerifyRecord(claim=claim, chain=chain, lhs=float(lhs), rhs=float(rhs),
                        params=params, provenance=provenance, must_pass=must_pass,
                        tol=DEFAULT.record_slack if tol is None else tol)


def canonical(records) -> list[VerifyRecord]:
    return sorted(records, key=VerifyRecord.sort_key)


def failures(records) -> list[VerifyRecord]:
    return [r for r in records if r.must_pass and not r.passed]


def to_json(records) -> str:
    return json.dumps([r.to_dict() for r in canonical(records)], indent=2, sort_keys=True)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in canonical(records):
        d = r.to_dict()
        d["params"] = json.dumps(d["params"], sort_keys=True)
        w.writerow([d[k] for k in FIELDS])
    return buf.getvalue()

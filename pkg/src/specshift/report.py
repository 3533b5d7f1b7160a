"""Structured verification records and their JSON/CSV serialization."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

__all__ = ["VerificationReport", "CSV_COLUMNS", "write_csv", "write_reports_json"]

CSV_COLUMNS = (
    "seed",
    "dim",
    "kind",
    "degree",
    "lhs_re",
    "lhs_im",
    "rhs_re",
    "rhs_im",
    "residual",
    "verdict",
)


def _num(x: float) -> str:
    # fixed shortest-roundtrip formatting keeps campaign CSVs byte-stable
    return format(float(x), ".17g")


@dataclass
class VerificationReport:
    """One verified identity: both sides, residual, tolerance and verdict."""

    kind: str
    lhs: complex
    rhs: complex
    residual: float
    tol: float
    passed: bool
    dim: int = 0
    degree: int = 0
    seed: int | None = None
    runtime: float = 0.0
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def csv_row(self) -> list[str]:
        return [
            "" if self.seed is None else str(self.seed),
            str(self.dim),
            self.kind,
            str(self.degree),
            _num(self.lhs.real),
            _num(self.lhs.imag),
            _num(self.rhs.real),
            _num(self.rhs.imag),
            _num(self.residual),
            self.verdict,
        ]

    def to_dict(self) -> dict[str, Any]:
        def enc(v):
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        return {
            "kind": self.kind,
            "seed": self.seed,
            "dim": self.dim,
            "degree": self.degree,
            "lhs": enc(complex(self.lhs)),
            "rhs": enc(complex(self.rhs)),
            "residual": self.residual,
            "tol": self.tol,
            "verdict": self.verdict,
            "runtime": self.runtime,
            "extras": {k: enc(v) for k, v in self.extras.items()},
        }


def write_csv(path, reports: Iterable[VerificationReport]) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rep in reports:
            writer.writerow(rep.csv_row())


def write_reports_json(path, reports: Iterable[VerificationReport]) -> None:
    with open(path, "w") as fh:
        json.dump([rep.to_dict() for rep in reports], fh, indent=1)
        fh.write("\n")

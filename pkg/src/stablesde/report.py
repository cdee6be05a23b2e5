"""Machine-readable check reports and deterministic result files.

Every certification produces a Report: a list of CheckRows, each carrying a
stable claim id, the tested statement in self-contained ASCII math, the
computed value, its bound, the margin (bound - value, >= 0 when passing)
and a pass flag. Reports round-trip through JSON and re-validate against
validate_report.

CSV output prints floats with 17 significant digits so byte-identical
reruns are checkable with diff.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class CheckRow:
    check_id: str
    claim: str
    value: float
    bound: float
    margin: float
    passed: bool
    context: dict = field(default_factory=dict)


@dataclass
class Report:
    name: str
    params: dict
    checks: list
    grid: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_margin(self) -> float:
        return min((c.margin for c in self.checks), default=float("inf"))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "grid": self.grid,
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)
        if path is not None:
            Path(path).write_text(text)
        return text


_ROW_KEYS = {"check_id", "claim", "value", "bound", "margin", "passed", "context"}
_REPORT_KEYS = {"name", "params", "grid", "pass", "worst_margin", "checks"}


def validate_report(d: dict) -> None:
    """Schema check used by the round-trip test and by run() after writing."""
    if set(d.keys()) != _REPORT_KEYS:
        raise ValueError(f"report keys {sorted(d.keys())} != {sorted(_REPORT_KEYS)}")
    if not isinstance(d["checks"], list):
        raise ValueError("checks must be a list")
    for row in d["checks"]:
        if set(row.keys()) != _ROW_KEYS:
            raise ValueError(f"check row keys {sorted(row.keys())} invalid")
        if not isinstance(row["passed"], bool):
            raise ValueError("passed must be boolean")
        for k in ("value", "bound", "margin"):
            float(row[k])
    if d["pass"] != all(r["passed"] for r in d["checks"]):
        raise ValueError("aggregate pass flag inconsistent with rows")


def fmt17(x) -> str:
    return f"{float(x):.17g}"


def write_results_csv(path, header, rows) -> None:
    """Rows of floats/strings; floats printed at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt17(v) if isinstance(v, float) else v for v in row])


def write_plotdata(path, xlabel, ylabel, xs, ys) -> None:
    """Two-column tab-separated series with a '#' header line."""
    with open(path, "w") as fh:
        fh.write(f"# {xlabel}\t{ylabel}\n")
        for x, y in zip(xs, ys):
            fh.write(f"{fmt17(x)}\t{fmt17(y)}\n")

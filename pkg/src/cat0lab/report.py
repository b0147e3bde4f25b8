"""Report assembly and emission: JSON verdicts, CSV tables, PNG figures."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import groups as G


def jsonable(value):
    if hasattr(value, "to_json"):
        return jsonable(value.to_json())
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, G.GroupElement):
        return G.format_element(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, float):
        return value
    return value


@dataclass
class Report:
    name: str
    config: dict
    verdicts: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)      # name -> (headers, rows)
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def add_table(self, name: str, headers, rows):
        self.tables[name] = (list(headers), [list(r) for r in rows])

    def violation(self, message: str):
        self.violations.append(message)

    def payload(self) -> dict:
        """Replayable content: everything except wall-clock timing."""
        return jsonable({
            "experiment": self.name,
            "config": self.config,
            "verdicts": self.verdicts,
            "tables": {k: {"headers": h, "rows": r} for k, (h, r) in self.tables.items()},
            "violations": self.violations,
            "notes": self.notes,
        })

    def to_json(self) -> dict:
        out = self.payload()
        out["timing"] = self.timing
        return out


class Timer:
    def __init__(self, report: Report, key: str):
        self.report, self.key = report, key

    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.report.timing[self.key] = round(time.monotonic() - self.t0, 3)


def write_report(report: Report, outdir: str | Path, figures: bool = True) -> list[Path]:
    """Emit report.json, one CSV per table, and figures next to them."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    jpath = outdir / "report.json"
    jpath.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    paths.append(jpath)
    for name, (headers, rows) in report.tables.items():
        cpath = outdir / f"{name}.csv"
        with cpath.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(headers)
            for row in rows:
                writer.writerow([_csv_cell(c) for c in row])
        paths.append(cpath)
    if figures:
        from . import figures as F
        paths.extend(F.render_report_figures(report, outdir))
    return paths


def _csv_cell(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, G.GroupElement):
        return G.format_element(value)
    return value

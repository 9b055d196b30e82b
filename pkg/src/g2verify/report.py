"""Typed verification reports with JSON, CSV and plain-text emission.

A report is a flat list of checks plus environment metadata.  Each check
carries an ``anchor``: a stable slug naming the identity or bound being
verified (``plumbing`` for infrastructure checks), so downstream tooling
can track a given identity across runs.

JSON output is canonical: sorted keys, fixed separators, no volatile
fields (wall time is reported in the text format only), so identical
configuration and seed produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "g2verify-report/1"

PLUMBING = "plumbing"


@dataclass
class Check:
    """One verified statement: a residual against a tolerance, a convergence
    ratio against a band, or a recorded value (informational)."""

    name: str
    anchor: str
    passed: bool
    residual: float | None = None
    tolerance: float | None = None
    ratio: float | None = None
    band: tuple | None = None
    value: float | None = None
    detail: str | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "anchor": self.anchor, "passed": bool(self.passed)}
        if self.residual is not None:
            out["residual"] = float(self.residual)
        if self.tolerance is not None:
            out["tolerance"] = float(self.tolerance)
        if self.ratio is not None:
            out["convergenceRatio"] = float(self.ratio)
        if self.band is not None:
            out["band"] = [float(self.band[0]), float(self.band[1])]
        if self.value is not None:
            out["value"] = float(self.value)
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def residual_check(name, anchor, residual, tolerance) -> Check:
    residual = float(residual)
    return Check(name, anchor, residual <= tolerance, residual=residual, tolerance=tolerance)


def ratio_check(name, anchor, ratio, band) -> Check:
    ratio = float(ratio)
    return Check(name, anchor, band[0] <= ratio <= band[1], ratio=ratio, band=tuple(band))


def bound_check(name, anchor, value, upper, detail=None) -> Check:
    """value <= upper, with the value itself recorded."""
    value = float(value)
    return Check(name, anchor, value <= upper, residual=value, tolerance=upper, detail=detail)


def info_check(name, anchor, value, detail=None) -> Check:
    """Recorded observation; never fails."""
    return Check(name, anchor, True, value=float(value), detail=detail)


@dataclass
class VerificationReport:
    title: str
    environment: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    wall_time: float | None = None

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks):
        self.checks.extend(checks)

    def merge(self, other: "VerificationReport"):
        self.checks.extend(other.checks)
        self.tables.update(other.tables)

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.checks if not c.passed)

    @property
    def all_passed(self) -> bool:
        return self.n_failed == 0

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "title": self.title,
            "environment": self.environment,
            "checks": [c.to_dict() for c in self.checks],
            "tables": self.tables,
            "summary": {
                "total": len(self.checks),
                "passed": len(self.checks) - self.n_failed,
                "failed": self.n_failed,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"== {self.title} =="]
        for key in sorted(self.environment):
            lines.append(f"   {key}: {self.environment[key]}")
        if self.wall_time is not None:
            lines.append(f"   wall time: {self.wall_time:.2f} s")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            parts = [f"{status}  {c.name}  [{c.anchor}]"]
            if c.residual is not None:
                parts.append(f"residual={c.residual:.3e}")
            if c.tolerance is not None:
                parts.append(f"tol={c.tolerance:.3e}")
            if c.ratio is not None:
                parts.append(f"ratio={c.ratio:.3f}")
            if c.band is not None:
                parts.append(f"band=[{c.band[0]:g}, {c.band[1]:g}]")
            if c.value is not None:
                parts.append(f"value={c.value:.12g}")
            if c.detail:
                parts.append(f"({c.detail})")
            lines.append("  ".join(parts))
        s = self.to_dict()["summary"]
        lines.append(f"-- {s['passed']}/{s['total']} checks passed, {s['failed']} failed --")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        """Checks as one CSV table; named tables appended as separate sections."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "anchor", "passed", "residual", "tolerance", "ratio", "value"])
        for c in self.checks:
            w.writerow([
                c.name, c.anchor, int(c.passed),
                "" if c.residual is None else repr(float(c.residual)),
                "" if c.tolerance is None else repr(float(c.tolerance)),
                "" if c.ratio is None else repr(float(c.ratio)),
                "" if c.value is None else repr(float(c.value)),
            ])
        for tname in sorted(self.tables):
            rows = self.tables[tname]
            if not rows:
                continue
            buf.write(f"# table: {tname}\n")
            cols = list(rows[0].keys())
            w.writerow(cols)
            for row in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in cols)])
        return buf.getvalue()


def emit_report(report: VerificationReport, fmt: str = "text", out=None) -> str:
    """Render a report as json, csv or text; write to ``out`` if given."""
    if fmt == "json":
        rendered = report.to_json()
    elif fmt == "csv":
        rendered = report.to_csv()
    elif fmt == "text":
        rendered = report.to_text()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if out is not None:
        with open(out, "w") as fh:
            fh.write(rendered)
    return rendered

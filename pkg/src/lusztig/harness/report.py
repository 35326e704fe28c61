"""Verification reports: rows, summary, serialization, exit codes."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

PASS, FAIL, SKIPPED, INFO = "pass", "fail", "skipped", "info"
STATUSES = (FAIL, SKIPPED, PASS, INFO)  # text output order

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SKIPPED = 3  # no failures, but some checks could not run (caps, too few primes)

REPORT_FIELDS = ("scenario", "suite", "check", "anchor", "status", "witness", "detail")


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    suite: str
    check: str
    anchor: str
    status: str
    witness: dict = field(default_factory=dict)
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    def to_record(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_FIELDS}

    @classmethod
    def from_record(cls, rec: dict) -> ReportRow:
        return cls(**{k: rec[k] for k in REPORT_FIELDS})


@dataclass
class VerificationReport:
    rows: list[ReportRow]
    version: str
    wall_time: float = 0.0
    seeds: dict = field(default_factory=dict)
    scenarios: list = field(default_factory=list)

    @property
    def summary(self) -> dict[str, int]:
        out = {s: 0 for s in (PASS, FAIL, SKIPPED, INFO)}
        for r in self.rows:
            out[r.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        s = self.summary
        if s[FAIL]:
            return EXIT_FAIL
        if s[SKIPPED]:
            return EXIT_SKIPPED
        return EXIT_OK

    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if r.status == FAIL]

    def select(self, **match) -> list[ReportRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in match.items())]

    def deterministic_view(self) -> dict:
        """Everything except wall time; equal for repeated runs of one scenario file."""
        rec = self.to_record()
        rec.pop("wall_time")
        return rec

    def to_record(self) -> dict:
        return {
            "version": self.version,
            "scenarios": list(self.scenarios),
            "seeds": dict(self.seeds),
            "summary": self.summary,
            "wall_time": self.wall_time,
            "rows": [r.to_record() for r in self.rows],
        }

    @classmethod
    def from_record(cls, rec: dict) -> VerificationReport:
        return cls(
            rows=[ReportRow.from_record(r) for r in rec["rows"]],
            version=rec["version"],
            wall_time=rec["wall_time"],
            seeds=dict(rec["seeds"]),
            scenarios=list(rec["scenarios"]),
        )

    def __eq__(self, other):
        if not isinstance(other, VerificationReport):
            return NotImplemented
        return self.to_record() == other.to_record()


def merge_reports(reports: list[VerificationReport], version: str) -> VerificationReport:
    out = VerificationReport([], version)
    for r in reports:
        out.rows.extend(r.rows)
        out.wall_time += r.wall_time
        out.seeds.update(r.seeds)
        out.scenarios.extend(r.scenarios)
    return out


def _witness_text(w: dict) -> str:
    return json.dumps(w, sort_keys=True, separators=(",", ":"))


def emit_report(report: VerificationReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report.to_record(), indent=2, sort_keys=True) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for r in report.rows:
            writer.writerow([r.scenario, r.suite, r.check, r.anchor, r.status, _witness_text(r.witness), r.detail])
        return buf.getvalue().encode()
    if fmt == "text":
        lines = []
        for status in STATUSES:
            for r in report.rows:
                if r.status != status:
                    continue
                line = f"{r.status.upper():7} {r.scenario} / {r.suite} / {r.check}: {_witness_text(r.witness)}"
                if r.detail:
                    line += f"  [{r.detail}]"
                lines.append(line)
        s = report.summary
        lines.append(
            f"-- {s[PASS]} passed, {s[FAIL]} failed, {s[SKIPPED]} skipped, {s[INFO]} informational "
            f"({len(report.scenarios)} scenarios, version {report.version})"
        )
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")


def load_report(data: bytes | str) -> VerificationReport:
    if isinstance(data, bytes):
        data = data.decode()
    return VerificationReport.from_record(json.loads(data))

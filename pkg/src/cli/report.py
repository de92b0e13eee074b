"""Result records and their text/JSON renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List

# JSON key carrying the per-degree results of each command.
RESULT_KEYS = {
    "hml": "HML",
    "q-homology": "HQ",
    "hh": "HH",
    "additivity": "isomorphic",
}

SYMBOLS = {
    "hml": "HML",
    "q-homology": "H",
    "hh": "HH",
}


@dataclass
class Report:
    command: str
    input: Dict[str, Any]
    degrees: List[int] = field(default_factory=list)
    groups: List[str] = field(default_factory=list)
    verdicts: List[bool] = field(default_factory=list)
    details: List[Dict[str, Any]] = field(default_factory=list)
    timings_ms: List[float] = field(default_factory=list)
    ok: bool = True

    def to_dict(self, timings: bool = False) -> Dict[str, Any]:
        document: Dict[str, Any] = {
            "command": self.command,
            "input": self.input,
            "degrees": self.degrees,
            "groups": self.groups,
        }
        key = RESULT_KEYS.get(self.command)
        if key == "isomorphic":
            document[key] = self.verdicts
        elif key:
            document[key] = self.groups
        if self.details:
            document["details"] = self.details
        if self.command == "selftest":
            document["ok"] = self.ok
        if timings:
            document["timings_ms"] = [round(t, 3) for t in self.timings_ms]
        return document


def render_json(report: Report, timings: bool = False) -> str:
    return json.dumps(report.to_dict(timings), indent=2, sort_keys=True)


def _arguments(report: Report) -> str:
    if report.command == "q-homology":
        return f"Q({report.input.get('group')})"
    return f"{report.input.get('ring')}, {report.input.get('coefficients')}"


def render_text(report: Report, timings: bool = False) -> str:
    lines: List[str] = []
    if report.command == "selftest":
        for item in report.details:
            status = "PASS" if item["passed"] else "FAIL"
            lines.append(f"[{status}] {item['name']}" + (f": {item['detail']}" if item.get("detail") else ""))
        lines.append("selftest: " + ("all checks passed" if report.ok else "FAILED"))
    elif report.command == "additivity":
        for item, verdict in zip(report.details, report.verdicts):
            lines.append(
                f"degree {item['degree']}: {item['source']} -> {item['target']} (cone {item['cone']}): "
                + ("isomorphism" if verdict else "not an isomorphism")
            )
    elif report.command == "ring-table":
        lines.append(f"Wrote {report.input.get('output')}")
    else:
        symbol = SYMBOLS[report.command]
        for degree, group in zip(report.degrees, report.groups):
            lines.append(f"{symbol}_{degree}({_arguments(report)}) = {group}")
    if timings and report.timings_ms:
        lines.append("timings (ms): " + ", ".join(f"{t:.1f}" for t in report.timings_ms))
    return "\n".join(lines)


def render(report: Report, output_format: str = "text", timings: bool = False) -> str:
    if output_format == "json":
        return render_json(report, timings)
    return render_text(report, timings)
"""Report emission: byte-stable JSON and markdown files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol


class Reportable(Protocol):
    def to_dict(self) -> dict: ...
    def to_markdown(self) -> str: ...


def report_json(report: Reportable) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def emit_report(
    report: Reportable,
    out_dir: str | Path,
    name: str,
    formats: tuple[str, ...] = ("json", "markdown"),
) -> list[Path]:
    """Write the report under out_dir as <name>.json / <name>.md.

    Output is a pure function of the report contents: same report, same bytes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for fmt in formats:
        if fmt == "json":
            path = out_dir / f"{name}.json"
            path.write_text(report_json(report), encoding="utf-8")
        elif fmt == "markdown":
            path = out_dir / f"{name}.md"
            path.write_text(report.to_markdown(), encoding="utf-8")
        else:
            raise ValueError(f"unknown report format: {fmt!r}")
        written.append(path)
    return written

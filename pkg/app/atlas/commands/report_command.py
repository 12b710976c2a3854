# -*- coding: utf-8 -*-
"""
@Desc    : report: human-readable summary of the manifest and verify report in an output directory
"""
from pathlib import Path
from typing import Any, Dict, List

from loguru import logger

from atlas.commands.common import MANIFEST_NAME
from atlas.commands.verify_command import VERIFY_REPORT
from atlas.errors import PreconditionError
from utils import format_duration, read_json

templates_dir = Path(__file__).parent.joinpath("templates")
report_template_path = templates_dir.joinpath("report.txt")

REPORT_NAME = "report.txt"


def _number(value: Any) -> str:
    return "nan" if value is None else f"{value:.6g}"


def _check_lines(checks: List[Dict[str, Any]]) -> str:
    if not checks:
        return "(no checks in this run)"
    width = max(len(c["check_id"]) for c in checks)
    lines = []
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(
            f"{status}  {c['check_id']:<{width}}  estimate={_number(c['estimate'])}  "
            f"target={_number(c['target'])}  ci=[{_number(c['ci_low'])}, {_number(c['ci_high'])}]"
        )
        if c.get("error"):
            lines.append(f"      error: {c['error']}")
    passed = sum(bool(c["passed"]) for c in checks)
    lines.append(f"\n{passed}/{len(checks)} checks passed")
    return "\n".join(lines)


def render_report(out_dir: Path) -> str:
    manifest_path = out_dir.joinpath(MANIFEST_NAME)
    if not manifest_path.is_file():
        raise PreconditionError(f"no {MANIFEST_NAME} in {out_dir}")
    manifest = read_json(manifest_path)

    checks = manifest.get("checks") or []
    report_path = out_dir.joinpath(VERIFY_REPORT)
    if report_path.is_file():
        checks = read_json(report_path).get("checks", checks)

    config = manifest.get("config", {})
    template = report_template_path.read_text(encoding="utf-8")
    return template.format(
        command=manifest.get("command", "?"),
        tool_version=manifest.get("tool_version", "?"),
        master_seed=manifest.get("master_seed", "?"),
        replicas=manifest.get("replicas", "?"),
        wall_clock=format_duration(float(manifest.get("wall_clock_seconds") or 0.0)),
        outputs=", ".join(manifest.get("outputs", [])) or "-",
        config="\n".join(f"{key:<16}{value}" for key, value in config.items()),
        notes="\n".join(f"- {note}" for note in manifest.get("notes", [])) or "(none)",
        checks=_check_lines(checks),
    )


def cmd_report(out_dir: Path) -> str:
    out_dir = out_dir.expanduser().absolute()
    text = render_report(out_dir)
    out_dir.joinpath(REPORT_NAME).write_text(text, encoding="utf-8", newline="\n")
    logger.success(f"report written to {out_dir.joinpath(REPORT_NAME)}")
    return text

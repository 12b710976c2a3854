# -*- coding: utf-8 -*-
"""
@Desc    : verify: run the acceptance checks of a tier, write the JSON report and a human summary
"""
import time
from typing import List, Sequence

from loguru import logger
from pydantic import BaseModel

from atlas.checks import CheckContext, CheckOutcome, check_registry
from atlas.commands.common import RunConfig, RunManifest, prepare_out_dir
from atlas.errors import ConfigError
from utils import format_duration, write_json

VERIFY_REPORT = "verify_report.json"
VERIFY_SUMMARY = "verify_summary.txt"


class VerifyResult(BaseModel):
    manifest: RunManifest
    summary: str

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.manifest.checks)


def render_summary(tier: str, outcomes: List[CheckOutcome]) -> str:
    width = max((len(o.check_id) for o in outcomes), default=10)
    lines = [f"verify ({tier}): {sum(o.passed for o in outcomes)}/{len(outcomes)} checks passed", ""]
    for o in outcomes:
        status = "PASS" if o.passed else "FAIL"
        lines.append(
            f"{status}  {o.check_id:<{width}}  estimate={o.estimate:.6g}  target={o.target:.6g}  "
            f"ci=[{o.ci_low:.6g}, {o.ci_high:.6g}]  {format_duration(o.seconds)}"
        )
        if o.error:
            lines.append(f"      error: {o.error}")
        elif not o.passed and o.detail:
            lines.append(f"      {o.detail}")
    return "\n".join(lines) + "\n"


def cmd_verify(config: RunConfig, only: Sequence[str] = ()) -> VerifyResult:
    """Every check of the tier runs; a failing check never stops the ones after it."""
    started = time.perf_counter()
    checks = check_registry.get_checks(config.tier)
    if only:
        known = {check.check_id for check in checks}
        for check_id in only:
            if check_id not in known:
                raise ConfigError("only", f"no check {check_id!r} in tier {config.tier}")
        checks = [check for check in checks if check.check_id in set(only)]

    out_dir = prepare_out_dir(config)
    manifest = RunManifest.start("verify", config)
    ctx = CheckContext(
        tier=config.tier,
        seed=config.seed,
        threads=config.threads_resolved,
        target_scale=config.perturb_targets,
    )
    if config.perturb_targets != 1.0:
        manifest.notes.append(f"targets perturbed by a factor {config.perturb_targets:g}")

    outcomes = [check.invoke(ctx) for check in checks]
    manifest.checks = outcomes

    report_path = out_dir.joinpath(VERIFY_REPORT)
    write_json(
        report_path,
        {
            "tier": str(config.tier),
            "seed": config.seed,
            "passed": all(o.passed for o in outcomes),
            "checks": [o.model_dump(mode="json", exclude={"seconds"}) for o in outcomes],
        },
    )
    summary = render_summary(str(config.tier), outcomes)
    summary_path = out_dir.joinpath(VERIFY_SUMMARY)
    summary_path.write_text(summary, encoding="utf-8", newline="\n")
    manifest.outputs.extend([report_path.name, summary_path.name])

    manifest.wall_clock_seconds = time.perf_counter() - started
    manifest.write(out_dir)

    result = VerifyResult(manifest=manifest, summary=summary)
    if result.passed:
        logger.success(f"verify ({config.tier}): all {len(outcomes)} checks passed")
    else:
        logger.error(f"verify ({config.tier}): {sum(not o.passed for o in outcomes)} checks failed")
    return result

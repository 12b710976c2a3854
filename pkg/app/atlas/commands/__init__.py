# -*- coding: utf-8 -*-
"""
@Desc    : One module per subcommand
"""
from .common import RunConfig, RunManifest, parse_config_file, resolve_config
from .covariance_command import cmd_covariance
from .report_command import cmd_report
from .sample_limit_command import cmd_sample_limit
from .simulate_command import cmd_simulate
from .verify_command import VerifyResult, cmd_verify

__all__ = [
    "RunConfig",
    "RunManifest",
    "parse_config_file",
    "resolve_config",
    "cmd_covariance",
    "cmd_report",
    "cmd_sample_limit",
    "cmd_simulate",
    "cmd_verify",
    "VerifyResult",
]

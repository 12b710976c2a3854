# -*- coding: utf-8 -*-
"""
Utils package for atlas-lab
"""

from .file_utils import format_duration, format_float, read_json, write_csv, write_json
from .init_log import init_log, timezone_filter

__all__ = [
    "format_duration",
    "format_float",
    "read_json",
    "write_csv",
    "write_json",
    "init_log",
    "timezone_filter",
]

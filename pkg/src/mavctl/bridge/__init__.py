"""Run orchestration: headless runs, protocol server, logs, metrics."""

from .config import ConfigError, RunConfig, load_config, resolve_config
from .logs import CSV_COLUMNS, RunWriter
from .runner import RunResult, run_headless
from .scripting import ScriptError, parse_script
from .stack import ControlStack

__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "ControlStack",
    "RunConfig",
    "RunResult",
    "RunWriter",
    "ScriptError",
    "load_config",
    "parse_script",
    "resolve_config",
    "run_headless",
]

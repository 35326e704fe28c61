from .config import PRESETS, SUITES, Scenario, ScenarioError, load_config, parse_config
from .report import EXIT_FAIL, EXIT_OK, EXIT_SKIPPED, ReportRow, VerificationReport, emit_report, load_report
from .suites import run_scenario, verify_suite

__all__ = [
    "PRESETS", "SUITES", "Scenario", "ScenarioError", "load_config", "parse_config",
    "EXIT_FAIL", "EXIT_OK", "EXIT_SKIPPED", "ReportRow", "VerificationReport", "emit_report",
    "load_report", "run_scenario", "verify_suite",
]

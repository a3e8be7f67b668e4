"""
Scenario harness for MuskatLab.

This package contains the scenario catalog, the runner that turns a
configuration into CSV series and verdict reports, and the acceptance suite.
"""

from .scenarios import CATALOG, ScenarioSpec, get_scenario
from .runner import (
    ScenarioResult, run_scenario, emit_csv, write_report, records_frame, probe, convergence
)
from .acceptance import (
    ROWS, AcceptanceRow, AcceptanceResult, run_acceptance, select_rows, format_summary
)

__all__ = [
    'CATALOG', 'ScenarioSpec', 'get_scenario',
    'ScenarioResult', 'run_scenario', 'emit_csv', 'write_report', 'records_frame', 'probe',
    'convergence',
    'ROWS', 'AcceptanceRow', 'AcceptanceResult', 'run_acceptance', 'select_rows',
    'format_summary'
]

"""Session scripts: parse, execute, report."""

from .dsl import SessionScript, Statement, parse_session, parse_statement
from .report import emit_report, render_text
from .runner import Config, Record, Report, execute, run_text

__all__ = [
    "Config",
    "Record",
    "Report",
    "SessionScript",
    "Statement",
    "emit_report",
    "execute",
    "parse_session",
    "parse_statement",
    "render_text",
    "run_text",
]

"""
Run Logger

Structured audit trail of one verification run in JSONL format: run start,
suite boundaries, identity verdicts, findings and errors.
"""

import json
import logging
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional


logger = logging.getLogger(__name__)


@dataclass
class LogEntry:
    """Base class for log entries"""
    timestamp: str
    event_type: str

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


@dataclass
class RunStartLogEntry(LogEntry):
    """Log entry for the start of a run"""
    spec_id: str
    fingerprint: str
    suites: List[str]
    seed: int
    run_id: str

    def __init__(self, spec_id: str, fingerprint: str, suites: List[str], seed: int, run_id: str):
        self.timestamp = datetime.now().isoformat()
        self.event_type = "run_start"
        self.spec_id = spec_id
        self.fingerprint = fingerprint
        self.suites = suites
        self.seed = seed
        self.run_id = run_id


@dataclass
class SuiteLogEntry(LogEntry):
    """Log entry for suite start and end"""
    suite: str
    summary: Dict[str, int]
    run_id: str

    def __init__(self, event_type: str, suite: str, summary: Dict[str, int], run_id: str):
        self.timestamp = datetime.now().isoformat()
        self.event_type = event_type
        self.suite = suite
        self.summary = summary
        self.run_id = run_id


@dataclass
class VerdictLogEntry(LogEntry):
    """Log entry for one identity verdict"""
    identity_id: str
    verdict: str
    max_residual: float
    tolerance: float
    samples: int
    skipped_reason: Optional[str]
    run_id: str

    def __init__(self, identity_id: str, verdict: str, max_residual: float, tolerance: float,
                 samples: int, skipped_reason: Optional[str], run_id: str):
        self.timestamp = datetime.now().isoformat()
        self.event_type = "verdict"
        self.identity_id = identity_id
        self.verdict = verdict
        self.max_residual = max_residual
        self.tolerance = tolerance
        self.samples = samples
        self.skipped_reason = skipped_reason
        self.run_id = run_id


@dataclass
class FindingLogEntry(LogEntry):
    """Log entry for findings such as alternate readings"""
    identity_id: str
    message: str
    run_id: str

    def __init__(self, identity_id: str, message: str, run_id: str):
        self.timestamp = datetime.now().isoformat()
        self.event_type = "finding"
        self.identity_id = identity_id
        self.message = message
        self.run_id = run_id


@dataclass
class ErrorLogEntry(LogEntry):
    """Log entry for errors"""
    error_type: str
    error_message: str
    context: Dict[str, Any]
    run_id: str

    def __init__(self, error_type: str, error_message: str,
                 context: Dict[str, Any], run_id: str):
        self.timestamp = datetime.now().isoformat()
        self.event_type = "error"
        self.error_type = error_type
        self.error_message = error_message
        self.context = context
        self.run_id = run_id


class RunLogger:
    """
    Run logger for verification runs

    Features:
    - JSONL format for structured logging
    - One file per run, run_<timestamp>.jsonl
    - Write failures are logged and never abort the run
    """

    def __init__(self, log_dir: str = "logs", run_id: Optional[str] = None):
        """
        Initialize run logger

        Args:
            log_dir: Directory for log files
            run_id: Run identifier (generated if not provided)
        """
        self.log_dir = Path(log_dir)
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Cannot create log directory {self.log_dir}: {e}")

        if run_id is None:
            run_id = datetime.now().strftime("%Y%m%d_%H%M%S_%f")

        self.run_id = run_id
        self.log_file = self.log_dir / f"run_{run_id}.jsonl"

        logger.info(f"Run logger initialized: {self.log_file}")

    def _write_entry(self, entry: LogEntry):
        try:
            with open(self.log_file, 'a', encoding='utf-8') as f:
                json.dump(entry.to_dict(), f, default=str)
                f.write('\n')
        except Exception as e:
            logger.error(f"Failed to write log entry: {e}")

    def log_run_start(self, spec_id: str, fingerprint: str, suites: List[str], seed: int):
        self._write_entry(RunStartLogEntry(spec_id, fingerprint, suites, seed, self.run_id))
        logger.debug(f"Logged run start: {spec_id} suites={suites}")

    def log_suite(self, event_type: str, suite: str, summary: Optional[Dict[str, int]] = None):
        """
        Log suite start or end

        Args:
            event_type: "suite_start" or "suite_end"
            suite: Suite name
            summary: Verdict counts at suite end
        """
        self._write_entry(SuiteLogEntry(event_type, suite, summary or {}, self.run_id))

    def log_verdict(self, result):
        """
        Log one identity verdict

        Args:
            result: IdentityResult
        """
        self._write_entry(VerdictLogEntry(
            identity_id=result.identity_id,
            verdict=result.verdict,
            max_residual=result.max_residual,
            tolerance=result.tolerance,
            samples=result.samples,
            skipped_reason=result.skipped_reason,
            run_id=self.run_id,
        ))
        logger.debug(f"Logged verdict: {result.identity_id} = {result.verdict}")

    def log_finding(self, identity_id: str, message: str):
        self._write_entry(FindingLogEntry(identity_id, message, self.run_id))

    def log_error(self, error_type: str, error_message: str,
                  context: Optional[Dict[str, Any]] = None):
        """
        Log error

        Args:
            error_type: Type of error
            error_message: Error message
            context: Additional context
        """
        self._write_entry(ErrorLogEntry(error_type, error_message, context or {}, self.run_id))
        logger.debug(f"Logged error: {error_type} - {error_message}")

    def get_log_file(self) -> Path:
        return self.log_file

    def read_run_log(self) -> list:
        """
        Read all entries from the current run log

        Returns:
            List of log entry dicts
        """
        entries = []

        if not self.log_file.exists():
            return entries

        try:
            with open(self.log_file, 'r', encoding='utf-8') as f:
                for line in f:
                    if line.strip():
                        entries.append(json.loads(line))
        except Exception as e:
            logger.error(f"Failed to read run log: {e}")

        return entries

"""
Verification Report Generator

Assembles the versioned verification report from suite results and renders
it as markdown or JSON.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from nullgeo import __version__


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Fields that change between otherwise identical runs
VOLATILE_FIELDS = ('generated', 'elapsed_seconds')


class VerificationReport:
    """
    Verification report data structure

    Contains:
    - Spec id and fingerprint
    - Run settings (suites, seed, grid sizes, resolved tolerances)
    - One entry per identity, in suite then registry order
    - Findings (alternate readings, notes)
    - Metadata and verdict summary
    """

    def __init__(self, spec_id: str, fingerprint: str):
        self.generated = datetime.now().isoformat()
        self.spec_id = spec_id
        self.fingerprint = fingerprint
        self.settings: Dict[str, Any] = {}
        self.identities: List[Dict[str, Any]] = []
        self.findings: List[Dict[str, str]] = []
        self.metadata: Dict[str, Any] = {}
        self.exit_code: int = 0
        self.elapsed_seconds: float = 0.0

    def set_settings(self, suites: List[str], seed: int, grid_points: int,
                     random_points: int, tolerances: Dict[str, float]):
        self.settings = {
            "suites": list(suites),
            "seed": seed,
            "grid_points": grid_points,
            "random_points": random_points,
            "tolerances": dict(tolerances),
        }

    def add_results(self, results):
        """Append IdentityResult objects"""
        for result in results:
            self.identities.append(result.to_dict())

    def add_finding(self, identity_id: str, message: str):
        self.findings.append({"id": identity_id, "message": message})

    def add_metadata(self, key: str, value: Any):
        self.metadata[key] = value

    def count(self, verdict: str) -> int:
        return sum(1 for entry in self.identities if entry["verdict"] == verdict)

    @property
    def summary(self) -> Dict[str, int]:
        return {
            "passed": self.count("pass"),
            "failed": self.count("fail"),
            "skipped": self.count("skipped"),
            "exit_code": self.exit_code,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "tool": "nullgeo",
            "version": __version__,
            "spec": {"id": self.spec_id, "fingerprint": self.fingerprint},
            "settings": self.settings,
            "identities": self.identities,
            "findings": self.findings,
            "metadata": self.metadata,
            "summary": self.summary,
            "generated": self.generated,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }


def stable_view(data: Dict[str, Any]) -> Dict[str, Any]:
    """Report dict without the fields excluded from run-to-run comparison"""
    return {key: value for key, value in data.items() if key not in VOLATILE_FIELDS}


def _format_residual(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2e}"


class ReportGenerator:
    """
    Generates verification reports in various formats

    Supported formats:
    - Markdown (.md)
    - JSON (.json)
    """

    FORMATS = ('markdown', 'json')

    def generate_markdown(self, report: VerificationReport) -> str:
        """
        Generate markdown report

        Args:
            report: VerificationReport object

        Returns:
            Markdown formatted string
        """
        lines = []
        summary = report.summary

        lines.append("# Lightlike Geometry Verification Report")
        lines.append("")
        lines.append(f"**Spec:** {report.spec_id}")
        lines.append(f"**Fingerprint:** `{report.fingerprint}`")
        lines.append(f"**Generated:** {report.generated}")
        lines.append(f"**Tool version:** {__version__}")
        lines.append("")

        lines.append("## Settings")
        lines.append("")
        if report.settings:
            lines.append(f"- **Suites:** {', '.join(report.settings['suites'])}")
            lines.append(f"- **Seed:** {report.settings['seed']}")
            lines.append(f"- **Sample points:** {report.settings['grid_points']} grid + "
                         f"{report.settings['random_points']} random")
            tolerances = ", ".join(f"{tier} {value:.0e}" for tier, value in report.settings['tolerances'].items())
            lines.append(f"- **Tolerances:** {tolerances}")
        else:
            lines.append("No settings recorded.")
        lines.append("")

        lines.append("## Summary")
        lines.append("")
        lines.append(f"- **Passed:** {summary['passed']}")
        lines.append(f"- **Failed:** {summary['failed']}")
        lines.append(f"- **Skipped:** {summary['skipped']}")
        lines.append(f"- **Exit code:** {summary['exit_code']}")
        lines.append("")

        lines.append("## Identities")
        lines.append("")
        if report.identities:
            lines.append("| Identity | Name | Suite | Tier | Max residual | Tolerance | Samples | Verdict |")
            lines.append("|----------|------|-------|------|--------------|-----------|---------|---------|")
            for entry in report.identities:
                icon = {"pass": "✓", "fail": "✗"}.get(entry["verdict"], "-")
                lines.append(
                    f"| `{entry['id']}` | {entry.get('name', entry['id'])} | {entry['suite']} | {entry['tier']} | "
                    f"{_format_residual(entry['max_residual'] if entry['samples'] else None)} | "
                    f"{entry['tolerance']:.0e} | {entry['samples']} | {icon} {entry['verdict']} |"
                )
            lines.append("")
        else:
            lines.append("No identities evaluated.")
            lines.append("")

        skipped = [entry for entry in report.identities if entry["verdict"] == "skipped"]
        if skipped:
            lines.append("## Skipped")
            lines.append("")
            for entry in skipped:
                lines.append(f"- `{entry['id']}`: {entry.get('skipped_reason', '')}")
            lines.append("")

        if report.findings:
            lines.append("## Findings")
            lines.append("")
            for finding in report.findings:
                lines.append(f"- `{finding['id']}`: {finding['message']}")
            lines.append("")

        if report.metadata:
            lines.append("## Notes")
            lines.append("")
            for key, value in report.metadata.items():
                lines.append(f"- **{key}:** {value}")
            lines.append("")

        lines.append("---")
        lines.append(f"*Report generated by nullgeo {__version__} in {report.elapsed_seconds:.2f}s*")

        return "\n".join(lines)

    def generate_json(self, report: VerificationReport) -> str:
        """
        Generate JSON report

        Args:
            report: VerificationReport object

        Returns:
            JSON formatted string
        """
        return json.dumps(report.to_dict(), indent=2)

    def format_for_path(self, filepath: Path, format: Optional[str] = None) -> str:
        """Explicit format wins; otherwise .md means markdown and .json means JSON"""
        if format:
            return format.lower()
        if filepath.suffix == ".md":
            return "markdown"
        if filepath.suffix == ".json":
            return "json"
        raise ValueError(f"Cannot infer report format from suffix '{filepath.suffix}'")

    def save_report(self, report: VerificationReport, filepath: str,
                    format: Optional[str] = None) -> Path:
        """
        Save report to file

        Args:
            report: VerificationReport object
            filepath: Output file path
            format: "markdown" or "json"; inferred from the suffix when omitted

        Returns:
            Path written

        Raises:
            ValueError: Unsupported or uninferable format
        """
        filepath = Path(filepath)
        chosen = self.format_for_path(filepath, format)

        if chosen == "markdown":
            content = self.generate_markdown(report)
        elif chosen == "json":
            content = self.generate_json(report)
        else:
            raise ValueError(f"Unsupported format: {chosen}")

        filepath.parent.mkdir(parents=True, exist_ok=True)

        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(content)
            if not content.endswith("\n"):
                f.write("\n")

        logger.info(f"Saved {chosen} report to {filepath}")
        return filepath

"""
nullgeo - Command-Line Interface

Loads a GeometrySpec, runs the selected identity suites over its sample
grid and prints or saves the verification report.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

from config.config_loader import ConfigurationError, NullGeoConfig, load_config
from nullgeo import __version__
from nullgeo.error_handler import (
    EXIT_IDENTITY_FAILURE,
    EXIT_OK,
    EXIT_SCHEMA,
    ErrorHandler,
    safe_execute,
)
from nullgeo.geometry_spec import SUITE_NAMES, GeometrySpec, fixture_note, list_fixture_specs, load_spec
from nullgeo.identity_registry import IdentityRegistry, get_registry
from nullgeo.report_generator import ReportGenerator, VerificationReport
from nullgeo.sampling import SampleGrid, build_grid
from nullgeo.session_logger import RunLogger
from nullgeo.suites import SUITES, VerificationContext
from nullgeo.ui_formatter import UIFormatter


logger = logging.getLogger(__name__)


def setup_logging(log_level: str = "INFO", log_dir: str = "logs/"):
    """
    Setup logging configuration

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_dir: Directory for nullgeo.log
    """
    directory = Path(log_dir)
    directory.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(directory / 'nullgeo.log', encoding='utf-8'),
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments"""
    parser = argparse.ArgumentParser(
        prog='nullgeo',
        description='Numerical verification of lightlike hypersurface identities',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Verify every applicable suite of a built-in fixture
  nullgeo verify --spec null_hyperplane

  # One suite, JSON report
  nullgeo verify --spec fixtures/kaehler_flat.json --suite kaehler --report out.json

  # More random points, fixed seed, looser curvature tolerance
  nullgeo verify --spec my_spec.json --points 100 --seed 3 --tol-curvature 1e-3

  # List built-in fixtures
  nullgeo fixtures

Exit codes:
  0 all evaluated identities pass    1 an identity failed
  2 spec schema error                3 spec invariant violated
  4 numerical failure
"""
    )
    parser.add_argument('--version', action='version', version=f'nullgeo {__version__}')
    parser.add_argument(
        '--config',
        type=str,
        default=None,
        help='Path to configuration file (default: config/nullgeo_config.yaml)'
    )
    parser.add_argument(
        '--verbose',
        action='store_true',
        help='Enable debug logging'
    )
    parser.add_argument(
        '--log-dir',
        type=str,
        default=None,
        help='Directory for the log file and run log (default: from config)'
    )

    subparsers = parser.add_subparsers(dest='command', required=True)

    verify = subparsers.add_parser('verify', help='Run identity suites on a GeometrySpec')
    verify.add_argument(
        '--spec',
        type=str,
        required=True,
        help='GeometrySpec JSON file or built-in fixture id'
    )
    verify.add_argument(
        '--suite',
        type=str,
        default='all',
        choices=['all'] + SUITE_NAMES,
        help='Suite to run (default: all suites the spec declares)'
    )
    verify.add_argument(
        '--points',
        type=int,
        default=None,
        help='Number of seeded random points added to the uniform grid'
    )
    verify.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Seed for random points and vectors'
    )
    verify.add_argument(
        '--tol-curvature',
        type=float,
        default=None,
        help='Override the curvature tier tolerance'
    )
    verify.add_argument(
        '--report',
        type=str,
        default=None,
        help='Write the report to this path (.json or .md); bare file names go to the reports directory'
    )

    subparsers.add_parser('fixtures', help='List built-in GeometrySpecs')

    return parser.parse_args(argv)


def select_suites(spec: GeometrySpec, suite: str) -> List[str]:
    """Suites to run, in fixed order"""
    if suite == 'all':
        return [name for name in SUITE_NAMES if name in spec.suites]
    return [suite]


def build_run_grid(spec: GeometrySpec, config: NullGeoConfig,
                   points: Optional[int] = None, seed: Optional[int] = None) -> SampleGrid:
    """
    Sample grid with CLI > spec > config precedence

    Args:
        spec: Loaded spec
        config: Run defaults
        points: --points override for the random point count
        seed: --seed override
    """
    per_axis = spec.points_per_axis if spec.points_per_axis is not None else config.grid.points_per_axis
    count = points if points is not None else config.grid.random_points
    if seed is None:
        seed = spec.seed if spec.seed is not None else config.grid.seed
    return build_grid(spec.ranges, per_axis, count, seed)


def validate_geometry(context: VerificationContext):
    """
    Run-wide preconditions: lightlike at every sample point, admissible ambient

    Raises:
        NotLightlikeError: Rank of the induced metric is not n somewhere
        DegenerateScreenError: Screen fields do not complement the radical
        AmbientInvariantError: Ambient symmetry, signature or Kaehler violation
    """
    hypersurface = context.hypersurface
    for p in context.points:
        hypersurface.objects(p)
    context.ambient.check_invariants(context.ambient_points(), context.tolerance('algebraic'))
    logger.info(f"Geometry preconditions hold at {len(context.points)} points")


def run_verification(spec: GeometrySpec, config: NullGeoConfig, suites: List[str],
                     grid: SampleGrid, tolerance_overrides: Optional[Dict[str, float]] = None,
                     registry: Optional[IdentityRegistry] = None,
                     run_logger: Optional[RunLogger] = None) -> VerificationReport:
    """
    Run suites and assemble the report

    Errors raised before any suite runs propagate; errors inside a suite
    are recorded on the report and decide the exit code.

    Args:
        spec: Loaded spec
        config: Run defaults
        suites: Suite names in run order
        grid: Sample points
        tolerance_overrides: CLI tolerances
        registry: Identity registry (default: the packaged one)
        run_logger: Optional structured run log

    Returns:
        VerificationReport with exit_code set
    """
    started = time.perf_counter()
    registry = registry or get_registry()
    handler = ErrorHandler()
    context = VerificationContext(spec, config, grid, tolerance_overrides)

    report = VerificationReport(spec.spec_id, spec.fingerprint)
    report.set_settings(suites, grid.seed, grid.grid_count, grid.random_count, context.tolerances)
    if run_logger:
        run_logger.log_run_start(spec.spec_id, spec.fingerprint, suites, grid.seed)

    validate_geometry(context)

    errors = []
    for name in suites:
        suite = SUITES[name](context, registry)
        if run_logger:
            run_logger.log_suite("suite_start", name)
        success, results, error = safe_execute(suite.run)
        if not success:
            results = suite.aborted(error)
        error = error or suite.error
        if error is not None:
            details = handler.handle_error(error)
            errors.append(details)
            report.add_finding(name, f"suite error ({details['error_type']}): {details['message']}")
            if run_logger:
                run_logger.log_error(details['error_type'], details['message'], {"suite": name})
        report.add_results(results)
        if run_logger:
            for result in results:
                run_logger.log_verdict(result)
            run_logger.log_suite("suite_end", name, {
                verdict: sum(1 for r in results if r.verdict == verdict)
                for verdict in ("pass", "fail", "skipped")
            })

    for finding in context.findings:
        report.add_finding(finding.identity_id, finding.message)
        if run_logger:
            run_logger.log_finding(finding.identity_id, finding.message)
    for key, value in context.metadata.items():
        report.add_metadata(key, value)
    if spec.negative:
        report.add_metadata("negative_fixture", spec.negative)

    if errors:
        report.exit_code = errors[0]["exit_code"]
    elif report.count("fail"):
        report.exit_code = EXIT_IDENTITY_FAILURE
    else:
        report.exit_code = EXIT_OK
    report.elapsed_seconds = time.perf_counter() - started
    logger.info(f"Verification finished: {report.summary}")
    return report


def print_report(report: VerificationReport):
    """Human-readable report on stdout"""
    ui = UIFormatter()
    print(ui.header(f"nullgeo {__version__}: {report.spec_id}"))
    print(ui.key_value_pair("fingerprint", report.fingerprint[:16]))
    print(ui.key_value_pair("seed", str(report.settings.get("seed"))))
    print(ui.key_value_pair("points", f"{report.settings.get('grid_points')} grid + "
                                      f"{report.settings.get('random_points')} random"))

    current_suite = None
    for entry in report.identities:
        if entry["suite"] != current_suite:
            current_suite = entry["suite"]
            print(ui.subheader(current_suite))
        print(ui.verdict_line(entry["id"], entry["verdict"], entry["max_residual"], entry["tolerance"],
                              entry.get("skipped_reason"), name=entry.get("name")))

    if report.findings:
        print(ui.subheader("findings"))
        for finding in report.findings:
            print(ui.warning(f"{finding['id']}: {finding['message']}", indent=2))

    summary = report.summary
    print(ui.subheader("summary"))
    line = f"{summary['passed']} passed, {summary['failed']} failed, {summary['skipped']} skipped"
    if summary['exit_code'] == EXIT_OK:
        print(ui.success(line, indent=2))
    else:
        print(ui.failure(f"{line} (exit {summary['exit_code']})", indent=2))


def print_fixtures():
    """Table of built-in specs"""
    ui = UIFormatter()
    rows = [[spec.spec_id, spec.describe_suites(), fixture_note(spec), spec.description]
            for spec in list_fixture_specs()]
    print(ui.header("built-in fixtures"))
    print(ui.table(["id", "suites", "notes", "description"], rows))


def cmd_verify(args: argparse.Namespace, config: NullGeoConfig, log_dir: str) -> int:
    handler = ErrorHandler()
    run_logger = RunLogger(log_dir) if config.logging.run_log else None

    try:
        spec = load_spec(args.spec)
        suites = select_suites(spec, args.suite)
        grid = build_run_grid(spec, config, args.points, args.seed)
        overrides = {'curvature': args.tol_curvature} if args.tol_curvature is not None else {}
        report = run_verification(spec, config, suites, grid, overrides, run_logger=run_logger)
    except Exception as e:
        details = handler.handle_error(e)
        if run_logger:
            run_logger.log_error(details['error_type'], details['message'], details.get('context', {}))
        print(UIFormatter.failure(f"{details['error_type']}: {details['message']}"), file=sys.stderr)
        for hint in details['hints']:
            print(f"  hint: {hint}", file=sys.stderr)
        return details['exit_code']

    print_report(report)

    if args.report:
        path = Path(args.report)
        if not path.is_absolute() and path.parent == Path('.'):
            path = Path(config.reports.directory) / path
        format = None if path.suffix in ('.md', '.json') else config.reports.default_format
        ReportGenerator().save_report(report, str(path), format)
        print(UIFormatter.success(f"Report saved to {path}"))

    return report.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = parse_arguments(argv)

    try:
        config = load_config(args.config)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_SCHEMA

    log_dir = args.log_dir or config.logging.directory
    setup_logging("DEBUG" if args.verbose else config.logging.level, log_dir)
    logger.debug(f"nullgeo {__version__} started with {args}")

    if args.command == 'fixtures':
        print_fixtures()
        return EXIT_OK

    return cmd_verify(args, config, log_dir)


if __name__ == '__main__':
    sys.exit(main())

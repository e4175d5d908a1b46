# --- Python Standard Library Imports ---
import logging
from pathlib import Path

# --- Third-Party Library Imports ---
from django.core.management.base import BaseCommand, CommandError

# --- Local Application Imports ---
from IFS.conf import spectral_setting
from IFS.exceptions import ParseError, SpectralError
from IFS.models import ProblemRecord, RunRecord
from IFS.problem_service import ProblemFile, parse_problem
from IFS.report_service import RunReport, write_csv_side_files, write_report
from IFS.utils import worker_pool

# Get a logger instance for this file.
logger = logging.getLogger(__name__)

EXIT_FAIL = 1
EXIT_ERROR = 2


def resolve_problem_path(value: str) -> Path:
    """A path as given, or a name looked up in SPECTRAL['PROBLEMS_DIR'] (with or without .json)."""
    path = Path(value)
    if path.exists():
        return path
    problems_dir = spectral_setting("PROBLEMS_DIR")
    if problems_dir:
        for candidate in (Path(problems_dir) / value, Path(problems_dir) / f"{value}.json"):
            if candidate.exists():
                return candidate
    raise ParseError(f"problem file {value} not found")


class SpectralCommand(BaseCommand):
    """
    Shared plumbing for the analysis commands: the problem argument, common flags,
    JSON/CSV output, optional persistence and the exit code.

    Subclasses implement add_command_arguments() and run(problem, options).
    Exit codes: 0 pass, 1 FAIL verdict, 2 usage or validation error.
    """
    # example51 makes the problem optional.
    problem_required = True

    def add_arguments(self, parser):
        if self.problem_required:
            parser.add_argument('problem', help='Problem file (JSON) or a name under PROBLEMS_DIR.')
        else:
            parser.add_argument('--problem', help='Problem file (JSON); defaults to the built-in example.')
        parser.add_argument('--out', help='Write the JSON report here (and CSV side files next to it).')
        parser.add_argument('--save', action='store_true', help='Store the report as a RunRecord.')
        parser.add_argument('--workers', type=int, help='Worker threads (default SPECTRAL["WORKERS"]).')
        parser.add_argument('--seed', type=int, help='Seed for every stochastic stage.')
        parser.add_argument('--precision', type=int, help='Significant digits in CSV files.')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, problem: ProblemFile, options) -> RunReport:
        raise NotImplementedError

    def load_problem(self, options):
        value = options.get('problem')
        if value is None:
            return None
        return parse_problem(resolve_problem_path(value))

    def handle(self, *args, **options):
        if options.get('workers') is not None and options['workers'] < 1:
            raise CommandError("--workers must be >= 1", returncode=EXIT_ERROR)
        worker_pool.configure(options.get('workers'))
        try:
            problem = self.load_problem(options)
            report = self.run(problem, options)
        except SpectralError as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise CommandError(f"{type(e).__name__}: {e}", returncode=EXIT_ERROR) from e
        finally:
            worker_pool.configure(None)

        out = options.get('out')
        text = write_report(report, out)
        if out:
            write_csv_side_files(out, report.tables, options.get('precision'))
        else:
            self.stdout.write(text, ending='')

        if options.get('save'):
            self.save(report, problem)

        if not report.passed:
            failed = sorted(name for name, verdict in report.verdicts.items() if verdict == 'FAIL')
            raise CommandError(f"verdict {report.verdict}: failed stages {failed}", returncode=EXIT_FAIL)

    def save(self, report: RunReport, problem: ProblemFile = None):
        record = None
        if problem is not None:
            record = ProblemRecord.objects.create(name=problem.name, problem=problem.to_dict())
        run = RunRecord.from_report(report, problem=record)
        logger.info(f"Saved run {run.id} ({report.subcommand}, {report.verdict}).")

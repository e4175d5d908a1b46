import json

from django.core.management.base import CommandError

from IFS.lattice_service import UnimodularMatrix
from IFS.pipeline_logic import run_conjugate

from ._base import EXIT_ERROR, SpectralCommand


class Command(SpectralCommand):
    help = "Conjugates the triple by unimodular M and checks the defect and Fourier transform are preserved."

    def add_command_arguments(self, parser):
        parser.add_argument('--matrix', help='Unimodular M as JSON, e.g. "[[1,1],[0,1]]" (default: M of the problem).')
        parser.add_argument('--random', type=int, default=0, help='Also check this many random unimodular matrices.')
        parser.add_argument('--points', type=int, default=20, help='Random points for the Fourier comparison.')

    def run(self, problem, options):
        M = None
        if options['matrix']:
            try:
                M = UnimodularMatrix(json.loads(options['matrix']))
            except json.JSONDecodeError as e:
                raise CommandError(f"--matrix is not valid JSON: {e}", returncode=EXIT_ERROR)
        return run_conjugate(problem, M=M, random_count=options['random'], points=options['points'],
                             seed=options['seed'])

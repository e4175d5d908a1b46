from IFS.pipeline_logic import run_simulate_paths
from IFS.problem_service import parse_invariant_sets

from ._base import SpectralCommand


class Command(SpectralCommand):
    help = "Monte Carlo of the path measure: h_F estimates, total mass and the Ruelle residual."

    def add_command_arguments(self, parser):
        parser.add_argument('--sets', required=True, help='Invariant-set file (JSON).')
        parser.add_argument('--paths', type=int, help='Number of paths per start point.')
        parser.add_argument('--steps', type=int, help='Steps per path.')
        parser.add_argument('--no-ruelle', action='store_true', help='Skip the Ruelle residual (computed from the same paths, split by first digit).')

    def run(self, problem, options):
        sets_file = parse_invariant_sets(options['sets'], problem.triple)
        return run_simulate_paths(problem, sets_file, paths=options['paths'], steps=options['steps'],
                                  seed=options['seed'], ruelle=not options['no_ruelle'])

from IFS.pipeline_logic import run_attractor

from ._base import SpectralCommand


class Command(SpectralCommand):
    help = "Depth-K point cloud and bounding box of the forward (B) or dual (L) attractor."

    def add_command_arguments(self, parser):
        parser.add_argument('--depth', type=int, default=8, help='Number of digits per point.')
        parser.add_argument('--side', choices=['B', 'L'], default='B', help='B: X_B under R; L: X_L under R^T.')
        parser.add_argument('--strict', action='store_true', help='Fail instead of clamping the depth to the budget.')
        parser.add_argument('--samples', type=int,
                            help='Also check invariance of the measure with this many Monte Carlo samples.')

    def run(self, problem, options):
        return run_attractor(problem, options['depth'], side=options['side'], strict=options['strict'],
                             samples=options['samples'], seed=options['seed'])

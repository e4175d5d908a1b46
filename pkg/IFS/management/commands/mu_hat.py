from django.core.management.base import CommandError

from IFS.pipeline_logic import run_mu_hat

from ._base import EXIT_ERROR, SpectralCommand


class Command(SpectralCommand):
    help = "Evaluates the Fourier transform of the invariant measure at points or on a grid."

    def add_command_arguments(self, parser):
        parser.add_argument('--point', action='append', nargs='+', type=float,
                            help='A point (repeatable), e.g. --point 0.5 0.25')
        parser.add_argument('--grid', nargs=3, metavar=('LO', 'HI', 'STEPS'),
                            help='Regular grid [LO, HI]^d with STEPS points per axis.')
        parser.add_argument('--product-depth', type=int, help='Factors in the truncated product (default: automatic).')

    def run(self, problem, options):
        grid = None
        if options['grid']:
            lo, hi, steps = options['grid']
            try:
                grid = (float(lo), float(hi), int(steps))
            except ValueError as e:
                raise CommandError(f"--grid expects LO HI STEPS: {e}", returncode=EXIT_ERROR)
        return run_mu_hat(problem, points=options['point'], grid=grid, depth=options['product_depth'])

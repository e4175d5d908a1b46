from IFS.pipeline_logic import run_certify

from ._base import SpectralCommand
from .build_spectrum import spectrum_spec_from_options


class Command(SpectralCommand):
    help = "Parseval certification of a candidate spectrum, with an optional orthogonality check."

    def add_command_arguments(self, parser):
        parser.add_argument('--spectrum', required=True, help='Spectrum spec file (JSON).')
        parser.add_argument('--spectrum-depth', type=int, help='Override the generation depth in the spectrum file.')
        parser.add_argument('--grid-steps', type=int, help='Regular grid in [0,1]^d with this many points per axis.')
        parser.add_argument('--grid-count', type=int, default=20, help='Random grid points in [0,1]^d (plus 0).')
        parser.add_argument('--product-depth', type=int, help='Factors in the truncated product (default: automatic).')
        parser.add_argument('--tol-certify', type=float, help='Allowed |s_n(x) - 1|.')
        parser.add_argument('--orthogonality-radius', type=float,
                            help='Check |μ̂(λ - λ′)| over pairs with ‖λ - λ′‖∞ up to this radius.')
        parser.add_argument('--extrapolate', action='store_true',
                            help='Judge s_n(x) plus a geometric estimate of the truncated tail instead of s_n(x).')

    def run(self, problem, options):
        return run_certify(
            problem,
            spectrum_spec_from_options(options),
            grid_steps=options['grid_steps'],
            grid_count=options['grid_count'],
            product_depth=options['product_depth'],
            tol=options['tol_certify'],
            orthogonality_radius=options['orthogonality_radius'],
            extrapolate=options['extrapolate'],
            seed=options['seed'],
        )

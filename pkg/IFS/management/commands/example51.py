from IFS.pipeline_logic import run_example51_pipeline

from ._base import SpectralCommand


class Command(SpectralCommand):
    help = ("Runs the two-dimensional worked example end to end. "
            "Prints SPECTRAL-EVIDENCE when every stage passes; this is evidence, not a proof.")
    problem_required = False

    def add_command_arguments(self, parser):
        parser.add_argument('--skip-montecarlo', action='store_true', help='Deterministic stages only.')
        parser.add_argument('--spectrum-depth', type=int, help='Depth of Λ(R×{0}) (default 6).')
        parser.add_argument('--lambda1-depth', type=int, help='Depth of Λ1 (default 6).')
        parser.add_argument('--cycle-max-len', type=int, help='Longest cycle word (default 4).')
        parser.add_argument('--paths', type=int, help='Paths per start point.')
        parser.add_argument('--steps', type=int, help='Steps per path.')
        parser.add_argument('--product-depth', type=int, help='Factors in the truncated product (default: automatic).')
        parser.add_argument('--tol-certify', type=float, help='Allowed Parseval deviation.')
        parser.add_argument('--tol-unitary', type=float, help='Allowed unitarity defect.')

    def run(self, problem, options):
        return run_example51_pipeline(
            problem,
            skip_montecarlo=options['skip_montecarlo'],
            spectrum_depth=options['spectrum_depth'],
            lambda1_depth=options['lambda1_depth'],
            cycle_max_len=options['cycle_max_len'],
            paths=options['paths'],
            steps=options['steps'],
            seed=options['seed'],
            product_depth=options['product_depth'],
            tol_certify=options['tol_certify'],
            tol_unitary=options['tol_unitary'],
        )

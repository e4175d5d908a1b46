from IFS.pipeline_logic import run_check_hadamard

from ._base import SpectralCommand


class Command(SpectralCommand):
    help = "Builds the Hadamard matrix of (R, B, L), its unitarity defect and the partition residual."

    def add_command_arguments(self, parser):
        parser.add_argument('--tol-unitary', type=float, help='Acceptance tolerance for the unitarity defect.')
        parser.add_argument('--search', action='store_true',
                            help='Also search every Hadamard completion L of (R, B) over residues mod S Z^d.')

    def run(self, problem, options):
        return run_check_hadamard(problem, tol=options['tol_unitary'], search=options['search'], seed=options['seed'])

from IFS.pipeline_logic import run_find_cycles

from ._base import SpectralCommand


class Command(SpectralCommand):
    help = "Enumerates the W_B-cycles of the dual system, with Γ and the rejected lattice candidates."

    def add_command_arguments(self, parser):
        parser.add_argument('--cycle-max-len', type=int, help='Longest cycle word to try (default 4).')
        parser.add_argument('--no-filter', action='store_true', help='Skip the Γ ∩ box candidate filter.')
        parser.add_argument('--spectrum-depth', type=int, help='Also generate each cycle spectrum to this depth.')

    def run(self, problem, options):
        return run_find_cycles(problem, m_max=options['cycle_max_len'], use_filter=not options['no_filter'],
                               spectrum_depth=options['spectrum_depth'])

from dataclasses import replace

from IFS.pipeline_logic import run_build_spectrum
from IFS.problem_service import parse_spectrum_spec

from ._base import SpectralCommand


def spectrum_spec_from_options(options):
    spec = parse_spectrum_spec(options['spectrum'])
    if options.get('spectrum_depth') is not None:
        spec = replace(spec, depth=options['spectrum_depth'])
    return spec


class Command(SpectralCommand):
    help = "Generates a truncated candidate spectrum (cycle, subspace, explicit or generated)."

    def add_command_arguments(self, parser):
        parser.add_argument('--spectrum', required=True, help='Spectrum spec file (JSON).')
        parser.add_argument('--spectrum-depth', type=int, help='Override the generation depth in the spectrum file.')

    def run(self, problem, options):
        return run_build_spectrum(problem, spectrum_spec_from_options(options), seed=options['seed'])

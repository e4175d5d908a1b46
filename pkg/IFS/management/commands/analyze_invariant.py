import json
from dataclasses import replace

from django.core.management.base import CommandError

from IFS.lattice_service import UnimodularMatrix, to_vector
from IFS.pipeline_logic import run_analyze_invariant
from IFS.problem_service import AnalysisSpec, parse_analysis

from ._base import EXIT_ERROR, SpectralCommand


class Command(SpectralCommand):
    help = "Invariant translates R^r × {y0}: witnesses, escape traces and subspace-spectrum conditions."

    def add_command_arguments(self, parser):
        parser.add_argument('--analysis', help='Analysis spec file (JSON).')
        parser.add_argument('--r', type=int, help='Sub-dimension r (when no analysis file is given).')
        parser.add_argument('--y0', nargs='+', help="Translate to analyze, as rationals ('1/2').")
        parser.add_argument('--matrix', help='Conjugating unimodular M as JSON, e.g. "[[4,-1],[1,0]]".')
        parser.add_argument('--max-steps', type=int, help='Steps of the escape trace (default 10).')
        parser.add_argument('--lambda1-depth', type=int, help='Depth of the default Λ1 (default 6).')

    def run(self, problem, options):
        if options['analysis']:
            analysis = parse_analysis(options['analysis'])
        elif options['r'] is not None:
            analysis = AnalysisSpec(r=options['r'])
        else:
            raise CommandError("analyze_invariant needs --analysis or --r", returncode=EXIT_ERROR)

        if options['y0']:
            analysis = replace(analysis, y0=to_vector(options['y0']))
        if options['matrix']:
            try:
                analysis = replace(analysis, M=UnimodularMatrix(json.loads(options['matrix'])))
            except json.JSONDecodeError as e:
                raise CommandError(f"--matrix is not valid JSON: {e}", returncode=EXIT_ERROR)
        elif analysis.M is None and problem.M is not None:
            analysis = replace(analysis, M=problem.M)
        if options['max_steps'] is not None:
            analysis = replace(analysis, max_steps=options['max_steps'])
        if options['lambda1_depth'] is not None:
            analysis = replace(analysis, lambda1=replace(analysis.lambda1, depth=options['lambda1_depth']))
        return run_analyze_invariant(problem, analysis, seed=options['seed'])

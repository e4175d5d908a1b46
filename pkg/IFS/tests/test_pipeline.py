import numpy as np
from django.test import SimpleTestCase

from IFS.lattice_service import UnimodularMatrix
from IFS.pipeline_logic import (
    conjugation_check,
    run_check_hadamard,
    run_conjugate,
    run_example51_pipeline,
    run_simulate_paths,
)
from IFS.problem_service import invariant_sets_from_dict
from IFS.report_service import STOCHASTIC

from .helpers import load_problem, load_triple


def example51_report(problem=None, **overrides):
    options = dict(skip_montecarlo=True, spectrum_depth=2, lambda1_depth=6, cycle_max_len=3, seed=1)
    options.update(overrides)
    return run_example51_pipeline(problem, **options)


class Example51PipelineTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.report = example51_report(spectrum_depth=6)

    def test_every_deterministic_stage_passes(self):
        self.assertEqual(self.report.verdicts, {
            'hadamard': 'PASS',
            'invariant': 'PASS',
            'cycles': 'PASS',
            'spectrum': 'PASS',
            'parseval': 'PASS',
            'montecarlo': 'SKIPPED',
        })
        self.assertEqual(self.report.verdict, 'SPECTRAL-EVIDENCE')

    def test_gamma_basis(self):
        self.assertEqual(self.report.results['gamma']['basis'], [[1, 0], [0, 0.5]])

    def test_conjugated_candidates_escape(self):
        traces = self.report.results['invariant']['conjugated']['traces']
        self.assertEqual(len(traces), 4)
        self.assertTrue(all(t['status'] == 'ESCAPED' for t in traces))

    def test_spectrum_sizes(self):
        spectrum = self.report.results['spectrum']['spectrum']
        self.assertEqual(spectrum['size'], 2 ** 6 * 4 ** 6)
        self.assertTrue(spectrum['nested'])

    def test_parseval_grid_and_table(self):
        certification = self.report.results['parseval']
        self.assertEqual(certification.grid.shape, (25, 2))
        self.assertTrue(certification.monotone)
        header, rows = self.report.tables['parseval']
        self.assertEqual(header[:2], ['x1', 'x2'])
        self.assertEqual(len(rows), 25)

    def test_parseval_passes_only_with_the_tail_estimate(self):
        certification = self.report.results['parseval']
        self.assertEqual(certification.criterion, 'extrapolated')
        # The truncated mass roughly halves per depth, so s_6 alone is still short of 1.
        self.assertGreater(certification.max_deviation, certification.tolerance)
        self.assertLess(certification.extrapolated_deviation, certification.tolerance)
        by_depth = certification.truncation['deviation_by_depth']
        self.assertEqual(len(by_depth), 7)
        self.assertTrue(all(a >= b for a, b in zip(by_depth, by_depth[1:])))
        self.assertLess(certification.truncation['tail_rate_max'], 1.0)

    def test_montecarlo_is_marked_stochastic(self):
        self.assertEqual(self.report.stages['montecarlo'], STOCHASTIC)

    def test_problem_file_matches_builtin(self):
        builtin = example51_report()
        from_file = example51_report(load_problem('example51'))
        self.assertEqual(from_file.verdicts, builtin.verdicts)
        self.assertEqual(from_file.verdicts['spectrum'], 'PASS')

    def test_same_inputs_same_report(self):
        first = example51_report()
        again = example51_report()
        self.assertEqual(again.to_json(include_timing=False), first.to_json(include_timing=False))

    def test_shallow_spectrum_cannot_be_extrapolated(self):
        report = example51_report()
        self.assertEqual(report.verdicts['parseval'], 'FAIL')
        self.assertIsNone(report.results['parseval'].extrapolated_deviation)


class Example51MonteCarloTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.report = example51_report(skip_montecarlo=False, paths=2000, steps=24)

    def test_montecarlo_stage_passes(self):
        self.assertEqual(self.report.verdicts['montecarlo'], 'PASS')
        self.assertEqual(self.report.stages['montecarlo'], STOCHASTIC)

    def test_every_start_has_its_records(self):
        starts = self.report.results['montecarlo']['starts']
        self.assertEqual(len(starts), 5)
        for entry in starts:
            self.assertEqual({'hF', 'mass', 'ruelle'} - set(entry), set())
            self.assertTrue(entry['hF_passed'])
            self.assertEqual(sum(e['n_paths'] for e in entry['ruelle']['image_estimates']), 2000)


class BrokenExampleTests(SimpleTestCase):

    def test_hadamard_failure_stops_the_run(self):
        report = example51_report(load_problem('example51_broken'))
        self.assertEqual(list(report.verdicts), ['hadamard'])
        self.assertEqual(report.verdict, 'FAIL')
        self.assertNotIn('gamma', report.results)


class CheckHadamardRunTests(SimpleTestCase):

    def test_control_triple(self):
        report = run_check_hadamard(load_problem('control_nonhadamard'))
        self.assertEqual(report.verdicts, {'hadamard': 'FAIL', 'partition': 'FAIL'})
        self.assertGreater(report.results['partition']['residual_at_zero'], 0.5)

    def test_params_override_settings(self):
        report = run_check_hadamard(load_problem('example51'), tol=0.5)
        self.assertEqual(report.results['hadamard']['tolerance'], 0.5)


class ConjugationTests(SimpleTestCase):

    def test_given_matrix(self):
        check = conjugation_check(load_triple('example51'), UnimodularMatrix([[4, -1], [1, 0]]),
                                  np.random.default_rng(0).random((10, 2)))
        self.assertTrue(check['passed'], check)
        self.assertEqual(check['B'], [[0, 0], [-2, 0], [0, 1], [-2, 1]])

    def test_random_matrices(self):
        report = run_conjugate(load_problem('example51'), random_count=10, points=10, seed=3)
        self.assertEqual(report.verdicts['random'], 'PASS')
        self.assertEqual(len(report.results['random']), 10)


class SimulatePathsRunTests(SimpleTestCase):

    def test_hits_table_and_stages(self):
        problem = load_problem('quarter_cantor')
        sets_file = invariant_sets_from_dict(
            {'sets': [{'kind': 'cycle', 'word': [[0]], 'label': 'origin'}], 'starts': [['1/4']]},
            problem.triple,
        )
        report = run_simulate_paths(problem, sets_file, paths=300, steps=32, seed=2, ruelle=False)
        self.assertEqual(report.verdicts, {'start0': 'PASS'})
        header, rows = report.tables['hits']
        self.assertEqual(header, ['start', 'set', 'estimate', 'stderr'])
        self.assertEqual(rows[0][:2], ['0', 'origin'])

    def test_runs_are_reproducible(self):
        problem = load_problem('quarter_cantor')
        sets_file = invariant_sets_from_dict({'sets': [{'kind': 'cycle', 'word': [[0]]}]}, problem.triple)
        first = run_simulate_paths(problem, sets_file, paths=100, steps=16, seed=8, ruelle=False)
        second = run_simulate_paths(problem, sets_file, paths=100, steps=16, seed=8, ruelle=False)
        self.assertEqual(first.to_json(include_timing=False), second.to_json(include_timing=False))
        self.assertEqual(len(first.verdicts), 5)

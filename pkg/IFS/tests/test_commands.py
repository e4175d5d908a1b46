import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from IFS.models import ProblemRecord, RunRecord

from .helpers import PROBLEMS_DIR, problem_path


def run(*args, **options) -> dict:
    """Runs a command and returns its JSON report from stdout."""
    out = StringIO()
    call_command(*args, stdout=out, **options)
    return json.loads(out.getvalue())


class CheckHadamardCommandTests(SimpleTestCase):

    def test_worked_example_passes(self):
        report = run('check_hadamard', problem_path('example51'))
        self.assertEqual(report['verdict'], 'PASS')
        self.assertTrue(report['results']['hadamard']['accepted'])
        self.assertLess(report['results']['partition']['max_residual'], 1e-12)
        self.assertEqual(report['stages']['partition'], 'deterministic')

    def test_problem_name_lookup(self):
        report = run('check_hadamard', 'quarter_cantor')
        self.assertEqual(report['inputs']['problem']['name'], 'quarter_cantor')

    def test_broken_example_exits_with_fail(self):
        with self.assertRaises(CommandError) as caught:
            call_command('check_hadamard', problem_path('example51_broken'), stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 1)

    def test_invalid_problem_exits_with_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'identity.json'
            path.write_text(json.dumps({'R': [[1]], 'B': [[0], [1]], 'L': [[0], [2]]}), encoding='utf-8')
            with self.assertRaises(CommandError) as caught:
                call_command('check_hadamard', str(path), stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)
        self.assertIn('not expanding', str(caught.exception))

    def test_missing_problem_file(self):
        with self.assertRaises(CommandError) as caught:
            call_command('check_hadamard', 'no_such_problem', stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)

    def test_workers_must_be_positive(self):
        with self.assertRaises(CommandError) as caught:
            call_command('check_hadamard', 'example51', workers=0, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)

    def test_completion_search_on_a_failing_triple(self):
        out = StringIO()
        with self.assertRaises(CommandError) as caught:
            call_command('check_hadamard', 'middle_third', search=True, stdout=out)
        self.assertEqual(caught.exception.returncode, 1)
        self.assertEqual(json.loads(out.getvalue())['results']['completions'], [])


class AnalysisCommandTests(SimpleTestCase):

    def test_mu_hat_points(self):
        report = run('mu_hat', 'quarter_cantor', point=[[0.0], [2.0]])
        values = report['results']['mu_hat']['values']
        self.assertAlmostEqual(values[0][0], 1.0)
        self.assertLess(abs(complex(*values[1])), 1e-12)

    def test_mu_hat_needs_points(self):
        with self.assertRaises(CommandError) as caught:
            call_command('mu_hat', 'quarter_cantor', stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)

    def test_attractor_writes_points_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'cloud.json'
            call_command('attractor', 'quarter_cantor', depth=3, out=str(out), stdout=StringIO())
            report = json.loads(out.read_text(encoding='utf-8'))
            lines = (Path(tmp) / 'cloud.points.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(report['results']['cloud']['size'], 8)
        self.assertEqual(lines[0], 'x1')
        self.assertEqual(len(lines), 9)

    def test_find_cycles(self):
        report = run('find_cycles', 'example51', cycle_max_len=3)
        self.assertEqual(report['results']['cycles']['count'], 1)
        self.assertEqual(report['results']['gamma']['basis'], [['1', '0'], ['0', '1/2']])

    def test_certify_generated_spectrum(self):
        report = run('certify', 'quarter_cantor', spectrum=str(PROBLEMS_DIR / 'quarter_cantor_spectrum.json'),
                     orthogonality_radius=256)
        self.assertEqual(report['verdicts'], {'parseval': 'PASS', 'orthogonality': 'PASS'})
        self.assertTrue(report['results']['parseval']['monotone'])

    def test_certify_with_extrapolated_tail(self):
        report = run('certify', 'quarter_cantor', spectrum=str(PROBLEMS_DIR / 'quarter_cantor_spectrum.json'),
                     extrapolate=True)
        self.assertEqual(report['verdicts'], {'parseval': 'PASS'})
        parseval = report['results']['parseval']
        self.assertEqual(parseval['criterion'], 'extrapolated')
        self.assertLess(parseval['extrapolated_deviation'], parseval['tolerance'])
        self.assertTrue(report['inputs']['extrapolate'])

    def test_certify_shallow_spectrum_fails(self):
        with self.assertRaises(CommandError) as caught:
            call_command('certify', 'quarter_cantor', spectrum=str(PROBLEMS_DIR / 'quarter_cantor_spectrum.json'),
                         spectrum_depth=1, tol_certify=1e-6, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 1)

    def test_build_spectrum_writes_spectrum_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'spectrum.json'
            call_command('build_spectrum', 'quarter_cantor', spectrum=str(PROBLEMS_DIR / 'quarter_cantor_spectrum.json'),
                         spectrum_depth=2, out=str(out), stdout=StringIO())
            lines = (Path(tmp) / 'spectrum.spectrum.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 'first_depth,lambda1')
        self.assertEqual(lines[1:], ['0,0', '1,2', '2,8', '2,10'])

    def test_analyze_invariant_on_worked_example(self):
        report = run('analyze_invariant', 'example51', analysis=str(PROBLEMS_DIR / 'example51_analysis.json'))
        self.assertEqual(report['verdicts']['original'], 'PASS')
        conjugated = report['results']['conjugated']
        self.assertEqual(conjugated['candidates'], [['0'], ['2'], ['4'], ['6']])
        self.assertTrue(all(t['trace']['status'] == 'ESCAPED' for t in conjugated['translates']))

    def test_conjugate_random_matrices(self):
        report = run('conjugate', 'example51', random=5, points=10)
        self.assertEqual(report['verdicts'], {'given': 'PASS', 'random': 'PASS'})

    def test_simulate_paths(self):
        report = run('simulate_paths', 'quarter_cantor', sets=str(PROBLEMS_DIR / 'quarter_cantor_sets.json'),
                     paths=400, steps=32, seed=3, no_ruelle=True)
        self.assertEqual(set(report['stages'].values()), {'seeded-stochastic'})
        self.assertEqual(len(report['verdicts']), 2)


class SaveTests(TestCase):

    def test_save_stores_problem_and_run(self):
        run('check_hadamard', 'example51', save=True)
        run_record = RunRecord.objects.get()
        self.assertEqual(run_record.subcommand, 'check_hadamard')
        self.assertEqual(run_record.verdict, 'PASS')
        self.assertEqual(run_record.problem.name, 'example51')
        self.assertEqual(ProblemRecord.objects.count(), 1)

    def test_failed_runs_are_saved_too(self):
        with self.assertRaises(CommandError):
            call_command('check_hadamard', 'example51_broken', save=True, stdout=StringIO())
        self.assertEqual(RunRecord.objects.get().verdict, 'FAIL')

import json
import tempfile
from fractions import Fraction
from pathlib import Path

from django.test import SimpleTestCase

from IFS.exceptions import DimensionMismatch, ParseError, ValidationError
from IFS.forms import ProblemForm
from IFS.problem_service import (
    analysis_from_dict,
    invariant_set_from_dict,
    invariant_sets_from_dict,
    parse_invariant_sets,
    parse_problem,
    parse_spectrum_spec,
    problem_from_dict,
    serialize_problem,
    spectrum_spec_from_dict,
)

from .helpers import PROBLEMS_DIR, load_problem, load_triple

QUARTER_CANTOR = {'R': [[4]], 'B': [[0], [1]], 'L': [[0], [2]]}


class ProblemFileTests(SimpleTestCase):

    def test_worked_example(self):
        problem = load_problem('example51')
        self.assertEqual(problem.name, 'example51')
        self.assertEqual(problem.dim, 2)
        self.assertEqual(problem.triple.N, 4)
        self.assertEqual(problem.M.to_list(), [[4, -1], [1, 0]])
        self.assertEqual(problem.param('spectrum_depth'), 6)
        self.assertIsNone(problem.param('paths'))

    def test_identity_is_not_expanding(self):
        with self.assertRaisesMessage(ValidationError, 'not expanding'):
            problem_from_dict({**QUARTER_CANTOR, 'R': [[1]]})

    def test_zero_digit_required(self):
        with self.assertRaisesMessage(ValidationError, '0 ∈ B required'):
            problem_from_dict({**QUARTER_CANTOR, 'B': [[1], [2]]})

    def test_digit_counts_must_match(self):
        with self.assertRaisesMessage(ValidationError, '#B = #L required'):
            problem_from_dict({**QUARTER_CANTOR, 'L': [[0], [2], [3]]})

    def test_dimension_field_must_agree(self):
        with self.assertRaises(ValidationError):
            problem_from_dict({**QUARTER_CANTOR, 'dimension': 2})

    def test_unknown_params(self):
        with self.assertRaisesMessage(ValidationError, 'Unknown params'):
            problem_from_dict({**QUARTER_CANTOR, 'params': {'colour': 3}})

    def test_missing_matrix(self):
        form = ProblemForm(data={'B': [[0]], 'L': [[0]]})
        self.assertFalse(form.is_valid())
        self.assertIn('R', form.errors)

    def test_conjugator_must_be_unimodular(self):
        with self.assertRaises(ValidationError):
            problem_from_dict({**QUARTER_CANTOR, 'M': [[2]]})

    def test_name_defaults_to_file_stem(self):
        problem = problem_from_dict(QUARTER_CANTOR, source='/tmp/cantor4.json')
        self.assertEqual(problem.name, 'cantor4')

    def test_serialize_is_canonical(self):
        problem = load_problem('example51')
        text = serialize_problem(problem)
        self.assertEqual(serialize_problem(problem_from_dict(json.loads(text))), text)
        self.assertEqual(json.loads(text)['L'], [[0, 0], [2, 0], [2, 1], [0, 5]])

    def test_unreadable_files(self):
        with self.assertRaises(ParseError):
            parse_problem(PROBLEMS_DIR / 'does_not_exist.json')
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.json'
            path.write_text('{"R": [[4]],', encoding='utf-8')
            with self.assertRaises(ParseError):
                parse_problem(path)
            path.write_text('[1, 2]', encoding='utf-8')
            with self.assertRaises(ParseError):
                parse_problem(path)


class SideFileTests(SimpleTestCase):

    def test_subspace_spectrum_spec(self):
        spec = parse_spectrum_spec(PROBLEMS_DIR / 'example51_subspace_spectrum.json')
        self.assertEqual(spec.kind, 'subspace')
        self.assertEqual(spec.r, 1)
        self.assertEqual(spec.y0, (Fraction(0),))
        self.assertEqual(spec.lambda1.depth, 6)

    def test_generated_spectrum_spec(self):
        spec = parse_spectrum_spec(PROBLEMS_DIR / 'quarter_cantor_spectrum.json')
        self.assertEqual(spec.kind, 'generated')
        self.assertEqual(spec.points, [(Fraction(0),)])

    def test_explicit_spectrum_needs_elements(self):
        with self.assertRaises(ValidationError):
            spectrum_spec_from_dict({'kind': 'explicit', 'elements': []})

    def test_unknown_spectrum_kind(self):
        with self.assertRaises(ValidationError):
            spectrum_spec_from_dict({'kind': 'lattice'})

    def test_rational_elements(self):
        spec = spectrum_spec_from_dict({'kind': 'explicit', 'elements': [['1/3', 2]]})
        self.assertEqual(spec.points, [(Fraction(1, 3), Fraction(2))])

    def test_analysis_needs_r(self):
        with self.assertRaises(ValidationError):
            analysis_from_dict({'max_steps': 3})

    def test_analysis_defaults(self):
        analysis = analysis_from_dict({'r': 1, 'y0': ['1/2']})
        self.assertEqual(analysis.y0, (Fraction(1, 2),))
        self.assertEqual(analysis.lambda1.depth, 6)
        self.assertEqual(analysis.max_steps, 10)
        self.assertIsNone(analysis.M)

    def test_integer_fields_reject_floats(self):
        with self.assertRaises(ValidationError):
            analysis_from_dict({'r': 1.5})

    def test_invariant_sets_file(self):
        sets_file = parse_invariant_sets(PROBLEMS_DIR / 'example51_sets.json', load_triple('example51'))
        self.assertEqual([s.label for s in sets_file.sets], ['Rx0'])
        self.assertEqual(sets_file.sets[0].r, 1)
        self.assertEqual(sets_file.starts, [])

    def test_cycle_given_by_word(self):
        sets_file = invariant_sets_from_dict(
            {'sets': [{'kind': 'cycle', 'word': [[0], [2]]}], 'starts': [['1/2']]},
            load_triple('quarter_cantor'),
        )
        self.assertEqual(sets_file.sets[0].points, ((Fraction(8, 15),), (Fraction(2, 15),)))
        self.assertEqual(sets_file.starts, [[0.5]])

    def test_intersection_indices_are_checked(self):
        with self.assertRaises(ValidationError):
            invariant_sets_from_dict(
                {'sets': [{'kind': 'full'}], 'intersections': [{'sets': [0, 3], 'set': {'kind': 'empty'}}]},
                load_triple('quarter_cantor'),
            )

    def test_sets_required(self):
        with self.assertRaises(ValidationError):
            invariant_sets_from_dict({'sets': []}, load_triple('quarter_cantor'))

    def test_subspace_set_needs_r(self):
        with self.assertRaisesMessage(ValidationError, "'r'"):
            invariant_set_from_dict({'kind': 'subspace', 'y0': ['0']}, load_triple('example51'))

    def test_subspace_set_r_in_range(self):
        for r in (0, 2):
            with self.assertRaises(ValidationError):
                invariant_set_from_dict({'kind': 'subspace', 'r': r, 'y0': []}, load_triple('example51'))

    def test_subspace_set_translate_length(self):
        with self.assertRaises(DimensionMismatch):
            invariant_set_from_dict({'kind': 'subspace', 'r': 1, 'y0': ['0', '1']}, load_triple('example51'))

    def test_subspace_set(self):
        F = invariant_set_from_dict({'kind': 'subspace', 'r': 1, 'y0': ['1/2']}, load_triple('example51'))
        self.assertEqual((F.r, F.y0), (1, (Fraction(1, 2),)))

from fractions import Fraction
from itertools import product

from django.test import SimpleTestCase

from IFS.exceptions import NoFixedDigit, NotInvariant, ValidationError
from IFS.hadamard_service import HadamardTriple
from IFS.lattice_service import DigitSet, ExpandingMatrix, UnimodularMatrix, conjugate_triple
from IFS.subspace_service import (
    FAIL,
    candidate_translates,
    check_corollary_conditions,
    check_invariant_translate,
    check_theorem_conditions,
    decompose,
    default_lambda1,
    f_product,
    fiber_mu_hat,
    fixed_digits,
    subspace_spectrum,
    trace_escape,
)

from .helpers import load_triple

ZERO = (Fraction(0),)


def conjugated_example():
    return conjugate_triple(UnimodularMatrix([[4, -1], [1, 0]]), load_triple('example51'))


class DecompositionTests(SimpleTestCase):

    def test_worked_example_blocks(self):
        decomposition = decompose(load_triple('example51'), 1)
        self.assertEqual(decomposition.S1, ((4,),))
        self.assertEqual(decomposition.C, ((0,),))
        self.assertEqual(decomposition.projections, ((0,), (1,)))
        self.assertEqual(decomposition.fibers, (((0,), (2,)), ((4,), (6,))))
        self.assertEqual(decomposition.N2, (2, 2))
        self.assertTrue(decomposition.has_equal_fibers())

    def test_sub_dimension_range(self):
        triple = load_triple('example51')
        for r in (0, 2):
            with self.assertRaises(ValidationError):
                decompose(triple, r)

    def test_non_invariant_subspace(self):
        # S = R^T = [[2, 0], [1, 2]] moves R×{0} off itself.
        square = DigitSet([[0, 0], [1, 0], [0, 1], [1, 1]])
        triple = HadamardTriple.build(ExpandingMatrix([[2, 1], [0, 2]]), square, square)
        with self.assertRaises(NotInvariant):
            decompose(triple, 1)

    def test_first_digits(self):
        decomposition = decompose(load_triple('example51'), 1)
        self.assertEqual(decomposition.first_digits((0,)), [(0,), (2,)])
        self.assertEqual(decomposition.first_digits((5,)), [(0,)])


class FiberMeasureTests(SimpleTestCase):

    def setUp(self):
        self.decomposition = decompose(load_triple('example51'), 1)

    def test_fiber_transform_at_zero(self):
        self.assertAlmostEqual(fiber_mu_hat(self.decomposition, (0, 1, 0), [0.0], 3), 1.0)

    def test_fiber_transform_zero(self):
        # S2 = 4, so the first factor is m(1/4, 0) = (1 + e^{iπ}) / 2.
        self.assertLess(abs(fiber_mu_hat(self.decomposition, (0,), [1.0], 1)), 1e-12)

    def test_prefix_shorter_than_depth(self):
        with self.assertRaises(ValidationError):
            fiber_mu_hat(self.decomposition, (0, 1), [0.3], 3)

    def test_prefix_average_is_the_wtilde_product(self):
        for y in (0.3, 1.7, 5.25):
            average = sum(abs(fiber_mu_hat(self.decomposition, prefix, [y], 6)) ** 2
                          for prefix in product(range(2), repeat=6)) / 2 ** 6
            self.assertAlmostEqual(average, f_product(self.decomposition, [y], 6), places=12)

    def test_f_product_refinement(self):
        self.assertAlmostEqual(f_product(self.decomposition, [0.0]), 1.0)
        for y in (0.3, 2.6):
            refined = float(self.decomposition.wtilde([y / 4])) * f_product(self.decomposition, [y / 4], 40)
            self.assertAlmostEqual(f_product(self.decomposition, [y], 40), refined, places=10)


class InvariantTranslateTests(SimpleTestCase):

    def test_zero_translate_is_invariant(self):
        report = check_invariant_translate(load_triple('example51'), 1, [0])
        self.assertTrue(report.invariant)
        branches = {b.digit: b.branch for b in report.branches}
        self.assertEqual(branches[(0, 0)], 'maps-into')
        self.assertEqual(branches[(2, 0)], 'maps-into')
        self.assertEqual(branches[(2, 1)], 'vanishes')
        self.assertEqual(branches[(0, 5)], 'vanishes')
        self.assertTrue(report.wtilde_periodic)

    def test_translate_at_one_is_not_invariant(self):
        report = check_invariant_translate(load_triple('example51'), 1, [1])
        self.assertFalse(report.invariant)

    def test_fixed_digits(self):
        self.assertEqual(fixed_digits(load_triple('example51'), 1, [0]), [(0, 0), (2, 0)])
        self.assertEqual(fixed_digits(load_triple('example51'), 1, [1]), [])


class EscapeTraceTests(SimpleTestCase):

    def test_translate_at_one_escapes(self):
        trace = trace_escape(load_triple('example51'), 1, [1])
        self.assertEqual(trace.chain[:3], ((Fraction(1),), (Fraction(1, 2),), (Fraction(1, 8),)))
        self.assertEqual(trace.status, 'ESCAPED')

    def test_zero_translate_is_periodic(self):
        trace = trace_escape(load_triple('example51'), 1, [0])
        self.assertEqual(trace.chain, (ZERO,))
        self.assertEqual(trace.status, 'PERIODIC')
        self.assertTrue(trace.closure_closed)

    def test_conjugated_candidates(self):
        candidates = candidate_translates(conjugated_example(), 1)
        self.assertEqual(candidates, [(Fraction(v),) for v in (0, 2, 4, 6)])

    def test_conjugated_candidates_all_escape(self):
        triple = conjugated_example()
        candidates = candidate_translates(triple, 1)
        expected = {
            0: (0, 5, Fraction(5, 4), Fraction(5, 16)),
            2: (2, 1, Fraction(1, 4)),
            4: (4, 1, Fraction(1, 4)),
            6: (6, 2, 1),
        }
        for y0, chain in expected.items():
            trace = trace_escape(triple, 1, [y0], 10, candidates)
            self.assertEqual(trace.status, 'ESCAPED', y0)
            self.assertEqual(trace.chain[:len(chain)], tuple((Fraction(v),) for v in chain), y0)


class ConditionTests(SimpleTestCase):

    def setUp(self):
        self.triple = load_triple('example51')
        self.decomposition = decompose(self.triple, 1)
        self.lambda1 = default_lambda1(self.decomposition, (0,), 6)

    def test_default_lambda1(self):
        self.assertEqual(len(self.lambda1), 2 ** 6)
        self.assertIn((Fraction(2 + 8),), self.lambda1.element_set())

    def test_corollary_conditions_hold(self):
        report = check_corollary_conditions(self.triple, 1, self.lambda1, seed=1)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(report.fixed_digit, (0, 0))
        self.assertEqual(report.L1, [(0,), (2,)])
        self.assertEqual(set(report.conditions),
                         {'parseval', 'containment', 'periodicity', 'no_overlap', 'hadamard_subtriple'})

    def test_theorem_adds_equal_fibers(self):
        report = check_theorem_conditions(self.triple, 1, [0], self.lambda1, seed=1)
        self.assertEqual(report.conditions['equal_fibers']['status'], 'PASS')

    def test_wrong_first_block_spectrum_fails(self):
        wrong = default_lambda1(self.decomposition, (5,), 3)
        report = check_corollary_conditions(self.triple, 1, wrong, seed=1)
        self.assertFalse(report.passed)
        self.assertEqual(report.conditions['parseval']['status'], FAIL)

    def test_no_fixed_digit(self):
        with self.assertRaises(NoFixedDigit):
            check_theorem_conditions(self.triple, 1, [1], self.lambda1)

    def test_subspace_spectrum(self):
        report = check_theorem_conditions(self.triple, 1, [0], self.lambda1, seed=1)
        spectrum = subspace_spectrum(self.triple, 1, [0], self.lambda1, 2, report=report)
        self.assertEqual(len(spectrum), 2 ** 6 * 16)
        self.assertTrue(spectrum.is_integral())
        self.assertEqual(spectrum.provenance['kind'], 'subspace')

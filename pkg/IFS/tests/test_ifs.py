from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, override_settings

from IFS.conf import DEFAULTS
from IFS.exceptions import BudgetExceeded, DimensionMismatch, ValidationError
from IFS.ifs_service import (
    AffineIfs,
    apply_map,
    attractor_cloud,
    bounding_box,
    exact_partial_sums,
    invariance_residual,
    sample_invariant_measure,
    truncation_radius,
)
from IFS.lattice_service import DigitSet, ExpandingMatrix
from IFS.utils import worker_pool

from .helpers import load_triple


def quarter_cantor() -> AffineIfs:
    return AffineIfs(ExpandingMatrix([[4]]), DigitSet([[0], [2]]))


class AttractorCloudTests(SimpleTestCase):

    def test_cloud_size_and_points(self):
        cloud = attractor_cloud(quarter_cantor(), 3)
        self.assertEqual(len(cloud), 8)
        self.assertEqual(cloud.depth, 3)
        self.assertIn((Fraction(2, 4) + Fraction(2, 16) + Fraction(2, 64),), cloud.points())

    def test_points_match_exact_partial_sums(self):
        ifs = load_triple('example51').forward_ifs()
        cloud = attractor_cloud(ifs, 3)
        self.assertEqual(sorted(cloud.points()), exact_partial_sums(ifs, 3))

    def test_depth_is_clamped_to_budget(self):
        with self.assertLogs('IFS.ifs_service', level='WARNING'):
            cloud = attractor_cloud(quarter_cantor(), 12, budget=2 ** 8)
        self.assertEqual(cloud.depth, 8)
        self.assertEqual(cloud.requested_depth, 12)

    def test_strict_budget_raises(self):
        with self.assertRaises(BudgetExceeded):
            attractor_cloud(quarter_cantor(), 12, budget=2 ** 8, strict=True)

    def test_depth_must_be_positive(self):
        with self.assertRaises(ValidationError):
            attractor_cloud(quarter_cantor(), 0)

    def test_hausdorff_bound_shrinks_with_depth(self):
        shallow = attractor_cloud(quarter_cantor(), 2)
        deep = attractor_cloud(quarter_cantor(), 5)
        self.assertLess(deep.hausdorff_bound, shallow.hausdorff_bound)
        self.assertAlmostEqual(deep.hausdorff_bound, truncation_radius(quarter_cantor(), 5))


class BoundingBoxTests(SimpleTestCase):

    def test_diagonal_box_is_exact(self):
        box = bounding_box(quarter_cantor())
        self.assertEqual(box.lo, (Fraction(0),))
        self.assertEqual(box.hi, (Fraction(2, 3),))

    def test_dual_box_of_worked_example(self):
        box = bounding_box(load_triple('example51').dual_ifs())
        self.assertEqual(box.hi, (Fraction(2, 3), Fraction(5, 3)))

    def test_negative_scaling(self):
        ifs = AffineIfs(ExpandingMatrix([[-2]]), DigitSet([[0], [1]]))
        box = bounding_box(ifs)
        self.assertEqual((box.lo, box.hi), ((Fraction(-2, 3),), (Fraction(1, 3),)))

    def test_non_diagonal_box_contains_cloud(self):
        ifs = AffineIfs(ExpandingMatrix([[2, 1], [0, 2]]), DigitSet([[0, 0], [1, 0], [0, 1], [1, 1]]))
        box = bounding_box(ifs)
        for point in attractor_cloud(ifs, 6).points():
            self.assertTrue(box.contains(point))

    def test_apply_map_dimension(self):
        with self.assertRaises(DimensionMismatch):
            apply_map(quarter_cantor(), 0, [0, 0])


class InvariantMeasureTests(SimpleTestCase):

    def test_samples_lie_in_the_box(self):
        sample = sample_invariant_measure(quarter_cantor(), 20, 5000, seed=3)
        self.assertEqual(len(sample), 5000)
        self.assertTrue(np.all(sample.points >= 0))
        self.assertTrue(np.all(sample.points <= 2 / 3 + 1e-12))

    @override_settings(SPECTRAL={**DEFAULTS, 'CHUNK_SIZE': 1000})
    def test_samples_do_not_depend_on_worker_count(self):
        single = sample_invariant_measure(quarter_cantor(), 12, 4000, seed=11)
        worker_pool.configure(4)
        try:
            threaded = sample_invariant_measure(quarter_cantor(), 12, 4000, seed=11)
        finally:
            worker_pool.configure(None)
        np.testing.assert_array_equal(single.points, threaded.points)

    def test_invariance_residual_passes(self):
        residual = invariance_residual(load_triple('example51').forward_ifs(), [0.3, 1.7], 16, 20000, seed=5)
        self.assertTrue(residual.passed, residual)

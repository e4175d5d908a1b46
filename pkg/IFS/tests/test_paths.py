from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, override_settings

from IFS.conf import DEFAULTS
from IFS.exceptions import DimensionMismatch, ValidationError
from IFS.fourier_service import generate_spectrum
from IFS.path_service import (
    InvariantSetSpec,
    estimate_hF,
    ruelle_residual,
    simulate_paths,
    total_mass_check,
)
from IFS.utils import worker_pool

from .helpers import load_triple

ORIGIN = InvariantSetSpec(kind='cycle', points=((Fraction(0),),), label='origin')


class InvariantSetTests(SimpleTestCase):

    def test_unknown_kind(self):
        with self.assertRaises(ValidationError):
            InvariantSetSpec(kind='torus')

    def test_cycle_needs_points(self):
        with self.assertRaises(ValidationError):
            InvariantSetSpec(kind='cycle')

    def test_subspace_distance(self):
        F = InvariantSetSpec.subspace(1, [0])
        distances = F.distance(np.array([[5.0, 0.0], [1.0, -0.25]]))
        np.testing.assert_allclose(distances, [0.0, 0.25])
        self.assertEqual(F.label, 'R^1x{0}')

    def test_subspace_needs_its_sub_dimension(self):
        with self.assertRaises(ValidationError):
            InvariantSetSpec(kind='subspace', y0=(Fraction(0),))
        with self.assertRaises(ValidationError):
            InvariantSetSpec(kind='subspace', r=0, y0=(Fraction(0),))

    def test_subspace_distance_checks_state_dimension(self):
        F = InvariantSetSpec.subspace(1, [0])
        with self.assertRaises(DimensionMismatch):
            F.distance(np.array([[5.0, 0.0, 1.0]]))

    def test_union_takes_the_nearest_member(self):
        F = InvariantSetSpec(kind='union', members=(InvariantSetSpec.subspace(1, [0]), InvariantSetSpec.subspace(1, [1])))
        np.testing.assert_allclose(F.distance(np.array([[0.0, 0.9]])), [0.1])


class SimulationTests(SimpleTestCase):

    def test_same_seed_same_paths(self):
        triple = load_triple('example51')
        first = simulate_paths([0.3, 0.7], triple, 16, 500, seed=9)
        second = simulate_paths([0.3, 0.7], triple, 16, 500, seed=9)
        np.testing.assert_array_equal(first.words, second.words)
        np.testing.assert_array_equal(first.final_states, second.final_states)

    def test_streams_are_independent(self):
        triple = load_triple('example51')
        first = simulate_paths([0.3, 0.7], triple, 16, 500, seed=9, stream=(1,))
        second = simulate_paths([0.3, 0.7], triple, 16, 500, seed=9, stream=(2,))
        self.assertFalse(np.array_equal(first.words, second.words))

    @override_settings(SPECTRAL={**DEFAULTS, 'CHUNK_SIZE': 128})
    def test_paths_do_not_depend_on_worker_count(self):
        triple = load_triple('quarter_cantor')
        single = simulate_paths([0.3], triple, 12, 600, seed=4)
        worker_pool.configure(3)
        try:
            threaded = simulate_paths([0.3], triple, 12, 600, seed=4)
        finally:
            worker_pool.configure(None)
        np.testing.assert_array_equal(single.words, threaded.words)

    def test_first_step_frequency(self):
        # P(l = 0) = W_B(0.3 / 4) = cos²(0.075π).
        ensemble = simulate_paths([0.3], load_triple('quarter_cantor'), 4, 4000, seed=1)
        self.assertAlmostEqual(ensemble.cylinder_frequency([0]), np.cos(0.075 * np.pi) ** 2, delta=0.02)

    def test_tail_length(self):
        ensemble = simulate_paths([0.3], load_triple('quarter_cantor'), 10, 20, seed=1)
        self.assertEqual(ensemble.tail_states.shape, (20, 3, 1))
        self.assertEqual(ensemble.words.shape, (20, 10))

    def test_start_dimension(self):
        with self.assertRaises(DimensionMismatch):
            simulate_paths([0.3], load_triple('example51'), 4, 10)

    def test_counts_must_be_positive(self):
        with self.assertRaises(ValidationError):
            simulate_paths([0.3], load_triple('quarter_cantor'), 0, 10)


class HitProbabilityTests(SimpleTestCase):

    def test_full_and_empty_sets(self):
        triple = load_triple('example51')
        self.assertEqual(estimate_hF([0.1, 0.2], triple, InvariantSetSpec(kind='full'), n_paths=10).estimate, 1.0)
        self.assertEqual(estimate_hF([0.1, 0.2], triple, InvariantSetSpec(kind='empty'), n_paths=10).estimate, 0.0)

    def test_quarter_cantor_paths_reach_the_origin(self):
        estimate = estimate_hF([0.3], load_triple('quarter_cantor'), ORIGIN, n_steps=48, n_paths=2000, seed=3)
        self.assertGreater(estimate.estimate, 0.99)
        self.assertTrue(estimate.dichotomy_ok)

    def test_ruelle_identity_for_the_whole_space(self):
        report = ruelle_residual([0.4, 0.1], load_triple('example51'), InvariantSetSpec(kind='full'), n_paths=10)
        self.assertLess(report.residual, 1e-12)
        self.assertTrue(report.passed)

    def test_ruelle_identity_for_the_origin(self):
        report = ruelle_residual([0.3], load_triple('quarter_cantor'), ORIGIN, n_steps=48, n_paths=500, seed=2)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(len(report.image_estimates), 2)

    def test_stratified_ruelle_for_the_whole_space(self):
        triple = load_triple('example51')
        ensemble = simulate_paths([0.4, 0.1], triple, 8, 5000, seed=3)
        report = ruelle_residual([0.4, 0.1], triple, InvariantSetSpec(kind='full'), ensemble=ensemble)
        self.assertLess(report.residual, 1e-12)
        self.assertTrue(report.passed)

    def test_stratified_ruelle_for_the_origin(self):
        triple = load_triple('quarter_cantor')
        ensemble = simulate_paths([0.3], triple, 48, 2000, seed=2)
        report = ruelle_residual([0.3], triple, ORIGIN, ensemble=ensemble)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(sum(e.n_paths for e in report.image_estimates), 2000)
        self.assertEqual(report.start_estimate.n_paths, 2000)
        self.assertAlmostEqual(report.start_estimate.estimate,
                               estimate_hF([0.3], triple, ORIGIN, ensemble=ensemble).estimate)

    def test_stratified_ruelle_needs_the_same_start(self):
        triple = load_triple('quarter_cantor')
        ensemble = simulate_paths([0.3], triple, 8, 50, seed=2)
        with self.assertRaises(ValidationError):
            ruelle_residual([0.6], triple, ORIGIN, ensemble=ensemble)


class TotalMassTests(SimpleTestCase):

    def test_origin_carries_all_mass(self):
        triple = load_triple('quarter_cantor')
        spectrum = generate_spectrum(triple.S, triple.L, [[0]], 8)
        report = total_mass_check([0.3], triple, [ORIGIN], n_steps=48, n_paths=2000, seed=5, spectra=[spectrum])
        self.assertTrue(report.passed, report.to_dict())
        self.assertAlmostEqual(report.per_set['origin'], report.mass)
        self.assertTrue(report.union_formula['consistent'])

    def test_full_space_shortcut(self):
        report = total_mass_check([0.3], load_triple('quarter_cantor'), [InvariantSetSpec(kind='full')])
        self.assertEqual(report.mass, 1.0)
        self.assertEqual(report.unclassified, 0.0)

    def test_needs_a_set(self):
        with self.assertRaises(ValidationError):
            total_mass_check([0.3], load_triple('quarter_cantor'), [])

    def test_intersection_consistency(self):
        triple = load_triple('quarter_cantor')
        report = total_mass_check([0.3], triple, [ORIGIN, InvariantSetSpec(kind='empty', label='none')],
                                  n_steps=24, n_paths=300, seed=6,
                                  intersections=[(0, 1, InvariantSetSpec(kind='empty'))])
        self.assertTrue(report.intersections[0]['consistent'])

import unittest

import numpy as np

from diracalg import (FourMomentum, anticommutation_residual, anticommutator, component_kg_check,
                      dirac_suite, gamma5, gamma_basis, kg_factorization_residual, random_momenta,
                      random_unitaries, sigma_spin, similarity_transform, slash, symmetrization_check)
from errors import InvalidIndex, Unsupported


class TestGammaBasis(unittest.TestCase):

    def setUp(self):
        self.basis = gamma_basis()

    def test_squares(self):
        np.testing.assert_array_equal(self.basis[0] @ self.basis[0], np.eye(4))
        for k in (1, 2, 3):
            np.testing.assert_array_equal(self.basis[k] @ self.basis[k], -np.eye(4))

    def test_dirac_representation(self):
        np.testing.assert_array_equal(self.basis[0], np.diag([1, 1, -1, -1]))
        self.assertEqual(self.basis.representation, 'dirac')

    def test_anticommutators(self):
        np.testing.assert_array_equal(anticommutator(self.basis, 0, 0), 2 * np.eye(4))
        np.testing.assert_array_equal(anticommutator(self.basis, 1, 1), -2 * np.eye(4))
        np.testing.assert_array_equal(anticommutator(self.basis, 0, 1), np.zeros((4, 4)))
        self.assertEqual(anticommutation_residual(self.basis), 0.0)

    def test_invalid_index_and_representation(self):
        for mu in (4, -1, 1.0, True):
            with self.assertRaises(InvalidIndex):
                self.basis[mu]
        with self.assertRaises(Unsupported):
            gamma_basis('weyl')

    def test_gamma5(self):
        g5 = gamma5(self.basis)
        np.testing.assert_allclose(g5 @ g5, np.eye(4), atol=1e-15)
        for mu in range(4):
            np.testing.assert_allclose(g5 @ self.basis[mu] + self.basis[mu] @ g5, np.zeros((4, 4)), atol=1e-15)

    def test_spin_matrices(self):
        spin = sigma_spin()
        np.testing.assert_array_equal(spin[2], np.diag([1, -1, 1, -1]))
        for s in spin:
            np.testing.assert_array_equal(s, s.conj().T)

    def test_traceless(self):
        self.assertEqual(dirac_suite(self.basis, 1, 1, 1)['trace_max'], 0.0)


class TestKleinGordonReduction(unittest.TestCase):

    def setUp(self):
        self.basis = gamma_basis()

    def test_rest_frame_factorization_is_exact(self):
        self.assertEqual(kg_factorization_residual(self.basis, FourMomentum((2.0, 0.0, 0.0, 0.0), m=1.0)), 0.0)

    def test_lightlike_momentum(self):
        pm = FourMomentum((1.0, 1.0, 0.0, 0.0), m=0.0)
        self.assertEqual(pm.square(), 0.0)
        self.assertLess(kg_factorization_residual(self.basis, pm), 1e-15)
        np.testing.assert_allclose(slash(self.basis, pm.vector) @ slash(self.basis, pm.vector),
                                   np.zeros((4, 4)), atol=1e-15)

    def test_random_momenta(self):
        rng = np.random.default_rng(0xD1AC)
        for pm in random_momenta(1000, rng):
            self.assertLess(kg_factorization_residual(self.basis, pm), 1e-12)

    def test_component_checks(self):
        self.assertEqual(component_kg_check(self.basis, FourMomentum((2.0, 0.0, 0.0, 0.0), m=1.0)), [True] * 4)
        # E = 0 and m = |p| gives the factor p^2 - m^2 = -2 m^2
        self.assertEqual(component_kg_check(self.basis, FourMomentum((0.0, 3.0, 4.0, 0.0), m=5.0)), [True] * 4)
        rng = np.random.default_rng(0xD1AC)
        for pm in random_momenta(100, rng):
            self.assertEqual(component_kg_check(self.basis, pm), [True] * 4)

    def test_symmetrization(self):
        self.assertLess(symmetrization_check(self.basis, (1.0, 2.0, 3.0, 4.0)), 1e-14)
        self.assertEqual(symmetrization_check(self.basis, (0.0, 0.0, 0.0, 0.0)), 0.0)
        rng = np.random.default_rng(0xD1AC)
        for p in rng.uniform(-10, 10, size=(20, 4)):
            self.assertLess(symmetrization_check(self.basis, p), 1e-12)

    def test_four_momentum_validation(self):
        with self.assertRaises(ValueError):
            FourMomentum((1.0, 2.0, 3.0))
        with self.assertRaises(ValueError):
            FourMomentum((1.0, float('nan'), 0.0, 0.0))


class TestSimilarityInvariance(unittest.TestCase):

    def test_unitary_transforms_preserve_algebra(self):
        basis = gamma_basis()
        rng = np.random.default_rng(0xD1AC)
        for s in random_unitaries(20, rng):
            np.testing.assert_allclose(s @ s.conj().T, np.eye(4), atol=1e-12)
            self.assertLess(anticommutation_residual(similarity_transform(basis, s)), 1e-12)

    def test_suite_is_deterministic(self):
        first = dirac_suite(n_momenta=200, n_components=50, n_unitaries=5)
        second = dirac_suite(n_momenta=200, n_components=50, n_unitaries=5)
        self.assertEqual(first, second)
        self.assertTrue(first['anticommutation_pass'])
        self.assertLess(first['factorization_max_residual'], 1e-12)
        self.assertEqual(first['component_pass'], [True] * 4)
        self.assertLess(first['similarity_max_residual'], 1e-12)


if __name__ == '__main__':
    unittest.main()

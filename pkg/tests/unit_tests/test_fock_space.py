import math
import unittest
import sys
from pathlib import Path

import numpy as np

# --- Adjust path to import modules from src ---
repo_root = Path(__file__).resolve().parent.parent.parent
src_root = repo_root / "src"
if str(src_root) not in sys.path:
    sys.path.insert(0, str(src_root))

from mixbec.modules.Errors import DimensionError, NumericalError, SectorTooLargeError
from mixbec.modules.FockSpace import (SectorState, TruncatedFockState, annihilation_matrix, check_ccr,
                                      check_number_bounds, coherent_state, creation_matrix,
                                      displaced_number_moments, enumerate_sector_basis, number_expectation,
                                      poisson_tail_deficit, product_state, sector_dimension, smeared_operator,
                                      species_commutator_residual, weyl_displacement_check)


def random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def random_sector(rng, M, n1, n2):
    dim = sector_dimension(M, n1) * sector_dimension(M, n2)
    return SectorState(M, n1, n2, random_vector(rng, dim)).normalize()


def random_truncated_state(rng, M, cutoffs):
    """Random weights on a random subset of sectors, always including both top sectors."""
    m1, m2 = cutoffs
    labels = {(m1, int(rng.integers(0, m2 + 1))), (int(rng.integers(0, m1 + 1)), m2)}
    labels |= {(n1, n2) for n1 in range(m1 + 1) for n2 in range(m2 + 1) if rng.random() < 0.5}
    ordered = sorted(labels)
    weights = rng.dirichlet(np.ones(len(ordered)))
    sectors = {}
    for w, (n1, n2) in zip(weights, ordered):
        unit = random_sector(rng, M, n1, n2)
        sectors[(n1, n2)] = SectorState(M, n1, n2, math.sqrt(w) * unit.coefficients)
    return TruncatedFockState(M, cutoffs, sectors)


class TestSectorBasis(unittest.TestCase):

    def test_two_modes_two_particles(self):
        basis = enumerate_sector_basis(2, 2)
        self.assertEqual([basis.state_of(k) for k in range(len(basis))], [(2, 0), (1, 1), (0, 2)])
        self.assertEqual(basis.index[(1, 1)], 1)

    def test_sizes(self):
        self.assertEqual(enumerate_sector_basis(4, 2).dimension, 10)
        single = enumerate_sector_basis(1, 5)
        self.assertEqual(single.dimension, 1)
        self.assertEqual(single.state_of(0), (5,))
        for M, n in ((3, 4), (4, 6), (2, 0)):
            basis = enumerate_sector_basis(M, n)
            self.assertEqual(basis.dimension, math.comb(n + M - 1, M - 1))
            self.assertTrue(np.all(basis.occupations.sum(axis=1) == n))
            self.assertEqual(len(basis.index), basis.dimension)

    def test_descending_order(self):
        occupations = [tuple(r) for r in enumerate_sector_basis(3, 3).occupations]
        self.assertEqual(occupations, sorted(occupations, reverse=True))

    def test_limit(self):
        with self.assertRaises(SectorTooLargeError) as ctx:
            enumerate_sector_basis(4, 10, limit=100)
        self.assertEqual(ctx.exception.dimension, 286)
        with self.assertRaises(DimensionError):
            enumerate_sector_basis(0, 1)

    def test_table_dump(self):
        table = enumerate_sector_basis(2, 1).to_table()
        self.assertEqual(len(table.rows), 2)


class TestLadderOperators(unittest.TestCase):

    def test_creation_on_vacuum(self):
        a = creation_matrix(1, 3, 0).toarray()
        self.assertEqual(a.shape, (3, 1))
        target = enumerate_sector_basis(3, 1).index[(0, 1, 0)]
        self.assertEqual(a[target, 0], 1.0)
        self.assertEqual(np.count_nonzero(a), 1)

    def test_creation_amplitude(self):
        a = creation_matrix(0, 3, 1).toarray()
        source = enumerate_sector_basis(3, 1).index[(1, 0, 0)]
        target = enumerate_sector_basis(3, 2).index[(2, 0, 0)]
        self.assertAlmostEqual(a[target, source], math.sqrt(2))

    def test_annihilation_amplitudes(self):
        b = annihilation_matrix(0, 3, 2).toarray()
        source = enumerate_sector_basis(3, 2).index[(2, 0, 0)]
        target = enumerate_sector_basis(3, 1).index[(1, 0, 0)]
        self.assertAlmostEqual(b[target, source], math.sqrt(2))
        self.assertEqual(annihilation_matrix(0, 3, 1).toarray()[0, 0], 1.0)

    def test_adjoint_pair(self):
        for M, n in ((2, 0), (3, 2), (4, 3)):
            for i in range(M):
                np.testing.assert_array_equal(annihilation_matrix(i, M, n + 1).toarray(),
                                              creation_matrix(i, M, n).toarray().T)

    def test_number_recovery(self):
        M, n = 3, 3
        occupations = enumerate_sector_basis(M, n).occupations
        for i in range(M):
            number = (creation_matrix(i, M, n - 1) @ annihilation_matrix(i, M, n)).toarray()
            np.testing.assert_allclose(number, np.diag(occupations[:, i]), atol=1e-14)

    def test_errors(self):
        with self.assertRaises(DimensionError):
            annihilation_matrix(0, 2, 0)
        with self.assertRaises(DimensionError):
            creation_matrix(3, 3, 1)
        with self.assertRaises(DimensionError):
            smeared_operator(np.ones(2), "create", 3, 1)
        with self.assertRaises(ValueError):
            smeared_operator(np.ones(3), "destroy", 3, 1)

    def test_smeared_unit_vector(self):
        e = np.array([0, 1.0, 0])
        np.testing.assert_allclose(smeared_operator(e, "create", 3, 2).toarray(), creation_matrix(1, 3, 2).toarray())
        np.testing.assert_allclose(smeared_operator(e, "annihilate", 3, 2).toarray(),
                                   annihilation_matrix(1, 3, 2).toarray())

    def test_annihilate_one_particle(self):
        rng = np.random.default_rng(1)
        h_d = 0.5
        f, g = random_vector(rng, 4), random_vector(rng, 4)
        one_particle = np.sqrt(h_d) * g
        out = smeared_operator(f, "annihilate", 4, 1, h_d) @ one_particle
        self.assertEqual(out.shape, (1,))
        self.assertAlmostEqual(complex(out[0]), complex(h_d * np.vdot(f, g)))

    def test_creation_bound(self):
        rng = np.random.default_rng(2)
        M, h_d = 3, 0.25
        for trial in range(200):
            n = trial % 5
            f = random_vector(rng, M)
            psi = random_vector(rng, sector_dimension(M, n))
            lhs = np.linalg.norm(smeared_operator(f, "create", M, n, h_d) @ psi)
            rhs = math.sqrt(h_d) * np.linalg.norm(f) * math.sqrt(n + 1) * np.linalg.norm(psi)
            self.assertLessEqual(lhs, rhs + 1e-10)


class TestCCR(unittest.TestCase):

    def test_unit_vectors(self):
        e = np.array([1.0, 0, 0])
        residuals = check_ccr(e, e, 3)
        self.assertLessEqual(residuals.mixed, 1e-12)
        self.assertLessEqual(residuals.annihilators, 1e-12)

    def test_orthogonal(self):
        residuals = check_ccr(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), 3)
        self.assertLessEqual(residuals.mixed, 1e-12)

    def test_random(self):
        rng = np.random.default_rng(1234)
        f, g = random_vector(rng, 3), random_vector(rng, 3)
        residuals = check_ccr(f, g, 4, cell_volume=0.5, states_per_sector=10, rng=rng)
        self.assertEqual(residuals.states_tested, 50)
        self.assertLessEqual(residuals.mixed, 1e-10)
        self.assertLessEqual(residuals.annihilators, 1e-10)

    def test_species_commute(self):
        rng = np.random.default_rng(8)
        for n1, n2 in ((0, 0), (1, 2), (3, 1)):
            state = random_sector(rng, 3, n1, n2)
            residual = species_commutator_residual(random_vector(rng, 3), random_vector(rng, 3), state, 0.5)
            self.assertLessEqual(residual, 1e-12)


class TestStates(unittest.TestCase):

    def test_sector_state_validation(self):
        with self.assertRaises(DimensionError):
            SectorState(2, 1, 1, np.ones(3))
        with self.assertRaises(NumericalError):
            SectorState(2, 1, 1, np.ones(4), normalized=True)
        state = SectorState(2, 1, 1, np.arange(4.0))
        self.assertEqual(state.matrix.shape, (2, 2))
        self.assertAlmostEqual(state.normalize().norm_sq, 1.0)

    def test_vacuum_amplitude(self):
        f = np.array([1.0, 0.0])
        state = coherent_state(f, np.zeros(2), (6, 0))
        self.assertAlmostEqual(state.sectors[(0, 0)].coefficients[0].real, math.exp(-0.5), places=12)

    def test_zero_amplitude_is_vacuum(self):
        state = coherent_state(np.zeros(2), np.zeros(2), (3, 3))
        self.assertEqual(state.deficit, 0.0)
        self.assertEqual(state.sectors[(0, 0)].coefficients[0], 1.0)
        self.assertEqual(number_expectation(state, "species1"), 0.0)
        self.assertEqual(number_expectation(state, "product"), 0.0)

    def test_poisson_sector_masses(self):
        f = np.array([1.0, 1.0j])
        state = coherent_state(f, np.zeros(2), (12, 0))
        self.assertAlmostEqual(state.sectors[(2, 0)].norm_sq, 2 * math.exp(-2), places=12)

    def test_deficit_matches_poisson_tail(self):
        rng = np.random.default_rng(4)
        h_d = 0.5
        f = random_vector(rng, 2)
        g = random_vector(rng, 2)
        mean1 = h_d * np.vdot(f, f).real
        mean2 = h_d * np.vdot(g, g).real
        for cutoffs in ((2, 3), (5, 5), (9, 7)):
            state = coherent_state(f, g, cutoffs, h_d)
            self.assertAlmostEqual(state.deficit, poisson_tail_deficit(mean1, mean2, cutoffs), delta=1e-12)

    def test_deficit_flag(self):
        f = np.array([2.0, 0.0])
        flagged = coherent_state(f, np.zeros(2), (2, 0), deficit_bound=1e-6)
        self.assertTrue(flagged.deficit_warning)
        self.assertFalse(coherent_state(f, np.zeros(2), (30, 0), deficit_bound=1e-6).deficit_warning)

    def test_number_expectation(self):
        u = np.array([1.0, 1.0]) / math.sqrt(2)
        coherent = coherent_state(u, u, (20, 20))
        self.assertAlmostEqual(number_expectation(coherent, "species1"), 1.0, places=10)
        sector = TruncatedFockState.from_sector(random_sector(np.random.default_rng(0), 2, 3, 2))
        self.assertAlmostEqual(number_expectation(sector, "species1"), 3.0)
        self.assertAlmostEqual(number_expectation(sector, "species2"), 2.0)
        self.assertAlmostEqual(number_expectation(sector, "product"), 6.0)
        with self.assertRaises(ValueError):
            number_expectation(sector, "total")

    def test_product_state(self):
        rng = np.random.default_rng(6)
        h_d = 0.5
        u = random_vector(rng, 3)
        v = random_vector(rng, 3)
        u /= math.sqrt(h_d) * np.linalg.norm(u)
        v /= math.sqrt(h_d) * np.linalg.norm(v)
        single = product_state(u, v, 1, 1, h_d)
        np.testing.assert_allclose(single.coefficients, h_d * np.outer(u, v).ravel(), atol=1e-14)
        many = product_state(u, v, 3, 2, h_d)
        self.assertAlmostEqual(many.norm_sq, 1.0, places=12)
        self.assertTrue(many.normalized)


class TestDisplacements(unittest.TestCase):

    def test_number_bounds_hold(self):
        rng = np.random.default_rng(10)
        f, g = random_vector(rng, 2), random_vector(rng, 2)
        coherent = coherent_state(f, g, (6, 6), 0.5)
        slacks = check_number_bounds(random_vector(rng, 2), random_vector(rng, 2), coherent, 0.5)
        self.assertEqual(set(slacks), {"b_star", "c_star", "b", "c"})
        self.assertGreaterEqual(min(slacks.values()), -1e-10)
        for trial in range(200):
            M = int(rng.integers(1, 4))
            state = random_truncated_state(rng, M, (int(rng.integers(0, 5)), int(rng.integers(0, 5))))
            h_d = float(rng.uniform(0.2, 1.5))
            slacks = check_number_bounds(random_vector(rng, M), random_vector(rng, M), state, h_d)
            for key, value in slacks.items():
                self.assertGreaterEqual(value, -1e-10, msg=f"trial {trial}: {key}")

    def test_moments_vanish_in_own_frame(self):
        u = np.array([0.6, 0.8])
        v = np.array([1.0, 0.0])
        state = coherent_state(math.sqrt(2) * u, math.sqrt(2) * v, (25, 25))
        moments = displaced_number_moments(state, math.sqrt(2) * u, math.sqrt(2) * v)
        for value in moments:
            self.assertLess(abs(value), 1e-9)

    def test_weyl_composition(self):
        f = np.array([1.0, 0.5])
        f_shift = np.array([0.2, -0.5j])
        g = np.array([0.3, 0.3])
        errors = weyl_displacement_check(f, f_shift, g, g, (25, 25), cell_volume=1.0)
        self.assertLess(errors[0], 1e-9)
        self.assertLess(errors[1], 1e-9)

    def test_single_sector_moments(self):
        state = TruncatedFockState.from_sector(random_sector(np.random.default_rng(3), 2, 2, 1))
        u = np.array([1.0, 0.0])
        m10, m01, m11 = displaced_number_moments(state, 2.0 * u, u)
        self.assertAlmostEqual(m10, 2 + 4)
        self.assertAlmostEqual(m01, 1 + 1)
        self.assertAlmostEqual(m11, 6 * 2)


if __name__ == "__main__":
    unittest.main()

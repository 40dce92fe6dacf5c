import unittest
import sys
from pathlib import Path

import numpy as np

# --- Adjust path to import modules from src ---
repo_root = Path(__file__).resolve().parent.parent.parent
src_root = repo_root / "src"
if str(src_root) not in sys.path:
    sys.path.insert(0, str(src_root))

from mixbec.modules.Errors import ConfigError, DimensionError
from mixbec.modules.Lattice import (LatticeModel, PotentialKind, PotentialSpec, build_laplacian,
                                    evaluate_potential, make_orbital, minimal_image_distances,
                                    sample_potential, site_coordinates)


def gaussian(g=1.0, sigma=1.0):
    return PotentialSpec(PotentialKind.GAUSSIAN, g, sigma)


class TestBuildLaplacian(unittest.TestCase):

    def test_four_sites(self):
        lap = build_laplacian(1, 4, 1.0)
        expected = np.array([[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]], dtype=float)
        np.testing.assert_array_equal(lap, expected)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(lap)), [0, 2, 2, 4], atol=1e-12)

    def test_two_sites_half_spacing(self):
        lap = build_laplacian(1, 2, 0.5)
        np.testing.assert_allclose(lap, [[8.0, -8.0], [-8.0, 8.0]])

    def test_row_sums_vanish(self):
        for d, L in ((1, 2), (1, 5), (2, 3), (3, 2)):
            with self.subTest(d=d, L=L):
                lap = build_laplacian(d, L, 0.7)
                self.assertEqual(lap.shape, (L ** d, L ** d))
                np.testing.assert_allclose(lap.sum(axis=1), 0.0, atol=1e-12)
                np.testing.assert_array_equal(lap, lap.T)

    def test_positive_semidefinite(self):
        lap = build_laplacian(2, 3, 1.0)
        rng = np.random.default_rng(7)
        for _ in range(1000):
            psi = rng.standard_normal(9)
            self.assertGreaterEqual(psi @ lap @ psi, -1e-12 * (psi @ psi))

    def test_kronecker_sum_spectrum(self):
        lap = build_laplacian(2, 4, 1.0)
        one_d = 2 - 2 * np.cos(2 * np.pi * np.arange(4) / 4)
        expected = np.sort(np.add.outer(one_d, one_d).ravel())
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(lap)), expected, atol=1e-12)

    def test_rejects_bad_geometry(self):
        with self.assertRaises(ConfigError):
            build_laplacian(1, 1, 1.0)
        with self.assertRaises(ConfigError):
            build_laplacian(1, 4, 0.0)
        with self.assertRaises(ConfigError):
            build_laplacian(4, 2, 1.0)


class TestPotentials(unittest.TestCase):

    def test_point_values(self):
        r = np.array([0.0])
        self.assertAlmostEqual(evaluate_potential(gaussian(2.0, 1.0), r, 1.0, 1)[0], 2.0)
        soft = PotentialSpec(PotentialKind.SOFT_COULOMB, 1.0, 1.0)
        self.assertAlmostEqual(evaluate_potential(soft, r, 1.0, 1)[0], 1.0)
        yukawa = PotentialSpec(PotentialKind.YUKAWA, 1.0, 1.0)
        self.assertAlmostEqual(evaluate_potential(yukawa, r, 1.0, 1)[0], np.exp(-0.5) / 0.5)
        contact = PotentialSpec(PotentialKind.CONTACT, 3.0)
        np.testing.assert_allclose(evaluate_potential(contact, np.array([0.0, 0.5]), 0.5, 2), [12.0, 0.0])

    def test_zero_kind(self):
        np.testing.assert_array_equal(sample_potential(PotentialSpec.zero(), 1, 4, 1.0), np.zeros((4, 4)))

    def test_symmetry_and_shift_invariance(self):
        d, L = 2, 3
        V = sample_potential(PotentialSpec(PotentialKind.SOFT_COULOMB, -1.0, 0.5), d, L, 1.0)
        np.testing.assert_array_equal(V, V.T)
        coords = site_coordinates(d, L)
        index = {tuple(c): i for i, c in enumerate(coords)}
        for shift in ((1, 0), (0, 2), (2, 1)):
            moved = [index[tuple((c + shift) % L)] for c in coords]
            np.testing.assert_array_equal(V[np.ix_(moved, moved)], V)

    def test_minimal_image(self):
        r = minimal_image_distances(1, 5, 1.0)
        self.assertEqual(r[0, 4], 1.0)
        self.assertEqual(r[0, 2], 2.0)

    def test_spec_validation(self):
        with self.assertRaises(ConfigError):
            PotentialSpec(PotentialKind.GAUSSIAN, 1.0, 0.0)
        with self.assertRaises(ConfigError):
            PotentialSpec.from_dict({"kind": "lennard_jones", "strength": 1.0})
        spec = PotentialSpec.from_dict({"kind": "yukawa", "strength": -2, "range": 1.5})
        self.assertEqual(spec.to_dict(), {"kind": "yukawa", "strength": -2.0, "range": 1.5})


class TestLatticeModel(unittest.TestCase):

    def setUp(self):
        self.model = LatticeModel(1, 4, 0.5, gaussian(), gaussian(-1.0), PotentialSpec.zero())

    def test_geometry(self):
        self.assertEqual(self.model.total_sites, 4)
        self.assertAlmostEqual(self.model.cell_volume, 0.5)
        with self.assertRaises(ValueError):
            self.model.laplacian[0, 0] = 1.0

    def test_single_mode(self):
        model = LatticeModel.single_mode(gaussian(), PotentialSpec.zero(), PotentialSpec.zero())
        self.assertEqual(model.total_sites, 1)
        np.testing.assert_array_equal(model.laplacian, [[0.0]])
        self.assertEqual(model.v1[0, 0], 1.0)

    def test_mode_conversion(self):
        u = make_orbital(self.model, "gaussian", mode=[1])
        phi = self.model.to_modes(u)
        self.assertAlmostEqual(np.linalg.norm(phi), 1.0)
        np.testing.assert_allclose(self.model.from_modes(phi), u)
        with self.assertRaises(DimensionError):
            self.model.to_modes(np.ones(3))

    def test_fingerprint_stable(self):
        other = LatticeModel(1, 4, 0.5, gaussian(), gaussian(-1.0), PotentialSpec.zero())
        self.assertEqual(self.model.fingerprint, other.fingerprint)
        different = LatticeModel(1, 4, 0.5, gaussian(), gaussian(), PotentialSpec.zero())
        self.assertNotEqual(self.model.fingerprint, different.fingerprint)

    def test_plane_wave_energies(self):
        for L, h in ((2, 1.0), (4, 0.5), (5, 1.0)):
            model = LatticeModel(1, L, h, PotentialSpec.zero(), PotentialSpec.zero(), PotentialSpec.zero())
            np.testing.assert_allclose(np.sort(model.plane_wave_energies()), model.kinetic_eigensystem[0],
                                       atol=1e-12)

    def test_convolution_weight(self):
        rho = np.ones(4)
        np.testing.assert_allclose(self.model.convolve(self.model.v1, rho), 0.5 * self.model.v1.sum(axis=1))


class TestMakeOrbital(unittest.TestCase):

    def setUp(self):
        self.model = LatticeModel(2, 3, 0.5, PotentialSpec.zero(), PotentialSpec.zero(), PotentialSpec.zero())

    def test_kinds_are_normalized(self):
        rng = np.random.default_rng(3)
        for kind in ("plane_wave", "gaussian", "cosine", "random"):
            with self.subTest(kind=kind):
                u = make_orbital(self.model, kind, mode=[1, 0], rng=rng)
                self.assertAlmostEqual(self.model.weighted_norm_sq(u), 1.0, places=12)

    def test_random_is_seeded(self):
        a = make_orbital(self.model, "random", rng=np.random.default_rng(11))
        b = make_orbital(self.model, "random", rng=np.random.default_rng(11))
        np.testing.assert_array_equal(a, b)

    def test_plane_wave_is_laplacian_eigenvector(self):
        model = LatticeModel(1, 4, 1.0, PotentialSpec.zero(), PotentialSpec.zero(), PotentialSpec.zero())
        u = make_orbital(model, "plane_wave", mode=[1])
        np.testing.assert_allclose(model.laplacian @ u, 2.0 * u, atol=1e-12)

    def test_unknown_kind(self):
        with self.assertRaises(ConfigError):
            make_orbital(self.model, "sawtooth")

    def test_center_must_match_dimension(self):
        for center in ([1.0], [1.0, 1.0, 1.0]):
            with self.subTest(center=center):
                with self.assertRaises(ConfigError) as ctx:
                    make_orbital(self.model, "gaussian", center=center)
                self.assertEqual(ctx.exception.key, "orbitals.center")
        u = make_orbital(self.model, "gaussian", center=[0.0, 2.0])
        self.assertAlmostEqual(self.model.weighted_norm_sq(u), 1.0, places=12)


if __name__ == "__main__":
    unittest.main()

import os
import shutil
import tempfile
import unittest
import sys
from pathlib import Path

import numpy as np

# --- Adjust path to import modules from src ---
repo_root = Path(__file__).resolve().parent.parent.parent
src_root = repo_root / "src"
if str(src_root) not in sys.path:
    sys.path.insert(0, str(src_root))

from mixbec.modules.Errors import ConfigError, DimensionError, NonFiniteStateError
from mixbec.modules.FileHandler import FileHandler
from mixbec.modules.Hartree import (HartreeState, energy, evolve, free_propagator, hartree_orbit, hartree_rhs,
                                    mass, step_strang, write_trajectory)
from mixbec.modules.Lattice import LatticeModel, PotentialKind, PotentialSpec, make_orbital
from mixbec.modules.RunConfig import CouplingConstants

HALF = CouplingConstants(0.5, 0.5)
ZERO = PotentialSpec.zero()


def gaussian(g=1.0):
    return PotentialSpec(PotentialKind.GAUSSIAN, g, 1.0)


def free_model(L=4, h=1.0):
    return LatticeModel(1, L, h, ZERO, ZERO, ZERO)


def interacting_model():
    return LatticeModel(1, 4, 1.0, gaussian(), gaussian(), gaussian())


def gaussian_state(model):
    return HartreeState(make_orbital(model, "gaussian", mode=[1]),
                        make_orbital(model, "gaussian", mode=[0], width=0.8))


def smooth_state(model):
    return HartreeState(make_orbital(model, "cosine", mode=[1]), make_orbital(model, "cosine", mode=[1], amplitude=-0.2))


class TestHartreeRhs(unittest.TestCase):

    def test_free_eigenvector(self):
        model = free_model()
        u = make_orbital(model, "plane_wave", mode=[1])
        du, dv = hartree_rhs(HartreeState(u, u), model, HALF)
        np.testing.assert_allclose(du, -2j * u, atol=1e-12)

    def test_single_site_phase(self):
        model = LatticeModel.single_mode(gaussian(), ZERO, ZERO)
        one = np.ones(1, dtype=complex)
        du, dv = hartree_rhs(HartreeState(one, one), model, HALF)
        np.testing.assert_allclose(du, -1j * one)
        np.testing.assert_allclose(dv, 0.0)

    def test_swap_symmetry(self):
        model = interacting_model()
        u = make_orbital(model, "gaussian", mode=[1])
        du, dv = hartree_rhs(HartreeState(u, u), model, HALF)
        np.testing.assert_allclose(du, dv, atol=1e-14)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            hartree_rhs(HartreeState(np.ones(3), np.ones(4)), free_model(), HALF)


class TestStrangStep(unittest.TestCase):

    def test_free_step_is_exact(self):
        model = free_model()
        state = gaussian_state(model)
        out = step_strang(state, model, HALF, 0.3)
        propagator = free_propagator(model, 0.3)
        np.testing.assert_allclose(out.u, propagator @ state.u, atol=1e-13)
        np.testing.assert_allclose(out.v, propagator @ state.v, atol=1e-13)
        self.assertAlmostEqual(out.t, 0.3)

    def test_plane_wave_phase(self):
        model = free_model()
        for k in range(4):
            u = make_orbital(model, "plane_wave", mode=[k])
            eps = 2 - 2 * np.cos(2 * np.pi * k / 4)
            out = step_strang(HartreeState(u, u), model, HALF, 0.1)
            np.testing.assert_allclose(out.u, np.exp(-0.1j * eps) * u, atol=1e-13)

    def test_single_site(self):
        model = LatticeModel.single_mode(gaussian(), ZERO, ZERO)
        one = np.ones(1, dtype=complex)
        out = step_strang(HartreeState(one, one), model, HALF, 0.01)
        np.testing.assert_allclose(out.u, np.exp(-0.01j) * one, atol=1e-15)
        np.testing.assert_allclose(out.v, one)

    def test_norm_preserved_per_step(self):
        model = interacting_model()
        state = gaussian_state(model)
        for dt in (1e-3, 0.05, 0.1):
            before = mass(state, model)
            after = mass(step_strang(state, model, HALF, dt), model)
            self.assertLessEqual(abs(after[0] - before[0]), 1e-12)
            self.assertLessEqual(abs(after[1] - before[1]), 1e-12)

    def test_local_error_is_third_order(self):
        model = interacting_model()
        state = gaussian_state(model)

        def local_error(dt):
            reference = state
            for _ in range(256):
                reference = step_strang(reference, model, HALF, dt / 256)
            one = step_strang(state, model, HALF, dt)
            return np.linalg.norm(one.u - reference.u) + np.linalg.norm(one.v - reference.v)

        ratio = local_error(0.05) / local_error(0.025)
        self.assertGreater(ratio, 6.5)
        self.assertLess(ratio, 9.5)

    def test_rejects_nonpositive_dt(self):
        model = free_model()
        with self.assertRaises(ConfigError):
            step_strang(gaussian_state(model), model, HALF, 0.0)


class TestEvolve(unittest.TestCase):

    def test_free_evolution_matches_exact(self):
        model = free_model()
        state = gaussian_state(model)
        trajectory = evolve(state, model, HALF, 1.0, 1e-2, stride=10)
        propagator = free_propagator(model, 1.0)
        self.assertAlmostEqual(trajectory.final.t, 1.0)
        self.assertLessEqual(np.linalg.norm(trajectory.final.u - propagator @ state.u), 1e-10)
        self.assertLessEqual(np.linalg.norm(trajectory.final.v - propagator @ state.v), 1e-10)

    def test_trajectory_layout(self):
        model = free_model()
        trajectory = evolve(gaussian_state(model), model, HALF, 0.1, 0.01, stride=3)
        times = trajectory.times
        self.assertEqual(times[0], 0.0)
        self.assertTrue(np.all(np.diff(times) > 0))
        self.assertAlmostEqual(times[-1], 0.1)
        self.assertEqual(len(trajectory.rows()), len(times))

    def test_mass_conserved(self):
        model = interacting_model()
        trajectory = evolve(gaussian_state(model), model, HALF, 1.0, 1e-3, stride=50)
        self.assertLessEqual(trajectory.max_mass_drift(), 1e-9)

    def test_energy_conserved(self):
        model = interacting_model()
        trajectory = evolve(smooth_state(model), model, HALF, 1.0, 1e-3, stride=10)
        self.assertLessEqual(trajectory.max_energy_drift(), 1e-6)

    def test_energy_drift_second_order(self):
        model = interacting_model()
        state = smooth_state(model)
        coarse = evolve(state, model, HALF, 1.0, 0.02).max_energy_drift()
        fine = evolve(state, model, HALF, 1.0, 0.01).max_energy_drift()
        self.assertGreaterEqual(coarse / fine, 3.5)
        self.assertLess(coarse / fine, 5.0)

    def test_time_reversal(self):
        model = interacting_model()
        state = gaussian_state(model)
        forward = evolve(state, model, HALF, 0.5, 1e-3, stride=500).final.conjugate()
        back = evolve(HartreeState(forward.u, forward.v), model, HALF, 0.5, 1e-3, stride=500).final.conjugate()
        self.assertLessEqual(np.linalg.norm(back.u - state.u), 1e-6)
        self.assertLessEqual(np.linalg.norm(back.v - state.v), 1e-6)

    def test_gauge_covariance(self):
        model = interacting_model()
        state = gaussian_state(model)
        phase = np.exp(0.7j)
        plain = evolve(state, model, HALF, 0.2, 1e-2).final
        rotated = evolve(HartreeState(phase * state.u, state.v), model, HALF, 0.2, 1e-2).final
        np.testing.assert_allclose(rotated.u, phase * plain.u, atol=1e-12)
        np.testing.assert_allclose(rotated.v, plain.v, atol=1e-12)
        self.assertAlmostEqual(energy(rotated, model, HALF), energy(plain, model, HALF), places=12)

    def test_non_finite_aborts(self):
        model = free_model()
        u = np.array([np.nan, 0, 0, 0], dtype=complex)
        with self.assertRaises(NonFiniteStateError) as ctx:
            evolve(HartreeState(u, u), model, HALF, 0.1, 0.01)
        self.assertEqual(ctx.exception.step_index, 1)

    def test_orbit_hits_sample_times(self):
        model = interacting_model()
        state = gaussian_state(model)
        orbit = hartree_orbit(state, model, HALF, [0.0, 0.1, 0.25], 0.01)
        self.assertEqual([s.t for s in orbit], [0.0, 0.1, 0.25])
        np.testing.assert_array_equal(orbit[0].u, state.u)
        reference = evolve(state, model, HALF, 0.1, 0.01).final
        np.testing.assert_allclose(orbit[1].u, reference.u, atol=1e-12)


class TestFunctionals(unittest.TestCase):

    def test_free_energy(self):
        model = free_model()
        u = make_orbital(model, "plane_wave", mode=[1])
        v = make_orbital(model, "plane_wave", mode=[2])
        couplings = CouplingConstants(0.25, 0.75)
        self.assertAlmostEqual(energy(HartreeState(u, v), model, couplings), 0.25 * 2 + 0.75 * 4)

    def test_single_site_energy(self):
        model = LatticeModel.single_mode(gaussian(1.0), gaussian(2.0), gaussian(3.0))
        one = np.ones(1, dtype=complex)
        self.assertAlmostEqual(energy(HartreeState(one, one), model, HALF), 1 / 4 + 2 / 4 + 3 / 4)

    def test_mass(self):
        model = free_model(h=0.5)
        u = make_orbital(model, "gaussian")
        self.assertEqual(tuple(round(m, 12) for m in mass(HartreeState(u, u), model)), (1.0, 1.0))
        self.assertEqual(tuple(round(m, 12) for m in mass(HartreeState(2 * u, u), model)), (4.0, 1.0))


class TestTrajectoryExport(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_csv_and_snapshots(self):
        model = free_model()
        trajectory = evolve(gaussian_state(model), model, HALF, 0.05, 0.01)
        csv_path = os.path.join(self.temp_dir, "hartree.csv")
        snap_path = os.path.join(self.temp_dir, "hartree.bin")
        handler = FileHandler()
        write_trajectory(trajectory, csv_path, handler, snap_path)
        with open(csv_path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "t,mass1,mass2,energy")
        self.assertEqual(len(lines), 1 + len(trajectory.states))
        fields, header = handler.read_snapshot(snap_path)
        self.assertEqual(fields.shape, (len(trajectory.states), 2, 4))


if __name__ == "__main__":
    unittest.main()

"""
Tests for forward diagnostics.

Tests mass and energy of simple states and the diagnostics file.
"""

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from apps.dg_space.space import DGSpace
from apps.mesh_core.generators import rectangle_mesh
from apps.swe_forward.bathymetry import Bathymetry
from apps.swe_forward.diagnostics import (
    DIAGNOSTICS_COLUMNS,
    DIAGNOSTICS_HEADER,
    energy,
    mass,
    trajectory_diagnostics,
    write_diagnostics,
)
from apps.swe_forward.params import SWEParams
from apps.swe_forward.stepping import solve_forward


class DiagnosticsTest(SimpleTestCase):
    """Test cases for mass, energy and the diagnostics file."""

    def setUp(self):
        """Set up a 2 x 1 basin."""
        self.space = DGSpace(rectangle_mesh(4, 2, width=2.0))
        self.flat = Bathymetry.flat(self.space)

    def test_mass_and_energy_at_rest(self):
        """Test volume and potential energy of depth 1.5 on a flat bed."""
        U = self.space.project(lambda x, y: (1.5, 0.0, 0.0))

        self.assertAlmostEqual(mass(U, self.space), 3.0, places=12)
        self.assertAlmostEqual(energy(U, self.space, self.flat, 9.81), 0.5 * 9.81 * 2.25 * 2.0, 10)

    def test_kinetic_energy(self):
        """Test that unit depth moving at unit speed adds |Q|^2 / 2H per area."""
        U = self.space.project(lambda x, y: (1.0, 1.0, 0.0))

        self.assertAlmostEqual(energy(U, self.space, self.flat, 0.0), 1.0, places=12)

    def test_trajectory_file(self):
        """Test one row per time level and the header of the written file."""
        U0 = self.space.project(lambda x, y: (1.0 + 0.1 * np.exp(-10.0 * (x - 1.0) ** 2), 0, 0))
        trajectory = solve_forward(U0, self.space, SWEParams(), self.flat, 0.02)
        rows = trajectory_diagnostics(trajectory, self.flat, 9.81)

        self.assertEqual(len(rows), trajectory.n_steps + 1)
        self.assertEqual(rows[0].mass_drift, 0.0)
        self.assertLess(abs(rows[-1].mass_drift), 1e-12)

        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "diagnostics.csv"
            write_diagnostics(rows, path)
            lines = path.read_text().splitlines()
            table = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)

        self.assertEqual(lines[0], "# " + DIAGNOSTICS_HEADER)
        self.assertEqual(lines[1], "# " + ",".join(DIAGNOSTICS_COLUMNS))
        self.assertEqual(table.shape, (len(rows), len(DIAGNOSTICS_COLUMNS)))
        np.testing.assert_allclose(table[:, 1], trajectory.times)

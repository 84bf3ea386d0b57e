"""
Tests for P1 assembly helpers.

Tests stiffness, mass, load, gradients and Dirichlet elimination.
"""

import numpy as np
from django.test import SimpleTestCase
from scipy.sparse.linalg import spsolve

from apps.dg_space import cg
from apps.mesh_core.generators import rectangle_mesh
from apps.mesh_core.mesh import BoundaryTag


class P1AssemblyTest(SimpleTestCase):
    """Test cases for the P1 operators."""

    def setUp(self):
        """Set up a unit-square mesh."""
        self.mesh = rectangle_mesh(5, 5)

    def test_stiffness_annihilates_constants(self):
        """Test that constants are in the stiffness kernel."""
        K = cg.stiffness(self.mesh)

        np.testing.assert_allclose(K @ np.ones(self.mesh.n_vertices), 0.0, atol=1e-12)
        np.testing.assert_allclose((K - K.T).toarray(), 0.0, atol=1e-14)

    def test_mass_total(self):
        """Test that consistent and lumped masses both integrate one to the area."""
        ones = np.ones(self.mesh.n_vertices)

        self.assertAlmostEqual(float(ones @ cg.mass(self.mesh) @ ones), 1.0, places=12)
        self.assertAlmostEqual(float(ones @ cg.mass(self.mesh, lumped=True) @ ones), 1.0, places=12)
        self.assertAlmostEqual(float(cg.load(self.mesh, 2.0).sum()), 2.0, places=12)

    def test_cell_gradients_of_linear_field(self):
        """Test that a linear vertex field has a constant cell gradient."""
        values = 3.0 * self.mesh.vertices[:, 0] - self.mesh.vertices[:, 1]
        gradients = cg.cell_gradients(self.mesh, values)

        np.testing.assert_allclose(gradients, np.tile([3.0, -1.0], (self.mesh.n_triangles, 1)))
        vector = cg.cell_gradients(self.mesh, self.mesh.vertices)
        np.testing.assert_allclose(vector, np.tile(np.eye(2), (self.mesh.n_triangles, 1, 1)))

    def test_dirichlet_linear_solution(self):
        """Test that a Laplace solve with linear boundary data is exact."""
        boundary = self.mesh.boundary_vertices(BoundaryTag.SHORE)
        exact = 1.0 + self.mesh.vertices[:, 0] + 2.0 * self.mesh.vertices[:, 1]
        K, rhs = cg.apply_dirichlet(
            cg.stiffness(self.mesh), np.zeros(self.mesh.n_vertices), boundary, exact[boundary]
        )

        np.testing.assert_allclose(spsolve(K, rhs), exact, atol=1e-12)
        np.testing.assert_allclose((K - K.T).toarray(), 0.0, atol=1e-14)

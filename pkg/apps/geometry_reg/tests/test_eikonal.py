"""
Tests for the viscous Eikonal distance.

Tests convergence, boundary data and agreement with the exact distance on
the unit disk.
"""

import numpy as np
from django.test import SimpleTestCase

from apps.dg_space import cg
from apps.geometry_reg.eikonal import eikonal_solve
from apps.geometry_reg.exceptions import EikonalError
from apps.mesh_core.generators import disk_mesh, half_disk_mesh

H = 0.1


class EikonalDiskTest(SimpleTestCase):
    """Test cases for eikonal_solve on the unit disk."""

    @classmethod
    def setUpClass(cls):
        """Set up one Eikonal solve shared by every test."""
        super().setUpClass()
        cls.mesh = disk_mesh(radius=1.0, h=H)
        cls.distance = eikonal_solve(cls.mesh)
        cls.exact = 1.0 - np.linalg.norm(cls.mesh.vertices, axis=1)

    def test_converged(self):
        """Test that Newton reached the residual tolerance."""
        self.assertLessEqual(self.distance.residual, 1e-8)
        self.assertLessEqual(self.distance.iterations, 50)
        self.assertEqual(self.distance.epsilon, float(self.mesh.geometry.diameters.max()))

    def test_zero_on_boundary(self):
        """Test that the boundary values are exactly zero."""
        boundary = self.mesh.boundary_vertices()
        np.testing.assert_array_equal(self.distance.values[boundary], 0.0)

    def test_close_to_distance(self):
        """Test that the solution tracks the distance away from the centre."""
        values = self.distance.values
        self.assertTrue(np.all(values <= self.exact + 2.0 * H))
        near = self.exact <= 0.5
        self.assertLessEqual(np.max(np.abs(values[near] - self.exact[near])), 2.5 * H)

    def test_gradient_near_one(self):
        """Test that |grad w| is close to one in a band off the boundary."""
        d = 1.0 - np.linalg.norm(self.mesh.geometry.centroids, axis=1)
        band = (d >= 2.0 * H) & (d <= 0.4)
        norms = self.distance.gradient_norms[band]

        self.assertTrue(np.all(norms >= 0.7))
        self.assertTrue(np.all(norms <= 1.1))

    def test_point_evaluation(self):
        """Test interpolation at vertices and the exact fallback outside the mesh."""
        vertices = self.mesh.vertices[:40]
        np.testing.assert_allclose(
            self.distance.signed_distance(vertices), self.distance.values[:40], atol=1e-10
        )
        self.assertAlmostEqual(float(self.distance.signed_distance([(0.0, 1.5)])[0]), -0.5)

    def test_point_evaluation_is_linear_in_cells(self):
        """Test that evaluation at a centroid is the mean of the cell's vertex values."""
        cell = 7
        centroid = self.mesh.geometry.centroids[cell]
        expected = self.distance.values[self.mesh.triangles[cell]].mean()

        self.assertAlmostEqual(float(self.distance.signed_distance(centroid)[0]), expected)

    def test_discrete_equation_holds(self):
        """Test the interior residual of the discrete Eikonal equation."""
        w = self.distance.values
        norms = np.sqrt(
            np.sum(cg.cell_gradients(self.mesh, w) ** 2, axis=1) + 1e-16
        )
        residual = (
            self.distance.epsilon * (cg.stiffness(self.mesh) @ w)
            + cg.load(self.mesh, norms)
            - cg.load(self.mesh, 1.0)
        )
        residual[self.mesh.boundary_vertices()] = 0.0
        load = np.linalg.norm(cg.load(self.mesh, 1.0))
        self.assertLessEqual(np.linalg.norm(residual) / load, 1e-7)


class EikonalObstacleTest(SimpleTestCase):
    """Test cases for eikonal_solve with an obstacle hole."""

    def test_half_disk(self):
        """Test convergence and positivity away from the boundary on the scenario mesh."""
        mesh = half_disk_mesh(h=0.3, n_obstacle=32)
        distance = eikonal_solve(mesh)

        np.testing.assert_array_equal(distance.values[mesh.boundary_vertices()], 0.0)
        self.assertGreater(float(distance.signed_distance([(1.2, 1.0)])[0]), 0.0)

    def test_iteration_limit(self):
        """Test that running out of Newton steps raises EikonalError."""
        with self.assertRaises(EikonalError):
            eikonal_solve(disk_mesh(radius=1.0, h=0.25), tol=1e-30, max_iterations=1)
